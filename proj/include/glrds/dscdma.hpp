#pragma once

// Synchronous DS-CDMA uplink seen through a J-element half-wavelength
// antenna array. Each observation stacks, per antenna, the N + L_p - 1 chip
// samples that carry one symbol interval and its multipath tail, so
// M = J (N + L_p - 1) with index m = antenna * (N + L_p - 1) + chip.
//
//   r[i] = sum_k A_k x_k[i] p_k[i] + eta[i] + j[i] + n[i],   p_k[i] = F_k h_k[i]

#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

#include "glrds/types.hpp"

namespace glrds {

using Rng = std::mt19937_64;

struct SystemGeometry {
    std::size_t users = 8;            // K
    std::size_t spreading_gain = 16;  // N
    std::size_t antennas = 3;         // J
    std::size_t channel_length = 10;  // L_p

    [[nodiscard]] std::size_t block() const { return spreading_gain + channel_length - 1; }
    [[nodiscard]] std::size_t dim() const { return antennas * block(); }
    void validate() const;
};

struct UserSignature {
    RVec chips;  // entries +-1/sqrt(N)
    double amplitude = 1.0;
};

std::vector<UserSignature> generate_signatures(std::size_t users, std::size_t spreading_gain,
                                               Rng& rng);

/// M x J L_p block-diagonal matrix; each antenna block is the
/// (N + L_p - 1) x L_p convolution matrix of the chips.
RMat build_convolution_matrix(const UserSignature& signature, const SystemGeometry& geometry);

/// Sum of equal-power complex sinusoids with Doppler shifts f_d cos(alpha_n),
/// alpha_n evenly spaced around the circle with a random rotation, and random
/// phases. Unit average power; autocorrelation approximately J0(2 pi f_d m).
class ClarkeFading {
public:
    ClarkeFading(double doppler, std::size_t sinusoids, Rng& rng);

    /// Gain at symbol index i.
    [[nodiscard]] cd gain(std::size_t i) const;
    [[nodiscard]] double doppler() const { return doppler_; }

private:
    double doppler_;
    std::vector<double> shifts_;  // cycles per symbol
    std::vector<double> phases_;
};

struct PathSpec {
    std::size_t delay = 0;  // chips
    double power = 1.0;     // linear, profile normalised to unit sum
    double doa = 0.0;       // radians in [0, pi)
};

struct ChannelProfile {
    std::vector<double> powers_db{0.0, -3.0, -6.0};
    std::size_t min_spacing = 1;
    std::size_t max_spacing = 2;
    double doppler = 1e-4;  // normalised f_d T
    std::size_t sinusoids = 32;
    bool fading = true;  // false: deterministic gains sqrt(power)
};

class MultipathChannel {
public:
    MultipathChannel(const SystemGeometry& geometry, const ChannelProfile& profile, Rng& rng);

    [[nodiscard]] const std::vector<PathSpec>& paths() const { return paths_; }
    /// Complex path gains at symbol i, each with E|g|^2 equal to its power.
    [[nodiscard]] std::vector<cd> path_gains(std::size_t i) const;
    /// h_k[i]: J L_p taps, antenna-major, total expected energy one.
    [[nodiscard]] CVec taps(std::size_t i) const;

private:
    std::size_t antennas_;
    std::size_t length_;
    bool fading_;
    std::vector<PathSpec> paths_;
    std::vector<ClarkeFading> fades_;
};

/// Path gains of `channel` at symbol index i.
std::vector<cd> clarke_fading_step(const MultipathChannel& channel, std::size_t i);

/// Linear powers whose dB values are N(0, std_db^2).
std::vector<double> draw_user_powers(std::size_t users, double std_db, Rng& rng);

/// Gray mapping: bit 1 selects the real sign, bit 0 the imaginary sign;
/// 0b00 -> (1 + i)/sqrt(2).
cd qpsk_modulate(unsigned bits);
unsigned qpsk_bits(cd symbol);
cd qpsk_decide(cd estimate);
CVec qpsk_decide(const CVec& estimates);
/// Number of differing bits between two QPSK symbols' hard decisions.
unsigned qpsk_bit_errors(cd decided, cd reference);

struct ScenarioConfig {
    SystemGeometry geometry;
    ChannelProfile channel;
    double snr_db = 12.0;           // mean per-user symbol SNR
    double power_std_db = 1.5;      // log-normal user power spread
    bool jammer = true;
    double jammer_offset_db = 20.0; // jammer-to-noise per sample is snr_db + offset
    bool jammer_doa = false;        // array-structured jammer instead of random per-antenna phases
    bool noise = true;
    bool isi = false;               // tails of the previous and next symbols
};

class Scenario {
public:
    Scenario(const ScenarioConfig& config, std::uint64_t seed);

    [[nodiscard]] const ScenarioConfig& config() const { return config_; }
    [[nodiscard]] std::size_t dim() const { return config_.geometry.dim(); }
    [[nodiscard]] double noise_variance() const { return noise_var_; }
    /// Jammer power per sample.
    [[nodiscard]] double jammer_power() const { return jammer_power_; }
    [[nodiscard]] const std::vector<UserSignature>& users() const { return users_; }
    [[nodiscard]] const std::vector<MultipathChannel>& channels() const { return channels_; }

    /// Effective signature p_k[i] = F_k h_k[i] (length M, before A_k).
    [[nodiscard]] CVec signature_response(std::size_t user, std::size_t i) const;
    [[nodiscard]] CVec jammer_vector(std::size_t i) const;
    CVec noise_vector();

    /// r[i] for the K symbols of interval i. `previous` and `next` are only
    /// read when ISI is enabled and may be empty.
    CVec received_vector(std::size_t i, const CVec& symbols, const CVec& previous = CVec(),
                         const CVec& next = CVec());

    /// Random QPSK symbols for a packet, one K-vector per interval.
    std::vector<CVec> draw_symbols(std::size_t count);

private:
    ScenarioConfig config_;
    Rng rng_;
    std::vector<UserSignature> users_;
    std::vector<RMat> convolution_;
    std::vector<MultipathChannel> channels_;
    double noise_var_ = 1.0;
    double jammer_power_ = 0.0;
    double jammer_freq_ = 0.0;
    std::vector<double> jammer_phase_;
};

}  // namespace glrds
