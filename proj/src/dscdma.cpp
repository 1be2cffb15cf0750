#include "glrds/dscdma.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace glrds {

namespace {

constexpr double kPi = std::numbers::pi;

double uniform(Rng& rng, double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

}  // namespace

void SystemGeometry::validate() const {
    require(users >= 1, "at least one user is required");
    require(spreading_gain >= 1, "spreading gain must be positive");
    require(antennas >= 1, "at least one antenna is required");
    require(channel_length >= 1, "channel length must be positive");
}

std::vector<UserSignature> generate_signatures(std::size_t users, std::size_t spreading_gain,
                                               Rng& rng) {
    require(users >= 1 && spreading_gain >= 1, "users and spreading gain must be positive");
    const double chip = 1.0 / std::sqrt(static_cast<double>(spreading_gain));
    std::bernoulli_distribution coin(0.5);
    std::vector<UserSignature> out(users);
    for (auto& sig : out) {
        sig.chips.resize(static_cast<Eigen::Index>(spreading_gain));
        for (Eigen::Index n = 0; n < sig.chips.size(); ++n) {
            sig.chips(n) = coin(rng) ? chip : -chip;
        }
    }
    return out;
}

RMat build_convolution_matrix(const UserSignature& signature, const SystemGeometry& geometry) {
    geometry.validate();
    require(static_cast<std::size_t>(signature.chips.size()) == geometry.spreading_gain,
            "signature length does not match the spreading gain");
    const auto N = static_cast<Eigen::Index>(geometry.spreading_gain);
    const auto L = static_cast<Eigen::Index>(geometry.channel_length);
    const auto block = static_cast<Eigen::Index>(geometry.block());
    const auto J = static_cast<Eigen::Index>(geometry.antennas);
    RMat F = RMat::Zero(J * block, J * L);
    for (Eigen::Index a = 0; a < J; ++a) {
        for (Eigen::Index tap = 0; tap < L; ++tap) {
            F.block(a * block + tap, a * L + tap, N, 1) = signature.chips;
        }
    }
    return F;
}

ClarkeFading::ClarkeFading(double doppler, std::size_t sinusoids, Rng& rng) : doppler_(doppler) {
    require(doppler >= 0.0 && std::isfinite(doppler), "Doppler must be non-negative");
    require(sinusoids >= 1, "at least one sinusoid is required");
    const double rotation = uniform(rng, 0.0, 1.0);
    const double n_total = static_cast<double>(sinusoids);
    shifts_.resize(sinusoids);
    phases_.resize(sinusoids);
    for (std::size_t n = 0; n < sinusoids; ++n) {
        const double alpha = 2.0 * kPi * (static_cast<double>(n) + rotation) / n_total;
        shifts_[n] = doppler * std::cos(alpha);
        phases_[n] = uniform(rng, 0.0, 2.0 * kPi);
    }
}

cd ClarkeFading::gain(std::size_t i) const {
    const double t = static_cast<double>(i);
    cd acc = 0.0;
    for (std::size_t n = 0; n < shifts_.size(); ++n) {
        // Reduce the cycle count first so large i keeps full phase precision.
        const double cycles = shifts_[n] * t;
        const double frac = cycles - std::floor(cycles);
        acc += std::polar(1.0, 2.0 * kPi * frac + phases_[n]);
    }
    return acc / std::sqrt(static_cast<double>(shifts_.size()));
}

MultipathChannel::MultipathChannel(const SystemGeometry& geometry, const ChannelProfile& profile,
                                   Rng& rng)
    : antennas_(geometry.antennas), length_(geometry.channel_length), fading_(profile.fading) {
    geometry.validate();
    require(!profile.powers_db.empty(), "channel needs at least one path");
    require(profile.min_spacing >= 1 && profile.min_spacing <= profile.max_spacing,
            "path spacing range is invalid");

    double total = 0.0;
    for (double db : profile.powers_db) {
        total += std::pow(10.0, db / 10.0);
    }
    std::uniform_int_distribution<std::size_t> spacing(profile.min_spacing, profile.max_spacing);
    std::size_t delay = 0;
    for (std::size_t l = 0; l < profile.powers_db.size(); ++l) {
        if (l > 0) {
            delay += spacing(rng);
        }
        if (delay >= length_) {
            throw std::invalid_argument("path delay " + std::to_string(delay) +
                                        " exceeds channel length " + std::to_string(length_));
        }
        PathSpec p;
        p.delay = delay;
        p.power = std::pow(10.0, profile.powers_db[l] / 10.0) / total;
        p.doa = uniform(rng, 0.0, kPi);
        paths_.push_back(p);
        fades_.emplace_back(profile.doppler, profile.sinusoids, rng);
    }
}

std::vector<cd> MultipathChannel::path_gains(std::size_t i) const {
    std::vector<cd> out(paths_.size());
    for (std::size_t l = 0; l < paths_.size(); ++l) {
        const double amp = std::sqrt(paths_[l].power);
        out[l] = fading_ ? amp * fades_[l].gain(i) : cd(amp, 0.0);
    }
    return out;
}

CVec MultipathChannel::taps(std::size_t i) const {
    const auto gains = path_gains(i);
    const double scale = 1.0 / std::sqrt(static_cast<double>(antennas_));
    CVec h = CVec::Zero(static_cast<Eigen::Index>(antennas_ * length_));
    for (std::size_t a = 0; a < antennas_; ++a) {
        for (std::size_t l = 0; l < paths_.size(); ++l) {
            const double phase = kPi * static_cast<double>(a) * std::cos(paths_[l].doa);
            h(static_cast<Eigen::Index>(a * length_ + paths_[l].delay)) +=
                scale * gains[l] * std::polar(1.0, phase);
        }
    }
    return h;
}

std::vector<cd> clarke_fading_step(const MultipathChannel& channel, std::size_t i) {
    return channel.path_gains(i);
}

std::vector<double> draw_user_powers(std::size_t users, double std_db, Rng& rng) {
    require(users >= 1, "at least one user is required");
    require(std_db >= 0.0, "power spread must be non-negative");
    std::vector<double> out(users, 1.0);
    if (std_db == 0.0) {
        return out;
    }
    std::normal_distribution<double> gauss(0.0, std_db);
    for (auto& p : out) {
        p = std::pow(10.0, gauss(rng) / 10.0);
    }
    return out;
}

cd qpsk_modulate(unsigned bits) {
    const double a = 1.0 / std::numbers::sqrt2;
    return {(bits & 2U) ? -a : a, (bits & 1U) ? -a : a};
}

unsigned qpsk_bits(cd symbol) {
    return (symbol.real() < 0.0 ? 2U : 0U) | (symbol.imag() < 0.0 ? 1U : 0U);
}

cd qpsk_decide(cd estimate) { return qpsk_modulate(qpsk_bits(estimate)); }

CVec qpsk_decide(const CVec& estimates) {
    CVec out(estimates.size());
    for (Eigen::Index k = 0; k < estimates.size(); ++k) {
        out(k) = qpsk_decide(estimates(k));
    }
    return out;
}

unsigned qpsk_bit_errors(cd decided, cd reference) {
    const unsigned diff = qpsk_bits(decided) ^ qpsk_bits(reference);
    return (diff & 1U) + ((diff >> 1) & 1U);
}

Scenario::Scenario(const ScenarioConfig& config, std::uint64_t seed) : config_(config) {
    const auto& g = config_.geometry;
    g.validate();
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      0x5eedU};
    rng_.seed(seq);

    users_ = generate_signatures(g.users, g.spreading_gain, rng_);
    const auto powers = draw_user_powers(g.users, config_.power_std_db, rng_);
    for (std::size_t k = 0; k < g.users; ++k) {
        users_[k].amplitude = std::sqrt(powers[k]);
        convolution_.push_back(build_convolution_matrix(users_[k], g));
        channels_.emplace_back(g, config_.channel, rng_);
    }

    noise_var_ = std::pow(10.0, -config_.snr_db / 10.0);
    jammer_power_ = config_.jammer
                        ? noise_var_ * std::pow(10.0, (config_.snr_db + config_.jammer_offset_db) / 10.0)
                        : 0.0;
    jammer_freq_ = uniform(rng_, 0.0, 1.0);
    const double doa = uniform(rng_, 0.0, kPi);
    const double base = uniform(rng_, 0.0, 2.0 * kPi);
    for (std::size_t a = 0; a < g.antennas; ++a) {
        jammer_phase_.push_back(config_.jammer_doa
                                    ? base + kPi * static_cast<double>(a) * std::cos(doa)
                                    : uniform(rng_, 0.0, 2.0 * kPi));
    }
}

CVec Scenario::signature_response(std::size_t user, std::size_t i) const {
    return convolution_.at(user).cast<cd>() * channels_.at(user).taps(i);
}

CVec Scenario::jammer_vector(std::size_t i) const {
    const auto& g = config_.geometry;
    CVec j = CVec::Zero(static_cast<Eigen::Index>(g.dim()));
    if (!config_.jammer) {
        return j;
    }
    const double amp = std::sqrt(jammer_power_);
    const std::size_t block = g.block();
    for (std::size_t a = 0; a < g.antennas; ++a) {
        for (std::size_t c = 0; c < block; ++c) {
            const double cycles = jammer_freq_ * static_cast<double>(i * g.spreading_gain + c);
            const double frac = cycles - std::floor(cycles);
            j(static_cast<Eigen::Index>(a * block + c)) =
                std::polar(amp, 2.0 * kPi * frac + jammer_phase_[a]);
        }
    }
    return j;
}

CVec Scenario::noise_vector() {
    const auto M = static_cast<Eigen::Index>(dim());
    std::normal_distribution<double> gauss(0.0, std::sqrt(noise_var_ / 2.0));
    CVec n(M);
    for (Eigen::Index m = 0; m < M; ++m) {
        const double re = gauss(rng_);
        const double im = gauss(rng_);
        n(m) = cd(re, im);
    }
    return n;
}

CVec Scenario::received_vector(std::size_t i, const CVec& symbols, const CVec& previous,
                               const CVec& next) {
    const auto& g = config_.geometry;
    require(static_cast<std::size_t>(symbols.size()) == g.users, "need one symbol per user");
    const bool isi = config_.isi && previous.size() == symbols.size() && next.size() == symbols.size();
    const auto block = static_cast<Eigen::Index>(g.block());
    const auto N = static_cast<Eigen::Index>(g.spreading_gain);
    const auto tail = block - N;

    CVec r = CVec::Zero(static_cast<Eigen::Index>(g.dim()));
    for (std::size_t k = 0; k < g.users; ++k) {
        const CVec p = signature_response(k, i);
        const double A = users_[k].amplitude;
        const auto kk = static_cast<Eigen::Index>(k);
        r += A * symbols(kk) * p;
        if (isi) {
            for (Eigen::Index a = 0; a < static_cast<Eigen::Index>(g.antennas); ++a) {
                const auto base = a * block;
                // previous symbol: its chips c + N land on chip c here
                r.segment(base, tail) += A * previous(kk) * p.segment(base + N, tail);
                // next symbol starts N chips later
                r.segment(base + N, tail) += A * next(kk) * p.segment(base, tail);
            }
        }
    }
    r += jammer_vector(i);
    if (config_.noise) {
        r += noise_vector();
    }
    return r;
}

std::vector<CVec> Scenario::draw_symbols(std::size_t count) {
    std::uniform_int_distribution<unsigned> bits(0, 3);
    std::vector<CVec> out(count, CVec(static_cast<Eigen::Index>(config_.geometry.users)));
    for (auto& x : out) {
        for (Eigen::Index k = 0; k < x.size(); ++k) {
            x(k) = qpsk_modulate(bits(rng_));
        }
    }
    return out;
}

}  // namespace glrds
