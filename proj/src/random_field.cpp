#include <cmath>
#include <numbers>

#include "zklab/random_data.hpp"

namespace zk {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t mix3(std::uint64_t a, std::uint64_t b, std::uint64_t c) {
    std::uint64_t s = splitmix64(a);
    s = splitmix64(s ^ b);
    s = splitmix64(s ^ c);
    return s;
}

// Uniform in (0,1], never exactly 0 so the log below is finite.
double to_unit(std::uint64_t bits) {
    return (static_cast<double>(bits >> 11) + 1.0) * 0x1.0p-53;
}

}  // namespace

std::pair<double, double> gaussian_pair(const SeededGaussianSource& src,
                                        std::uint64_t orbit_id) {
    const std::uint64_t s0 = mix3(src.master_seed, src.member_index, orbit_id);
    const std::uint64_t s1 = splitmix64(s0);
    const double u1 = to_unit(s0);
    const double u2 = to_unit(s1);
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    return {r * std::cos(theta), r * std::sin(theta)};
}

SpectralField sample_initial_data(const std::vector<double>& n_in,
                                  const BallIndex& ball,
                                  const SeededGaussianSource& source,
                                  const SamplingOptions& opts) {
    SpectralField f(ball);
    const double inv_sqrt2 = std::numbers::sqrt2 / 2.0;
    for (std::size_t i = 0; i < ball.size(); ++i) {
        const IntVec& K = ball.at(i);
        const IntVec nK = -K;
        if (nK < K) continue;  // handled from the orbit representative
        const double amp = std::sqrt(n_in[i]);
        if (K == nK) {
            // Self-conjugate mode: real with variance 1.
            if (K.is_zero() && opts.zero_mean_mode) {
                f[i] = 0.0;
                continue;
            }
            auto [g, _] = gaussian_pair(source, K.pack());
            f[i] = amp * g;
            continue;
        }
        auto [g1, g2] = gaussian_pair(source, K.pack());
        const std::complex<double> eta(g1 * inv_sqrt2, g2 * inv_sqrt2);
        f[i] = amp * eta;
        const auto j = ball.find(nK);
        if (j >= 0) f[static_cast<std::size_t>(j)] = std::conj(f[i]);
    }
    return f;
}

SpectralField sample_initial_data(const SpectrumProfile& profile,
                                  const BallIndex& ball,
                                  const SeededGaussianSource& source,
                                  const SamplingOptions& opts) {
    return sample_initial_data(tabulate(profile, ball), ball, source, opts);
}

}  // namespace zk
