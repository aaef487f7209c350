#include "zklab/lattice.hpp"

#include <algorithm>

namespace zk {

double dispersion(const WaveVector& k, const AnisotropyCoefficients& beta) {
    if (k.dim != beta.dim) throw std::invalid_argument("dispersion: dim mismatch");
    double s = 0.0;
    for (int i = 0; i < k.dim; ++i)
        s += beta.beta[static_cast<size_t>(i)] * k[i] * k[i];
    return s * k.kx();
}

double resonance_phase(const WaveVector& k1, const WaveVector& k2,
                       const WaveVector& k, const AnisotropyCoefficients& beta) {
    if (k1.dim != k2.dim || k1.dim != k.dim)
        throw std::invalid_argument("resonance_phase: dim mismatch");
    return dispersion(k1, beta) + dispersion(k2, beta) - dispersion(k, beta);
}

WaveVector momentum_defect(const WaveVector& k1, const WaveVector& k2,
                           const WaveVector& k) {
    if (k1.dim != k2.dim || k1.dim != k.dim)
        throw std::invalid_argument("momentum_defect: dim mismatch");
    return k1 + k2 - k;
}

std::vector<IntVec> lattice_ball(const LatticeSpec& spec) {
    // |K| <= radius*L; the bound is an exact integer comparison against
    // floor((radius*L)^2) computed carefully at the boundary.
    const double rl = spec.radius * spec.size;
    const auto rmax = static_cast<std::int64_t>(std::floor(rl));
    // Guard against rl being an exact integer stored just below itself.
    std::int64_t r2 = static_cast<std::int64_t>(std::floor(rl * rl));
    while (static_cast<double>(r2 + 1) <= rl * rl) ++r2;

    std::vector<IntVec> out;
    std::array<std::int32_t, kMaxDim> K{0, 0, 0};
    const int d = spec.dim;
    std::function<void(int, std::int64_t)> rec = [&](int axis, std::int64_t acc) {
        if (axis == d) {
            IntVec v;
            v.dim = d;
            v.c = K;
            out.push_back(v);
            return;
        }
        for (std::int64_t x = -rmax; x <= rmax; ++x) {
            std::int64_t a = acc + x * x;
            if (a > r2) continue;
            K[static_cast<size_t>(axis)] = static_cast<std::int32_t>(x);
            rec(axis + 1, a);
        }
        K[static_cast<size_t>(axis)] = 0;
    };
    rec(0, 0);
    std::sort(out.begin(), out.end());
    return out;
}

BallIndex::BallIndex(const LatticeSpec& spec)
    : spec_(spec), points_(lattice_ball(spec)) {
    lookup_.reserve(points_.size() * 2);
    for (std::size_t i = 0; i < points_.size(); ++i) lookup_[points_[i]] = i;
    neg_.resize(points_.size());
    for (std::size_t i = 0; i < points_.size(); ++i)
        neg_[i] = find(-points_[i]);
}

double hermitian_defect(const SpectralField& f) {
    double worst = 0.0;
    for (std::size_t i = 0; i < f.values.size(); ++i) {
        auto j = f.ball->negation_of(i);
        if (j < 0) continue;
        worst = std::max(worst,
                         std::abs(f.values[static_cast<std::size_t>(j)] -
                                  std::conj(f.values[i])));
    }
    return worst;
}

}  // namespace zk
