#include "zklab/kinetic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "zklab/counting.hpp"

namespace zk::kinetic {

namespace {

double omega(const WaveVector& k1, const WaveVector& k2, const WaveVector& k) {
    const auto beta = AnisotropyCoefficients::isotropic(k.dim);
    return dispersion(k1, beta) + dispersion(k2, beta) - dispersion(k, beta);
}

// int F(k1) delta(Omega_k(k1)) dk1 with a Gaussian mollifier of width eta,
// over the cube |k1|_inf <= radius.
double gaussian_delta_integral(const WaveVector& k,
                               const std::function<double(const WaveVector&)>& F,
                               double radius, double eta, int grid) {
    const double h = 2.0 * radius / grid;
    const double norm = 1.0 / (std::sqrt(2.0 * std::numbers::pi) * eta);
    double total = 0.0;
    for (int ix = 0; ix < grid; ++ix)
        for (int iy = 0; iy < grid; ++iy)
            for (int iz = 0; iz < grid; ++iz) {
                WaveVector k1;
                k1.dim = 3;
                k1.c = {-radius + (ix + 0.5) * h, -radius + (iy + 0.5) * h,
                        -radius + (iz + 0.5) * h};
                const double Fv = F(k1);
                if (Fv == 0.0) continue;
                const double om = omega(k1, k - k1, k);
                total += Fv * norm * std::exp(-om * om / (2.0 * eta * eta));
            }
    return total * h * h * h;
}

double delta_integral(const WaveVector& k,
                      const std::function<double(const WaveVector&)>& F,
                      double radius, const CollisionQuadrature& quad) {
    if (quad.mollifier == Mollifier::exact_coarea) {
        if (k[0] == 0.0)
            throw std::invalid_argument(
                "collision_operator: exact co-area degenerates at kx = 0; "
                "use the Gaussian mollifier");
        return counting::coarea_delta_integral(k, F, radius, quad.slice_count,
                                               quad.sphere_order);
    }
    return gaussian_delta_integral(k, F, radius, quad.eta, quad.gaussian_grid);
}

}  // namespace

CollisionValue collision_operator(const SpectrumProfile& n, const WaveVector& k,
                                  const CollisionQuadrature& quad) {
    if (k.dim != 3)
        throw std::invalid_argument("collision_operator: d = 3 only");
    CollisionValue out;
    const double kx = k[0];
    if (kx == 0.0) return out;  // both prefactors vanish
    const double nk = n.evaluate(k);
    // Slices must cover both factors' supports: |k1| <= D/2 or
    // |k - k1| <= D/2 both live inside |k1| <= |k| + D/2.
    const double radius = n.diameter / 2.0 + std::sqrt(k.norm2());

    auto gain_f = [&](const WaveVector& k1) {
        const double a = n.evaluate(k1);
        if (a == 0.0) return 0.0;
        return a * n.evaluate(k - k1);
    };
    out.gain = kx * kx * delta_integral(k, gain_f, radius, quad);

    auto loss_f = [&](const WaveVector& k1) {
        const double a = n.evaluate(k1);
        if (a == 0.0) return 0.0;
        return kx * (kx - k1[0]) * a;
    };
    out.loss = 2.0 * nk * delta_integral(k, loss_f, radius, quad);
    return out;
}

double n1_discrete(const SpectrumProfile& profile, const IntVec& K, double t,
                   const ModelParams& params, const BallIndex& ball) {
    const double L = params.L;
    const int d = params.dim;
    const WaveVector k = to_wave(K, L);
    const double kx = k[0];
    if (kx == 0.0) return 0.0;

    const auto n_table = tabulate(profile, ball);
    const double nk = profile.evaluate(k);
    const double lam2 = params.lambda * params.lambda;
    const double scale = std::pow(L, -2.0 * d);

    auto fejer4 = [&](double om) {  // 4 sin^2(t om / 2) / om^2
        if (om == 0.0) return t * t;
        const double s = std::sin(0.5 * t * om);
        return 4.0 * s * s / (om * om);
    };

    double gain = 0.0;
    double loss = 0.0;
    for (std::size_t i = 0; i < ball.size(); ++i) {
        const double n1v = n_table[i];
        const WaveVector k1 = to_wave(ball.at(i), L);
        const WaveVector k2 = k - k1;
        const double om = omega(k1, k2, k);
        if (n1v != 0.0) {
            const auto j = ball.find(K - ball.at(i));
            if (j >= 0) {
                const double n2v = n_table[static_cast<std::size_t>(j)];
                if (n2v != 0.0) gain += n1v * n2v * fejer4(om);
            }
        }
        // Loss: 2 sin^2(t om/2)/om^2 = fejer4 / 2.
        if (n1v != 0.0 && nk != 0.0)
            loss += kx * (kx - k1[0]) * n1v * nk * 0.5 * fejer4(om);
    }
    return 2.0 * lam2 * scale * kx * kx * gain - 8.0 * lam2 * scale * loss;
}

double kinetic_prediction(const SpectrumProfile& profile, const WaveVector& k,
                          double t, const ModelParams& params,
                          const CollisionQuadrature& quad) {
    if (t == 0.0) return 0.0;
    const auto K = collision_operator(profile, k, quad);
    return t / params.t_kin() * K.value();
}

SpectrumComparison compare_spectra(const solver::EnsembleStats& stats,
                                   const SpectrumProfile& profile, double t,
                                   const ModelParams& params,
                                   const CollisionQuadrature& quad) {
    const BallIndex& ball = *stats.ball;
    SpectrumComparison out;
    std::vector<double> zs;
    for (std::size_t i = 0; i < ball.size(); ++i) {
        SpectrumComparisonRow row;
        row.K = ball.at(i);
        row.mc_mean = stats.mean[i];
        row.mc_se = stats.std_error[i];
        const WaveVector k = to_wave(row.K, params.L);
        row.n_in = profile.evaluate(k);
        row.n1 = n1_discrete(profile, row.K, t, params, ball);
        row.kinetic = (k[0] == 0.0 || t == 0.0)
                          ? 0.0
                          : kinetic_prediction(profile, k, t, params, quad);
        row.z = row.mc_se > 0.0
                    ? (row.mc_mean - row.n_in - row.n1) / row.mc_se
                    : 0.0;
        if (row.mc_se > 0.0) zs.push_back(std::abs(row.z));
        out.rows.push_back(row);
    }
    if (!zs.empty()) {
        std::sort(zs.begin(), zs.end());
        out.z_median = zs[zs.size() / 2];
        out.z_p95 = zs[static_cast<std::size_t>(0.95 * (zs.size() - 1))];
        out.z_max = zs.back();
    }
    return out;
}

}  // namespace zk::kinetic
