#pragma once

#include <vector>

#include "zklab/expansion.hpp"
#include "zklab/lattice.hpp"
#include "zklab/random_data.hpp"
#include "zklab/solver.hpp"

namespace zk::kinetic {

enum class Mollifier : std::uint8_t { exact_coarea, gaussian };

struct CollisionQuadrature {
    int slice_count = 64;
    int sphere_order = 16;
    Mollifier mollifier = Mollifier::exact_coarea;
    double eta = 1e-2;  // Gaussian width when mollifier == gaussian
    int gaussian_grid = 48;
};

struct CollisionValue {
    double gain = 0.0;
    double loss = 0.0;  // reported positive; K = gain - loss
    double value() const { return gain - loss; }
};

// Collision operator of the wave kinetic equation,
//   K(n)(k) = |kx|^2 int n(k1) n(k-k1) delta(Omega) dk1
//           - 2 n(k) int kx (kx - k1x) n(k1) delta(Omega) dk1.
CollisionValue collision_operator(const SpectrumProfile& n, const WaveVector& k,
                                  const CollisionQuadrature& quad);

// Discrete sin^2-kernel approximation of the first spectrum correction:
// gain and loss lattice sums with the Fejer factor 4 sin^2(t Omega/2)/Omega^2
// (analytic limit t^2 at Omega = 0).
double n1_discrete(const SpectrumProfile& profile, const IntVec& K, double t,
                   const ModelParams& params, const BallIndex& ball);

// (t / T_kin) * K(n_in)(k).
double kinetic_prediction(const SpectrumProfile& profile, const WaveVector& k,
                          double t, const ModelParams& params,
                          const CollisionQuadrature& quad);

struct SpectrumComparisonRow {
    IntVec K;
    double mc_mean = 0.0;
    double mc_se = 0.0;
    double n_in = 0.0;
    double n1 = 0.0;
    double kinetic = 0.0;
    double z = 0.0;  // (mc_mean - n_in - n1) / se
};

struct SpectrumComparison {
    std::vector<SpectrumComparisonRow> rows;
    double z_median = 0.0;
    double z_p95 = 0.0;
    double z_max = 0.0;
};

SpectrumComparison compare_spectra(const solver::EnsembleStats& stats,
                                   const SpectrumProfile& profile, double t,
                                   const ModelParams& params,
                                   const CollisionQuadrature& quad);

}  // namespace zk::kinetic
