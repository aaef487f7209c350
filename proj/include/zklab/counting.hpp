#pragma once

#include <array>
#include <functional>
#include <map>
#include <vector>

#include "zklab/couples.hpp"
#include "zklab/lattice.hpp"

namespace zk::counting {

struct ResonanceQuery {
    IntVec K;  // k = K/L, nonzero
    double sigma = 0.0;
    double window_T = 1.0;  // half-width delta / window_T
    double delta = 1.0;
    LatticeSpec spec;
    AnisotropyCoefficients beta;
};

// Exact cardinality of {k1 in the lattice ball :
// |Lambda(k1)+Lambda(k-k1)-Lambda(k)-sigma| <= delta/T}.
std::size_t count_resonances(const ResonanceQuery& q, const BallIndex& ball);

struct OneNodeBoundReport {
    std::size_t count = 0;
    double bound = 0.0;  // L^theta * (L^d / T) / |k_x|
    double ratio = 0.0;
    bool exceeded = false;
};

OneNodeBoundReport verify_onenode_bound(const ResonanceQuery& q,
                                        const BallIndex& ball, double theta);

// Dyadic size class for |k_{e,x}|: either a power of two kappa in (0, 1], or
// the zero class 0 < |k_x| <= zero_cap.
struct DyadicClass {
    double kappa = 0.0;
    double zero_cap = 0.0;  // used when kappa == 0, typically alpha^2

    bool matches(double kx_abs) const {
        if (kappa != 0.0) return kappa / 2 <= kx_abs && kx_abs <= 2 * kappa;
        return kx_abs > 0.0 && kx_abs <= zero_cap;
    }
};

struct CoupleEquationSystem {
    diag::Couple couple;
    std::vector<double> sigma;               // per node
    std::map<int, DyadicClass> kappa;        // per normal edge id
    std::map<int, IntVec> fixed_leg_values;  // per fixed leg id
    LatticeSpec spec;
    double T_max = 1.0;
    double delta = 1.0;
};

// Exact number of lattice assignments over the ball satisfying every
// momentum conservation equation, every |Omega_n - sigma_n| <= delta/T_max,
// the dyadic classes on normal edges and the leg fixings.  Enumeration uses
// the peeling order of the node equations; throws when the estimated free
// enumeration exceeds the budget.
std::size_t brute_force_eq(const CoupleEquationSystem& sys,
                           const BallIndex& ball,
                           std::size_t budget = 200'000'000);

struct SmoothTestFunction {
    int dim = 1;
    double box_radius = 8.0;  // truncation of sums and integrals
    std::function<double(const std::array<double, 3>&)> value;
    // Mixed partial for a multi-index J with entries in {0,1}.
    std::function<double(const std::array<int, 3>&,
                         const std::array<double, 3>&)>
        partial;
};

// |sum_{K in Z^d} f(K) - (int f + sum_{|J|_inf = 1} int {K}^J d^J f)|, the
// weighted integrals done cellwise with tensor Gauss-Legendre so the
// fractional-part weights stay smooth inside each cell.
double euler_maclaurin_check(const SmoothTestFunction& f);

struct AsymptoticsResult {
    double lattice_sum = 0.0;
    double prediction = 0.0;        // c * L^d / t * integral
    double delta_integral = 0.0;    // int F delta(Omega_k) dk1
    double remainder_ratio = 0.0;   // |sum - prediction| / L^{d-1}
};

struct AsymptoticsQuery {
    IntVec K;  // k = K/L with k_x != 0
    double t = 1.0;
    LatticeSpec spec;
    std::function<double(double)> g;
    double g_integral = 0.0;  // c = int g
    std::function<double(const WaveVector&)> F;
    double F_radius = 1.0;  // support bound on |k1|
    int slice_count = 64;
    int angle_count = 16;
};

// Compares the lattice sum sum_k1 g(t*Omega_k(k1))*F(k1)
// against the continuum delta-function prediction (d = 3, co-area slicing
// in k1x).
AsymptoticsResult resonance_sum_asymptotics(const AsymptoticsQuery& q);

// co-area integral int F delta(Omega_k) dk1 alone (d = 3).
double delta_integral_coarea(const AsymptoticsQuery& q);

// Same integral for a free-standing k (d = 3, k_x != 0): slices in k1x, each
// slice a circle in the transverse plane from the completed square of the
// resonance polynomial.
double coarea_delta_integral(const WaveVector& k,
                             const std::function<double(const WaveVector&)>& F,
                             double F_radius, int slice_count,
                             int angle_count);

}  // namespace zk::counting
