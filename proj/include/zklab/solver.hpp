#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "zklab/expansion.hpp"
#include "zklab/lattice.hpp"
#include "zklab/random_data.hpp"

namespace zk::solver {

enum class Scheme : std::uint8_t { etdrk4, etdrk2 };

struct SolverConfig {
    LatticeSpec spec;
    ModelParams params;
    double dt = 1e-2;
    Scheme scheme = Scheme::etdrk4;
    double dealias = 2.0 / 3.0;
    double blowup_threshold = 1e6;
    bool damp_zero_mode = true;  // whether -nu*Laplacian acts on k = 0
};

// Smallest power of two >= 3 * radius * L (alias-free quadratic products for
// ball-supported fields).
int grid_size(const LatticeSpec& spec);

// Pseudospectral exponential integrator for
//   psi_k' = i Lambda(k) psi_k - nu |k|^2 psi_k + (i lambda / L^d) sum kx psi psi
// with the convolution done by FFT and the spectrum truncated to the ball
// every evaluation.
SpectralField evolve(const SpectralField& xi, double t_final,
                     const SolverConfig& cfg);

// Removes the free phase: phi_k = e^{-i Lambda(k) t} psi_k.
SpectralField linear_profile(const SpectralField& field, double t);
SpectralField linear_unprofile(const SpectralField& field, double t);

struct EnsembleStats {
    const BallIndex* ball = nullptr;
    std::vector<double> mean;      // of |psi_k|^2
    std::vector<double> variance;  // sample variance
    std::vector<double> std_error;
    std::size_t members = 0;
    std::uint64_t seed = 0;
    std::string config_digest;
};

// M independent members: sample -> evolve -> |psi_k|^2, streaming Welford
// moments merged in fixed member-block order, so results are byte-identical
// for any thread count.
EnsembleStats ensemble_spectrum(const SpectrumProfile& profile,
                                const BallIndex& ball, const SolverConfig& cfg,
                                std::size_t M, std::uint64_t master_seed,
                                double t_final, int threads = 1);

}  // namespace zk::solver
