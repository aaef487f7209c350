#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "zklab/lattice.hpp"

namespace zk {

// Even, compactly supported envelope n_in.  evaluate() is pure; per-ball
// caching is done by tabulate().
struct SpectrumProfile {
    std::function<double(const WaveVector&)> evaluate;
    double diameter = 0.0;
    std::string form = "custom";
};

// C-infinity bump amplitude*exp(-1/(1-r^2)), r the scaled distance from the
// sphere |k| = center_radius, zero outside.  center_radius = 0 gives a ball
// of diameter D, otherwise an annulus of outer diameter <= D.
SpectrumProfile smooth_bump(double D, double amplitude, double center_radius = 0.0);

// n_in evaluated over a ball, index-aligned with it.
std::vector<double> tabulate(const SpectrumProfile& profile, const BallIndex& ball);

struct SeededGaussianSource {
    std::uint64_t master_seed = 0;
    std::uint64_t member_index = 0;
};

// Two standard normal draws from a counter-based stream keyed on
// (seed, member, orbit).  Bit-for-bit reproducible and order independent.
std::pair<double, double> gaussian_pair(const SeededGaussianSource& src,
                                        std::uint64_t orbit_id);

struct SamplingOptions {
    bool zero_mean_mode = true;  // force the k=0 coefficient to zero
};

// xi_k = sqrt(n_in(k)) * eta_k with eta standard complex Gaussian and
// eta_{-k} = conj(eta_k); one draw per {k,-k} orbit, self-conjugate modes
// real with unit variance.
SpectralField sample_initial_data(const SpectrumProfile& profile,
                                  const BallIndex& ball,
                                  const SeededGaussianSource& source,
                                  const SamplingOptions& opts = {});

// Variant reusing a precomputed tabulate() result.
SpectralField sample_initial_data(const std::vector<double>& n_in,
                                  const BallIndex& ball,
                                  const SeededGaussianSource& source,
                                  const SamplingOptions& opts = {});

}  // namespace zk
