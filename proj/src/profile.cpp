#include <cmath>
#include <stdexcept>

#include "zklab/random_data.hpp"

namespace zk {

SpectrumProfile smooth_bump(double D, double amplitude, double center_radius) {
    if (D <= 0) throw std::invalid_argument("smooth_bump: D <= 0");
    if (amplitude < 0) throw std::invalid_argument("smooth_bump: amplitude < 0");
    if (center_radius < 0 || 2 * center_radius >= D)
        throw std::invalid_argument("smooth_bump: center_radius out of range");
    const double halfwidth = D / 2.0 - center_radius;
    SpectrumProfile p;
    p.diameter = D;
    p.form = "smooth-bump";
    p.evaluate = [=](const WaveVector& k) {
        const double r = (std::sqrt(k.norm2()) - center_radius) / halfwidth;
        if (std::abs(r) >= 1.0) return 0.0;
        return amplitude * std::exp(-1.0 / (1.0 - r * r));
    };
    return p;
}

std::vector<double> tabulate(const SpectrumProfile& profile, const BallIndex& ball) {
    std::vector<double> out(ball.size());
    const double L = ball.spec().size;
    for (std::size_t i = 0; i < ball.size(); ++i)
        out[i] = profile.evaluate(to_wave(ball.at(i), L));
    return out;
}

}  // namespace zk
