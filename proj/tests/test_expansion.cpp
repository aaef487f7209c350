#include <doctest.h>

#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include "zklab/expansion.hpp"
#include "zklab/random_data.hpp"
#include "zklab/trees.hpp"

using namespace zk;
using cd = std::complex<double>;

namespace {

IntVec ivec(int x, int y, int z) {
    IntVec K;
    K.dim = 3;
    K[0] = x; K[1] = y; K[2] = z;
    return K;
}

double sup_norm(const SpectralField& f) {
    double s = 0.0;
    for (const auto& z : f.values) s = std::max(s, std::abs(z));
    return s;
}

// Closed form of the depth-1 oscillatory coefficient:
//   H = k_x (e^{i t Omega} - e^{-nu |k|^2 t}) / (i Omega + nu |k|^2).
cd h_closed_form(const IntVec& K1, const IntVec& K2, const ModelParams& p,
                 double t) {
    const auto beta = AnisotropyCoefficients::isotropic(3);
    const auto k1 = to_wave(K1, p.L), k2 = to_wave(K2, p.L),
               k = to_wave(K1 + K2, p.L);
    const double om = resonance_phase(k1, k2, k, beta);
    const cd denom(p.nu * k.norm2(), om);
    const cd num = std::exp(cd(0.0, om * t)) - std::exp(-p.nu * k.norm2() * t);
    return k.kx() * num / denom;
}

}  // namespace

TEST_CASE("cumulative_integral is fourth-order accurate") {
    const double w = 3.0;
    auto run = [&](int n) {
        const double h = 1.0 / n;
        std::vector<cd> f(static_cast<std::size_t>(n) + 1);
        for (int j = 0; j <= n; ++j) f[static_cast<std::size_t>(j)] = std::exp(cd(0.0, w * h * j));
        const auto F = cumulative_integral(f, h);
        double err = 0.0;
        for (int j = 0; j <= n; ++j) {
            const cd exact = (std::exp(cd(0.0, w * h * j)) - 1.0) / cd(0.0, w);
            err = std::max(err, std::abs(F[static_cast<std::size_t>(j)] - exact));
        }
        return err;
    };
    const double e16 = run(16), e32 = run(32);
    CHECK(e16 < 1e-5);
    const double order = std::log2(e16 / e32);
    CHECK(order > 3.5);
    CHECK(order < 4.6);
}

TEST_CASE("duhamel matches the single-pair analytic solution") {
    BallIndex ball(LatticeSpec(3, 4.0, 1.0));
    ModelParams p;
    p.lambda = 0.7;
    p.nu = 0.3;
    p.L = 4.0;
    TimeGrid grid{1.0, 64};
    ExpansionContext ctx(ball, p, grid);

    const IntVec K1 = ivec(1, 2, 0), K2 = ivec(1, -1, 3);
    const IntVec K = K1 + K2;
    REQUIRE(ball.find(K) >= 0);

    SpectralField a(ball), b(ball);
    const cd va(0.4, -0.2), vb(-0.1, 0.9);
    a[static_cast<std::size_t>(ball.find(K1))] = va;
    b[static_cast<std::size_t>(ball.find(K2))] = vb;
    const auto out = ctx.duhamel(FieldHistory::constant(a, grid),
                                 FieldHistory::constant(b, grid));

    const cd prefac = cd(0.0, p.lambda / (p.L * p.L * p.L));
    const cd expect = prefac * h_closed_form(K1, K2, p, grid.t_final) * va * vb;
    const cd got = out[static_cast<std::size_t>(ball.find(K))];
    CHECK(std::abs(got - expect) < 1e-7 * std::abs(expect) + 1e-14);

    // Every other mode receives nothing from a single source pair, except
    // the (K2, K1) ordering does not exist because a and b are distinct.
    for (std::size_t i = 0; i < ball.size(); ++i)
        if (static_cast<std::ptrdiff_t>(i) != ball.find(K))
            CHECK(std::abs(out[i]) < 1e-14);
}

TEST_CASE("duhamel quadrature error decays at fourth order") {
    BallIndex ball(LatticeSpec(3, 4.0, 1.0));
    ModelParams p;
    p.lambda = 1.0;
    p.nu = 0.1;
    p.L = 4.0;
    const IntVec K1 = ivec(2, 1, -1), K2 = ivec(-1, 1, 2);
    const IntVec K = K1 + K2;

    auto run = [&](int steps) {
        TimeGrid grid{1.0, steps};
        ExpansionContext ctx(ball, p, grid);
        SpectralField a(ball), b(ball);
        a[static_cast<std::size_t>(ball.find(K1))] = 1.0;
        b[static_cast<std::size_t>(ball.find(K2))] = 1.0;
        const auto out = ctx.duhamel(FieldHistory::constant(a, grid),
                                     FieldHistory::constant(b, grid));
        const cd prefac = cd(0.0, p.lambda / (p.L * p.L * p.L));
        const cd expect = prefac * h_closed_form(K1, K2, p, 1.0);
        return std::abs(out[static_cast<std::size_t>(ball.find(K))] - expect);
    };
    const double e8 = run(8), e16 = run(16);
    const double order = std::log2(e8 / e16);
    CHECK(order > 3.3);
}

TEST_CASE("tree terms scale as c^(l+1) in the data") {
    BallIndex ball(LatticeSpec(3, 4.0, 0.9));
    ModelParams p;
    p.lambda = 0.5;
    p.nu = 0.05;
    p.L = 4.0;
    TimeGrid grid{0.5, 12};
    ExpansionContext ctx(ball, p, grid);
    const auto prof = smooth_bump(1.6, 1.0);
    const auto xi = sample_initial_data(prof, ball, {31, 0});
    SpectralField xi2(ball);
    const double cscale = 1.7;
    for (std::size_t i = 0; i < ball.size(); ++i) xi2[i] = cscale * xi[i];

    for (int l = 0; l <= 2; ++l) {
        for (const auto& T : diag::trees_with_branches(l)) {
            const auto J1 = ctx.tree_term(T, xi);
            const auto J2 = ctx.tree_term(T, xi2);
            const double factor = std::pow(cscale, l + 1);
            for (std::size_t i = 0; i < ball.size(); ++i)
                CHECK(std::abs(J2[i] - factor * J1[i]) <
                      1e-11 * (1.0 + std::abs(J1[i])));
        }
    }
}

TEST_CASE("residual vanishes identically at lambda = 0") {
    BallIndex ball(LatticeSpec(3, 4.0, 0.9));
    ModelParams p;
    p.lambda = 0.0;
    p.nu = 0.1;
    p.L = 4.0;
    TimeGrid grid{1.0, 8};
    ExpansionContext ctx(ball, p, grid);
    const auto xi = sample_initial_data(smooth_bump(1.6, 1.0), ball, {7, 0});
    for (int N = 0; N <= 2; ++N) CHECK(sup_norm(ctx.residual(N, xi)) == 0.0);
}

TEST_CASE("residual drops by roughly lambda per extra order") {
    BallIndex ball(LatticeSpec(3, 4.0, 0.9));
    ModelParams p;
    p.lambda = 0.02;
    p.nu = 0.0;
    p.L = 4.0;
    TimeGrid grid{1.0, 16};
    ExpansionContext ctx(ball, p, grid);
    const auto xi = sample_initial_data(smooth_bump(1.6, 1.0), ball, {11, 0});
    const double r0 = sup_norm(ctx.residual(0, xi));
    const double r1 = sup_norm(ctx.residual(1, xi));
    const double r2 = sup_norm(ctx.residual(2, xi));
    CHECK(r1 < 0.1 * r0);
    CHECK(r2 < 0.1 * r1);
}

TEST_CASE("coefficient_H matches the depth-1 closed form") {
    BallIndex ball(LatticeSpec(3, 4.0, 1.0));
    ModelParams p;
    p.lambda = 0.3;
    p.nu = 0.2;
    p.L = 4.0;
    TimeGrid grid{1.0, 64};
    ExpansionContext ctx(ball, p, grid);
    const auto T = diag::trees_with_branches(1).front();
    for (auto [K1, K2] : {std::pair{ivec(1, 0, 0), ivec(0, 1, 0)},
                          std::pair{ivec(2, -1, 1), ivec(-1, 2, 0)},
                          std::pair{ivec(1, 1, 1), ivec(1, -1, -1)}}) {
        const cd got = ctx.coefficient_H(T, {K1, K2});
        const cd expect = h_closed_form(K1, K2, p, grid.t_final);
        CHECK(std::abs(got - expect) < 1e-6 * (1.0 + std::abs(expect)));
    }
}

TEST_CASE("coefficient_H obeys the inviscid time bound |H| <= (|kx| t)^l") {
    BallIndex ball(LatticeSpec(3, 4.0, 1.0));
    ModelParams p;
    p.lambda = 0.3;
    p.nu = 0.0;
    p.L = 4.0;
    TimeGrid grid{2.0, 48};
    ExpansionContext ctx(ball, p, grid);
    std::mt19937 rng(5);
    std::uniform_int_distribution<int> u(-2, 2);
    for (const auto& T : diag::trees_with_branches(2)) {
        for (int it = 0; it < 10; ++it) {
            std::vector<IntVec> leaves(3);
            for (auto& K : leaves) K = ivec(u(rng), u(rng), u(rng));
            IntVec tot = leaves[0] + leaves[1] + leaves[2];
            if (ball.find(tot) < 0) continue;
            // Product over internal nodes of |k_{e,x}| * t bounds each
            // iterated integral crudely.
            const cd H = ctx.coefficient_H(T, leaves);
            const double kx_bound =
                std::abs(to_wave(tot, p.L).kx()) * grid.t_final;
            // Inner node kx at most radius in absolute value.
            const double bound = (1.0 * grid.t_final) * std::max(kx_bound, 1e-12) * 1.01;
            CHECK(std::abs(H) <= bound + 1e-9);
        }
    }
}

TEST_CASE("variance via couples: single leaf returns the input spectrum") {
    BallIndex ball(LatticeSpec(3, 4.0, 0.9));
    ModelParams p;
    p.lambda = 0.4;
    p.nu = 0.1;
    p.L = 4.0;
    TimeGrid grid{1.0, 8};
    ExpansionContext ctx(ball, p, grid);
    const auto prof = smooth_bump(1.6, 1.3);
    const auto n_in = tabulate(prof, ball);
    const auto leaf = diag::trees_with_branches(0).front();
    for (const IntVec& K : {ivec(1, 0, 0), ivec(0, 2, -1), ivec(-1, -1, 1)}) {
        const auto i = ball.find(K);
        REQUIRE(i >= 0);
        CHECK(ctx.variance_via_couples(leaf, K, n_in) ==
              doctest::Approx(n_in[static_cast<std::size_t>(i)]).epsilon(1e-12));
    }
}

TEST_CASE("variance via couples matches the direct Wick oracle at depth 1") {
    BallIndex ball(LatticeSpec(3, 4.0, 0.9));
    ModelParams p;
    p.lambda = 0.4;
    p.nu = 0.15;
    p.L = 4.0;
    TimeGrid grid{1.0, 48};
    ExpansionContext ctx(ball, p, grid);
    const auto prof = smooth_bump(1.6, 1.0);
    const auto n_in = tabulate(prof, ball);
    const auto T = diag::trees_with_branches(1).front();

    for (const IntVec& K : {ivec(1, 0, 0), ivec(2, 1, 0), ivec(0, 1, 1)}) {
        // Oracle: E|J|^2 = (lambda/L^3)^2 sum_{k1+k2=K} n1 n2
        //                  (|H(k1,k2)|^2 + H(k1,k2) conj(H(k2,k1))).
        double expect = 0.0;
        for (std::size_t i = 0; i < ball.size(); ++i) {
            const IntVec K1 = ball.at(i);
            const IntVec K2 = K - K1;
            const auto j = ball.find(K2);
            if (j < 0) continue;
            const double nn = n_in[i] * n_in[static_cast<std::size_t>(j)];
            if (nn == 0.0) continue;
            const cd h12 = h_closed_form(K1, K2, p, grid.t_final);
            const cd h21 = h_closed_form(K2, K1, p, grid.t_final);
            expect += nn * (std::norm(h12) + std::real(h12 * std::conj(h21)));
        }
        const double pref = std::pow(p.lambda / (p.L * p.L * p.L), 2);
        expect *= pref;
        const double got = ctx.variance_via_couples(T, K, n_in);
        CHECK(got == doctest::Approx(expect).epsilon(1e-5));
    }
}

TEST_CASE("variance via couples agrees with a Monte Carlo estimate") {
    BallIndex ball(LatticeSpec(3, 3.0, 0.9));
    ModelParams p;
    p.lambda = 0.5;
    p.nu = 0.1;
    p.L = 3.0;
    TimeGrid grid{1.0, 32};
    ExpansionContext ctx(ball, p, grid);
    const auto prof = smooth_bump(1.6, 1.0);
    auto n_in = tabulate(prof, ball);
    // The sampler forces the zero mode to vanish; make the spectrum the
    // expectation formula sees consistent with that.
    n_in[static_cast<std::size_t>(ball.find(ivec(0, 0, 0)))] = 0.0;
    const auto T = diag::trees_with_branches(1).front();
    const IntVec K = ivec(1, 1, 0);

    const std::size_t M = 4000;
    double mean = 0.0, m2 = 0.0;
    for (std::size_t m = 0; m < M; ++m) {
        const auto xi = sample_initial_data(n_in, ball, {909, m});
        const auto J = ctx.tree_term(T, xi);
        const double v = std::norm(J[static_cast<std::size_t>(ball.find(K))]);
        const double d = v - mean;
        mean += d / static_cast<double>(m + 1);
        m2 += d * (v - mean);
    }
    const double se = std::sqrt(m2 / (static_cast<double>(M) - 1) /
                                static_cast<double>(M));
    const double exact = ctx.variance_via_couples(T, K, n_in);
    CHECK(std::abs(mean - exact) < 4.0 * se + 1e-12);
}

TEST_CASE("tree term memoization is invalidated by new data") {
    BallIndex ball(LatticeSpec(3, 3.0, 0.9));
    ModelParams p;
    p.lambda = 0.5;
    p.nu = 0.0;
    p.L = 3.0;
    TimeGrid grid{1.0, 8};
    ExpansionContext ctx(ball, p, grid);
    const auto T = diag::trees_with_branches(1).front();
    const auto xi1 = sample_initial_data(smooth_bump(1.6, 1.0), ball, {1, 0});
    const auto xi2 = sample_initial_data(smooth_bump(1.6, 1.0), ball, {2, 0});
    const auto J1 = ctx.tree_term(T, xi1);
    const auto J1_again = ctx.tree_term(T, xi1);
    const auto J2 = ctx.tree_term(T, xi2);
    CHECK(J1.values == J1_again.values);
    CHECK(J1.values != J2.values);
}
