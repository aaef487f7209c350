// Acceptance suite: one PASS/FAIL line per criterion, exit 0 iff all pass.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>
#include <unistd.h>

#include "zklab/counting.hpp"
#include "zklab/couples.hpp"
#include "zklab/expansion.hpp"
#include "zklab/kinetic.hpp"
#include "zklab/lattice.hpp"
#include "zklab/random_data.hpp"
#include "zklab/solver.hpp"
#include "zklab/trees.hpp"

namespace fs = std::filesystem;
using namespace zk;
using cd = std::complex<double>;

namespace {

int g_failures = 0;

void report(int id, const std::string& what, bool pass,
            const std::string& detail) {
    std::cout << "criterion " << id << ": " << (pass ? "PASS" : "FAIL")
              << " - " << what;
    if (!detail.empty()) std::cout << " [" << detail << "]";
    std::cout << std::endl;
    if (!pass) ++g_failures;
}

void criterion(int id, const std::string& what,
               const std::function<std::pair<bool, std::string>()>& body) {
    try {
        const auto [pass, detail] = body();
        report(id, what, pass, detail);
    } catch (const std::exception& e) {
        report(id, what, false, std::string("exception: ") + e.what());
    }
}

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

std::string fmt(double x) {
    std::ostringstream os;
    os.precision(4);
    os << x;
    return os.str();
}

// Least-squares slope of y against x.
double fit_slope(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

// ---- criterion bodies -------------------------------------------------------

std::pair<bool, std::string> linear_exactness() {
    ModelParams p;
    p.dim = 3;
    p.L = 16.0;
    p.lambda = 0.0;
    p.nu = 0.05;
    solver::SolverConfig cfg{LatticeSpec(3, 16.0, 0.5), p};
    cfg.dt = 0.1;
    BallIndex ball(cfg.spec);
    const auto xi = sample_initial_data(smooth_bump(0.9, 1.0), ball, {101, 0});
    const double t = 1.0;
    const auto got = solver::evolve(xi, t, cfg);

    const auto beta = AnisotropyCoefficients::isotropic(3);
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < ball.size(); ++i) {
        const auto k = to_wave(ball.at(i), p.L);
        const cd z(-p.nu * k.norm2(), dispersion(k, beta));
        const cd expect = std::exp(z * t) * xi[i];
        num = std::max(num, std::abs(got[i] - expect));
        den = std::max(den, std::abs(expect));
    }
    const double rel = num / den;
    return {rel < 1e-10, "rel sup error " + fmt(rel)};
}

std::pair<bool, std::string> l2_conservation() {
    ModelParams p;
    p.dim = 3;
    p.L = 12.0;
    p.nu = 0.0;
    p.lambda = 0.1 * std::pow(12.0, 1.5);  // rho(1) = alpha = 0.1
    solver::SolverConfig cfg{LatticeSpec(3, 12.0, 2.0 / 3.0), p};
    cfg.dt = 1e-3;
    BallIndex ball(cfg.spec);
    const auto xi = sample_initial_data(smooth_bump(1.2, 1.0), ball, {202, 0});
    auto mass = [&](const SpectralField& f) {
        double s = 0.0;
        for (const auto& z : f.values) s += std::norm(z);
        return s;
    };
    const auto out = solver::evolve(xi, 1.0, cfg);
    const double drift = std::abs(mass(out) - mass(xi)) / mass(xi);
    return {drift < 1e-7, "relative drift " + fmt(drift)};
}

std::pair<bool, std::string> expansion_order() {
    BallIndex ball(LatticeSpec(3, 8.0, 0.75));
    TimeGrid grid{1.0, 16};
    const auto xi = sample_initial_data(smooth_bump(1.2, 1.0), ball, {303, 0});
    const std::vector<double> lambdas{1e-3, 3e-3, 1e-2};
    std::string detail;
    bool ok = true;
    for (int N = 0; N <= 2; ++N) {
        std::vector<double> lx, ly;
        for (double lam : lambdas) {
            ModelParams p;
            p.dim = 3;
            p.L = 8.0;
            p.lambda = lam;
            p.nu = 0.0;
            ExpansionContext ctx(ball, p, grid);
            const double r = sup_norm(ctx.residual(N, xi));
            lx.push_back(std::log(lam));
            ly.push_back(std::log(r));
        }
        const double slope = fit_slope(lx, ly);
        if (!detail.empty()) detail += ", ";
        detail += "N=" + std::to_string(N) + " slope " + fmt(slope);
        if (std::abs(slope - (N + 2)) > 0.15) ok = false;
    }
    return {ok, detail};
}

std::pair<bool, std::string> wick_equivalence() {
    const double L = 8.0;
    BallIndex ball(LatticeSpec(3, L, 0.75));
    ModelParams p;
    p.dim = 3;
    p.L = L;
    p.lambda = 0.5;
    p.nu = 0.1;
    TimeGrid grid{1.0, 48};
    ExpansionContext ctx(ball, p, grid);
    const auto prof = smooth_bump(1.2, 1.0);
    auto n_in = tabulate(prof, ball);
    // The sampler forces the zero mode to vanish; keep the spectrum the
    // expectation formula sees consistent with that.
    n_in[static_cast<std::size_t>(ball.find(ivec(0, 0, 0)))] = 0.0;
    const auto T = diag::trees_with_branches(1).front();
    const auto beta = AnisotropyCoefficients::isotropic(3);

    const std::vector<IntVec> modes{
        ivec(1, 0, 0),  ivec(2, 0, 0),  ivec(1, 1, 0),  ivec(2, 1, 0),
        ivec(1, 0, 1),  ivec(3, 0, 0),  ivec(2, 2, 0),  ivec(1, 1, 1),
        ivec(2, 0, 2),  ivec(3, 1, 0)};

    // Depth-1 closed form J_k = (i lambda / L^3) sum H(k1,k2) xi_1 xi_2 is
    // mathematically identical to the quadrature tree term (verified in the
    // unit tests); it makes the 10^4-member Monte Carlo affordable.
    struct PairH {
        std::size_t i1, i2;
        cd h;
    };
    std::vector<std::vector<PairH>> pairs(modes.size());
    for (std::size_t m = 0; m < modes.size(); ++m) {
        const auto k = to_wave(modes[m], L);
        for (std::size_t i = 0; i < ball.size(); ++i) {
            const auto j = ball.find(modes[m] - ball.at(i));
            if (j < 0) continue;
            const auto k1 = to_wave(ball.at(i), L);
            const auto k2 = k - k1;
            const double om = resonance_phase(k1, k2, k, beta);
            const cd denom(p.nu * k.norm2(), om);
            const cd h = k.kx() *
                         (std::exp(cd(0.0, om)) - std::exp(-p.nu * k.norm2())) /
                         denom;
            pairs[m].push_back({i, static_cast<std::size_t>(j), h});
        }
    }
    const cd prefac(0.0, p.lambda / (L * L * L));

    const std::size_t M = 10000;
    std::vector<double> mean(modes.size(), 0.0), m2(modes.size(), 0.0);
    for (std::size_t mem = 0; mem < M; ++mem) {
        const auto xi = sample_initial_data(n_in, ball, {404, mem});
        for (std::size_t m = 0; m < modes.size(); ++m) {
            cd J = 0.0;
            for (const auto& ph : pairs[m])
                J += ph.h * xi[ph.i1] * xi[ph.i2];
            const double v = std::norm(prefac * J);
            const double d = v - mean[m];
            mean[m] += d / static_cast<double>(mem + 1);
            m2[m] += d * (v - mean[m]);
        }
    }

    bool ok = true;
    double worst = 0.0;
    for (std::size_t m = 0; m < modes.size(); ++m) {
        const double se = std::sqrt(
            m2[m] / (static_cast<double>(M) - 1) / static_cast<double>(M));
        const double exact = ctx.variance_via_couples(T, modes[m], n_in);
        const double z = std::abs(mean[m] - exact) / (3.0 * se + 1e-15);
        worst = std::max(worst, z);
        if (z > 1.0) ok = false;
    }
    return {ok, "worst |diff|/(3 se) = " + fmt(worst)};
}

// Spanning-tree momentum assignment (same oracle as the unit tests).
diag::EdgeAssignment solve_by_peeling(const diag::Couple& c,
                                      std::mt19937& rng) {
    std::uniform_int_distribution<int> u(-5, 5);
    const std::size_t E = c.edges.size();
    diag::EdgeAssignment val(E);
    std::vector<char> known(E, 0), tree_edge(E, 0);
    std::vector<char> visited(static_cast<std::size_t>(c.n_nodes), 0);
    for (auto& v : val) v.dim = 3;
    std::vector<int> stack{0};
    if (c.n_nodes > 0) visited[0] = 1;
    while (!stack.empty() && c.n_nodes > 0) {
        const int v = stack.back();
        stack.pop_back();
        for (int ei : c.incident(v)) {
            const auto& e = c.edges[static_cast<std::size_t>(ei)];
            if (e.is_leg() || e.tail == e.head) continue;
            const int w = e.other(v);
            if (visited[static_cast<std::size_t>(w)]) continue;
            visited[static_cast<std::size_t>(w)] = 1;
            tree_edge[static_cast<std::size_t>(ei)] = 1;
            stack.push_back(w);
        }
    }
    int held = -1;
    for (std::size_t i = 0; i < E; ++i) {
        if (tree_edge[i]) continue;
        if (c.edges[i].is_leg() && held < 0) {
            held = static_cast<int>(i);
            continue;
        }
        for (int d = 0; d < 3; ++d) val[i][d] = u(rng);
        known[i] = 1;
    }
    bool progress = true;
    while (progress) {
        progress = false;
        for (int v = 0; v < c.n_nodes; ++v) {
            int unknown = -1, count = 0;
            IntVec sum;
            sum.dim = 3;
            for (int ei : c.incident(v)) {
                const auto& e = c.edges[static_cast<std::size_t>(ei)];
                if (e.tail == e.head) continue;
                if (!known[static_cast<std::size_t>(ei)]) {
                    unknown = ei;
                    ++count;
                    continue;
                }
                sum = (e.head == v) ? sum + val[static_cast<std::size_t>(ei)]
                                    : sum - val[static_cast<std::size_t>(ei)];
            }
            if (count != 1) continue;
            const auto& e = c.edges[static_cast<std::size_t>(unknown)];
            val[static_cast<std::size_t>(unknown)] = (e.head == v) ? -sum : sum;
            known[static_cast<std::size_t>(unknown)] = 1;
            progress = true;
        }
    }
    for (std::size_t i = 0; i < E; ++i)
        if (!known[i]) throw std::logic_error("peeling oracle stuck");
    return val;
}

std::pair<bool, std::string> diagram_invariants() {
    std::mt19937 rng(505);
    std::uniform_int_distribution<int> ul(0, 4);
    int built = 0, violations = 0;
    while (built < 500) {
        const int l1 = ul(rng);
        int l2 = ul(rng);
        if ((l1 + l2) % 2 != 0) l2 += (l2 > 0) ? -1 : 1;  // even leaf total
        const auto ts1 = diag::trees_with_branches(l1);
        const auto ts2 = diag::trees_with_branches(l2);
        const auto& T1 = ts1[std::uniform_int_distribution<std::size_t>(
            0, ts1.size() - 1)(rng)];
        const auto& T2 = ts2[std::uniform_int_distribution<std::size_t>(
            0, ts2.size() - 1)(rng)];
        if (T1.branch_count() + T2.branch_count() > 8) continue;
        const auto ps = diag::enumerate_pairings(T1, T2);
        const auto& pp = ps[std::uniform_int_distribution<std::size_t>(
            0, ps.size() - 1)(rng)];
        const auto c = diag::build_couple(T1, T2, pp);
        ++built;
        try {
            c.validate();
            if (c.n_nodes > 0 &&
                2 * c.edge_count_internal() + c.fixed_leg_count() +
                        c.free_leg_count() !=
                    3 * c.n_nodes)
                throw std::logic_error("degree identity");
            if (c.n_nodes > 0 && c.connected() &&
                !diag::vanishes_identically(c)) {
                const auto val = solve_by_peeling(c, rng);
                if (!diag::leg_momentum_sum(c, val).is_zero())
                    throw std::logic_error("leg momentum sum");
                const auto trace = diag::cutting_algorithm(c);
                int terminal_nodes = 0;
                for (const auto& t : trace.terminals) {
                    diag::classify_terminal(t);
                    terminal_nodes += t.n_nodes;
                }
                if (terminal_nodes != c.n_nodes)
                    throw std::logic_error("node count not preserved");
                for (const auto& s : trace.steps) {
                    int chi = 0, nodes = 0;
                    for (const auto& o : s.outputs) {
                        o.validate();
                        chi += o.chi();
                        nodes += o.n_nodes;
                        if (o.n_nodes > 1 && !diag::check_property_P(o))
                            throw std::logic_error("property P");
                        if (o.n_nodes > 1 && !diag::check_weak_property_P(o))
                            throw std::logic_error("weak property P");
                    }
                    if (nodes != s.input.n_nodes)
                        throw std::logic_error("node split");
                    const int expect_chi = s.input.chi() +
                                           (s.case_tag == "step0" ? 1 : 0);
                    if (chi != expect_chi)
                        throw std::logic_error("chi additivity");
                }
            }
        } catch (const std::exception&) {
            ++violations;
        }
    }
    return {violations == 0,
            "500 couples, " + std::to_string(violations) + " violations"};
}

std::pair<bool, std::string> onenode_bound() {
    const double theta = 0.1;
    double max_ratio = 0.0;
    for (double L : {8.0, 16.0, 32.0}) {
        const LatticeSpec spec(3, L, 1.0);
        BallIndex ball(spec);
        for (int bi = 0; bi < 10; ++bi) {
            AnisotropyCoefficients beta;
            beta.dim = 3;
            // 10 deterministic points sweeping [1,2]^3.
            beta.beta = {1.0 + bi / 9.0, 1.0 + ((bi * 3) % 10) / 9.0,
                         1.0 + ((bi * 7) % 10) / 9.0};
            for (int m : {1, 2, 4, 8}) {
                counting::ResonanceQuery q{ivec(m, 0, 0), 0.0, L, 1.0, spec,
                                           beta};
                const auto rep = counting::verify_onenode_bound(q, ball, theta);
                max_ratio = std::max(max_ratio, rep.ratio);
            }
        }
    }
    return {max_ratio < 16.0, "max count/bound ratio " + fmt(max_ratio)};
}

std::pair<bool, std::string> euler_maclaurin() {
    double worst = 0.0;
    for (int d = 1; d <= 3; ++d) {
        counting::SmoothTestFunction f;
        f.dim = d;
        f.box_radius = 8.0;
        f.value = [d](const std::array<double, 3>& x) {
            double s = 0.0;
            for (int i = 0; i < d; ++i) s += x[static_cast<std::size_t>(i)] * x[static_cast<std::size_t>(i)];
            return std::exp(-s);
        };
        f.partial = [d](const std::array<int, 3>& J,
                        const std::array<double, 3>& x) {
            double v = 1.0;
            for (int i = 0; i < d; ++i) {
                const double xi = x[static_cast<std::size_t>(i)];
                const double g = std::exp(-xi * xi);
                v *= J[static_cast<std::size_t>(i)] ? -2.0 * xi * g : g;
            }
            return v;
        };
        worst = std::max(worst, counting::euler_maclaurin_check(f));
    }
    return {worst < 1e-7, "worst residual " + fmt(worst)};
}

std::pair<bool, std::string> resonance_asymptotics() {
    // 8192 slices: the co-area quadrature is converged to ~1e-4 here, so
    // the reported remainder reflects the lattice sum, not quadrature bias.
    counting::AsymptoticsQuery q{ivec(0, 0, 0), 8.0, LatticeSpec(3, 16.0, 1.1),
                                 {}, 0.0, {}, 1.0, 8192, 48};
    q.g = [](double s) {
        if (s == 0.0) return 1.0;
        const double v = std::sin(s) / s;
        return v * v;
    };
    q.g_integral = std::numbers::pi;
    q.F = [](const WaveVector& k1) {
        const double r2 = k1.norm2();
        return r2 < 1.0 ? std::exp(-1.0 / (1.0 - r2)) : 0.0;
    };
    q.F_radius = 1.0;

    std::vector<double> ratios;
    std::string detail;
    for (double L : {16.0, 32.0, 64.0}) {
        q.spec = LatticeSpec(3, L, 1.1);
        q.K = ivec(static_cast<int>(L) / 4, 0, 0);  // k = (1/4, 0, 0)
        const auto res = counting::resonance_sum_asymptotics(q);
        ratios.push_back(res.remainder_ratio);
        if (!detail.empty()) detail += ", ";
        detail += "L=" + std::to_string(static_cast<int>(L)) + ": ratio " +
                  fmt(res.remainder_ratio) + " (sum/main " +
                  fmt(res.lattice_sum / res.prediction) + ")";
    }
    const bool bounded =
        *std::max_element(ratios.begin(), ratios.end()) < 100.0;
    const bool non_growing = ratios.back() < 1.5 * ratios.front() + 0.5;
    return {bounded && non_growing, detail};
}

std::pair<bool, std::string> kinetic_closure() {
    // Part (a): per-mode z-scores of the Monte Carlo spectrum against
    // n_in + n1_discrete at L = 12.
    ModelParams p;
    p.dim = 3;
    p.L = 12.0;
    p.lambda = 2.0;
    p.nu = 0.0;
    const double t = 0.0025 / (p.alpha() * p.alpha());  // rho(t) = 0.05
    if (t > 0.2 * p.t_kin())
        return {false, "probe time beyond 0.2 T_kin"};

    solver::SolverConfig cfg{LatticeSpec(3, 12.0, 2.0 / 3.0), p};
    cfg.dt = t / 64.0;
    BallIndex ball(cfg.spec);
    const auto prof = smooth_bump(1.2, 1.0);
    const auto stats =
        solver::ensemble_spectrum(prof, ball, cfg, 256, 606, t, 1);

    std::vector<double> zs;
    for (std::size_t i = 0; i < ball.size(); ++i) {
        if (stats.std_error[i] <= 0.0) continue;
        const auto K = ball.at(i);
        const double n_in = prof.evaluate(to_wave(K, p.L));
        const double n1 = kinetic::n1_discrete(prof, K, t, p, ball);
        zs.push_back(std::abs(stats.mean[i] - n_in - n1) / stats.std_error[i]);
    }
    std::sort(zs.begin(), zs.end());
    const double z95 = zs[static_cast<std::size_t>(0.95 * (zs.size() - 1))];

    // Part (b): the relative discrepancy between n1_discrete and
    // (t/T_kin) K(n_in) decreases monotonically over L in {8,12,16} at 5
    // probes with |k_x| bounded away from zero.  A purely radial envelope
    // sits close to collision equilibrium (gain and loss cancel to a few
    // percent), which makes the discrepancy meaningless; an even
    // anisotropic envelope breaks the balance.
    ModelParams pb;
    pb.dim = 3;
    pb.lambda = 1.0;
    pb.nu = 0.0;
    const double tb = 4.0;
    kinetic::CollisionQuadrature quad;
    quad.slice_count = 512;
    quad.sphere_order = 48;
    SpectrumProfile profb;
    {
        const auto base = smooth_bump(1.6, 1.0);
        profb.diameter = 1.6;
        profb.form = "anisotropic-bump";
        profb.evaluate = [base](const WaveVector& k) {
            const double b = base.evaluate(k);
            if (b == 0.0) return 0.0;
            const double n2 = k.norm2();
            return n2 == 0.0 ? b : b * (1.0 + 3.0 * k.c[0] * k.c[0] / n2);
        };
    }
    // Probe modes as multiples of 1/4; all are lattice points for
    // L in {8,12,16}.
    const std::vector<std::array<int, 3>> probes{
        {2, 0, 0}, {2, 1, 0}, {2, 1, 1}, {1, 1, 1}, {1, 1, 0}};
    bool monotone = true;
    std::string rels;
    for (const auto& pr : probes) {
        double prev = -1.0;
        for (double L : {8.0, 12.0, 16.0}) {
            pb.L = L;
            BallIndex bl(LatticeSpec(3, L, 0.85));
            const IntVec K =
                ivec(static_cast<int>(L) * pr[0] / 4,
                     static_cast<int>(L) * pr[1] / 4,
                     static_cast<int>(L) * pr[2] / 4);
            const double n1 = kinetic::n1_discrete(profb, K, tb, pb, bl);
            const double pred = kinetic::kinetic_prediction(
                profb, to_wave(K, L), tb, pb, quad);
            const double rel = std::abs(n1 - pred) / std::abs(pred);
            if (prev >= 0.0 && rel > prev) monotone = false;
            prev = rel;
        }
        if (!rels.empty()) rels += " ";
        rels += fmt(prev);
    }
    const bool ok = z95 < 4.0 && monotone;
    return {ok, "z95 = " + fmt(z95) + ", monotone = " +
                    (monotone ? "yes" : "no") + ", final rels " + rels};
}

std::pair<bool, std::string> determinism() {
    const std::string bin = ZKLAB_BIN;
    const fs::path tmp = fs::temp_directory_path() /
                         ("zklab_accept_" + std::to_string(::getpid()));
    fs::create_directories(tmp);
    const std::string common =
        " simulate --set model.L=6 --set model.radius=0.7"
        " --set model.lambda=0.3 --set sim.members=16 --set sim.t_final=0.2"
        " --set sim.dt=0.02 --seed 77 --out ";
    auto run = [&](const std::string& extra, const fs::path& out) {
        const std::string cmd =
            bin + common + out.string() + " " + extra + " >/dev/null 2>&1";
        return WEXITSTATUS(std::system(cmd.c_str()));
    };
    auto slurp = [](const fs::path& f) {
        std::ifstream in(f, std::ios::binary);
        std::ostringstream ss;
        ss << in.rdbuf();
        return ss.str();
    };
    const bool ok1 = run("--threads 1", tmp / "a") == 0;
    const bool ok2 = run("--threads 4", tmp / "b") == 0;
    const bool same = ok1 && ok2 &&
                      slurp(tmp / "a" / "stats.jsonl") ==
                          slurp(tmp / "b" / "stats.jsonl") &&
                      !slurp(tmp / "a" / "stats.jsonl").empty();
    fs::remove_all(tmp);
    return {same, same ? "byte-identical across --threads 1/4" : "mismatch"};
}

}  // namespace

int main() {
    criterion(1, "linear evolution matches the exact propagator",
              linear_exactness);
    criterion(2, "inviscid L2 mass is conserved", l2_conservation);
    criterion(3, "residual scales at order N+2 in the coupling",
              expansion_order);
    criterion(4, "couple expectation matches Monte Carlo (Wick)",
              wick_equivalence);
    criterion(5, "diagram invariants hold on 500 random couples",
              diagram_invariants);
    criterion(6, "one-node resonance counts obey the volume bound",
              onenode_bound);
    criterion(7, "Euler-Maclaurin identity for Gaussians d=1..3",
              euler_maclaurin);
    criterion(8, "lattice resonance sums match the continuum asymptotics",
              resonance_asymptotics);
    criterion(9, "kinetic closure: spectrum increments track the collision "
                 "operator",
              kinetic_closure);
    criterion(10, "reruns are byte-identical for any thread count",
              determinism);

    if (g_failures > 0) {
        std::cout << g_failures << " criterion(s) failed" << std::endl;
        return 1;
    }
    std::cout << "all criteria passed" << std::endl;
    return 0;
}
