#include "zklab/errors.hpp"
#include "zklab/counting.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "zklab/kernels.hpp"

namespace zk::counting {

namespace {

// Omega values over the ball for a query, evaluated through the batch
// kernels (identical results with or without SIMD).
std::vector<double> omega_table(const ResonanceQuery& q, const BallIndex& ball) {
    const std::size_t B = ball.size();
    const double L = q.spec.size;
    const int d = q.spec.dim;
    std::array<std::vector<double>, 3> c1, c2;
    for (int i = 0; i < d; ++i) {
        c1[static_cast<size_t>(i)].resize(B);
        c2[static_cast<size_t>(i)].resize(B);
    }
    for (std::size_t j = 0; j < B; ++j) {
        const IntVec K1 = ball.at(j);
        const IntVec K2 = q.K - K1;
        for (int i = 0; i < d; ++i) {
            c1[static_cast<size_t>(i)][j] = K1[i] / L;
            c2[static_cast<size_t>(i)][j] = K2[i] / L;
        }
    }
    auto comp = [&](int i) { return i < d ? c1[static_cast<size_t>(i)].data() : nullptr; };
    auto comp2 = [&](int i) { return i < d ? c2[static_cast<size_t>(i)].data() : nullptr; };
    const auto& b = q.beta.beta;
    std::vector<double> lam1(B), lam2(B);
    kernels::dispersion_batch(comp(0), comp(1), comp(2), b[0], b[1], b[2],
                              lam1.data(), B);
    kernels::dispersion_batch(comp2(0), comp2(1), comp2(2), b[0], b[1], b[2],
                              lam2.data(), B);
    const double lamk = dispersion(to_wave(q.K, L), q.beta);
    for (std::size_t j = 0; j < B; ++j) lam1[j] += lam2[j] - lamk;
    return lam1;
}

}  // namespace

std::size_t count_resonances(const ResonanceQuery& q, const BallIndex& ball) {
    if (q.K.is_zero()) throw std::invalid_argument("count_resonances: k = 0");
    if (q.window_T <= 0) throw std::invalid_argument("count_resonances: T <= 0");
    auto om = omega_table(q, ball);
    return kernels::count_in_window(om.data(), q.sigma, q.delta / q.window_T,
                                    om.size());
}

OneNodeBoundReport verify_onenode_bound(const ResonanceQuery& q,
                                        const BallIndex& ball, double theta) {
    OneNodeBoundReport r;
    r.count = count_resonances(q, ball);
    const double L = q.spec.size;
    const double kx = std::abs(q.K[0] / L);
    if (kx == 0.0) throw std::invalid_argument("verify_onenode_bound: k_x = 0");
    r.bound = std::pow(L, theta) * std::pow(L, q.spec.dim) / q.window_T / kx;
    r.ratio = static_cast<double>(r.count) / r.bound;
    r.exceeded = r.ratio > 1.0;
    return r;
}

namespace {

struct EqState {
    const CoupleEquationSystem* sys;
    const BallIndex* ball;
    std::vector<IntVec> value;
    std::vector<char> assigned;
    std::size_t count = 0;
    std::size_t visited = 0;
    std::size_t budget = 0;
};

// iota of edge e at node v: +1 pointing in (head), -1 pointing out.  Self
// loops contribute both signs, i.e. nothing.
bool node_fully_assigned(const EqState& st, int v, int& unassigned_edge) {
    unassigned_edge = -1;
    int missing = 0;
    const auto& c = st.sys->couple;
    for (std::size_t i = 0; i < c.edges.size(); ++i) {
        const auto& e = c.edges[i];
        if (e.tail != v && e.head != v) continue;
        if (!st.assigned[i]) {
            if (e.tail == e.head) return false;  // free self loop blocks
            ++missing;
            unassigned_edge = static_cast<int>(i);
        }
    }
    return missing == 0 ? true : (missing == 1 ? false : (unassigned_edge = -1, false));
}

bool edge_constraints_ok(const EqState& st, std::size_t ei) {
    const auto& sys = *st.sys;
    const auto& e = sys.couple.edges[ei];
    const IntVec& K = st.value[ei];
    if (st.ball->find(K) < 0) return false;
    if (e.normal) {
        auto it = sys.kappa.find(static_cast<int>(ei));
        if (it != sys.kappa.end()) {
            const double kx = std::abs(K[0] / sys.spec.size);
            if (!it->second.matches(kx)) return false;
        }
    }
    return true;
}

bool node_equations_ok(const EqState& st, int v) {
    const auto& sys = *st.sys;
    const auto& c = sys.couple;
    IntVec mc;
    mc.dim = sys.spec.dim;
    double omega = 0.0;
    const auto beta = AnisotropyCoefficients::isotropic(sys.spec.dim);
    for (std::size_t i = 0; i < c.edges.size(); ++i) {
        const auto& e = c.edges[i];
        if (e.tail != v && e.head != v) continue;
        if (e.tail == e.head) continue;  // self loop cancels
        const double lam = dispersion(to_wave(st.value[i], sys.spec.size), beta);
        if (e.head == v) {
            mc = mc + st.value[i];
            omega -= lam;
        } else {
            mc = mc - st.value[i];
            omega += lam;
        }
    }
    if (!mc.is_zero()) return false;
    const double sig =
        v < static_cast<int>(sys.sigma.size()) ? sys.sigma[static_cast<size_t>(v)] : 0.0;
    return std::abs(omega - sig) <= sys.delta / sys.T_max;
}

void eq_search(EqState& st);

void eq_assign_and_continue(EqState& st, std::size_t ei, const IntVec& K) {
    st.value[ei] = K;
    st.assigned[ei] = 1;
    bool ok = edge_constraints_ok(st, ei);
    const auto& c = st.sys->couple;
    // Any node whose incident edges just completed must satisfy its
    // equations.
    if (ok) {
        for (int v : {c.edges[ei].tail, c.edges[ei].head}) {
            if (v < 0) continue;
            int dummy;
            if (node_fully_assigned(st, v, dummy) && !node_equations_ok(st, v)) {
                ok = false;
                break;
            }
        }
    }
    if (ok) eq_search(st);
    st.assigned[ei] = 0;
}

void eq_search(EqState& st) {
    const auto& c = st.sys->couple;
    // Done?
    bool done = true;
    for (char a : st.assigned)
        if (!a) done = false;
    if (done) {
        ++st.count;
        return;
    }
    // Peel: a node with exactly one unassigned incident edge determines it.
    for (int v = 0; v < c.n_nodes; ++v) {
        int ei;
        if (!node_fully_assigned(st, v, ei) && ei >= 0) {
            // Solve MC at v for edge ei.
            IntVec sum;
            sum.dim = st.sys->spec.dim;
            for (std::size_t i = 0; i < c.edges.size(); ++i) {
                const auto& e = c.edges[i];
                if (e.tail != v && e.head != v) continue;
                if (static_cast<int>(i) == ei || e.tail == e.head) continue;
                sum = (e.head == v) ? sum + st.value[i] : sum - st.value[i];
            }
            // iota * k_ei = -sum.
            const auto& e = c.edges[static_cast<size_t>(ei)];
            IntVec K = (e.head == v) ? -sum : sum;
            if (++st.visited > st.budget)
                throw BudgetExceeded("brute_force_eq: budget exceeded");
            eq_assign_and_continue(st, static_cast<size_t>(ei), K);
            return;
        }
    }
    // Otherwise enumerate the lowest unassigned edge over the ball.
    std::size_t ei = 0;
    while (st.assigned[ei]) ++ei;
    if (st.visited + st.ball->size() > st.budget)
        throw BudgetExceeded("brute_force_eq: budget exceeded (estimated " +
                                 std::to_string(st.visited + st.ball->size()) +
                                 " states)");
    st.visited += st.ball->size();
    for (std::size_t b = 0; b < st.ball->size(); ++b)
        eq_assign_and_continue(st, ei, st.ball->at(b));
}

}  // namespace

std::size_t brute_force_eq(const CoupleEquationSystem& sys,
                           const BallIndex& ball, std::size_t budget) {
    if (sys.couple.n_nodes > 3)
        throw std::invalid_argument(
            "brute_force_eq: couples with more than 3 nodes exceed the "
            "enumeration budget");
    sys.couple.validate();
    EqState st;
    st.sys = &sys;
    st.ball = &ball;
    st.value.assign(sys.couple.edges.size(), IntVec{});
    for (auto& v : st.value) v.dim = sys.spec.dim;
    st.assigned.assign(sys.couple.edges.size(), 0);
    st.budget = budget;
    // Fixed legs first.
    for (std::size_t i = 0; i < sys.couple.edges.size(); ++i) {
        const auto& e = sys.couple.edges[i];
        if (e.leg != diag::LegKind::fixed_leg) continue;
        auto it = sys.fixed_leg_values.find(static_cast<int>(i));
        if (it == sys.fixed_leg_values.end())
            throw std::invalid_argument("brute_force_eq: missing fixed leg value");
        st.value[i] = it->second;
        st.assigned[i] = 1;
        if (!edge_constraints_ok(st, i)) return 0;
    }
    eq_search(st);
    return st.count;
}

double euler_maclaurin_check(const SmoothTestFunction& f) {
    const int d = f.dim;
    if (d < 1 || d > 3) throw std::invalid_argument("euler_maclaurin_check: dim");
    const int R = static_cast<int>(std::ceil(f.box_radius));

    // Lattice sum.
    double lhs = 0.0;
    std::array<int, 3> K{0, 0, 0};
    std::function<void(int)> sum_rec = [&](int axis) {
        if (axis == d) {
            std::array<double, 3> x{static_cast<double>(K[0]),
                                    static_cast<double>(K[1]),
                                    static_cast<double>(K[2])};
            lhs += f.value(x);
            return;
        }
        for (int v = -R; v <= R; ++v) {
            K[static_cast<size_t>(axis)] = v;
            sum_rec(axis + 1);
        }
        K[static_cast<size_t>(axis)] = 0;
    };
    sum_rec(0);

    // Gauss-Legendre nodes on [0,1] (8 point).
    static const double gl_x[8] = {
        0.01985507175123188, 0.10166676129318664, 0.2372337950418355,
        0.40828267875217505, 0.5917173212478249,  0.7627662049581645,
        0.8983332387068134,  0.9801449282487681};
    static const double gl_w[8] = {
        0.05061426814518813, 0.11119051722668724, 0.15685332293894364,
        0.18134189168918099, 0.18134189168918099, 0.15685332293894364,
        0.11119051722668724, 0.05061426814518813};

    // Cellwise integration of {x}^J * d^J f for a given multi-index J (all
    // zero J gives the plain integral).
    auto integral_term = [&](const std::array<int, 3>& J) {
        double total = 0.0;
        std::array<int, 3> cell{0, 0, 0};
        std::function<void(int, double, std::array<double, 3>&)> cell_rec =
            [&](int axis, double w, std::array<double, 3>& x) {
                if (axis == d) {
                    double weight = w;
                    for (int i = 0; i < d; ++i)
                        if (J[static_cast<size_t>(i)] == 1)
                            weight *= x[static_cast<size_t>(i)] -
                                      std::floor(x[static_cast<size_t>(i)]);
                    total += weight * f.partial(J, x);
                    return;
                }
                for (int g = 0; g < 8; ++g) {
                    x[static_cast<size_t>(axis)] =
                        cell[static_cast<size_t>(axis)] + gl_x[g];
                    cell_rec(axis + 1, w * gl_w[g], x);
                }
            };
        std::function<void(int)> cells = [&](int axis) {
            if (axis == d) {
                std::array<double, 3> x{0, 0, 0};
                cell_rec(0, 1.0, x);
                return;
            }
            for (int c = -R; c < R; ++c) {
                cell[static_cast<size_t>(axis)] = c;
                cells(axis + 1);
            }
        };
        cells(0);
        return total;
    };

    double rhs = integral_term({0, 0, 0});
    std::array<int, 3> J{0, 0, 0};
    std::function<void(int)> jrec = [&](int axis) {
        if (axis == d) {
            bool zero = true;
            for (int i = 0; i < d; ++i)
                if (J[static_cast<size_t>(i)]) zero = false;
            if (!zero) rhs += integral_term(J);
            return;
        }
        for (int b = 0; b <= 1; ++b) {
            J[static_cast<size_t>(axis)] = b;
            jrec(axis + 1);
        }
        J[static_cast<size_t>(axis)] = 0;
    };
    jrec(0);
    return std::abs(lhs - rhs);
}

double coarea_delta_integral(const WaveVector& k,
                             const std::function<double(const WaveVector&)>& F,
                             double F_radius, int slice_count,
                             int angle_count) {
    if (k.dim != 3)
        throw std::invalid_argument("coarea_delta_integral: d = 3 only");
    const double kx = k[0];
    if (kx == 0.0) throw std::invalid_argument("delta integral: k_x = 0");
    const double kpy = k[1];
    const double kpz = k[2];
    const double kperp2 = kpy * kpy + kpz * kpz;

    // Omega_k(k1) = kx*|k1p - ctr(c)|^2 - G(c) at fixed c = k1x, with
    // ctr = -(c - kx)/kx * kperp and
    // G(c) = kperp2*(c-kx)^2/kx - 3*kx*c^2 + (3*kx^2+kperp2)*c.
    auto G = [&](double c) {
        return kperp2 * (c - kx) * (c - kx) / kx - 3.0 * kx * c * c +
               (3.0 * kx * kx + kperp2) * c;
    };

    // Slice integrand: (1/(2|kx|)) * int_0^{2pi} F(c, ctr + r e(theta)) dtheta
    // with r = sqrt(G(c)/kx) when positive.
    auto slice = [&](double c) {
        const double r2 = G(c) / kx;
        if (r2 <= 0.0) return 0.0;
        const double r = std::sqrt(r2);
        const double cy = -(c - kx) / kx * kpy;
        const double cz = -(c - kx) / kx * kpz;
        double acc = 0.0;
        for (int a = 0; a < angle_count; ++a) {
            const double th = 2.0 * std::numbers::pi * a / angle_count;
            WaveVector w;
            w.dim = 3;
            w.c = {c, cy + r * std::cos(th), cz + r * std::sin(th)};
            acc += F(w);
        }
        acc *= 2.0 * std::numbers::pi / angle_count;  // periodic trapezoid
        // dl = r dtheta and |grad Omega| = 2|kx| r, so r cancels.
        return acc / (2.0 * std::abs(kx));
    };

    // Composite Simpson over c in [-F_radius, F_radius].
    int n = slice_count;
    if (n % 2) ++n;
    const double a = -F_radius, b = F_radius;
    const double h = (b - a) / n;
    double total = slice(a) + slice(b);
    for (int i = 1; i < n; ++i)
        total += slice(a + i * h) * (i % 2 ? 4.0 : 2.0);
    return total * h / 3.0;
}

double delta_integral_coarea(const AsymptoticsQuery& q) {
    if (q.spec.dim != 3)
        throw std::invalid_argument("delta_integral_coarea: d = 3 only");
    return coarea_delta_integral(to_wave(q.K, q.spec.size), q.F, q.F_radius,
                                 q.slice_count, q.angle_count);
}

AsymptoticsResult resonance_sum_asymptotics(const AsymptoticsQuery& q) {
    if (q.spec.dim != 3)
        throw std::invalid_argument("resonance_sum_asymptotics: d = 3 only");
    if (q.K[0] == 0)
        throw std::invalid_argument("resonance_sum_asymptotics: k_x = 0");
    const double L = q.spec.size;
    const auto beta = AnisotropyCoefficients::isotropic(3);
    const WaveVector wk = to_wave(q.K, L);
    const double lamk = dispersion(wk, beta);

    AsymptoticsResult res;
    const auto rmax = static_cast<long>(std::ceil(q.F_radius * L));
    for (long x = -rmax; x <= rmax; ++x)
        for (long y = -rmax; y <= rmax; ++y)
            for (long z = -rmax; z <= rmax; ++z) {
                WaveVector k1;
                k1.dim = 3;
                k1.c = {x / L, y / L, z / L};
                if (k1.norm2() > q.F_radius * q.F_radius) continue;
                const double Fv = q.F(k1);
                if (Fv == 0.0) continue;
                const WaveVector k2 = wk - k1;
                const double om =
                    dispersion(k1, beta) + dispersion(k2, beta) - lamk;
                res.lattice_sum += q.g(q.t * om) * Fv;
            }
    res.delta_integral = delta_integral_coarea(q);
    res.prediction =
        q.g_integral * std::pow(L, 3) / q.t * res.delta_integral;
    res.remainder_ratio =
        std::abs(res.lattice_sum - res.prediction) / std::pow(L, 2);
    return res;
}

}  // namespace zk::counting
