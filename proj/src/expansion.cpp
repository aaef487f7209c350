#include "zklab/expansion.hpp"

#include <algorithm>
#include <stdexcept>
#include <unordered_map>

#include "zklab/couples.hpp"

namespace zk {

using cd = std::complex<double>;

std::vector<cd> cumulative_integral(const std::vector<cd>& f, double h) {
    const std::size_t n = f.size();
    if (n < 4)
        throw std::invalid_argument("cumulative_integral: need >= 4 samples");
    std::vector<cd> F(n);
    F[0] = 0.0;
    F[1] = (h / 24.0) * (9.0 * f[0] + 19.0 * f[1] - 5.0 * f[2] + f[3]);
    F[2] = (h / 3.0) * (f[0] + 4.0 * f[1] + f[2]);
    for (std::size_t j = 3; j < n; ++j) {
        if (j % 2 == 0)
            F[j] = F[j - 2] + (h / 3.0) * (f[j - 2] + 4.0 * f[j - 1] + f[j]);
        else
            F[j] = F[j - 3] + (3.0 * h / 8.0) * (f[j - 3] + 3.0 * f[j - 2] +
                                                 3.0 * f[j - 1] + f[j]);
    }
    return F;
}

FieldHistory FieldHistory::constant(const SpectralField& xi, const TimeGrid& g) {
    FieldHistory h;
    h.ball = xi.ball;
    h.grid = g;
    h.frames.assign(static_cast<size_t>(g.count()), xi.values);
    return h;
}

SpectralField FieldHistory::at(int j) const {
    SpectralField f(*ball);
    f.values = frames[static_cast<size_t>(j)];
    f.time = grid.node(j);
    return f;
}

PairTable::PairTable(const BallIndex& ball) : table_(ball.size()) {
    const std::size_t B = ball.size();
    for (std::size_t a = 0; a < B; ++a)
        for (std::size_t b = 0; b < B; ++b) {
            const auto k = ball.find(ball.at(a) + ball.at(b));
            if (k >= 0)
                table_[static_cast<std::size_t>(k)].push_back(
                    {static_cast<std::int32_t>(a), static_cast<std::int32_t>(b)});
        }
}

ExpansionContext::ExpansionContext(const BallIndex& ball,
                                   const ModelParams& params,
                                   const TimeGrid& grid)
    : ball_(&ball), params_(params), grid_(grid), pairs_(ball) {
    if (params.dim != ball.spec().dim || params.L != ball.spec().size)
        throw std::invalid_argument("expansion: params/ball mismatch");
    if (grid.steps < 3)
        throw std::invalid_argument("expansion: time grid too coarse");
}

namespace {

// Time-cumulative Duhamel integral for one output mode: given the per-node
// convolution samples conv[j] (already including e^{i tau_j Omega} factors
// per pair), returns out[j] = prefac * kx * e^{-nu|k|^2 tau_j} *
// Int_0^{tau_j} conv(s) e^{nu|k|^2 s} ds.
std::vector<cd> mode_integral(std::vector<cd> conv, double kx, double k2,
                              const TimeGrid& g, const ModelParams& p) {
    const double nuk2 = p.nu * k2;
    for (int j = 0; j < g.count(); ++j)
        conv[static_cast<size_t>(j)] *= std::exp(nuk2 * g.node(j));
    auto F = cumulative_integral(conv, g.dt());
    const cd prefac = cd(0.0, 1.0) * p.lambda * std::pow(p.L, -p.dim) * kx;
    for (int j = 0; j < g.count(); ++j)
        F[static_cast<size_t>(j)] *= prefac * std::exp(-nuk2 * g.node(j));
    return F;
}

}  // namespace

FieldHistory ExpansionContext::duhamel_history(const FieldHistory& a,
                                               const FieldHistory& b) {
    if (a.ball != ball_ || b.ball != ball_)
        throw std::invalid_argument("duhamel: mismatched lattices");
    const int G = grid_.count();
    const double L = params_.L;
    const auto beta = AnisotropyCoefficients::isotropic(params_.dim);

    FieldHistory out;
    out.ball = ball_;
    out.grid = grid_;
    out.frames.assign(static_cast<size_t>(G),
                      std::vector<cd>(ball_->size(), cd(0.0, 0.0)));

    std::vector<cd> conv(static_cast<size_t>(G));
    for (std::size_t k = 0; k < ball_->size(); ++k) {
        const auto& plist = pairs_.pairs_for(k);
        if (plist.empty()) continue;
        std::fill(conv.begin(), conv.end(), cd(0.0, 0.0));
        const WaveVector wk = to_wave(ball_->at(k), L);
        const double lam_k = dispersion(wk, beta);
        for (const auto& pr : plist) {
            const auto ia = static_cast<std::size_t>(pr.a);
            const auto ib = static_cast<std::size_t>(pr.b);
            const double om = dispersion(to_wave(ball_->at(ia), L), beta) +
                              dispersion(to_wave(ball_->at(ib), L), beta) -
                              lam_k;
            const cd rot = std::exp(cd(0.0, om * grid_.dt()));
            cd phase(1.0, 0.0);
            for (int j = 0; j < G; ++j) {
                conv[static_cast<size_t>(j)] +=
                    a.frames[static_cast<size_t>(j)][ia] *
                    b.frames[static_cast<size_t>(j)][ib] * phase;
                phase *= rot;
            }
        }
        auto F = mode_integral(conv, wk.kx(), wk.norm2(), grid_, params_);
        for (int j = 0; j < G; ++j)
            out.frames[static_cast<size_t>(j)][k] = F[static_cast<size_t>(j)];
    }

    if (record_truncation_) {
        // Recompute the modes pushed outside the ball by the convolution.
        std::unordered_map<IntVec, std::vector<cd>, IntVecHash> outside;
        const std::size_t B = ball_->size();
        for (std::size_t ia = 0; ia < B; ++ia)
            for (std::size_t ib = 0; ib < B; ++ib) {
                const IntVec K = ball_->at(ia) + ball_->at(ib);
                if (ball_->find(K) >= 0) continue;
                auto& acc = outside[K];
                if (acc.empty()) acc.assign(static_cast<size_t>(G), cd(0.0, 0.0));
                const WaveVector wk = to_wave(K, L);
                const double om =
                    dispersion(to_wave(ball_->at(ia), L), beta) +
                    dispersion(to_wave(ball_->at(ib), L), beta) -
                    dispersion(wk, beta);
                for (int j = 0; j < G; ++j)
                    acc[static_cast<size_t>(j)] +=
                        a.frames[static_cast<size_t>(j)][ia] *
                        b.frames[static_cast<size_t>(j)][ib] *
                        std::exp(cd(0.0, om * grid_.node(j)));
            }
        TruncationRecord rec;
        for (auto& [K, conv_out] : outside) {
            const WaveVector wk = to_wave(K, L);
            auto F = mode_integral(std::move(conv_out), wk.kx(), wk.norm2(),
                                   grid_, params_);
            const double m = std::norm(F.back());
            if (m > 0) {
                rec.mass += m;
                ++rec.modes;
            }
        }
        truncation_ = rec;
    }
    return out;
}

SpectralField ExpansionContext::duhamel(const FieldHistory& a,
                                        const FieldHistory& b, int j_end) {
    auto h = duhamel_history(a, b);
    return h.at(j_end < 0 ? grid_.steps : j_end);
}

std::string tree_key(const diag::BinaryTree& T) {
    std::string s;
    std::function<void(int)> rec = [&](int i) {
        const auto& n = T.nodes[static_cast<size_t>(i)];
        if (n.is_leaf()) {
            s += '.';
            return;
        }
        s += '(';
        rec(n.left);
        rec(n.right);
        s += ')';
    };
    rec(0);
    return s;
}

namespace {

std::uint64_t field_signature(const SpectralField& xi) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto mix = [&](std::uint64_t v) {
        h ^= v;
        h *= 0x100000001b3ULL;
    };
    mix(static_cast<std::uint64_t>(xi.values.size()));
    for (const auto& z : xi.values) {
        std::uint64_t re, im;
        double zr = z.real(), zi = z.imag();
        static_assert(sizeof(double) == 8);
        __builtin_memcpy(&re, &zr, 8);
        __builtin_memcpy(&im, &zi, 8);
        mix(re);
        mix(im);
    }
    return h;
}

}  // namespace

FieldHistory ExpansionContext::tree_history(const diag::BinaryTree& T,
                                            const SpectralField& xi) {
    const auto sig = field_signature(xi);
    if (sig != memo_sig_) {
        memo_.clear();
        memo_sig_ = sig;
    }
    const std::string key = tree_key(T);
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;

    FieldHistory result;
    if (T.nodes[0].is_leaf()) {
        result = FieldHistory::constant(xi, grid_);
    } else {
        // Subtrees share the memo through recursive calls.
        diag::BinaryTree left, right;
        std::function<int(diag::BinaryTree&, int, int)> copy =
            [&](diag::BinaryTree& dst, int si, int parent) {
                const int id = static_cast<int>(dst.nodes.size());
                dst.nodes.push_back({parent, -1, -1});
                const auto& n = T.nodes[static_cast<size_t>(si)];
                if (!n.is_leaf()) {
                    dst.nodes[static_cast<size_t>(id)].left =
                        copy(dst, n.left, id);
                    dst.nodes[static_cast<size_t>(id)].right =
                        copy(dst, n.right, id);
                }
                return id;
            };
        copy(left, T.nodes[0].left, -1);
        copy(right, T.nodes[0].right, -1);
        auto hl = tree_history(left, xi);
        auto hr = tree_history(right, xi);
        result = duhamel_history(hl, hr);
    }
    memo_[key] = result;
    return result;
}

SpectralField ExpansionContext::tree_term(const diag::BinaryTree& T,
                                          const SpectralField& xi, int j_end) {
    return tree_history(T, xi).at(j_end < 0 ? grid_.steps : j_end);
}

FieldHistory ExpansionContext::approximate_solution_history(
    int N, const SpectralField& xi) {
    if (N < 0) throw std::invalid_argument("approximate_solution: N < 0");
    FieldHistory sum = FieldHistory::constant(xi, grid_);
    for (int l = 1; l <= N; ++l)
        for (const auto& T : diag::trees_with_branches(l)) {
            auto h = tree_history(T, xi);
            for (std::size_t j = 0; j < sum.frames.size(); ++j)
                for (std::size_t m = 0; m < sum.frames[j].size(); ++m)
                    sum.frames[j][m] += h.frames[j][m];
        }
    return sum;
}

SpectralField ExpansionContext::approximate_solution(int N,
                                                     const SpectralField& xi,
                                                     int j_end) {
    return approximate_solution_history(N, xi).at(j_end < 0 ? grid_.steps
                                                            : j_end);
}

SpectralField ExpansionContext::residual(int N, const SpectralField& xi) {
    auto phi = approximate_solution_history(N, xi);
    auto t_phi = duhamel(phi, phi);
    SpectralField r(*ball_);
    r.time = grid_.t_final;
    const auto& last = phi.frames.back();
    for (std::size_t m = 0; m < r.values.size(); ++m)
        r.values[m] = xi.values[m] + t_phi.values[m] - last[m];
    return r;
}

SpectralField ExpansionContext::apply_linearized(const diag::BinaryTree& T,
                                                 const SpectralField& xi,
                                                 const FieldHistory& w) {
    return duhamel(tree_history(T, xi), w);
}

std::complex<double> ExpansionContext::coefficient_H(
    const diag::BinaryTree& T, const std::vector<IntVec>& leaf_momenta,
    int j_end) {
    const auto leaves = T.leaves();
    if (leaf_momenta.size() != leaves.size())
        throw std::invalid_argument("coefficient_H: wrong leaf count");
    const int G = grid_.count();
    const double L = params_.L;
    const auto beta = AnisotropyCoefficients::isotropic(params_.dim);
    std::unordered_map<int, std::size_t> leaf_slot;
    for (std::size_t i = 0; i < leaves.size(); ++i) leaf_slot[leaves[i]] = i;

    // Edge momentum above node i = sum of its leaf momenta.
    std::function<IntVec(int)> edge_K = [&](int i) -> IntVec {
        const auto& n = T.nodes[static_cast<size_t>(i)];
        if (n.is_leaf()) return leaf_momenta[leaf_slot.at(i)];
        return edge_K(n.left) + edge_K(n.right);
    };

    std::function<std::vector<cd>(int)> eval = [&](int i) -> std::vector<cd> {
        const auto& n = T.nodes[static_cast<size_t>(i)];
        if (n.is_leaf()) return std::vector<cd>(static_cast<size_t>(G), cd(1.0, 0.0));
        auto vl = eval(n.left);
        auto vr = eval(n.right);
        const IntVec K = edge_K(i);
        const WaveVector wk = to_wave(K, L);
        const double om = dispersion(to_wave(edge_K(n.left), L), beta) +
                          dispersion(to_wave(edge_K(n.right), L), beta) -
                          dispersion(wk, beta);
        const double nuk2 = params_.nu * wk.norm2();
        std::vector<cd> integrand(static_cast<size_t>(G));
        for (int j = 0; j < G; ++j) {
            const double s = grid_.node(j);
            integrand[static_cast<size_t>(j)] =
                vl[static_cast<size_t>(j)] * vr[static_cast<size_t>(j)] *
                std::exp(cd(nuk2 * s, om * s));
        }
        auto F = cumulative_integral(integrand, grid_.dt());
        for (int j = 0; j < G; ++j)
            F[static_cast<size_t>(j)] *=
                wk.kx() * std::exp(-nuk2 * grid_.node(j));
        return F;
    };
    auto v = eval(0);
    return v[static_cast<size_t>(j_end < 0 ? grid_.steps : j_end)];
}

double ExpansionContext::variance_via_couples(const diag::BinaryTree& T,
                                              const IntVec& K,
                                              const std::vector<double>& n_in) {
    const int l = T.branch_count();
    if (l > 2)
        throw std::invalid_argument(
            "variance_via_couples: budget exceeded, l(T) <= 2 required (got " +
            std::to_string(l) + ")");
    const int m = l + 1;  // leaves per side
    // Support of n_in drives the enumeration.
    std::vector<std::size_t> support;
    for (std::size_t i = 0; i < n_in.size(); ++i)
        if (n_in[i] > 0.0) support.push_back(i);
    if (support.empty()) return 0.0;

    const auto pairings = diag::enumerate_pairings(T, T);

    // Admissibility: every internal edge momentum must stay in the ball
    // (matching the convolution truncation of duhamel).
    std::vector<int> leaves = T.leaves();
    auto admissible = [&](const std::vector<IntVec>& lm) {
        std::function<std::pair<bool, IntVec>(int)> rec =
            [&](int i) -> std::pair<bool, IntVec> {
            const auto& n = T.nodes[static_cast<size_t>(i)];
            if (n.is_leaf()) {
                for (std::size_t s = 0; s < leaves.size(); ++s)
                    if (leaves[s] == i) return {true, lm[s]};
                return {false, IntVec{}};
            }
            auto [okl, Kl] = rec(n.left);
            auto [okr, Kr] = rec(n.right);
            if (!okl || !okr) return {false, IntVec{}};
            IntVec Ks = Kl + Kr;
            return {ball_->find(Ks) >= 0, Ks};
        };
        return rec(0).first;
    };

    double total = 0.0;
    std::vector<IntVec> a(static_cast<size_t>(m)), b(static_cast<size_t>(m));
    for (const auto& p : pairings) {
        // Split pairs by type; cross pairs carry the total momentum.
        struct PairRef {
            int x, y;
            int type;  // 0: both side A, 1: cross, 2: both side B
        };
        std::vector<PairRef> prs;
        int cross = 0;
        for (auto [x, y] : p) {
            const int type = (y < m) ? 0 : (x < m ? 1 : 2);
            if (type == 1) ++cross;
            prs.push_back({x, y, type});
        }
        // Cross pairs must sum to K; others contribute zero to both root
        // sums.  No cross pairs: admissible only when K = 0.
        if (cross == 0 && !K.is_zero()) continue;

        // Order: enumerate all but the last cross pair freely; the last one
        // is determined by the momentum constraint.  Type-0/2 pairs are
        // always free.
        std::vector<int> free_idx, last_cross;
        int seen_cross = 0;
        for (std::size_t i = 0; i < prs.size(); ++i) {
            if (prs[i].type == 1 && ++seen_cross == cross)
                last_cross.push_back(static_cast<int>(i));
            else
                free_idx.push_back(static_cast<int>(i));
        }

        std::vector<IntVec> v(prs.size());
        double weight_acc = 1.0;
        std::function<void(std::size_t, IntVec, double)> rec =
            [&](std::size_t fi, IntVec cross_sum, double w) {
                if (fi == free_idx.size()) {
                    if (!last_cross.empty()) {
                        IntVec rest = K - cross_sum;
                        const auto idx = ball_->find(rest);
                        if (idx < 0) return;
                        const double nv = n_in[static_cast<size_t>(idx)];
                        if (nv <= 0.0) return;
                        v[static_cast<size_t>(last_cross[0])] = rest;
                        w *= nv;
                    }
                    // Materialize leaf momenta on both sides.
                    for (std::size_t i = 0; i < prs.size(); ++i) {
                        const auto& pr = prs[i];
                        const IntVec& val = v[i];
                        if (pr.type == 0) {
                            a[static_cast<size_t>(pr.x)] = val;
                            a[static_cast<size_t>(pr.y)] = -val;
                        } else if (pr.type == 1) {
                            a[static_cast<size_t>(pr.x)] = val;
                            b[static_cast<size_t>(pr.y - m)] = val;
                        } else {
                            b[static_cast<size_t>(pr.x - m)] = val;
                            b[static_cast<size_t>(pr.y - m)] = -val;
                        }
                    }
                    // All leaves must live in the ball (negations might not).
                    for (const auto& kv : a)
                        if (ball_->find(kv) < 0) return;
                    for (const auto& kv : b)
                        if (ball_->find(kv) < 0) return;
                    if (!admissible(a) || !admissible(b)) return;
                    const cd Ha = coefficient_H(T, a);
                    const cd Hb = coefficient_H(T, b);
                    total += w * (Ha * std::conj(Hb)).real();
                    return;
                }
                const auto& pr = prs[static_cast<size_t>(free_idx[fi])];
                for (std::size_t si : support) {
                    const IntVec val = ball_->at(si);
                    v[static_cast<size_t>(free_idx[fi])] = val;
                    IntVec cs = cross_sum;
                    if (pr.type == 1) cs = cs + val;
                    rec(fi + 1, cs, w * n_in[si]);
                }
            };
        IntVec zero;
        zero.dim = K.dim;
        rec(0, zero, weight_acc);
        (void)weight_acc;
    }
    const double fac =
        std::pow(params_.lambda * std::pow(params_.L, -params_.dim), 2 * l);
    return fac * total;
}

}  // namespace zk
