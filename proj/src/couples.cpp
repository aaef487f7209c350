#include <algorithm>
#include <numeric>
#include <stdexcept>

#include "zklab/couples.hpp"

namespace zk::diag {

int Couple::edge_count_internal() const {
    int c = 0;
    for (const auto& e : edges)
        if (e.tail >= 0 && e.head >= 0) ++c;
    return c;
}

int Couple::free_leg_count() const {
    int c = 0;
    for (const auto& e : edges)
        if (e.leg == LegKind::free_leg) ++c;
    return c;
}

int Couple::fixed_leg_count() const {
    int c = 0;
    for (const auto& e : edges)
        if (e.leg == LegKind::fixed_leg) ++c;
    return c;
}

int Couple::degree(int node) const {
    int d = 0;
    for (const auto& e : edges) {
        if (e.tail == node) ++d;
        if (e.head == node) ++d;
    }
    return d;
}

std::vector<int> Couple::incident(int node) const {
    std::vector<int> out;
    for (std::size_t i = 0; i < edges.size(); ++i)
        if (edges[i].tail == node || edges[i].head == node)
            out.push_back(static_cast<int>(i));
    return out;
}

bool Couple::connected() const {
    if (n_nodes <= 1) return true;
    std::vector<int> comp(static_cast<size_t>(n_nodes), -1);
    std::vector<int> stack{0};
    comp[0] = 0;
    while (!stack.empty()) {
        int u = stack.back();
        stack.pop_back();
        for (const auto& e : edges) {
            if (e.tail != u && e.head != u) continue;
            int v = e.other(u);
            if (v >= 0 && comp[static_cast<size_t>(v)] < 0) {
                comp[static_cast<size_t>(v)] = 0;
                stack.push_back(v);
            }
        }
    }
    return std::all_of(comp.begin(), comp.end(), [](int c) { return c == 0; });
}

void Couple::validate() const {
    for (const auto& e : edges) {
        if (e.tail < -1 || e.tail >= n_nodes || e.head < -1 || e.head >= n_nodes)
            throw std::logic_error("couple: edge endpoint out of range");
        const bool terminal = (e.tail < 0) || (e.head < 0);
        if (e.tail < 0 && e.head < 0)
            throw std::logic_error("couple: edge with two terminal ends");
        if (terminal != e.is_leg())
            throw std::logic_error("couple: leg flag inconsistent with endpoints");
    }
    for (int v = 0; v < n_nodes; ++v)
        if (degree(v) != 3)
            throw std::logic_error("couple: internal node degree != 3");
    // Degree identity 2*n_e + n_fx + n_fr = 3*n.
    if (2 * edge_count_internal() + fixed_leg_count() + free_leg_count() !=
        3 * n_nodes)
        throw std::logic_error("couple: degree identity violated");
    // A couple with at least one leg has at least two legs.
    const int legs = free_leg_count() + fixed_leg_count();
    if (legs == 1 && n_nodes > 0)
        throw std::logic_error("couple: single-leg couple impossible");
}

Couple build_couple(const BinaryTree& T, const BinaryTree& T2,
                    const Pairing& p) {
    const auto leaves1 = T.leaves();
    const auto leaves2 = T2.leaves();
    const int m1 = static_cast<int>(leaves1.size());
    const int m2 = static_cast<int>(leaves2.size());
    {
        std::vector<int> seen(static_cast<size_t>(m1 + m2), 0);
        for (auto [a, b] : p) {
            if (a < 0 || b < 0 || a >= m1 + m2 || b >= m1 + m2 || a == b)
                throw std::invalid_argument("build_couple: bad pairing");
            ++seen[static_cast<size_t>(a)];
            ++seen[static_cast<size_t>(b)];
        }
        for (int s : seen)
            if (s != 1) throw std::invalid_argument("build_couple: not a perfect matching");
    }

    Couple c;
    // Couple node ids for branch nodes: tree T first, preorder.
    std::vector<int> id1(T.nodes.size(), -1), id2(T2.nodes.size(), -1);
    int next = 0;
    for (std::size_t i = 0; i < T.nodes.size(); ++i)
        if (!T.nodes[i].is_leaf()) id1[i] = next++;
    for (std::size_t i = 0; i < T2.nodes.size(); ++i)
        if (!T2.nodes[i].is_leaf()) id2[i] = next++;
    c.n_nodes = next;

    // Inner edges (both ends branch nodes) are normal.  T keeps the downward
    // parent->child direction; T2 is flipped.
    for (std::size_t i = 0; i < T.nodes.size(); ++i) {
        const auto& n = T.nodes[i];
        if (n.is_leaf() || n.parent < 0) continue;
        c.edges.push_back({id1[static_cast<size_t>(n.parent)],
                           id1[i], true, LegKind::none});
    }
    for (std::size_t i = 0; i < T2.nodes.size(); ++i) {
        const auto& n = T2.nodes[i];
        if (n.is_leaf() || n.parent < 0) continue;
        c.edges.push_back({id2[i], id2[static_cast<size_t>(n.parent)],
                           true, LegKind::none});
    }
    // Root legs (normal unless the tree is a single leaf; that case is a
    // leaf edge handled through the pairing below).
    if (!T.nodes[0].is_leaf())
        c.edges.push_back({-1, id1[0], true, LegKind::fixed_leg});
    if (!T2.nodes[0].is_leaf())
        c.edges.push_back({id2[0], -1, true, LegKind::fixed_leg});

    // Merged leaf-pair edges.  For a leaf of T the outward end of its edge is
    // its branch parent (or the terminal when T is a single leaf); same for
    // T2 after the flip.
    auto anchor = [&](int combined) -> int {
        if (combined < m1) {
            int leaf = leaves1[static_cast<size_t>(combined)];
            int par = T.nodes[static_cast<size_t>(leaf)].parent;
            return par < 0 ? -1 : id1[static_cast<size_t>(par)];
        }
        int leaf = leaves2[static_cast<size_t>(combined - m1)];
        int par = T2.nodes[static_cast<size_t>(leaf)].parent;
        return par < 0 ? -1 : id2[static_cast<size_t>(par)];
    };
    Pairing sorted = p;
    for (auto& pr : sorted)
        if (pr.first > pr.second) std::swap(pr.first, pr.second);
    std::sort(sorted.begin(), sorted.end());
    for (auto [a, b] : sorted) {
        const int u = anchor(a);
        const int v = anchor(b);
        if (u < 0 && v < 0) continue;  // both trees single leaves: fused legs
        CoupleEdge e;
        e.tail = u;
        e.head = v;
        e.normal = false;
        e.leg = (u < 0 || v < 0) ? LegKind::fixed_leg : LegKind::none;
        c.edges.push_back(e);
    }
    c.validate();
    return c;
}

IntVec leg_momentum_sum(const Couple& c, const EdgeAssignment& assignment) {
    if (assignment.size() != c.edges.size())
        throw std::invalid_argument("leg_momentum_sum: assignment size mismatch");
    const int dim = c.edges.empty() ? 3 : assignment.empty() ? 3 : assignment[0].dim;
    for (int v = 0; v < c.n_nodes; ++v) {
        IntVec s;
        s.dim = dim;
        for (std::size_t i = 0; i < c.edges.size(); ++i) {
            const auto& e = c.edges[i];
            if (e.head == v) s = s + assignment[i];
            if (e.tail == v) s = s - assignment[i];
        }
        if (!s.is_zero())
            throw std::invalid_argument(
                "leg_momentum_sum: conservation violated at node " +
                std::to_string(v));
    }
    IntVec total;
    total.dim = dim;
    for (std::size_t i = 0; i < c.edges.size(); ++i) {
        const auto& e = c.edges[i];
        if (!e.is_leg()) continue;
        // iota relative to the attachment node: +1 when pointing into it.
        if (e.tail < 0)
            total = total + assignment[i];
        else
            total = total - assignment[i];
    }
    return total;
}

CutResult cut(const Couple& c, const CutSpec& spec) {
    std::vector<char> is_cut(c.edges.size(), 0);
    for (const auto& en : spec.entries) {
        if (en.edge < 0 || en.edge >= static_cast<int>(c.edges.size()))
            throw std::invalid_argument("cut: edge id out of range");
        const auto& e = c.edges[static_cast<size_t>(en.edge)];
        if (e.is_leg()) throw std::invalid_argument("cut: cannot cut a leg");
        if (e.tail == e.head)
            throw std::invalid_argument("cut: cannot cut a self loop");
        if (is_cut[static_cast<size_t>(en.edge)])
            throw std::invalid_argument("cut: duplicate edge");
        is_cut[static_cast<size_t>(en.edge)] = 1;
    }
    if (spec.entries.empty()) throw std::invalid_argument("cut: empty cut");

    // Components over the remaining edges.
    std::vector<int> comp(static_cast<size_t>(c.n_nodes), -1);
    int ncomp = 0;
    for (int s = 0; s < c.n_nodes; ++s) {
        if (comp[static_cast<size_t>(s)] >= 0) continue;
        comp[static_cast<size_t>(s)] = ncomp;
        std::vector<int> stack{s};
        while (!stack.empty()) {
            int u = stack.back();
            stack.pop_back();
            for (std::size_t i = 0; i < c.edges.size(); ++i) {
                if (is_cut[i]) continue;
                const auto& e = c.edges[i];
                if (e.tail != u && e.head != u) continue;
                int v = e.other(u);
                if (v >= 0 && comp[static_cast<size_t>(v)] < 0) {
                    comp[static_cast<size_t>(v)] = ncomp;
                    stack.push_back(v);
                }
            }
        }
        ++ncomp;
    }
    if (ncomp < 2) throw std::invalid_argument("cut: does not disconnect");
    for (const auto& en : spec.entries) {
        const auto& e = c.edges[static_cast<size_t>(en.edge)];
        if (comp[static_cast<size_t>(e.tail)] == comp[static_cast<size_t>(e.head)])
            throw std::invalid_argument("cut: edge inside one component");
    }

    CutResult res;
    res.components.resize(static_cast<size_t>(ncomp));
    res.edge_origin.resize(static_cast<size_t>(ncomp));
    res.node_origin.resize(static_cast<size_t>(ncomp));
    std::vector<int> local(static_cast<size_t>(c.n_nodes), -1);
    for (int v = 0; v < c.n_nodes; ++v) {
        auto& comp_c = res.components[static_cast<size_t>(comp[static_cast<size_t>(v)])];
        local[static_cast<size_t>(v)] = comp_c.n_nodes++;
        res.node_origin[static_cast<size_t>(comp[static_cast<size_t>(v)])].push_back(v);
    }
    auto push_edge = [&](int ci, CoupleEdge e, int origin) {
        res.components[static_cast<size_t>(ci)].edges.push_back(e);
        res.edge_origin[static_cast<size_t>(ci)].push_back(origin);
    };
    std::vector<CutSpec::Entry> cut_of(c.edges.size());
    for (const auto& en : spec.entries) cut_of[static_cast<size_t>(en.edge)] = en;
    for (std::size_t i = 0; i < c.edges.size(); ++i) {
        const auto& e = c.edges[i];
        if (!is_cut[i]) {
            const int node = e.attach_node();
            const int ci = comp[static_cast<size_t>(node)];
            CoupleEdge ne = e;
            ne.tail = e.tail < 0 ? -1 : local[static_cast<size_t>(e.tail)];
            ne.head = e.head < 0 ? -1 : local[static_cast<size_t>(e.head)];
            push_edge(ci, ne, static_cast<int>(i));
            continue;
        }
        const auto& en = cut_of[i];
        const int ct = comp[static_cast<size_t>(e.tail)];
        const int ch = comp[static_cast<size_t>(e.head)];
        CoupleEdge tail_half;  // keeps the tail, outward terminal head
        tail_half.tail = local[static_cast<size_t>(e.tail)];
        tail_half.head = -1;
        tail_half.normal = e.normal;
        tail_half.leg = en.free_at_tail ? LegKind::free_leg : LegKind::fixed_leg;
        CoupleEdge head_half;
        head_half.tail = -1;
        head_half.head = local[static_cast<size_t>(e.head)];
        head_half.normal = e.normal;
        head_half.leg = en.free_at_tail ? LegKind::fixed_leg : LegKind::free_leg;
        push_edge(ct, tail_half, static_cast<int>(i));
        push_edge(ch, head_half, static_cast<int>(i));
    }
    for (auto& comp_c : res.components) comp_c.validate();
    return res;
}

bool check_property_P(const Couple& c) {
    if (!c.connected()) return false;
    if (c.free_leg_count() != 1) return false;
    for (const auto& e : c.edges)
        if (e.leg == LegKind::fixed_leg && e.normal) return true;
    return false;
}

bool check_weak_property_P(const Couple& c) {
    if (check_property_P(c)) return true;
    int free_normal = 0;
    for (const auto& e : c.edges)
        if (e.leg == LegKind::free_leg && e.normal) ++free_normal;
    return free_normal == 1 && c.fixed_leg_count() >= 1;
}

bool vanishes_identically(const Couple& c) {
    for (std::size_t cut_e = 0; cut_e < c.edges.size(); ++cut_e) {
        const auto& e = c.edges[cut_e];
        if (e.is_leg() || e.tail == e.head) continue;
        // Flood fill from e.head avoiding the candidate bridge.
        std::vector<char> seen(static_cast<std::size_t>(c.n_nodes), 0);
        std::vector<int> stack{e.head};
        seen[static_cast<std::size_t>(e.head)] = 1;
        while (!stack.empty()) {
            const int v = stack.back();
            stack.pop_back();
            for (int ei : c.incident(v)) {
                if (ei == static_cast<int>(cut_e)) continue;
                const auto& e2 = c.edges[static_cast<std::size_t>(ei)];
                if (e2.is_leg() || e2.tail == e2.head) continue;
                const int w = e2.other(v);
                if (seen[static_cast<std::size_t>(w)]) continue;
                seen[static_cast<std::size_t>(w)] = 1;
                stack.push_back(w);
            }
        }
        if (seen[static_cast<std::size_t>(e.tail)]) continue;  // not a bridge
        // Check each side for legs; a leg-free side forces zero momentum.
        for (int side = 0; side < 2; ++side) {
            bool has_leg = false;
            for (const auto& e2 : c.edges) {
                if (!e2.is_leg()) continue;
                const bool in_head_side =
                    seen[static_cast<std::size_t>(e2.attach_node())];
                if (in_head_side == (side == 0)) has_leg = true;
            }
            if (!has_leg) return true;
        }
    }
    return false;
}

TerminalKind classify_terminal(const Couple& c) {
    if (c.n_nodes == 0) return TerminalKind::fused;
    const int fr = c.free_leg_count();
    const int fx = c.fixed_leg_count();
    if (fr == 2 && fx == 1) return TerminalKind::C_I;
    if (fr == 1 && fx == 2) return TerminalKind::C_II;
    throw std::logic_error("terminal component is neither C_I nor C_II");
}

}  // namespace zk::diag
