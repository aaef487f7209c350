#include <doctest.h>

#include <random>
#include <vector>

#include "zklab/couples.hpp"
#include "zklab/trees.hpp"

using namespace zk;
using namespace zk::diag;

namespace {

// Independent oracle: produce an edge assignment satisfying every node
// equation by giving random values to a spanning co-tree (chords, self
// loops, all legs but one) and peeling the remaining unknowns.
EdgeAssignment solve_by_peeling(const Couple& c, std::mt19937& rng) {
    std::uniform_int_distribution<int> u(-5, 5);
    const std::size_t E = c.edges.size();
    EdgeAssignment val(E);
    std::vector<char> known(E, 0);
    for (auto& v : val) v.dim = 3;

    // Spanning tree over internal nodes by DFS on non-leg, non-self-loop
    // edges.
    std::vector<char> tree_edge(E, 0), visited(static_cast<std::size_t>(c.n_nodes), 0);
    std::vector<int> stack;
    if (c.n_nodes > 0) {
        stack.push_back(0);
        visited[0] = 1;
    }
    while (!stack.empty()) {
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
    // One designated leg stays unknown; everything outside the spanning
    // tree gets random integers.
    int held_leg = -1;
    for (std::size_t i = 0; i < E; ++i) {
        if (tree_edge[i]) continue;
        if (c.edges[i].is_leg() && held_leg < 0) {
            held_leg = static_cast<int>(i);
            continue;
        }
        for (int d = 0; d < 3; ++d) val[i][d] = u(rng);
        known[i] = 1;
    }
    // Peel: any node with exactly one unknown incident edge determines it.
    bool progress = true;
    while (progress) {
        progress = false;
        for (int v = 0; v < c.n_nodes; ++v) {
            int unknown = -1, count = 0;
            IntVec sum;
            sum.dim = 3;
            for (int ei : c.incident(v)) {
                const auto& e = c.edges[static_cast<std::size_t>(ei)];
                if (e.tail == e.head) continue;  // self loop cancels
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
            val[static_cast<std::size_t>(unknown)] =
                (e.head == v) ? -sum : sum;
            known[static_cast<std::size_t>(unknown)] = 1;
            progress = true;
        }
    }
    for (std::size_t i = 0; i < E; ++i) REQUIRE(known[i] == 1);
    return val;
}

Couple random_couple(std::mt19937& rng, int max_l = 3) {
    std::uniform_int_distribution<int> ul(0, max_l);
    for (;;) {
        const int l1 = ul(rng);
        int l2 = ul(rng);
        if ((l1 + l2) % 2 != 0) l2 += (l2 > 0) ? -1 : 1;  // even leaf total
        const auto ts1 = trees_with_branches(l1);
        const auto ts2 = trees_with_branches(l2);
        const auto& T1 = ts1[std::uniform_int_distribution<std::size_t>(
            0, ts1.size() - 1)(rng)];
        const auto& T2 = ts2[std::uniform_int_distribution<std::size_t>(
            0, ts2.size() - 1)(rng)];
        const auto ps = enumerate_pairings(T1, T2);
        const auto& p = ps[std::uniform_int_distribution<std::size_t>(
            0, ps.size() - 1)(rng)];
        Couple c = build_couple(T1, T2, p);
        if (c.n_nodes > 0) return c;
    }
}

}  // namespace

TEST_CASE("build_couple satisfies the structural invariants") {
    std::mt19937 rng(11);
    for (int it = 0; it < 50; ++it) {
        std::uniform_int_distribution<int> ul(0, 3);
        const int l1 = ul(rng);
        int l2 = ul(rng);
        if ((l1 + l2) % 2 != 0) l2 += (l2 > 0) ? -1 : 1;  // even leaf total
        const auto T1 = trees_with_branches(l1).front();
        const auto T2 = trees_with_branches(l2).back();
        const auto ps = enumerate_pairings(T1, T2);
        for (const auto& p : ps) {
            const Couple c = build_couple(T1, T2, p);
            c.validate();
            CHECK(c.n_nodes == l1 + l2);
            if (c.n_nodes == 0) {
                CHECK(c.edges.empty());
                continue;
            }
            CHECK(c.free_leg_count() == 0);
            CHECK(c.fixed_leg_count() == 2);
            // Degree identity.
            CHECK(2 * c.edge_count_internal() + c.fixed_leg_count() +
                      c.free_leg_count() ==
                  3 * c.n_nodes);
            // Any couple with a leg has at least two legs.
            CHECK(c.free_leg_count() + c.fixed_leg_count() >= 2);
        }
    }
}

TEST_CASE("leg momentum sum vanishes on valid assignments") {
    std::mt19937 rng(22);
    for (int it = 0; it < 50; ++it) {
        const Couple c = random_couple(rng);
        if (!c.connected()) continue;
        const auto val = solve_by_peeling(c, rng);
        const IntVec s = leg_momentum_sum(c, val);
        CHECK(s.is_zero());
    }
}

TEST_CASE("leg_momentum_sum rejects a violated node equation") {
    std::mt19937 rng(33);
    Couple c = random_couple(rng);
    while (!c.connected() || c.edges.empty()) c = random_couple(rng);
    auto val = solve_by_peeling(c, rng);
    val[0][0] += 1;  // break one equation
    CHECK_THROWS_AS(leg_momentum_sum(c, val), std::invalid_argument);
}

TEST_CASE("the two-node double-edge couple and its cut") {
    const auto T = trees_with_branches(1).front();
    const Pairing cross{{0, 2}, {1, 3}};
    const Couple c = build_couple(T, T, cross);
    REQUIRE(c.n_nodes == 2);
    CHECK(c.edge_count_internal() == 2);
    CHECK(c.fixed_leg_count() == 2);
    CHECK(c.connected());
    CHECK_FALSE(check_property_P(c));  // no free leg

    // Cutting both parallel edges splits it into two single-node couples.
    CutSpec spec;
    for (std::size_t i = 0; i < c.edges.size(); ++i)
        if (!c.edges[i].is_leg())
            spec.entries.push_back({static_cast<int>(i), true});
    REQUIRE(spec.entries.size() == 2);
    const auto res = cut(c, spec);
    REQUIRE(res.components.size() == 2);
    int total_nodes = 0, total_chi = 0;
    for (const auto& comp : res.components) {
        comp.validate();
        total_nodes += comp.n_nodes;
        total_chi += comp.chi();
        CHECK(2 * comp.edge_count_internal() + comp.fixed_leg_count() +
                  comp.free_leg_count() ==
              3 * comp.n_nodes);
    }
    CHECK(total_nodes == c.n_nodes);
    CHECK(total_chi == c.chi());  // chi additivity
}

TEST_CASE("cuts that do not disconnect are rejected") {
    const auto T = trees_with_branches(1).front();
    const Couple c = build_couple(T, T, {{0, 2}, {1, 3}});
    CutSpec empty;
    CHECK_THROWS_AS(cut(c, empty), std::invalid_argument);
    CutSpec one;
    for (std::size_t i = 0; i < c.edges.size(); ++i)
        if (!c.edges[i].is_leg()) {
            one.entries.push_back({static_cast<int>(i), true});
            break;
        }
    CHECK_THROWS_AS(cut(c, one), std::invalid_argument);
}

TEST_CASE("chi additivity on random couples and random valid cuts") {
    std::mt19937 rng(44);
    int tested = 0;
    for (int it = 0; it < 200 && tested < 40; ++it) {
        const Couple c = random_couple(rng);
        if (!c.connected() || c.n_nodes < 2) continue;
        // Cut all non-leg, non-self-loop edges at node 0.
        CutSpec spec;
        for (int ei : c.incident(0)) {
            const auto& e = c.edges[static_cast<std::size_t>(ei)];
            if (e.is_leg() || e.tail == e.head) continue;
            spec.entries.push_back({ei, e.tail == 0});
        }
        if (spec.entries.empty()) continue;
        CutResult res;
        try {
            res = cut(c, spec);
        } catch (const std::invalid_argument&) {
            continue;  // this particular cut did not disconnect
        } catch (const std::logic_error&) {
            continue;  // a component is not a valid couple (single leg)
        }
        int chi = 0, nodes = 0;
        for (const auto& comp : res.components) {
            comp.validate();
            chi += comp.chi();
            nodes += comp.n_nodes;
        }
        CHECK(chi == c.chi());
        CHECK(nodes == c.n_nodes);
        ++tested;
    }
    CHECK(tested >= 20);
}

TEST_CASE("property P and weak property P classify hand-built couples") {
    // Single node, one free leg + two fixed legs (one normal): C_II shape.
    Couple cII;
    cII.n_nodes = 1;
    cII.edges = {
        {0, -1, true, LegKind::fixed_leg},
        {0, -1, false, LegKind::fixed_leg},
        {-1, 0, false, LegKind::free_leg},
    };
    cII.validate();
    CHECK(check_property_P(cII));
    CHECK(check_weak_property_P(cII));
    CHECK(classify_terminal(cII) == TerminalKind::C_II);

    // Single node, two free legs + one fixed leg: C_I shape, not P.
    Couple cI;
    cI.n_nodes = 1;
    cI.edges = {
        {0, -1, true, LegKind::fixed_leg},
        {0, -1, false, LegKind::free_leg},
        {-1, 0, false, LegKind::free_leg},
    };
    cI.validate();
    CHECK_FALSE(check_property_P(cI));  // two free legs
    CHECK(classify_terminal(cI) == TerminalKind::C_I);
}

TEST_CASE("zero-node couple from two single leaves") {
    const auto leaf = trees_with_branches(0).front();
    const Couple c = build_couple(leaf, leaf, {{0, 1}});
    CHECK(c.n_nodes == 0);
    CHECK(c.edges.empty());
    CHECK(classify_terminal(c) == TerminalKind::fused);
}
