#include <deque>
#include <stdexcept>

#include "zklab/couples.hpp"

// Recursive decomposition of a couple into single-node components.  Each
// step isolates the node carrying the lowest-id fixed normal leg; the case
// split depends on whether the unique free leg sits at that node and on how
// many components the remainder has.  When a produced component loses
// property P, the free normal leg is swapped with the lowest-id fixed leg
// (an exchange that keeps the solution counts of the component's equation
// system unchanged).

namespace zk::diag {

namespace {

int lowest_fixed_normal_leg(const Couple& c) {
    for (std::size_t i = 0; i < c.edges.size(); ++i)
        if (c.edges[i].leg == LegKind::fixed_leg && c.edges[i].normal)
            return static_cast<int>(i);
    return -1;
}

int lowest_leg(const Couple& c, LegKind kind, bool require_normal = false) {
    for (std::size_t i = 0; i < c.edges.size(); ++i)
        if (c.edges[i].leg == kind && (!require_normal || c.edges[i].normal))
            return static_cast<int>(i);
    return -1;
}

// Restore property P when only weak property P holds: the unique free
// normal leg becomes fixed, the lowest-id fixed leg becomes free.  Records
// local flip ids into `flips`.
void ensure_property_P(Couple& c, int output_index,
                       std::vector<std::pair<int, int>>& flips) {
    if (check_property_P(c)) return;
    if (!check_weak_property_P(c))
        throw std::logic_error("cutting: weak property P violated");
    const int fr = lowest_leg(c, LegKind::free_leg, /*require_normal=*/true);
    const int fx = lowest_leg(c, LegKind::fixed_leg);
    c.edges[static_cast<size_t>(fr)].leg = LegKind::fixed_leg;
    c.edges[static_cast<size_t>(fx)].leg = LegKind::free_leg;
    flips.emplace_back(output_index, fr);
    flips.emplace_back(output_index, fx);
    if (c.n_nodes > 1 && !check_property_P(c))
        throw std::logic_error("cutting: flip did not restore property P");
}

}  // namespace

DecompositionTrace cutting_algorithm(const Couple& input) {
    input.validate();
    DecompositionTrace trace;
    trace.input = input;
    if (input.n_nodes == 0) return trace;  // fused legs, nothing to cut
    if (input.free_leg_count() != 0 || input.fixed_leg_count() != 2)
        throw std::invalid_argument(
            "cutting_algorithm: input must have exactly two fixed legs");
    if (vanishes_identically(input))
        throw std::invalid_argument(
            "cutting_algorithm: couple vanishes identically "
            "(zero-momentum bridge)");

    // Step 0: one fixed leg becomes free.  Freeing either root leg leaves
    // the solution count unchanged, so take the lowest-id one that keeps a
    // fixed *normal* leg around (required by property P downstream).
    Couple c0 = input;
    {
        TraceStep s;
        s.case_tag = "step0";
        s.input = input;
        int leg = lowest_leg(c0, LegKind::fixed_leg);
        {
            Couple probe = c0;
            probe.edges[static_cast<size_t>(leg)].leg = LegKind::free_leg;
            if (!check_property_P(probe)) {
                for (std::size_t i = static_cast<size_t>(leg) + 1;
                     i < c0.edges.size(); ++i) {
                    if (c0.edges[i].leg != LegKind::fixed_leg) continue;
                    leg = static_cast<int>(i);
                    break;
                }
            }
        }
        c0.edges[static_cast<size_t>(leg)].leg = LegKind::free_leg;
        s.chosen_leg = leg;
        s.flips.emplace_back(0, leg);
        s.outputs.push_back(c0);
        std::vector<int> origin(c0.edges.size());
        for (std::size_t i = 0; i < origin.size(); ++i)
            origin[i] = static_cast<int>(i);
        s.output_edge_origin.push_back(origin);
        trace.steps.push_back(std::move(s));
    }
    if (!check_property_P(c0))
        throw std::logic_error("cutting: step 0 output violates property P");

    std::deque<Couple> work{c0};
    auto finish = [&](const Couple& c) {
        trace.terminals.push_back(c);
        trace.terminal_kinds.push_back(classify_terminal(c));
    };

    while (!work.empty()) {
        Couple c = work.front();
        work.pop_front();
        if (c.n_nodes <= 1) {
            finish(c);
            continue;
        }
        TraceStep s;
        s.input = c;
        const int leg = lowest_fixed_normal_leg(c);
        if (leg < 0) throw std::logic_error("cutting: no fixed normal leg");
        s.chosen_leg = leg;
        const int n = c.edges[static_cast<size_t>(leg)].attach_node();
        const int free_leg = lowest_leg(c, LegKind::free_leg);
        const bool free_at_n =
            free_leg >= 0 &&
            c.edges[static_cast<size_t>(free_leg)].attach_node() == n;

        CutSpec spec;
        if (free_at_n) {
            // Case 1.2: cut the single remaining edge at n; the half at n is
            // fixed, the far half free.
            s.case_tag = "1.2";
            for (int ei : c.incident(n)) {
                const auto& e = c.edges[static_cast<size_t>(ei)];
                if (e.is_leg() || e.tail == e.head) continue;
                spec.entries.push_back({ei, /*free_at_tail=*/e.tail != n});
            }
            if (spec.entries.size() != 1)
                throw std::logic_error("cutting: case 1.2 expects one edge");
        } else {
            // Cases 1.1 / 2: cut every edge joining n to the rest.  Free
            // sides are settled after we see the components.
            for (int ei : c.incident(n)) {
                const auto& e = c.edges[static_cast<size_t>(ei)];
                if (e.is_leg() || e.tail == e.head) continue;
                spec.entries.push_back({ei, /*free_at_tail=*/e.tail == n});
            }
        }
        for (const auto& en : spec.entries) s.cut_edges.push_back(en.edge);

        // Dry run to see the component structure, then fix the free sides
        // for case 2 (the component holding the original free leg gets the
        // fixed half) and rerun.
        CutResult first = cut(c, spec);
        const int ncomp = static_cast<int>(first.components.size());
        if (!free_at_n) {
            s.case_tag = (ncomp == 2) ? "1.1" : "2";
            if (ncomp > 2) {
                for (auto& en : spec.entries) {
                    const auto& e = c.edges[static_cast<size_t>(en.edge)];
                    // Which side of this edge is away from n?
                    const int far = (e.tail == n) ? e.head : e.tail;
                    // Find the component of `far` in the dry run and check
                    // whether it holds the free leg.
                    bool far_has_free = false;
                    for (int ci = 0; ci < ncomp; ++ci) {
                        const auto& orig = first.node_origin[static_cast<size_t>(ci)];
                        bool has_far = false;
                        for (int nv : orig)
                            if (nv == far) has_far = true;
                        if (!has_far) continue;
                        const auto& cc = first.components[static_cast<size_t>(ci)];
                        far_has_free = cc.free_leg_count() > 0;
                    }
                    // Free half at n when the far side already has the free
                    // leg, otherwise the far side receives it.
                    en.free_at_tail = far_has_free ? (e.tail == n) : (e.tail != n);
                }
            }
        }
        CutResult res = (free_at_n || ncomp == 2) ? std::move(first)
                                                  : cut(c, spec);

        // Order outputs with the isolated node's component first.
        int ln_comp = -1;
        for (int ci = 0; ci < static_cast<int>(res.components.size()); ++ci)
            for (int nv : res.node_origin[static_cast<size_t>(ci)])
                if (nv == n) ln_comp = ci;
        std::vector<int> order{ln_comp};
        for (int ci = 0; ci < static_cast<int>(res.components.size()); ++ci)
            if (ci != ln_comp) order.push_back(ci);

        for (std::size_t oi = 0; oi < order.size(); ++oi) {
            Couple comp = res.components[static_cast<size_t>(order[oi])];
            if (oi > 0) ensure_property_P(comp, static_cast<int>(oi), s.flips);
            s.outputs.push_back(comp);
            s.output_edge_origin.push_back(
                res.edge_origin[static_cast<size_t>(order[oi])]);
            if (oi == 0 || comp.n_nodes <= 1)
                finish(comp);
            else
                work.push_back(comp);
        }
        trace.steps.push_back(std::move(s));
    }
    return trace;
}

}  // namespace zk::diag
