#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "zklab/lattice.hpp"
#include "zklab/trees.hpp"

namespace zk::diag {

enum class LegKind : std::uint8_t { none, free_leg, fixed_leg };

// Directed edge of a couple.  tail/head are internal node ids, -1 for a
// terminal end; a leg has exactly one terminal end.  `normal` marks edges
// inherited from the inner (non-leaf) part of the source trees; merged
// leaf-pair edges are not normal.
struct CoupleEdge {
    int tail = -1;
    int head = -1;
    bool normal = false;
    LegKind leg = LegKind::none;

    bool is_leg() const { return leg != LegKind::none; }
    int attach_node() const { return tail >= 0 ? tail : head; }
    int other(int node) const { return tail == node ? head : tail; }
};

// Degree-{1,3} multigraph produced by gluing two trees along a pairing, or
// by cutting such a glue.  The degenerate zero-node couple (two single-leaf
// trees glued) has an empty edge list.
struct Couple {
    int n_nodes = 0;
    std::vector<CoupleEdge> edges;

    int edge_count_internal() const;  // both ends internal (incl. self loops)
    int free_leg_count() const;
    int fixed_leg_count() const;
    // chi = n_e + n_fr - n, additive across cuts.
    int chi() const { return edge_count_internal() + free_leg_count() - n_nodes; }
    int degree(int node) const;
    bool connected() const;
    std::vector<int> incident(int node) const;  // edge ids, self loops once

    // Throws std::logic_error when the degree-{1,3} structure or the leg
    // conventions are violated.
    void validate() const;
};

// Glue T and T2 along pairing p: orientations of T2 flipped, paired leaf
// edges merged, both root legs fixed.
Couple build_couple(const BinaryTree& T, const BinaryTree& T2,
                    const Pairing& p);

// Per-edge momentum values, index-aligned with Couple::edges.
using EdgeAssignment = std::vector<IntVec>;

// Checks every node conservation equation (sum of iota*k over incident
// edges, iota = +1 into the node) and returns the signed sum over legs.
// Throws naming the first violated node.
IntVec leg_momentum_sum(const Couple& c, const EdgeAssignment& assignment);

struct CutSpec {
    struct Entry {
        int edge = -1;
        bool free_at_tail = true;  // which half becomes the free leg
    };
    std::vector<Entry> entries;
};

struct CutResult {
    std::vector<Couple> components;
    // For each component, original parent edge id per local edge (cut halves
    // keep the cut edge's id).
    std::vector<std::vector<int>> edge_origin;
    // For each component, original node ids in local order.
    std::vector<std::vector<int>> node_origin;
};

// Splits c along the cut; each cut edge becomes a free half and a fixed
// half on opposite components.  Throws if the cut does not disconnect or
// touches legs / self loops.
CutResult cut(const Couple& c, const CutSpec& spec);

// Property P: connected, exactly one free leg, at least one fixed normal leg.
bool check_property_P(const Couple& c);
// Weak property P: P, or exactly one free normal leg plus a fixed leg.
bool check_weak_property_P(const Couple& c);

// True when some internal edge is a bridge whose far side carries no leg:
// the node equations then force zero momentum through that bridge, the
// derivative vertex factor vanishes, and the couple evaluates to zero for
// zero-mean data.  Such couples are excluded from the cutting analysis.
bool vanishes_identically(const Couple& c);

enum class TerminalKind : std::uint8_t { C_I, C_II, fused };

struct TraceStep {
    std::string case_tag;  // "step0" | "1.1" | "1.2" | "2"
    Couple input;
    int chosen_leg = -1;        // edge id in input ("step0": the flipped leg)
    std::vector<int> cut_edges; // edge ids in input
    std::vector<Couple> outputs;            // after leg flips
    std::vector<std::vector<int>> output_edge_origin;
    // Flips applied to restore property P: (output index, local edge id)
    // pairs, recorded in application order.
    std::vector<std::pair<int, int>> flips;
};

struct DecompositionTrace {
    Couple input;
    std::vector<TraceStep> steps;
    std::vector<Couple> terminals;  // single-node components
    std::vector<TerminalKind> terminal_kinds;
};

// Recursive cutting of a two-fixed-leg couple into single-node components,
// deterministic (lowest-id choices throughout).
DecompositionTrace cutting_algorithm(const Couple& c);

TerminalKind classify_terminal(const Couple& c);

}  // namespace zk::diag
