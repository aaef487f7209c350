#pragma once

#include <utility>
#include <vector>

namespace zk::diag {

// Ordered binary tree: every node has 0 or 2 children.  Nodes are stored in
// preorder with the root at index 0, so structurally equal trees compare
// equal as vectors.  Leaf labels are the left-to-right leaf order.
struct BinaryTree {
    struct Node {
        int parent = -1;
        int left = -1;
        int right = -1;
        bool is_leaf() const { return left < 0; }
    };
    std::vector<Node> nodes;

    int branch_count() const {
        int b = 0;
        for (const auto& n : nodes)
            if (!n.is_leaf()) ++b;
        return b;
    }
    std::vector<int> leaves() const {  // left-to-right
        std::vector<int> out;
        walk_leaves(0, out);
        return out;
    }

  private:
    void walk_leaves(int i, std::vector<int>& out) const {
        const Node& n = nodes[static_cast<size_t>(i)];
        if (n.is_leaf()) {
            out.push_back(i);
            return;
        }
        walk_leaves(n.left, out);
        walk_leaves(n.right, out);
    }
};

// All ordered binary trees with exactly l branch nodes (Catalan(l) of them),
// deterministic order.
std::vector<BinaryTree> trees_with_branches(int l);

// All ordered binary trees with at most max_branches branch nodes, grouped
// by branch count in increasing order.
std::vector<BinaryTree> enumerate_trees(int max_branches);

// Perfect matching of the combined leaf set of a tree pair (T, T2).  Leaves
// of T come first in left-to-right order, then leaves of T2; pairs are
// stored (small index, large index) and sorted.
using Pairing = std::vector<std::pair<int, int>>;

std::vector<Pairing> enumerate_pairings(const BinaryTree& T,
                                        const BinaryTree& T2);

}  // namespace zk::diag
