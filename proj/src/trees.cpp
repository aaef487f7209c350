#include "zklab/trees.hpp"

#include <stdexcept>

namespace zk::diag {

namespace {

// Append a copy of src rooted under `parent` into dst, returning the new
// root index.
int graft(std::vector<BinaryTree::Node>& dst, const BinaryTree& src, int si,
          int parent) {
    const int id = static_cast<int>(dst.size());
    dst.push_back({parent, -1, -1});
    const auto& n = src.nodes[static_cast<size_t>(si)];
    if (!n.is_leaf()) {
        dst[static_cast<size_t>(id)].left = graft(dst, src, n.left, id);
        dst[static_cast<size_t>(id)].right = graft(dst, src, n.right, id);
    }
    return id;
}

}  // namespace

std::vector<BinaryTree> trees_with_branches(int l) {
    if (l < 0) throw std::invalid_argument("trees_with_branches: l < 0");
    if (l == 0) {
        BinaryTree leaf;
        leaf.nodes.push_back({-1, -1, -1});
        return {leaf};
    }
    std::vector<BinaryTree> out;
    for (int bl = 0; bl < l; ++bl) {
        auto lefts = trees_with_branches(bl);
        auto rights = trees_with_branches(l - 1 - bl);
        for (const auto& lt : lefts)
            for (const auto& rt : rights) {
                BinaryTree t;
                t.nodes.push_back({-1, -1, -1});
                t.nodes[0].left = graft(t.nodes, lt, 0, 0);
                t.nodes[0].right = graft(t.nodes, rt, 0, 0);
                out.push_back(std::move(t));
            }
    }
    return out;
}

std::vector<BinaryTree> enumerate_trees(int max_branches) {
    if (max_branches < 0)
        throw std::invalid_argument("enumerate_trees: N < 0");
    std::vector<BinaryTree> out;
    for (int l = 0; l <= max_branches; ++l) {
        auto ts = trees_with_branches(l);
        out.insert(out.end(), ts.begin(), ts.end());
    }
    return out;
}

namespace {

void match_rec(std::vector<int>& pool, Pairing& acc,
               std::vector<Pairing>& out) {
    if (pool.empty()) {
        out.push_back(acc);
        return;
    }
    const int a = pool.front();
    for (std::size_t j = 1; j < pool.size(); ++j) {
        const int b = pool[j];
        std::vector<int> rest;
        rest.reserve(pool.size() - 2);
        for (std::size_t i = 1; i < pool.size(); ++i)
            if (i != j) rest.push_back(pool[i]);
        acc.emplace_back(a, b);
        match_rec(rest, acc, out);
        acc.pop_back();
    }
}

}  // namespace

std::vector<Pairing> enumerate_pairings(const BinaryTree& T,
                                        const BinaryTree& T2) {
    const int m1 = T.branch_count() + 1;
    const int m2 = T2.branch_count() + 1;
    const int total = m1 + m2;
    if (total % 2 != 0)
        throw std::invalid_argument("enumerate_pairings: odd leaf count");
    std::vector<int> pool(static_cast<size_t>(total));
    for (int i = 0; i < total; ++i) pool[static_cast<size_t>(i)] = i;
    std::vector<Pairing> out;
    Pairing acc;
    match_rec(pool, acc, out);
    return out;
}

}  // namespace zk::diag
