#pragma once

#include <cmath>
#include <complex>
#include <map>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "zklab/lattice.hpp"
#include "zklab/trees.hpp"

namespace zk {

struct ModelParams {
    double lambda = 1.0;
    double nu = 0.0;
    double L = 1.0;
    int dim = 3;

    double alpha() const { return lambda * std::pow(L, -dim / 2.0); }
    double t_kin() const {
        const double a = alpha();
        return 1.0 / (8.0 * std::numbers::pi * a * a);
    }
    double rho(double T) const { return alpha() * std::sqrt(T); }
};

struct TimeGrid {
    double t_final = 1.0;
    int steps = 16;  // number of intervals

    double dt() const { return t_final / steps; }
    double node(int j) const { return t_final * j / steps; }
    int count() const { return steps + 1; }
};

// Cumulative integral of uniformly sampled data: out[j] ~ integral of f over
// [0, j*h], fourth-order accurate (composite Simpson with 3/8 and cubic
// start corrections for odd prefixes).
std::vector<std::complex<double>> cumulative_integral(
    const std::vector<std::complex<double>>& f, double h);

// Field sampled on every node of a TimeGrid over a common ball.
struct FieldHistory {
    const BallIndex* ball = nullptr;
    TimeGrid grid;
    std::vector<std::vector<std::complex<double>>> frames;  // [time][mode]

    static FieldHistory constant(const SpectralField& xi, const TimeGrid& g);
    SpectralField at(int j) const;
};

// Ordered index pairs (i1, i2) with K_{i1} + K_{i2} = K_k, grouped by output
// mode k; realizes the exact momentum constraint of the convolution.
class PairTable {
  public:
    explicit PairTable(const BallIndex& ball);
    struct Pair {
        std::int32_t a, b;
    };
    const std::vector<Pair>& pairs_for(std::size_t k) const {
        return table_[k];
    }

  private:
    std::vector<std::vector<Pair>> table_;
};

struct TruncationRecord {
    double mass = 0.0;     // sum |value|^2 over modes outside the ball
    std::size_t modes = 0; // number of such modes with nonzero value
};

// Evaluation context holding the lattice ball, model parameters, time grid,
// pair table and the per-(tree shape) history memo.
class ExpansionContext {
  public:
    ExpansionContext(const BallIndex& ball, const ModelParams& params,
                     const TimeGrid& grid);

    const BallIndex& ball() const { return *ball_; }
    const ModelParams& params() const { return params_; }
    const TimeGrid& grid() const { return grid_; }
    const PairTable& pairs() const { return pairs_; }

    // Duhamel operator: bilinear in the histories, integral on the grid
    // prefix ending at node j_end (default: final node).
    FieldHistory duhamel_history(const FieldHistory& a, const FieldHistory& b);
    SpectralField duhamel(const FieldHistory& a, const FieldHistory& b,
                          int j_end = -1);

    // J_T evaluated by the recursion; memoized per tree shape for the given
    // xi (memo reset when a different field is passed).
    FieldHistory tree_history(const diag::BinaryTree& T, const SpectralField& xi);
    SpectralField tree_term(const diag::BinaryTree& T, const SpectralField& xi,
                            int j_end = -1);

    SpectralField approximate_solution(int N, const SpectralField& xi,
                                       int j_end = -1);
    FieldHistory approximate_solution_history(int N, const SpectralField& xi);
    // xi + T(phi_app, phi_app) - phi_app at the final node.
    SpectralField residual(int N, const SpectralField& xi);

    // T(J_T, w) at the final node; linear in w.
    SpectralField apply_linearized(const diag::BinaryTree& T,
                                   const SpectralField& xi,
                                   const FieldHistory& w);

    // Iterated oscillatory coefficient of a tree: leaf momenta given in
    // left-to-right leaf order (lattice integer vectors).
    std::complex<double> coefficient_H(const diag::BinaryTree& T,
                                       const std::vector<IntVec>& leaf_momenta,
                                       int j_end = -1);

    // Exact Wick expectation E|J_{T,k}|^2 by pairing enumeration; n_in is
    // tabulated over the ball.
    double variance_via_couples(const diag::BinaryTree& T, const IntVec& K,
                                const std::vector<double>& n_in);

    void set_record_truncation(bool on) { record_truncation_ = on; }
    const std::optional<TruncationRecord>& last_truncation() const {
        return truncation_;
    }

  private:
    const BallIndex* ball_;
    ModelParams params_;
    TimeGrid grid_;
    PairTable pairs_;
    bool record_truncation_ = false;
    std::optional<TruncationRecord> truncation_;
    std::uint64_t memo_sig_ = 0;
    std::map<std::string, FieldHistory> memo_;
};

// Canonical structural key of an ordered tree ("(LR)" nesting).
std::string tree_key(const diag::BinaryTree& T);

}  // namespace zk
