#pragma once

#include "btf/dataset.hpp"
#include "btf/state.hpp"
#include "btf/topology.hpp"

#include <span>
#include <vector>

namespace btf {

// ---------------------------------------------------------------- A side --
//
// The "divide" constraint treats every (thresholding node, item) block
// (w, x, y) independently: y must be ±1 and y·(w·x) >= mu.  The projection
// picks, out of the two branches y'=+1 / y'=-1, the one reachable with the
// smaller squared move; within a branch the weights/inputs move along the
// Lagrange path w' = (w+λx)/(1-λ²), x' = (x+λw)/(1-λ²).

// Scalar cores shared by the reference ops below and the solver's fused
// sweep.  s = w·x, pw = |w|², px = |x|², P = pw + px.
namespace blockmath {

struct Decision {
    int branch = +1;       // chosen sign of y'
    double lambda = 0.0;   // 0 when the margin already held on that branch
    bool degenerate = false; // (w,x) == (0,0): caller writes the fixed fallback point
};

// Unique root of h_b(λ) = ((1+λ²)s + λP)/(1-λ²)² − b·mu inside (−1,1).
// Returns NaN when the branch has no root there (exactly (anti)parallel w, x
// — a degenerate direction whose Lagrange path never meets the margin).
// `warm` seeds the Newton iteration; any out-of-bracket value falls back to 0.
double solve_lambda_scalar(double s, double P, double mu, int branch, double warm = 0.0) noexcept;

// squared (w,x) move along the Lagrange path for a given λ
double move_cost(double s, double P, double lambda) noexcept;

// warm_p/warm_m, when given, seed the per-branch root solves and receive the
// roots back — the solver keeps them per (block, item) across iterations.
Decision decide_block(double s, double pw, double px, double y, double mu,
                      double* warm_p = nullptr, double* warm_m = nullptr) noexcept;

} // namespace blockmath

// Root of h_branch for full vectors; throws "degenerate projection input"
// when w and x are both zero and when the branch has no root.
double solve_lambda(std::span<const double> w, std::span<const double> x, double mu, int branch);

// Exact projection of one block onto A₊ ∪ A₋ (w_out/x_out may alias w/x).
void project_btf(std::span<const double> w, std::span<const double> x, double y, double mu,
                 std::span<double> w_out, std::span<double> x_out, double& y_out);

// Input-node row treatment.  `clamp` supplies the stored data values and is
// only read in Data mode.
std::vector<double> project_inputs(std::span<const double> y_row, InputMode mode,
                                   std::span<const double> clamp = {});

// The full A projection (reference implementation; the solver has a fused
// in-place equivalent).  The metric plays no role in P_A — the constraint
// factorizes into blocks and each block carries a single g — but the
// argument stays for signature symmetry with P_B.
VariableState apply_PA(const VariableState& state, const MetricState& metric,
                       const Topology& topo, const Hyperparams& hyper, const Dataset& data);

// ---------------------------------------------------------------- B side --
//
// The "concur" constraint ties variables that represent the same quantity:
// all fan-out copies x_{p→q,i} must equal y_{p,i}; all item copies of a
// weight must agree and each neuron's weight vector must sit on the sphere
// ||w||² = m; output y's are clamped to the data.

// g-weighted mean of one fan-out group: receivers' x copies weighted by the
// receiving node's g, the source's y weighted by its own g.
double concur_fanout(std::span<const double> x_copies, double y,
                     std::span<const double> g_receivers, double g_self);

// Cross-item weight concurrence for one neuron: per-edge g-weighted mean
// over items (fixed-order pairwise reductions), then rescale the mean vector
// to ||w̄||² = m.  w_items is edge-major (w_items[j*n_items + i]).  Throws
// "degenerate weight concur" when the mean vector is all zero.
std::vector<double> concur_weights(std::span<const double> w_items, int m, int n_items,
                                   std::span<const double> g_column, int neuron_id);

// The full B projection (reference implementation).
VariableState apply_PB(const VariableState& state, const MetricState& metric,
                       const Topology& topo, const Dataset& data);

} // namespace btf
