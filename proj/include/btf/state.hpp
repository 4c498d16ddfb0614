#pragma once

#include "btf/topology.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace btf {

enum class InputMode { Data, Boolean, OneHot };

struct Hyperparams {
    double sigma = 3.0;       // support hyperparameter; margins are mu_m = sqrt(m/sigma)
    double beta = 0.2;        // relax step, must lie in (0,2)
    double gamma = 1e-3;      // metric relaxation rate (0 switches tuning off)
    long max_iters = 1000000;
    double gap_stop = 1e-3;
    InputMode input_mode = InputMode::Data;
    std::uint64_t seed = 0;
    // Local gaps are smoothed with an exponential moving average over this many
    // iterations before they drive the metric update.  Smoothing is what lets the
    // iterate be captured by a fixed point while gamma stays at its search-friendly
    // value: with instantaneous local gaps the metric keeps drifting near a solution
    // and the gap stalls at about 1.5*gamma instead of dropping to zero.  Window 1
    // recovers the instantaneous rule.
    int metric_window = 1000;
};

// The divide-and-concur aggregate: one (weights, inputs, output) triple per
// thresholding node *per data item*.  Flat contiguous layout, items
// innermost, so both projections sweep memory linearly and vectorize.
struct VariableState {
    int n_items = 0;
    std::vector<double> y; // [node][item]
    std::vector<double> x; // [edge][item]
    std::vector<double> w; // [edge][item]

    double* yrow(int node) { return y.data() + static_cast<size_t>(node) * n_items; }
    const double* yrow(int node) const { return y.data() + static_cast<size_t>(node) * n_items; }
    double* xrow(int edge) { return x.data() + static_cast<size_t>(edge) * n_items; }
    const double* xrow(int edge) const { return x.data() + static_cast<size_t>(edge) * n_items; }
    double* wrow(int edge) { return w.data() + static_cast<size_t>(edge) * n_items; }
    const double* wrow(int edge) const { return w.data() + static_cast<size_t>(edge) * n_items; }
};

// Metric coefficients g[node][item].  Input and constant rows are pinned to 1;
// the solver keeps the mean over (hidden+output) x items at 1.
struct MetricState {
    int n_items = 0;
    std::vector<double> g;

    double* row(int node) { return g.data() + static_cast<size_t>(node) * n_items; }
    const double* row(int node) const { return g.data() + static_cast<size_t>(node) * n_items; }
};

// Concur weights, one value per edge; per neuron the vector is normalized to
// ||w||^2 = fan-in.
struct SolutionWeights {
    std::vector<double> w;
};

// y, x uniform on [-1,1]; per (neuron, item) weight vectors standard normal
// rescaled to ||w||^2 = m; g = 1.  Fully determined by the seed.
std::pair<VariableState, MetricState> init_state(const Topology& topo, int n_items,
                                                 std::uint64_t seed);

// g-weighted cross-item mean of w per edge, renormalized per neuron — the
// same arithmetic as the B-projection weight step.  Throws "degenerate weight
// concur" with the neuron id when a mean vector is all zero.
SolutionWeights extract_solution(const VariableState& state, const MetricState& metric,
                                 const Topology& topo);

// ------------------------------------------------------------- checkpoints

void save_state(const std::string& path, const Topology& topo, const VariableState& state,
                const MetricState& metric, long iter);

struct LoadedState {
    std::vector<int> widths;
    long iter = 0;
    VariableState state;
    MetricState metric;
};

LoadedState load_state(const std::string& path);

} // namespace btf
