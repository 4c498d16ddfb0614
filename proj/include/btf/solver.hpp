#pragma once

#include "btf/dataset.hpp"
#include "btf/parallel.hpp"
#include "btf/state.hpp"
#include "btf/topology.hpp"

#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace btf {

struct IterationStats {
    long long iter = 0;
    double gap = 0.0;
    double min_gap = 0.0;
    double train_acc = 0.0;
    std::optional<double> test_acc;
    double wall_seconds = 0.0;
};

struct StoppingRule {
    double gap_stop = 1e-3;
    long long max_iters = 1000000;
};

struct GapReport {
    double rms_blocks = 0.0;        // rms of Δ_{q,i} over (hidden ∪ output) × items
    double reported = 0.0;          // input-node y discrepancies folded in as extra blocks
    std::vector<double> block_sq;   // Δ²_{q,i}, node-major [n_btf * n_items]
    std::vector<double> input_sq;   // squared y gap per (input node, item)
};

GapReport compute_gap(const VariableState& zA, const VariableState& zB, const Topology& topo);

// One reference RRR iteration, z ← z + β(P_B(2·P_A(z) − z) − P_A(z)),
// built from the public projection ops (allocating; the Trainer below runs
// the fused in-place version of the same arithmetic).
GapReport rrr_step(VariableState& state, const MetricState& metric, const Topology& topo,
                   const Hyperparams& hyper, const Dataset& data);

// g ← g + γ(Δ²/Δ²_rms − g) on (hidden ∪ output) × items; input and constant
// coefficients stay pinned at 1.  No-op when γ = 0 or all gaps vanish.
void update_metric(MetricState& metric, const std::vector<double>& block_sq,
                   const Topology& topo, double gamma);

// Iteration indices ⌈1.25^k⌉, deduplicated, capped at max_iters.
std::vector<long long> checkpoint_schedule(long long max_iters);

// The training engine.  Owns three aggregate points (iterate, A-projection,
// and a work buffer that holds the reflection and then the B-projection in
// place) and sweeps them with fused passes.  Results are bit-identical for
// any worker count.
class Trainer {
public:
    Trainer(const Topology& topo, const Dataset& train_data, const Dataset* test_data,
            const Hyperparams& hyper, int n_threads = 1);
    ~Trainer();

    // One RRR iteration plus metric auto-tuning; returns the reported gap.
    double step();

    long long iter() const { return iter_; }
    double last_gap() const { return last_gap_; }
    double min_gap() const { return min_gap_; }

    double train_accuracy();                // via the concurred weights
    std::optional<double> test_accuracy();

    SolutionWeights solution() const;
    const VariableState& state() const { return z_; }
    VariableState& mutable_state() { return z_; }
    const MetricState& metric() const { return g_; }
    const Topology& topology() const { return topo_; }
    const Hyperparams& hyper() const { return hyper_; }

private:
    void sweep_A();           // fused P_A + reflection
    void sweep_B();           // in-place P_B on the work buffer
    void sweep_update_gap();  // z update + per-block gaps
    void sweep_metric();

    Topology topo_;
    Dataset train_;
    Dataset test_;
    bool has_test_ = false;
    Hyperparams hyper_;

    VariableState z_, zA_, zW_;
    MetricState g_;

    std::vector<double> mu_;        // per node
    std::vector<double> yA_in_;     // data-mode input clamp, [n_in * n_items]
    std::vector<double> yB_out_;    // output clamp, [n_out * n_items]
    std::vector<double> block_sq_;  // [n_btf * n_items]
    std::vector<double> input_sq_;  // [n_in * n_items]
    std::vector<double> block_ema_; // only when metric_window > 1
    std::vector<double> warm_p_, warm_m_; // root warm starts per (btf, item)
    std::vector<int> btf_index_;    // node id -> dense btf slot, -1 otherwise

    struct Scratch;
    std::vector<Scratch> scratch_;  // per worker
    std::unique_ptr<ThreadPool> pool_;

    long long iter_ = 0;
    double last_gap_ = std::numeric_limits<double>::infinity();
    double min_gap_ = std::numeric_limits<double>::infinity();
};

using LogSink = std::function<void(const IterationStats&)>;

struct TrainResult {
    SolutionWeights solution;
    std::vector<IterationStats> history;
    bool converged = false;
    double final_gap = std::numeric_limits<double>::infinity();
    double min_gap = std::numeric_limits<double>::infinity();
    long long iters_run = 0;
    std::string error; // nonempty if the run aborted; history holds progress so far
};

TrainResult train(const Topology& topo, const Dataset& train_data, const Dataset* test_data,
                  const Hyperparams& hyper, const StoppingRule& stop,
                  const LogSink& sink = nullptr, int n_threads = 1);

// CSV plumbing shared by the CLI and tests.
std::string stats_csv_header();
std::string stats_csv_line(const IterationStats& s);

} // namespace btf
