#pragma once

#include "btf/dataset.hpp"
#include "btf/state.hpp"
#include "btf/topology.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace btf {

// A trained network: one scalar weight per edge, sgn activations.
struct BtfModel {
    Topology topo;
    std::vector<double> w; // [n_edges]
    double sigma = 3.0;    // recorded for interpretation thresholds
};

BtfModel make_model(const Topology& topo, const SolutionWeights& sol, double sigma);

// Exact-zero inner products are measure-zero but must be visible: forward()
// counts them process-wide.
std::uint64_t zero_sign_events();
void reset_zero_sign_events();

// Layer-by-layer sgn(w·x) with the constant node pinned at −1; sgn(0) = +1.
// `input` holds one value per input node (±1; analog values allowed when the
// model was trained on analog inputs).
std::vector<double> forward(const BtfModel& model, std::span<const double> input);

// Same pass, but returns the output layer's pre-threshold sums w·x (for
// argmax decoding of one-hot outputs and margin inspection).
std::vector<double> forward_raw(const BtfModel& model, std::span<const double> input);

// Fraction of correct output bits, averaged over items and bits.
double accuracy(const BtfModel& model, const Dataset& data);

// Exact support of a single BTF: index p is relevant iff flipping x_p changes
// sgn(w·x) somewhere on the hypercube.  Exhaustive for m ≤ 24; above that the
// indices with |w| ≥ magnitude_threshold are kept and the exact test runs on
// that reduced vector.  Throws "inadmissible weights" if a zero inner product
// is reachable.
std::vector<int> relevant_inputs(std::span<const double> w, double magnitude_threshold = -1.0);

// ------------------------------------------------------------ gate netlist

enum class GateKind { Copy, And, Or, Maj, Ambiguous };

struct GateSpec {
    GateKind kind = GateKind::Ambiguous;
    std::vector<int> sources;      // node ids of surviving non-bias inputs
    std::vector<bool> negated;     // per source (weight sign < 0)
    std::vector<double> source_w;  // surviving raw weights (same order)
    bool uses_bias = false;
    int bias_vote = 0;             // ±1 vote the constant node casts in a Maj; 0 if unused
    double bias_w = 0.0;           // surviving raw bias weight (0 if cut)
};

struct GateNet {
    Topology topo;
    double sigma = 3.0;
    std::vector<GateSpec> gates; // [n_nodes]; meaningful at BTF nodes
    int negation_count = 0;      // negations on non-bias edges after sign flips
    int ambiguous_nodes = 0;
    double agreement = 0.0;      // bit agreement with the source model
    std::int64_t validation_items = 0;
};

// Threshold ≤ 0 selects the per-node default √(m/σ)·(1 + 1/√σ)/2, halfway
// between the σ-gate magnitude and the zero cluster.  `validation` supplies
// extra agreement-check inputs when exhaustive enumeration is infeasible.
GateNet interpret(const BtfModel& model, double magnitude_threshold = -1.0,
                  const Dataset* validation = nullptr, std::uint64_t seed = 0);

std::vector<double> eval_gatenet(const GateNet& net, std::span<const double> input);

std::string netlist_to_text(const GateNet& net);
std::string netlist_to_dot(const GateNet& net);

// ---------------------------------------------------------------- file I/O

void save_model(const BtfModel& model, const std::string& path);
BtfModel load_model(const std::string& path);

} // namespace btf
