#pragma once

#include "btf/dataset.hpp"
#include "btf/model.hpp"
#include "btf/state.hpp"
#include "btf/topology.hpp"

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace btf {

// How many bits of information a dataset must carry before a layered gate
// circuit is pinned down: circuit count minus a multiplicity lower bound
// (node relabelings and per-node output negations produce equivalent nets).
struct SufficiencyReport {
    double log2_circuits = 0.0;
    double log2_multiplicity = 0.0;
    double h_bits = 0.0;           // log2_circuits − log2_multiplicity
    double entropy_per_item = 0.0; // bits each item contributes
    double items_needed = 0.0;     // h_bits / entropy_per_item
};

// log2 of the number of width-m, `layers`-deep circuits built from Copy and
// the 3-vote gates (sigma = 3 is the only inventory implemented).
double log2_circuit_count(int m, int layers, int sigma = 3);

// log2 of the relabeling/negation multiplicity lower bound (m!·2^m)^(ℓ−1).
double log2_multiplicity(int m, int layers);

SufficiencyReport sufficiency(int m, int layers, int sigma, double entropy_per_item);

// Plug-in entropy (bits) of the empirical distribution of output vectors.
// Biased low at small samples; callers should report the sample size.
double output_entropy(const std::vector<std::vector<double>>& outputs);
double output_entropy(const Dataset& data);

// (bin center, count) pairs, bin centers at integer multiples of bin_width;
// layer > 0 restricts to edges feeding that layer.
std::vector<std::pair<double, long long>> weight_histogram(const BtfModel& model,
                                                           double bin_width, int layer = -1);

// Which input codes a generative run is using: the per-item input rows of the
// state, concurred over each fan-out group (uniform weights) and rounded per
// the input mode.  Returns (code string of 0/1, count) sorted by count
// descending, then code ascending.
std::vector<std::pair<std::string, long long>> codeword_usage(const VariableState& state,
                                                              const Topology& topo,
                                                              InputMode mode);

} // namespace btf
