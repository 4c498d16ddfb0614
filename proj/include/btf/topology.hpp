#pragma once

#include <string>
#include <vector>

namespace btf {

enum class NodeKind { Input, Hidden, Output, Constant };

// Layered, fully connected feed-forward graph plus one global constant node
// that feeds every thresholding node (the bias input).  Node ids are assigned
// layer by layer, the constant node last.  Edges are grouped by target node;
// within a node's fan-in the bias edge always comes first, then the nodes of
// the layer below in index order.  This ordering is what model files, state
// checkpoints and the interpretation all rely on, so it never changes.
struct Topology {
    std::vector<int> widths;      // layer widths, length >= 2

    int n_nodes = 0;              // layer nodes + 1 constant
    int constant_id = 0;
    int n_edges = 0;

    std::vector<NodeKind> kind;   // [n_nodes]
    std::vector<int> layer_of;    // [n_nodes]; constant -> -1
    std::vector<int> pos_in_layer;// [n_nodes]; constant -> 0
    std::vector<int> layer_first; // [n_layers] first node id per layer

    std::vector<int> edge_src;    // [n_edges]
    std::vector<int> edge_dst;    // [n_edges]
    std::vector<int> fanin_first; // [n_nodes]; -1 for Input/Constant
    std::vector<int> fanin_count; // [n_nodes]; 0 for Input/Constant
    std::vector<std::vector<int>> fanout; // [n_nodes] outgoing edge ids

    std::vector<int> input_nodes;
    std::vector<int> hidden_nodes;
    std::vector<int> output_nodes;
    std::vector<int> btf_nodes;   // hidden + output, layer order

    int n_layers() const { return static_cast<int>(widths.size()); }
    int node_id(int layer, int pos) const { return layer_first[layer] + pos; }
    bool is_btf(int node) const {
        return kind[node] == NodeKind::Hidden || kind[node] == NodeKind::Output;
    }
};

// Builds the layered topology.  Throws std::invalid_argument when widths has
// fewer than two layers or a non-positive width.
Topology build_layered(const std::vector<int>& widths);

// Fan-in size m of a thresholding node, bias edge included.  Throws on
// Input/Constant nodes.
int fan_in_size(const Topology& topo, int node);

// Structural audit.  Returns human-readable violation descriptions (empty
// means the topology is well formed); reports, never aborts.
std::vector<std::string> validate(const Topology& topo);

// Helpers shared by CLI and file formats: "4,4,4,4" <-> {4,4,4,4}.
std::vector<int> parse_arch(const std::string& text);
std::string arch_to_string(const std::vector<int>& widths);

} // namespace btf
