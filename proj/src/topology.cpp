#include "btf/topology.hpp"

#include <numeric>
#include <sstream>
#include <stdexcept>

namespace btf {

Topology build_layered(const std::vector<int>& widths) {
    if (widths.size() < 2)
        throw std::invalid_argument("architecture needs at least an input and an output layer");
    for (int w : widths)
        if (w < 1) throw std::invalid_argument("layer widths must be positive");

    Topology t;
    t.widths = widths;
    const int n_layers = static_cast<int>(widths.size());
    const int layer_nodes = std::accumulate(widths.begin(), widths.end(), 0);
    t.n_nodes = layer_nodes + 1;
    t.constant_id = layer_nodes;

    t.kind.assign(t.n_nodes, NodeKind::Hidden);
    t.layer_of.assign(t.n_nodes, -1);
    t.pos_in_layer.assign(t.n_nodes, 0);
    t.layer_first.resize(n_layers);

    int next = 0;
    for (int layer = 0; layer < n_layers; ++layer) {
        t.layer_first[layer] = next;
        for (int pos = 0; pos < widths[layer]; ++pos, ++next) {
            t.layer_of[next] = layer;
            t.pos_in_layer[next] = pos;
            if (layer == 0)
                t.kind[next] = NodeKind::Input;
            else if (layer == n_layers - 1)
                t.kind[next] = NodeKind::Output;
        }
    }
    t.kind[t.constant_id] = NodeKind::Constant;

    t.fanin_first.assign(t.n_nodes, -1);
    t.fanin_count.assign(t.n_nodes, 0);
    t.fanout.assign(t.n_nodes, {});

    // bias edge first, then the layer below in node-index order
    for (int layer = 1; layer < n_layers; ++layer) {
        for (int pos = 0; pos < widths[layer]; ++pos) {
            const int q = t.node_id(layer, pos);
            t.fanin_first[q] = static_cast<int>(t.edge_src.size());
            t.edge_src.push_back(t.constant_id);
            t.edge_dst.push_back(q);
            for (int p = 0; p < widths[layer - 1]; ++p) {
                t.edge_src.push_back(t.node_id(layer - 1, p));
                t.edge_dst.push_back(q);
            }
            t.fanin_count[q] = widths[layer - 1] + 1;
        }
    }
    t.n_edges = static_cast<int>(t.edge_src.size());
    for (int e = 0; e < t.n_edges; ++e) t.fanout[t.edge_src[e]].push_back(e);

    for (int n = 0; n < t.n_nodes; ++n) {
        switch (t.kind[n]) {
        case NodeKind::Input: t.input_nodes.push_back(n); break;
        case NodeKind::Hidden: t.hidden_nodes.push_back(n); t.btf_nodes.push_back(n); break;
        case NodeKind::Output: t.output_nodes.push_back(n); t.btf_nodes.push_back(n); break;
        case NodeKind::Constant: break;
        }
    }
    return t;
}

int fan_in_size(const Topology& topo, int node) {
    if (node < 0 || node >= topo.n_nodes) throw std::out_of_range("node id out of range");
    if (!topo.is_btf(node))
        throw std::invalid_argument("fan_in_size: node has no fan-in (input or constant node)");
    return topo.fanin_count[node];
}

std::vector<std::string> validate(const Topology& t) {
    std::vector<std::string> out;
    auto report = [&out](const std::string& msg) { out.push_back(msg); };

    int constants = 0;
    for (int n = 0; n < t.n_nodes; ++n)
        if (t.kind[n] == NodeKind::Constant) ++constants;
    if (constants != 1)
        report("expected exactly one constant node, found " + std::to_string(constants));

    // incoming/outgoing restrictions per kind
    std::vector<int> in_deg(t.n_nodes, 0), out_deg(t.n_nodes, 0);
    for (int e = 0; e < t.n_edges; ++e) {
        if (t.edge_src[e] < 0 || t.edge_src[e] >= t.n_nodes ||
            t.edge_dst[e] < 0 || t.edge_dst[e] >= t.n_nodes) {
            report("edge " + std::to_string(e) + " references a node out of range");
            continue;
        }
        ++in_deg[t.edge_dst[e]];
        ++out_deg[t.edge_src[e]];
    }
    for (int n = 0; n < t.n_nodes; ++n) {
        const auto k = t.kind[n];
        if ((k == NodeKind::Input || k == NodeKind::Constant) && in_deg[n] != 0)
            report("node " + std::to_string(n) + " must not have incoming edges");
        if (k == NodeKind::Output && out_deg[n] != 0)
            report("output node " + std::to_string(n) + " must not have outgoing edges");
    }

    // every thresholding node: bias edge first, then the full layer below in order
    for (int q : t.btf_nodes) {
        const int first = t.fanin_first[q];
        const int count = t.fanin_count[q];
        if (first < 0 || count <= 0 || first + count > t.n_edges) {
            report("node " + std::to_string(q) + " has a malformed fan-in range");
            continue;
        }
        if (t.edge_src[first] != t.constant_id)
            report("node " + std::to_string(q) + " is missing the bias edge at fan-in position 0");
        const int layer = t.layer_of[q];
        const int below = t.widths[layer - 1];
        if (count != below + 1)
            report("node " + std::to_string(q) + " fan-in size " + std::to_string(count) +
                   " does not match layer below + bias (" + std::to_string(below + 1) + ")");
        for (int j = 1; j < count && first + j < t.n_edges; ++j) {
            const int expect = t.node_id(layer - 1, j - 1);
            if (t.edge_dst[first + j] != q || t.edge_src[first + j] != expect) {
                report("node " + std::to_string(q) + " fan-in is not (bias, layer below in order)");
                break;
            }
        }
    }

    // edge count formula for layered complete connectivity
    long expect_edges = 0;
    for (size_t layer = 1; layer < t.widths.size(); ++layer)
        expect_edges += static_cast<long>(t.widths[layer - 1] + 1) * t.widths[layer];
    if (expect_edges != t.n_edges)
        report("edge count " + std::to_string(t.n_edges) + " does not match the layered formula " +
               std::to_string(expect_edges));

    return out;
}

std::vector<int> parse_arch(const std::string& text) {
    std::vector<int> widths;
    std::stringstream ss(text);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        if (tok.empty()) throw std::invalid_argument("malformed architecture string: " + text);
        size_t used = 0;
        int v = std::stoi(tok, &used);
        if (used != tok.size())
            throw std::invalid_argument("malformed architecture string: " + text);
        widths.push_back(v);
    }
    if (widths.empty()) throw std::invalid_argument("empty architecture string");
    return widths;
}

std::string arch_to_string(const std::vector<int>& widths) {
    std::string s;
    for (size_t i = 0; i < widths.size(); ++i) {
        if (i) s += ',';
        s += std::to_string(widths[i]);
    }
    return s;
}

} // namespace btf
