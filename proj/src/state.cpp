#include "btf/state.hpp"

#include "btf/parallel.hpp"
#include "btf/rng.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace btf {

std::pair<VariableState, MetricState> init_state(const Topology& topo, int n_items,
                                                 std::uint64_t seed) {
    if (n_items < 1) throw std::invalid_argument("init_state: need at least one item");

    VariableState st;
    st.n_items = n_items;
    st.y.resize(static_cast<size_t>(topo.n_nodes) * n_items);
    st.x.resize(static_cast<size_t>(topo.n_edges) * n_items);
    st.w.resize(static_cast<size_t>(topo.n_edges) * n_items);

    // Stream order is part of the artifact's determinism contract:
    // y rows (node-major, items inner; constant row pinned, not drawn), then
    // x rows (edge-major), then per (neuron, item) weight vectors.
    Rng rng(substream_seed(seed, "state-init"));
    for (int node = 0; node < topo.n_nodes; ++node) {
        double* row = st.yrow(node);
        if (topo.kind[node] == NodeKind::Constant) {
            for (int i = 0; i < n_items; ++i) row[i] = -1.0;
        } else {
            for (int i = 0; i < n_items; ++i) row[i] = rng.uniform(-1.0, 1.0);
        }
    }
    for (int e = 0; e < topo.n_edges; ++e) {
        double* row = st.xrow(e);
        for (int i = 0; i < n_items; ++i) row[i] = rng.uniform(-1.0, 1.0);
    }
    for (int q : topo.btf_nodes) {
        const int first = topo.fanin_first[q];
        const int m = topo.fanin_count[q];
        for (int i = 0; i < n_items; ++i) {
            double norm2 = 0.0;
            for (int j = 0; j < m; ++j) {
                const double v = rng.normal();
                st.wrow(first + j)[i] = v;
                norm2 += v * v;
            }
            // measure-zero guard; keeps the promised norm exact
            while (norm2 == 0.0) {
                for (int j = 0; j < m; ++j) {
                    const double v = rng.normal();
                    st.wrow(first + j)[i] = v;
                    norm2 += v * v;
                }
            }
            const double scale = std::sqrt(static_cast<double>(m) / norm2);
            for (int j = 0; j < m; ++j) st.wrow(first + j)[i] *= scale;
        }
    }

    MetricState g;
    g.n_items = n_items;
    g.g.assign(static_cast<size_t>(topo.n_nodes) * n_items, 1.0);
    return {std::move(st), std::move(g)};
}

SolutionWeights extract_solution(const VariableState& state, const MetricState& metric,
                                 const Topology& topo) {
    SolutionWeights sol;
    sol.w.assign(topo.n_edges, 0.0);
    const int n = state.n_items;
    for (int q : topo.btf_nodes) {
        const int first = topo.fanin_first[q];
        const int m = topo.fanin_count[q];
        const double* grow = metric.row(q);
        const double gsum = pairwise_sum(grow, n);
        double norm2 = 0.0;
        for (int j = 0; j < m; ++j) {
            const double mean = pairwise_dot(grow, state.wrow(first + j), n) / gsum;
            sol.w[first + j] = mean;
            norm2 += mean * mean;
        }
        if (norm2 == 0.0)
            throw std::runtime_error("degenerate weight concur at node " + std::to_string(q));
        const double scale = std::sqrt(static_cast<double>(m) / norm2);
        for (int j = 0; j < m; ++j) sol.w[first + j] *= scale;
    }
    return sol;
}

// ------------------------------------------------------------- checkpoints

namespace {

void write_block(std::ofstream& f, const std::vector<double>& v, int row_len) {
    char buf[40];
    for (size_t i = 0; i < v.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.17g", v[i]);
        f << buf;
        f << (((i + 1) % static_cast<size_t>(row_len)) == 0 ? '\n' : ' ');
    }
}

} // namespace

void save_state(const std::string& path, const Topology& topo, const VariableState& state,
                const MetricState& metric, long iter) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot write state file: " + path);
    f << "btf-state v1\n";
    f << "arch=" << arch_to_string(topo.widths) << "\n";
    f << "items=" << state.n_items << "\n";
    f << "iter=" << iter << "\n";
    write_block(f, state.y, state.n_items);
    write_block(f, state.x, state.n_items);
    write_block(f, state.w, state.n_items);
    write_block(f, metric.g, state.n_items);
    if (!f) throw std::runtime_error("failed while writing state file: " + path);
}

LoadedState load_state(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open state file: " + path);

    std::string line;
    if (!std::getline(f, line) || line != "btf-state v1")
        throw std::runtime_error(path + ": not a btf-state v1 file");

    LoadedState out;
    long items = 0;
    if (!std::getline(f, line) || line.rfind("arch=", 0) != 0)
        throw std::runtime_error(path + ": missing arch= header");
    out.widths = parse_arch(line.substr(5));
    if (!std::getline(f, line) || line.rfind("items=", 0) != 0)
        throw std::runtime_error(path + ": missing items= header");
    items = std::stol(line.substr(6));
    if (!std::getline(f, line) || line.rfind("iter=", 0) != 0)
        throw std::runtime_error(path + ": missing iter= header");
    out.iter = std::stol(line.substr(5));
    if (items < 1) throw std::runtime_error(path + ": invalid item count");

    const Topology topo = build_layered(out.widths);
    out.state.n_items = static_cast<int>(items);
    out.metric.n_items = static_cast<int>(items);

    auto read_block = [&](std::vector<double>& v, size_t count, const char* name) {
        v.resize(count);
        for (size_t i = 0; i < count; ++i) {
            if (!(f >> v[i]))
                throw std::runtime_error(path + ": truncated " + name + " block (value " +
                                         std::to_string(i) + " of " + std::to_string(count) + ")");
        }
    };
    const size_t per_node = static_cast<size_t>(topo.n_nodes) * items;
    const size_t per_edge = static_cast<size_t>(topo.n_edges) * items;
    read_block(out.state.y, per_node, "y");
    read_block(out.state.x, per_edge, "x");
    read_block(out.state.w, per_edge, "w");
    read_block(out.metric.g, per_node, "g");
    double extra;
    if (f >> extra) throw std::runtime_error(path + ": trailing data after the g block");
    return out;
}

} // namespace btf
