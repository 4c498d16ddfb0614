#include "btf/projections.hpp"

#include "btf/parallel.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace btf {

double concur_fanout(std::span<const double> x_copies, double y,
                     std::span<const double> g_receivers, double g_self) {
    double num = 0.0, den = 0.0;
    for (size_t k = 0; k < x_copies.size(); ++k) {
        num += g_receivers[k] * x_copies[k];
        den += g_receivers[k];
    }
    num += g_self * y;
    den += g_self;
    return num / den;
}

std::vector<double> concur_weights(std::span<const double> w_items, int m, int n_items,
                                   std::span<const double> g_column, int neuron_id) {
    const double gsum = pairwise_sum(g_column.data(), n_items);
    std::vector<double> wbar(m);
    double norm2 = 0.0;
    for (int j = 0; j < m; ++j) {
        const double mean =
            pairwise_dot(g_column.data(), w_items.data() + static_cast<size_t>(j) * n_items,
                         n_items) / gsum;
        wbar[j] = mean;
        norm2 += mean * mean;
    }
    if (norm2 == 0.0)
        throw std::runtime_error("degenerate weight concur at node " + std::to_string(neuron_id));
    const double scale = std::sqrt(static_cast<double>(m) / norm2);
    for (int j = 0; j < m; ++j) wbar[j] *= scale;
    return wbar;
}

VariableState apply_PB(const VariableState& state, const MetricState& metric,
                       const Topology& topo, const Dataset& data) {
    const int ni = state.n_items;
    const int n_out = static_cast<int>(topo.output_nodes.size());
    if (data.n_out != n_out)
        throw std::invalid_argument("output data width mismatch");

    VariableState out = state;

    // Fan-out concurrence: every source node agrees with all copies of its
    // output held by the receiving neurons.
    std::vector<double> xc, gr;
    auto concur_node = [&](int p) {
        const auto& fo = topo.fanout[p];
        xc.resize(fo.size());
        gr.resize(fo.size());
        for (int i = 0; i < ni; ++i) {
            for (size_t k = 0; k < fo.size(); ++k) {
                xc[k] = state.xrow(fo[k])[i];
                gr[k] = metric.row(topo.edge_dst[fo[k]])[i];
            }
            const double ybar = concur_fanout(xc, state.yrow(p)[i], gr, metric.row(p)[i]);
            out.yrow(p)[i] = ybar;
            for (int e : fo) out.xrow(e)[i] = ybar;
        }
    };
    for (int p : topo.input_nodes) concur_node(p);
    for (int p : topo.hidden_nodes) concur_node(p);

    // The constant node concurs with its y pinned: the whole group lands on −1.
    {
        double* cy = out.yrow(topo.constant_id);
        for (int i = 0; i < ni; ++i) cy[i] = -1.0;
        for (int e : topo.fanout[topo.constant_id]) {
            double* xr = out.xrow(e);
            for (int i = 0; i < ni; ++i) xr[i] = -1.0;
        }
    }

    // Output clamp.
    for (int k = 0; k < n_out; ++k) {
        double* yr = out.yrow(topo.output_nodes[k]);
        for (int i = 0; i < ni; ++i) yr[i] = data.output(i)[k];
    }

    // Cross-item weight concurrence with sphere renormalization.
    for (int q : topo.btf_nodes) {
        const int e0 = topo.fanin_first[q];
        const int m = topo.fanin_count[q];
        const std::span<const double> w_items{state.w.data() + static_cast<size_t>(e0) * ni,
                                              static_cast<size_t>(m) * ni};
        const std::span<const double> g_col{metric.row(q), static_cast<size_t>(ni)};
        const std::vector<double> wbar = concur_weights(w_items, m, ni, g_col, q);
        for (int j = 0; j < m; ++j) {
            double* wr = out.wrow(e0 + j);
            for (int i = 0; i < ni; ++i) wr[i] = wbar[j];
        }
    }
    return out;
}

} // namespace btf
