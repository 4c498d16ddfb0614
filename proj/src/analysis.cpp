#include "btf/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

namespace btf {

double log2_circuit_count(int m, int layers, int sigma) {
    if (sigma != 3)
        throw std::invalid_argument("circuit counting is only implemented for sigma = 3");
    if (m < 3) throw std::invalid_argument("circuit counting needs m >= 3");
    if (layers < 0) throw std::invalid_argument("layers must be nonnegative");
    // Per node: 2·C(m+1,1) gates with one relevant input (Copy, negated or
    // not, from m real nodes or the constant) + 8·C(m+1,3) three-vote gates
    // (2³ negation patterns over any 3 of the m+1 sources).
    const double mm = m + 1;
    const double options = 2.0 * mm + 8.0 * (mm * (mm - 1.0) * (mm - 2.0) / 6.0);
    return static_cast<double>(layers) * m * std::log2(options);
}

double log2_multiplicity(int m, int layers) {
    if (layers < 1) throw std::invalid_argument("layers must be >= 1");
    double log2_fact;
    if (m <= 20) {
        log2_fact = 0.0;
        for (int k = 2; k <= m; ++k) log2_fact += std::log2(static_cast<double>(k));
    } else {
        log2_fact = std::lgamma(static_cast<double>(m) + 1.0) / std::log(2.0);
    }
    return static_cast<double>(layers - 1) * (log2_fact + m);
}

SufficiencyReport sufficiency(int m, int layers, int sigma, double entropy_per_item) {
    SufficiencyReport r;
    r.log2_circuits = log2_circuit_count(m, layers, sigma);
    r.log2_multiplicity = log2_multiplicity(m, layers);
    r.h_bits = r.log2_circuits - r.log2_multiplicity;
    r.entropy_per_item = entropy_per_item;
    r.items_needed = entropy_per_item > 0.0 ? r.h_bits / entropy_per_item : 0.0;
    return r;
}

double output_entropy(const std::vector<std::vector<double>>& outputs) {
    if (outputs.empty()) throw std::invalid_argument("entropy needs at least one sample");
    std::map<std::string, long long> counts;
    std::string key;
    for (const auto& row : outputs) {
        key.clear();
        for (const double v : row) key.push_back(v > 0.0 ? '1' : '0');
        ++counts[key];
    }
    const double n = static_cast<double>(outputs.size());
    double h = 0.0;
    for (const auto& [code, c] : counts) {
        const double p = c / n;
        h -= p * std::log2(p);
    }
    return h;
}

double output_entropy(const Dataset& data) {
    std::vector<std::vector<double>> rows(data.n_items());
    for (int i = 0; i < data.n_items(); ++i) {
        const double* out = data.output(i);
        rows[i].assign(out, out + data.n_out);
    }
    return output_entropy(rows);
}

std::vector<std::pair<double, long long>> weight_histogram(const BtfModel& model,
                                                           double bin_width, int layer) {
    if (bin_width <= 0.0) throw std::invalid_argument("bin width must be positive");
    std::map<long long, long long> bins;
    for (int q : model.topo.btf_nodes) {
        if (layer > 0 && model.topo.layer_of[q] != layer) continue;
        const int e0 = model.topo.fanin_first[q];
        for (int j = 0; j < model.topo.fanin_count[q]; ++j)
            ++bins[std::llround(model.w[e0 + j] / bin_width)];
    }
    std::vector<std::pair<double, long long>> out;
    out.reserve(bins.size());
    for (const auto& [k, c] : bins) out.emplace_back(k * bin_width, c);
    return out;
}

std::vector<std::pair<std::string, long long>> codeword_usage(const VariableState& state,
                                                              const Topology& topo,
                                                              InputMode mode) {
    if (mode == InputMode::Data)
        throw std::invalid_argument("codeword usage requires boolean or onehot input mode");
    const int ni = state.n_items;
    const int n_in = static_cast<int>(topo.input_nodes.size());
    std::map<std::string, long long> counts;
    std::vector<double> mean(n_in);
    std::string code(n_in, '0');
    for (int i = 0; i < ni; ++i) {
        for (int k = 0; k < n_in; ++k) {
            const int p = topo.input_nodes[k];
            double sum = state.yrow(p)[i];
            for (const int e : topo.fanout[p]) sum += state.xrow(e)[i];
            mean[k] = sum / (1.0 + topo.fanout[p].size());
        }
        if (mode == InputMode::OneHot) {
            int best = 0;
            for (int k = 1; k < n_in; ++k)
                if (mean[k] > mean[best]) best = k;
            for (int k = 0; k < n_in; ++k) code[k] = k == best ? '1' : '0';
        } else {
            for (int k = 0; k < n_in; ++k) code[k] = mean[k] < 0.0 ? '0' : '1';
        }
        ++counts[code];
    }
    std::vector<std::pair<std::string, long long>> out(counts.begin(), counts.end());
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
        return a.second != b.second ? a.second > b.second : a.first < b.first;
    });
    return out;
}

} // namespace btf
