#include "btf/model.hpp"

#include "btf/rng.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace btf {

namespace {
std::atomic<std::uint64_t> g_zero_signs{0};

inline double sign_of(double s) {
    if (s == 0.0) {
        g_zero_signs.fetch_add(1, std::memory_order_relaxed);
        return 1.0;
    }
    return s < 0.0 ? -1.0 : 1.0;
}
} // namespace

std::uint64_t zero_sign_events() { return g_zero_signs.load(std::memory_order_relaxed); }
void reset_zero_sign_events() { g_zero_signs.store(0, std::memory_order_relaxed); }

BtfModel make_model(const Topology& topo, const SolutionWeights& sol, double sigma) {
    if (sol.w.size() != static_cast<size_t>(topo.n_edges))
        throw std::invalid_argument("weight count does not match topology");
    return BtfModel{topo, sol.w, sigma};
}

std::vector<double> forward(const BtfModel& model, std::span<const double> input) {
    const Topology& t = model.topo;
    if (input.size() != t.input_nodes.size())
        throw std::invalid_argument("forward: input length mismatch");
    std::vector<double> val(t.n_nodes);
    for (size_t k = 0; k < input.size(); ++k) val[t.input_nodes[k]] = input[k];
    val[t.constant_id] = -1.0;
    for (int q : t.btf_nodes) {
        const int e0 = t.fanin_first[q];
        const int m = t.fanin_count[q];
        double s = 0.0;
        for (int j = 0; j < m; ++j) s += model.w[e0 + j] * val[t.edge_src[e0 + j]];
        val[q] = sign_of(s);
    }
    std::vector<double> out(t.output_nodes.size());
    for (size_t k = 0; k < out.size(); ++k) out[k] = val[t.output_nodes[k]];
    return out;
}

std::vector<double> forward_raw(const BtfModel& model, std::span<const double> input) {
    const Topology& t = model.topo;
    if (input.size() != t.input_nodes.size())
        throw std::invalid_argument("forward: input length mismatch");
    std::vector<double> val(t.n_nodes);
    for (size_t k = 0; k < input.size(); ++k) val[t.input_nodes[k]] = input[k];
    val[t.constant_id] = -1.0;
    std::vector<double> out(t.output_nodes.size());
    for (int q : t.btf_nodes) {
        const int e0 = t.fanin_first[q];
        const int m = t.fanin_count[q];
        double s = 0.0;
        for (int j = 0; j < m; ++j) s += model.w[e0 + j] * val[t.edge_src[e0 + j]];
        val[q] = sign_of(s);
        if (t.layer_of[q] + 1 == t.n_layers())
            out[t.pos_in_layer[q]] = s;
    }
    return out;
}

double accuracy(const BtfModel& model, const Dataset& data) {
    if (data.n_items() == 0) return 0.0;
    if (data.generative) throw std::invalid_argument("accuracy needs a dataset with inputs");
    long long hits = 0, total = 0;
    for (int i = 0; i < data.n_items(); ++i) {
        const std::vector<double> pred =
            forward(model, {data.input(i), static_cast<size_t>(data.n_in)});
        const std::span<const double> label{data.output(i), static_cast<size_t>(data.n_out)};
        for (size_t k = 0; k < pred.size(); ++k) {
            hits += pred[k] == label[k];
            ++total;
        }
    }
    return static_cast<double>(hits) / static_cast<double>(total);
}

// ------------------------------------------------------------ support sets

namespace {

// Exact support by gray-code enumeration of the other indices' subset sums.
std::vector<int> support_exhaustive(std::span<const double> w) {
    const int m = static_cast<int>(w.size());
    std::vector<int> rel;
    std::vector<double> others(m - 1);
    bool inadmissible = false;
    for (int p = 0; p < m; ++p) {
        for (int j = 0, k = 0; j < m; ++j)
            if (j != p) others[k++] = w[j];
        double s = 0.0; // all others at −1
        for (int j = 0; j < m - 1; ++j) s -= others[j];
        const std::uint64_t combos = 1ull << (m - 1);
        bool flips = false;
        for (std::uint64_t c = 0;; ++c) {
            const double a = s + w[p], b = s - w[p];
            if (std::abs(a) < 1e-9 || std::abs(b) < 1e-9) inadmissible = true;
            if ((a >= 0.0) != (b >= 0.0)) { flips = true; break; }
            if (c + 1 == combos) break;
            const int bit = std::countr_zero(c + 1);
            const std::uint64_t next = (c + 1) ^ ((c + 1) >> 1);
            s += ((next >> bit) & 1u) ? 2.0 * others[bit] : -2.0 * others[bit];
        }
        if (flips) rel.push_back(p);
    }
    if (inadmissible) throw std::runtime_error("inadmissible weights (zero inner product reachable)");
    return rel;
}

} // namespace

std::vector<int> relevant_inputs(std::span<const double> w, double magnitude_threshold) {
    const int m = static_cast<int>(w.size());
    if (m == 0) return {};
    if (m <= 24) return support_exhaustive(w);
    if (magnitude_threshold <= 0.0)
        throw std::invalid_argument("relevant_inputs needs a magnitude threshold for m > 24");
    std::vector<int> kept;
    std::vector<double> reduced;
    for (int p = 0; p < m; ++p)
        if (std::abs(w[p]) >= magnitude_threshold) {
            kept.push_back(p);
            reduced.push_back(w[p]);
        }
    if (static_cast<int>(kept.size()) > 24)
        throw std::runtime_error("support heuristic kept more than 24 indices; raise the threshold");
    const std::vector<int> sub = support_exhaustive(reduced);
    std::vector<int> rel(sub.size());
    for (size_t k = 0; k < sub.size(); ++k) rel[k] = kept[sub[k]];
    return rel;
}

// ----------------------------------------------------------- interpretation

namespace {

std::string node_name(const Topology& t, int node) {
    return "L" + std::to_string(t.layer_of[node]) + "/" + std::to_string(t.pos_in_layer[node]);
}

int count_negations(const GateNet& net) {
    int n = 0;
    for (int q : net.topo.btf_nodes)
        for (const bool neg : net.gates[q].negated) n += neg;
    return n;
}

// Flip the sign of hidden node h: its own gate computes the negation (all
// votes flip, And↔Or), and every receiver negates its edge from h.
void apply_flip(GateNet& net, int h) {
    GateSpec& g = net.gates[h];
    for (size_t j = 0; j < g.negated.size(); ++j) {
        g.negated[j] = !g.negated[j];
        g.source_w[j] = -g.source_w[j];
    }
    g.bias_vote = -g.bias_vote;
    g.bias_w = -g.bias_w;
    if (g.kind == GateKind::And) g.kind = GateKind::Or;
    else if (g.kind == GateKind::Or) g.kind = GateKind::And;
    for (int q : net.topo.btf_nodes) {
        GateSpec& r = net.gates[q];
        for (size_t j = 0; j < r.sources.size(); ++j)
            if (r.sources[j] == h) {
                r.negated[j] = !r.negated[j];
                r.source_w[j] = -r.source_w[j];
            }
    }
}

int flip_gain(const GateNet& net, int h) {
    const GateSpec& g = net.gates[h];
    int delta = 0;
    for (const bool neg : g.negated) delta += neg ? -1 : +1;
    for (int q : net.topo.btf_nodes) {
        const GateSpec& r = net.gates[q];
        for (size_t j = 0; j < r.sources.size(); ++j)
            if (r.sources[j] == h) delta += r.negated[j] ? -1 : +1;
    }
    return delta;
}

} // namespace

std::vector<double> eval_gatenet(const GateNet& net, std::span<const double> input) {
    const Topology& t = net.topo;
    if (input.size() != t.input_nodes.size())
        throw std::invalid_argument("eval_gatenet: input length mismatch");
    std::vector<double> val(t.n_nodes);
    for (size_t k = 0; k < input.size(); ++k) val[t.input_nodes[k]] = input[k];
    val[t.constant_id] = -1.0;
    for (int q : t.btf_nodes) {
        const GateSpec& g = net.gates[q];
        auto src = [&](size_t j) { return g.negated[j] ? -val[g.sources[j]] : val[g.sources[j]]; };
        double v;
        switch (g.kind) {
        case GateKind::Copy: v = src(0); break;
        case GateKind::And: v = (src(0) > 0.0 && src(1) > 0.0) ? 1.0 : -1.0; break;
        case GateKind::Or: v = (src(0) > 0.0 || src(1) > 0.0) ? 1.0 : -1.0; break;
        case GateKind::Maj: {
            double sum = g.bias_vote;
            for (size_t j = 0; j < g.sources.size(); ++j) sum += src(j);
            v = sum < 0.0 ? -1.0 : 1.0;
            break;
        }
        case GateKind::Ambiguous: {
            // no clean gate at this threshold; evaluate the surviving weights
            double s = -g.bias_w;
            for (size_t j = 0; j < g.sources.size(); ++j) s += g.source_w[j] * val[g.sources[j]];
            v = s < 0.0 ? -1.0 : 1.0;
            break;
        }
        default: v = 1.0;
        }
        val[q] = v;
    }
    std::vector<double> out(t.output_nodes.size());
    for (size_t k = 0; k < out.size(); ++k) out[k] = val[t.output_nodes[k]];
    return out;
}

GateNet interpret(const BtfModel& model, double magnitude_threshold,
                  const Dataset* validation, std::uint64_t seed) {
    const Topology& t = model.topo;
    GateNet net;
    net.topo = t;
    net.sigma = model.sigma;
    net.gates.resize(t.n_nodes);

    for (int q : t.btf_nodes) {
        const int e0 = t.fanin_first[q];
        const int m = t.fanin_count[q];
        const double thr = magnitude_threshold > 0.0
                               ? magnitude_threshold
                               : std::sqrt(m / net.sigma) * (1.0 + 1.0 / std::sqrt(net.sigma)) / 2.0;
        GateSpec& g = net.gates[q];
        int n_surv = 0;
        for (int j = 0; j < m; ++j) {
            const double wj = model.w[e0 + j];
            if (std::abs(wj) < thr) continue;
            ++n_surv;
            if (t.edge_src[e0 + j] == t.constant_id) {
                g.uses_bias = true;
                g.bias_w = wj;
            } else {
                g.sources.push_back(t.edge_src[e0 + j]);
                g.negated.push_back(wj < 0.0);
                g.source_w.push_back(wj);
            }
        }
        const int n_real = static_cast<int>(g.sources.size());
        if (n_surv == 1 && n_real == 1) {
            g.kind = GateKind::Copy;
        } else if (n_surv == 3 && g.uses_bias) {
            // the constant node's value is −1: positive weight casts the −1
            // vote of Maj(−1,·,·) = And, negative weight the +1 vote of Or
            g.kind = g.bias_w > 0.0 ? GateKind::And : GateKind::Or;
        } else if (n_surv >= 3 && n_surv % 2 == 1) {
            g.kind = GateKind::Maj;
            if (g.uses_bias) g.bias_vote = g.bias_w > 0.0 ? -1 : +1;
        } else {
            g.kind = GateKind::Ambiguous;
            ++net.ambiguous_nodes;
        }
    }

    // Greedy De Morgan sweeps: flip any hidden node whose sign change lowers
    // the negation count, until a full sweep finds none.
    bool improved = true;
    while (improved) {
        improved = false;
        for (int h : t.hidden_nodes)
            if (flip_gain(net, h) < 0) {
                apply_flip(net, h);
                improved = true;
            }
    }
    net.negation_count = count_negations(net);

    // Agreement with the source model.
    const int n_in = static_cast<int>(t.input_nodes.size());
    long long hits = 0, total = 0;
    auto tally = [&](std::span<const double> in) {
        const std::vector<double> a = forward(model, in);
        const std::vector<double> b = eval_gatenet(net, in);
        for (size_t k = 0; k < a.size(); ++k) {
            hits += a[k] == b[k];
            ++total;
        }
        ++net.validation_items;
    };
    if (n_in <= 16) {
        std::vector<double> in(n_in);
        for (std::uint64_t pat = 0; pat < (1ull << n_in); ++pat) {
            for (int k = 0; k < n_in; ++k) in[k] = (pat >> k) & 1u ? 1.0 : -1.0;
            tally(in);
        }
    } else {
        if (validation && !validation->generative)
            for (int i = 0; i < validation->n_items(); ++i)
                tally({validation->input(i), static_cast<size_t>(validation->n_in)});
        Rng rng(substream_seed(seed, "interpret-validate"));
        std::vector<double> in(n_in);
        for (int i = 0; i < 10000; ++i) {
            for (int k = 0; k < n_in; ++k) in[k] = rng.coin() ? 1.0 : -1.0;
            tally(in);
        }
    }
    net.agreement = total > 0 ? static_cast<double>(hits) / static_cast<double>(total) : 0.0;
    return net;
}

std::string netlist_to_text(const GateNet& net) {
    const Topology& t = net.topo;
    std::ostringstream out;
    out << "# gate netlist; agreement=" << net.agreement
        << " negations=" << net.negation_count << " ambiguous=" << net.ambiguous_nodes << "\n";
    for (int q : t.btf_nodes) {
        const GateSpec& g = net.gates[q];
        out << "node " << node_name(t, q) << ": ";
        auto args = [&](bool with_bias_vote) {
            out << "(";
            bool first = true;
            if (with_bias_vote && g.uses_bias) {
                out << "bias=" << (g.bias_vote > 0 ? "+1" : "-1");
                first = false;
            }
            for (size_t j = 0; j < g.sources.size(); ++j) {
                if (!first) out << ", ";
                out << (g.negated[j] ? "-" : "+") << node_name(t, g.sources[j]);
                first = false;
            }
            out << ")";
        };
        switch (g.kind) {
        case GateKind::Copy: out << "COPY"; args(false); break;
        case GateKind::And: out << "AND"; args(false); break;
        case GateKind::Or: out << "OR"; args(false); break;
        case GateKind::Maj: out << "MAJ" << (g.sources.size() + g.uses_bias); args(true); break;
        case GateKind::Ambiguous: out << "AMBIG"; args(true); break;
        }
        out << "\n";
    }
    return out.str();
}

std::string netlist_to_dot(const GateNet& net) {
    const Topology& t = net.topo;
    std::ostringstream out;
    out << "digraph gatenet {\n  rankdir=BT;\n";
    for (int p : t.input_nodes)
        out << "  \"" << node_name(t, p) << "\" [shape=box];\n";
    for (int q : t.btf_nodes) {
        const GateSpec& g = net.gates[q];
        const char* label = g.kind == GateKind::Copy ? "COPY"
                            : g.kind == GateKind::And ? "AND"
                            : g.kind == GateKind::Or  ? "OR"
                            : g.kind == GateKind::Maj ? "MAJ"
                                                      : "AMBIG";
        out << "  \"" << node_name(t, q) << "\" [label=\"" << node_name(t, q) << "\\n"
            << label << "\"];\n";
        for (size_t j = 0; j < g.sources.size(); ++j)
            out << "  \"" << node_name(t, g.sources[j]) << "\" -> \"" << node_name(t, q)
                << "\"" << (g.negated[j] ? " [style=dashed,color=red]" : "") << ";\n";
    }
    out << "}\n";
    return out.str();
}

// ---------------------------------------------------------------- file I/O

void save_model(const BtfModel& model, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot open " + path + " for writing");
    f << "btf-model v1\n";
    f << "arch=" << arch_to_string(model.topo.widths) << "\n";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", model.sigma);
    f << "sigma=" << buf << "\n";
    for (int q : model.topo.btf_nodes) {
        const int e0 = model.topo.fanin_first[q];
        const int m = model.topo.fanin_count[q];
        for (int j = 0; j < m; ++j) {
            std::snprintf(buf, sizeof buf, "%.17g", model.w[e0 + j]);
            f << (j ? " " : "") << buf;
        }
        f << "\n";
    }
    if (!f) throw std::runtime_error("write failed: " + path);
}

BtfModel load_model(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open " + path);
    auto fail = [&](int line, const std::string& msg) -> std::runtime_error {
        return std::runtime_error(path + ":" + std::to_string(line) + ": " + msg);
    };
    std::string line;
    int ln = 0;
    if (!std::getline(f, line) || line != "btf-model v1") throw fail(1, "expected 'btf-model v1'");
    ++ln;
    if (!std::getline(f, line) || line.rfind("arch=", 0) != 0) throw fail(2, "expected 'arch=...'");
    ++ln;
    BtfModel model;
    model.topo = build_layered(parse_arch(line.substr(5)));
    if (!std::getline(f, line) || line.rfind("sigma=", 0) != 0) throw fail(3, "expected 'sigma=...'");
    ++ln;
    model.sigma = std::stod(line.substr(6));
    if (model.sigma <= 0.0) throw fail(3, "sigma must be positive");
    model.w.assign(model.topo.n_edges, 0.0);
    for (int q : model.topo.btf_nodes) {
        if (!std::getline(f, line)) throw fail(ln + 1, "missing weight line for a neuron");
        ++ln;
        std::istringstream row(line);
        const int e0 = model.topo.fanin_first[q];
        const int m = model.topo.fanin_count[q];
        double norm2 = 0.0;
        for (int j = 0; j < m; ++j) {
            if (!(row >> model.w[e0 + j])) throw fail(ln, "expected " + std::to_string(m) + " weights");
            norm2 += model.w[e0 + j] * model.w[e0 + j];
        }
        double extra;
        if (row >> extra) throw fail(ln, "too many weights on line");
        if (std::abs(norm2 - m) > 1e-4)
            throw fail(ln, "weight norm violation: |w|^2 = " + std::to_string(norm2) +
                               ", expected " + std::to_string(m));
    }
    std::string rest;
    if (f >> rest) throw fail(ln + 1, "trailing data after weight blocks");
    return model;
}

} // namespace btf
