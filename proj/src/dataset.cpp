#include "btf/dataset.hpp"

#include "btf/rng.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace btf {

namespace {

void push_bits(std::vector<double>& v, unsigned value, int bits) {
    for (int b = bits - 1; b >= 0; --b)
        v.push_back(((value >> b) & 1u) ? 1.0 : -1.0);
}

} // namespace

Dataset gen_mult_table(int k_bits) {
    if (k_bits < 1 || k_bits > 8)
        throw std::invalid_argument("gen_mult_table: factor width must be between 1 and 8 bits");
    Dataset ds;
    ds.n_in = 2 * k_bits;
    ds.n_out = 2 * k_bits;
    const unsigned n = 1u << k_bits;
    for (unsigned a = 0; a < n; ++a) {
        for (unsigned b = 0; b < n; ++b) {
            push_bits(ds.in, a, k_bits);
            push_bits(ds.in, b, k_bits);
            push_bits(ds.out, a * b, 2 * k_bits);
        }
    }
    return ds;
}

// ---------------------------------------------------------------- circuits

LogicCircuit gen_logic_circuit(int width, int layers, GateFamily family, std::uint64_t seed) {
    if (width < 3) throw std::invalid_argument("gen_logic_circuit: width must be >= 3");
    if (layers < 1) throw std::invalid_argument("gen_logic_circuit: need at least one layer");

    Rng rng(substream_seed(seed, "logic-circuit"));
    const auto m = static_cast<std::uint64_t>(width);

    LogicCircuit c;
    c.width = width;
    c.layers = layers;
    c.family = family;
    c.gates.resize(layers);

    for (int layer = 0; layer < layers; ++layer) {
        auto& row = c.gates[layer];
        row.resize(width);
        for (int pos = 0; pos < width; ++pos) {
            CircuitGate& g = row[pos];
            if (rng.coin()) {
                g.kind = CircuitGateKind::Copy;
                g.n_src = 1;
                g.src[0] = static_cast<int>(rng.below(m));
                g.neg[0] = rng.coin();
            } else if (family == GateFamily::AndOr) {
                g.n_src = 2;
                g.src[0] = static_cast<int>(rng.below(m));
                int second = static_cast<int>(rng.below(m - 1));
                if (second >= g.src[0]) ++second; // without replacement
                g.src[1] = second;
                g.neg[0] = rng.coin();
                g.neg[1] = rng.coin();
                // the sign on the constant input picks the gate type
                g.kind = rng.coin() ? CircuitGateKind::Or : CircuitGateKind::And;
            } else {
                g.kind = CircuitGateKind::Maj;
                g.n_src = 3;
                int a = static_cast<int>(rng.below(m));
                int b = static_cast<int>(rng.below(m - 1));
                if (b >= a) ++b;
                int lo = a < b ? a : b, hi = a < b ? b : a;
                int d = static_cast<int>(rng.below(m - 2));
                if (d >= lo) ++d;
                if (d >= hi) ++d;
                g.src[0] = a;
                g.src[1] = b;
                g.src[2] = d;
                g.neg[0] = rng.coin();
                g.neg[1] = rng.coin();
                g.neg[2] = rng.coin();
            }
        }

        // no-dead-end repair: every node below must feed some gate here
        for (int round = 0;; ++round) {
            if (round > 10000)
                throw std::runtime_error("gen_logic_circuit: dead-end repair did not settle");
            std::vector<char> used(width, 0);
            for (const auto& g : row)
                for (int s = 0; s < g.n_src; ++s) used[g.src[s]] = 1;
            std::vector<int> orphans;
            for (int p = 0; p < width; ++p)
                if (!used[p]) orphans.push_back(p);
            if (orphans.empty()) break;
            for (int orphan : orphans) {
                CircuitGate& g = row[rng.below(m)];
                const int slot = static_cast<int>(rng.below(static_cast<std::uint64_t>(g.n_src)));
                g.src[slot] = orphan;
            }
        }
    }
    return c;
}

std::vector<double> eval_circuit(const LogicCircuit& c, const std::vector<double>& input) {
    if (static_cast<int>(input.size()) != c.width)
        throw std::invalid_argument("eval_circuit: input width mismatch");
    std::vector<double> below = input, above(c.width);
    for (const auto& row : c.gates) {
        for (int pos = 0; pos < c.width; ++pos) {
            const CircuitGate& g = row[pos];
            auto arg = [&](int s) { return g.neg[s] ? -below[g.src[s]] : below[g.src[s]]; };
            double v = 0.0;
            switch (g.kind) {
            case CircuitGateKind::Copy: v = arg(0); break;
            case CircuitGateKind::And: v = arg(0) + arg(1) - 1.0; break;
            case CircuitGateKind::Or: v = arg(0) + arg(1) + 1.0; break;
            case CircuitGateKind::Maj: v = arg(0) + arg(1) + arg(2); break;
            }
            above[pos] = v >= 0.0 ? 1.0 : -1.0;
        }
        below.swap(above);
    }
    return below;
}

Dataset circuit_dataset(const LogicCircuit& c, int count, std::uint64_t seed) {
    Rng rng(substream_seed(seed, "circuit-items"));
    Dataset ds;
    ds.n_in = c.width;
    ds.n_out = c.width;
    std::vector<double> word(c.width);
    for (int item = 0; item < count; ++item) {
        for (auto& v : word) v = rng.coin() ? 1.0 : -1.0;
        ds.in.insert(ds.in.end(), word.begin(), word.end());
        const auto out = eval_circuit(c, word);
        ds.out.insert(ds.out.end(), out.begin(), out.end());
    }
    return ds;
}

// ---------------------------------------------------------------- automata

std::vector<double> ca_step(int rule, const std::vector<double>& cells) {
    const int L = static_cast<int>(cells.size());
    std::vector<double> next(L);
    for (int p = 0; p < L; ++p) {
        const int left = cells[(p + L - 1) % L] > 0.0 ? 1 : 0;
        const int mid = cells[p] > 0.0 ? 1 : 0;
        const int right = cells[(p + 1) % L] > 0.0 ? 1 : 0;
        const int idx = (left << 2) | (mid << 1) | right;
        next[p] = ((rule >> idx) & 1) ? 1.0 : -1.0;
    }
    return next;
}

Dataset gen_ca(int rule, int world, int steps, int count, std::uint64_t seed) {
    if (rule < 0 || rule > 255) throw std::invalid_argument("gen_ca: rule must be 0..255");
    if (world < 3) throw std::invalid_argument("gen_ca: world size must be >= 3");
    if (steps < 1) throw std::invalid_argument("gen_ca: steps must be >= 1");

    Rng rng(substream_seed(seed, "ca-worlds"));
    Dataset ds;
    ds.n_in = world;
    ds.n_out = world;
    std::vector<double> cells(world);
    for (int item = 0; item < count; ++item) {
        for (auto& v : cells) v = rng.coin() ? 1.0 : -1.0;
        ds.in.insert(ds.in.end(), cells.begin(), cells.end());
        std::vector<double> cur = cells;
        for (int t = 0; t < steps; ++t) cur = ca_step(rule, cur);
        ds.out.insert(ds.out.end(), cur.begin(), cur.end());
    }
    return ds;
}

// ---------------------------------------------------------------- vectors

Dataset gen_random_boolean(int dim, int count, bool distinct, std::uint64_t seed) {
    if (dim < 1) throw std::invalid_argument("gen_random_boolean: dim must be positive");
    if (distinct && dim < 63 && static_cast<std::uint64_t>(count) > (1ull << dim))
        throw std::invalid_argument("gen_random_boolean: cannot draw that many distinct vectors");

    Rng rng(substream_seed(seed, "random-boolean"));
    Dataset ds;
    ds.n_in = dim;
    ds.n_out = dim;
    std::set<std::vector<char>> seen;
    std::vector<double> word(dim);
    std::vector<char> key(dim);
    for (int item = 0; item < count; ++item) {
        for (;;) {
            for (int b = 0; b < dim; ++b) {
                const bool bit = rng.coin();
                word[b] = bit ? 1.0 : -1.0;
                key[b] = bit ? 1 : 0;
            }
            if (!distinct || seen.insert(key).second) break;
        }
        ds.in.insert(ds.in.end(), word.begin(), word.end());
        ds.out.insert(ds.out.end(), word.begin(), word.end());
    }
    return ds;
}

Dataset gen_onehot(int width) {
    if (width < 1) throw std::invalid_argument("gen_onehot: width must be positive");
    Dataset ds;
    ds.n_in = width;
    ds.n_out = width;
    for (int item = 0; item < width; ++item)
        for (int b = 0; b < width; ++b)
            ds.in.push_back(b == item ? 1.0 : -1.0);
    ds.out = ds.in;
    return ds;
}

Dataset make_generative(const Dataset& ds, int code_width) {
    if (code_width < 1) throw std::invalid_argument("make_generative: code width must be positive");
    Dataset out = ds;
    out.in.clear();
    out.n_in = code_width;
    out.generative = true;
    out.analog = false;
    return out;
}

// ---------------------------------------------------------------- file I/O

namespace {

[[noreturn]] void fail_line(const std::string& path, int line_no, const std::string& what) {
    throw std::runtime_error(path + ":" + std::to_string(line_no) + ": " + what);
}

void parse_boolean_field(const std::string& field, int expect, std::vector<double>& sink,
                         const std::string& path, int line_no) {
    if (static_cast<int>(field.size()) != expect)
        fail_line(path, line_no, "expected " + std::to_string(expect) + " Boolean characters, got " +
                                     std::to_string(field.size()));
    for (char ch : field) {
        if (ch == '0') sink.push_back(-1.0);
        else if (ch == '1') sink.push_back(1.0);
        else fail_line(path, line_no, std::string("invalid Boolean character '") + ch + "'");
    }
}

} // namespace

Dataset load_dataset(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open dataset file: " + path);

    std::string header;
    if (!std::getline(f, header)) throw std::runtime_error(path + ": empty file");

    Dataset ds;
    {
        std::istringstream hs(header);
        std::string tok;
        bool have_in = false, have_out = false;
        while (hs >> tok) {
            if (tok.rfind("in=", 0) == 0) { ds.n_in = std::stoi(tok.substr(3)); have_in = true; }
            else if (tok.rfind("out=", 0) == 0) { ds.n_out = std::stoi(tok.substr(4)); have_out = true; }
            else if (tok == "analog") ds.analog = true;
            else fail_line(path, 1, "unrecognized header token '" + tok + "'");
        }
        if (!have_in || !have_out || ds.n_in < 1 || ds.n_out < 1)
            fail_line(path, 1, "header must declare in=<n> and out=<m>");
    }

    std::string line;
    int line_no = 1;
    int generative = -1; // unknown until the first item
    while (std::getline(f, line)) {
        ++line_no;
        while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
        if (line.empty()) continue;

        const auto space = line.find(' ');
        const bool item_generative = (space == std::string::npos);
        if (generative == -1) generative = item_generative ? 1 : 0;
        else if (item_generative != (generative == 1))
            fail_line(path, line_no, "mix of generative and input-bearing items");

        if (item_generative) {
            parse_boolean_field(line, ds.n_out, ds.out, path, line_no);
            continue;
        }

        const std::string in_field = line.substr(0, space);
        const std::string out_field = line.substr(space + 1);
        if (out_field.find(' ') != std::string::npos)
            fail_line(path, line_no, "expected exactly one space between input and output fields");

        if (ds.analog) {
            std::istringstream is(in_field);
            std::string num;
            int got = 0;
            while (std::getline(is, num, ',')) {
                size_t used = 0;
                double u;
                try { u = std::stod(num, &used); } catch (...) { used = 0; u = 0.0; }
                if (used != num.size()) fail_line(path, line_no, "malformed analog value '" + num + "'");
                if (u < 0.0 || u > 1.0)
                    fail_line(path, line_no, "analog value " + num + " outside [0,1]");
                ds.in.push_back(2.0 * u - 1.0);
                ++got;
            }
            if (got != ds.n_in)
                fail_line(path, line_no, "expected " + std::to_string(ds.n_in) + " analog values, got " +
                                             std::to_string(got));
        } else {
            parse_boolean_field(in_field, ds.n_in, ds.in, path, line_no);
        }
        parse_boolean_field(out_field, ds.n_out, ds.out, path, line_no);
    }
    ds.generative = (generative == 1);
    if (ds.generative && ds.analog)
        throw std::runtime_error(path + ": a generative file cannot be analog");
    return ds;
}

void save_dataset(const Dataset& ds, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot write dataset file: " + path);
    f << "in=" << ds.n_in << " out=" << ds.n_out << (ds.analog ? " analog" : "") << "\n";
    const int n = ds.n_items();
    char buf[32];
    for (int item = 0; item < n; ++item) {
        if (!ds.generative) {
            if (ds.analog) {
                for (int b = 0; b < ds.n_in; ++b) {
                    const double u = (ds.input(item)[b] + 1.0) / 2.0;
                    std::snprintf(buf, sizeof buf, "%.17g", u);
                    f << (b ? "," : "") << buf;
                }
            } else {
                for (int b = 0; b < ds.n_in; ++b) f << (ds.input(item)[b] > 0.0 ? '1' : '0');
            }
            f << ' ';
        }
        for (int b = 0; b < ds.n_out; ++b) f << (ds.output(item)[b] > 0.0 ? '1' : '0');
        f << '\n';
    }
    if (!f) throw std::runtime_error("failed while writing dataset file: " + path);
}

// ------------------------------------------------------- circuit exports

namespace {
const char* gate_name(CircuitGateKind k) {
    switch (k) {
    case CircuitGateKind::Copy: return "COPY";
    case CircuitGateKind::And: return "AND";
    case CircuitGateKind::Or: return "OR";
    case CircuitGateKind::Maj: return "MAJ";
    }
    return "?";
}
} // namespace

std::string circuit_to_text(const LogicCircuit& c) {
    std::ostringstream os;
    os << "circuit v1\n";
    os << "width=" << c.width << " layers=" << c.layers
       << " family=" << (c.family == GateFamily::AndOr ? "andor" : "maj") << "\n";
    for (int layer = 0; layer < c.layers; ++layer) {
        for (int pos = 0; pos < c.width; ++pos) {
            const CircuitGate& g = c.gates[layer][pos];
            os << "node L" << (layer + 1) << "/" << pos << ": " << gate_name(g.kind) << "(";
            for (int s = 0; s < g.n_src; ++s) {
                os << (s ? ", " : "") << (g.neg[s] ? '-' : '+') << "L" << layer << "/" << g.src[s];
            }
            os << ")\n";
        }
    }
    return os.str();
}

std::string circuit_to_dot(const LogicCircuit& c) {
    std::ostringstream os;
    os << "digraph circuit {\n  rankdir=BT;\n";
    for (int pos = 0; pos < c.width; ++pos)
        os << "  \"L0/" << pos << "\" [shape=circle,label=\"x" << pos << "\"];\n";
    for (int layer = 0; layer < c.layers; ++layer)
        for (int pos = 0; pos < c.width; ++pos) {
            const CircuitGate& g = c.gates[layer][pos];
            os << "  \"L" << (layer + 1) << "/" << pos << "\" [shape=box,label=\""
               << gate_name(g.kind) << "\"];\n";
            for (int s = 0; s < g.n_src; ++s)
                os << "  \"L" << layer << "/" << g.src[s] << "\" -> \"L" << (layer + 1) << "/"
                   << pos << "\"" << (g.neg[s] ? " [color=red]" : "") << ";\n";
        }
    os << "}\n";
    return os.str();
}

} // namespace btf
