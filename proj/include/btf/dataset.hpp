#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace btf {

// Items hold inputs in [-1,1]^{n_in} (exactly ±1 unless analog) and outputs
// in {-1,+1}^{n_out}.  Generative datasets carry outputs only; n_in then
// records the code width the inputs will be invented at.
struct Dataset {
    int n_in = 0;
    int n_out = 0;
    bool analog = false;
    bool generative = false;
    std::vector<double> in;   // n_items * n_in, row-major; empty when generative
    std::vector<double> out;  // n_items * n_out, row-major

    int n_items() const { return n_out > 0 ? static_cast<int>(out.size()) / n_out : 0; }
    const double* input(int item) const { return in.data() + static_cast<size_t>(item) * n_in; }
    const double* output(int item) const { return out.data() + static_cast<size_t>(item) * n_out; }
};

// ---------------------------------------------------------------- circuits

enum class GateFamily { AndOr, Maj };
enum class CircuitGateKind : std::uint8_t { Copy, And, Or, Maj };

struct CircuitGate {
    CircuitGateKind kind = CircuitGateKind::Copy;
    int n_src = 1;
    int src[3] = {-1, -1, -1};   // indices into the layer below
    bool neg[3] = {false, false, false};
};

// Random sparse logic circuit: `layers` gate layers over `width` wires.
// Invariant: every node of each non-top layer feeds at least one gate above.
struct LogicCircuit {
    int width = 0;
    int layers = 0;
    GateFamily family = GateFamily::AndOr;
    std::vector<std::vector<CircuitGate>> gates; // [layer][position]
};

// ---------------------------------------------------------------- generators

// Complete k-bit multiplication table, 2^{2k} items.  Inputs are the k bits
// of factor a (most significant first) then factor b; outputs the 2k product
// bits.  1 <= k <= 8.
Dataset gen_mult_table(int k_bits);

// Gate distribution: Copy with probability 1/2; otherwise And/Or (family
// AndOr, type picked by the constant-input negation flag) or Maj.  Sources
// are drawn uniformly without replacement within a gate; Not with
// probability 1/2 on every edge.  Dead ends are repaired by redirecting one
// input of a uniformly chosen gate to each orphaned node, re-checking.
LogicCircuit gen_logic_circuit(int width, int layers, GateFamily family, std::uint64_t seed);

// Exact gate semantics on ±1 values (And = Maj with a -1 bias vote).
std::vector<double> eval_circuit(const LogicCircuit& c, const std::vector<double>& input);

// Samples `count` uniform input words and labels them with eval_circuit.
Dataset circuit_dataset(const LogicCircuit& c, int count, std::uint64_t seed);

// Elementary cellular automaton, periodic world of L cells, `steps`
// synchronous applications of the Wolfram rule (0-255).
Dataset gen_ca(int rule, int world, int steps, int count, std::uint64_t seed);

// one synchronous CA step on ±1 cells (exposed for tests / ground truth)
std::vector<double> ca_step(int rule, const std::vector<double>& cells);

// Uniform ±1 vectors as identity items (output = input); with `distinct`,
// rejection-resampled until all vectors differ (count <= 2^dim required).
Dataset gen_random_boolean(int dim, int count, bool distinct, std::uint64_t seed);

// The width-item identity set of 1-hot vectors (+1 at one position).
Dataset gen_onehot(int width);

// Strips the inputs off a dataset, turning it into a generative one whose
// inputs will live at `code_width` nodes.
Dataset make_generative(const Dataset& ds, int code_width);

// ---------------------------------------------------------------- file I/O

// Format: header `in=<n> out=<m> [analog]`, one item per line, input field a
// single space before the output field.  Boolean fields are unseparated 0/1
// strings (0 -> -1, 1 -> +1); analog input fields comma-separated decimals in
// [0,1] (mapped to 2u-1).  Generative files omit the input field.
Dataset load_dataset(const std::string& path);
void save_dataset(const Dataset& ds, const std::string& path);

// Circuit description as text ("node L<l>/<j>: GATE(±L<l-1>/<k>, ...)") and a
// DOT graph for external renderers.
std::string circuit_to_text(const LogicCircuit& c);
std::string circuit_to_dot(const LogicCircuit& c);

} // namespace btf
