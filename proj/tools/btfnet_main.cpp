// btfnet: train Boolean threshold networks by constraint satisfaction,
// generate benchmark datasets, and interpret trained networks as gate
// netlists.  Every subcommand accepts --config FILE (key=value lines
// mirroring its flags; command-line flags win) and --dump-config.
#include "btf/analysis.hpp"
#include "btf/baseline.hpp"
#include "btf/dataset.hpp"
#include "btf/model.hpp"
#include "btf/rng.hpp"
#include "btf/solver.hpp"
#include "btf/state.hpp"
#include "btf/topology.hpp"

#include "CLI11.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace {

namespace fs = std::filesystem;

btf::InputMode parse_mode(const std::string& s) {
    if (s == "data") return btf::InputMode::Data;
    if (s == "boolean") return btf::InputMode::Boolean;
    if (s == "onehot") return btf::InputMode::OneHot;
    throw std::invalid_argument("unknown input mode '" + s + "'");
}

void write_text(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error(path + ": cannot open for writing");
    out << content;
    if (!out) throw std::runtime_error(path + ": write failed");
}

std::string join(const std::string& dir, const char* name) {
    return (fs::path(dir) / name).string();
}

void describe(const std::string& path, const btf::Dataset& ds) {
    std::printf("wrote %s (%d items, in=%d out=%d%s%s)\n", path.c_str(), ds.n_items(), ds.n_in,
                ds.n_out, ds.analog ? ", analog" : "", ds.generative ? ", generative" : "");
}

btf::Dataset slice(const btf::Dataset& ds, int from, int count) {
    btf::Dataset r;
    r.n_in = ds.n_in;
    r.n_out = ds.n_out;
    r.analog = ds.analog;
    r.generative = ds.generative;
    if (!ds.generative)
        r.in.assign(ds.in.begin() + static_cast<size_t>(from) * ds.n_in,
                    ds.in.begin() + static_cast<size_t>(from + count) * ds.n_in);
    r.out.assign(ds.out.begin() + static_cast<size_t>(from) * ds.n_out,
                 ds.out.begin() + static_cast<size_t>(from + count) * ds.n_out);
    return r;
}

std::string trimmed(const std::string& s) {
    const char* ws = " \t\r\n";
    const auto a = s.find_first_not_of(ws);
    if (a == std::string::npos) return "";
    return s.substr(a, s.find_last_not_of(ws) - a + 1);
}

// Applies key=value lines from `path` to `sub`'s options.  Values already
// given on the command line win; flag keys take a truth word (true/false).
void apply_config_file(CLI::App* sub, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error(path + ": cannot open config file");
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto fail = [&](const std::string& msg) {
            throw std::runtime_error(path + ":" + std::to_string(lineno) + ": " + msg);
        };
        const std::string t = trimmed(line);
        if (t.empty() || t[0] == '#' || t[0] == ';') continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos) fail("expected key=value, got '" + t + "'");
        const std::string key = trimmed(t.substr(0, eq));
        std::string val = trimmed(t.substr(eq + 1));
        if (val.size() >= 2 && val.front() == '"' && val.back() == '"')
            val = val.substr(1, val.size() - 2);
        CLI::Option* op = sub->get_option_no_throw("--" + key);
        if (op == nullptr || !op->get_configurable()) fail("unknown option '" + key + "'");
        if (!op->empty()) continue; // command-line flags win
        if (op->get_expected_min() == 0) {
            if (val == "true" || val == "1" || val == "yes" || val == "on")
                op->add_result("true");
            else if (!(val == "false" || val == "0" || val == "no" || val == "off"))
                fail("flag '" + key + "' wants true or false, got '" + val + "'");
        } else {
            op->add_result(val);
        }
    }
}

// Adds --config/--dump-config to a leaf subcommand; the callback consults the
// returned flag and prints the effective config instead of running.  Register
// this before the subcommand's other options: the config file is applied when
// the --config option's own callback fires, and option callbacks run in
// registration order, so --config must come first for the values it injects
// to reach the options that convert them.
std::shared_ptr<bool> add_config_plumbing(CLI::App* sub) {
    sub->add_option_function<std::string>(
           "--config", [sub](const std::string& path) { apply_config_file(sub, path); },
           "read options from a key=value file")
        ->configurable(false);
    auto dump = std::make_shared<bool>(false);
    sub->add_flag("--dump-config", *dump, "print the effective configuration and exit")
        ->configurable(false);
    return dump;
}

struct TrainOpts {
    std::string arch, train_path, test_path, model_path = "model.txt", log_path = "train.csv";
    std::string state_out, input_mode = "data";
    double sigma = 3.0, beta = 0.2, gamma = 1e-3, gap_stop = 1e-3;
    long long max_iters = 1000000;
    std::uint64_t seed = 0;
    int metric_window = 1, threads = 1;
};

int run_train(const TrainOpts& o) {
    const std::vector<int> widths = btf::parse_arch(o.arch);
    const btf::Topology topo = btf::build_layered(widths);
    const btf::Dataset train_ds = btf::load_dataset(o.train_path);
    std::optional<btf::Dataset> test_ds;
    if (!o.test_path.empty()) test_ds = btf::load_dataset(o.test_path);

    btf::Hyperparams hyper;
    hyper.sigma = o.sigma;
    hyper.beta = o.beta;
    hyper.gamma = o.gamma;
    hyper.gap_stop = o.gap_stop;
    hyper.max_iters = static_cast<long>(o.max_iters);
    hyper.seed = o.seed;
    hyper.input_mode = parse_mode(o.input_mode);
    hyper.metric_window = o.metric_window;

    std::ofstream log(o.log_path);
    if (!log) throw std::runtime_error(o.log_path + ": cannot open for writing");
    log << btf::stats_csv_header() << "\n";

    btf::Trainer tr(topo, train_ds, test_ds ? &*test_ds : nullptr, hyper, o.threads);
    const std::vector<long long> schedule = btf::checkpoint_schedule(o.max_iters);
    size_t cp = 0;
    bool converged = false;
    const auto t0 = std::chrono::steady_clock::now();
    for (long long it = 1; it <= o.max_iters; ++it) {
        const double gap = tr.step();
        converged = gap < o.gap_stop;
        while (cp < schedule.size() && schedule[cp] < it) ++cp;
        if ((cp < schedule.size() && schedule[cp] == it) || converged || it == o.max_iters) {
            btf::IterationStats st;
            st.iter = it;
            st.gap = gap;
            st.min_gap = tr.min_gap();
            st.train_acc = tr.train_accuracy();
            st.test_acc = tr.test_accuracy();
            st.wall_seconds =
                std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            log << btf::stats_csv_line(st) << "\n";
            log.flush();
            if (converged) break;
        }
    }

    const btf::BtfModel model = btf::make_model(topo, tr.solution(), hyper.sigma);
    btf::save_model(model, o.model_path);
    if (!o.state_out.empty())
        btf::save_state(o.state_out, topo, tr.state(), tr.metric(), static_cast<long>(tr.iter()));

    std::printf("iters=%lld gap=%.10g min_gap=%.10g train_acc=%.6f", tr.iter(), tr.last_gap(),
                tr.min_gap(), tr.train_accuracy());
    if (const auto ta = tr.test_accuracy()) std::printf(" test_acc=%.6f", *ta);
    std::printf(" converged=%d\n", converged ? 1 : 0);
    std::printf("wrote %s\n", o.model_path.c_str());
    if (train_ds.generative) {
        const auto usage = btf::codeword_usage(tr.state(), topo, hyper.input_mode);
        std::printf("distinct_codes=%zu\n", usage.size());
    }
    return converged ? 0 : 2;
}

struct BaselineOpts {
    std::string arch, variant = "adamw", train_path, test_path, log_path = "baseline.csv";
    long long steps = 1000000;
    std::uint64_t seed = 0;
    int threads = 1; // accepted for config compatibility; this path is single-threaded
};

int run_baseline(const BaselineOpts& o) {
    const std::vector<int> widths = btf::parse_arch(o.arch);
    const btf::Dataset train_ds = btf::load_dataset(o.train_path);
    std::optional<btf::Dataset> test_ds;
    if (!o.test_path.empty()) test_ds = btf::load_dataset(o.test_path);
    const btf::BaselineVariant variant = btf::parse_variant(o.variant);

    std::ofstream log(o.log_path);
    if (!log) throw std::runtime_error(o.log_path + ": cannot open for writing");
    log << btf::baseline_csv_header() << "\n";
    const auto sink = [&log](const btf::BaselineStats& st) {
        log << btf::baseline_csv_line(st) << "\n";
        log.flush();
    };

    const btf::BaselineResult res = btf::train_baseline(
        widths, train_ds, test_ds ? &*test_ds : nullptr, variant, o.steps, o.seed, sink);

    std::printf("steps=%lld loss=%.10g train_acc=%.6f", o.steps, res.final_loss,
                btf::baseline_accuracy(res.params, train_ds));
    if (test_ds) std::printf(" test_acc=%.6f", btf::baseline_accuracy(res.params, *test_ds));
    std::printf("\n");
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Boolean threshold networks: constraint-satisfaction training, dataset "
                 "generation, netlist interpretation, and gradient baselines"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "btfnet 1.0");
    int rc = 0;

    // ------------------------------------------------------------- gen ---
    CLI::App* gen = app.add_subcommand("gen", "generate benchmark datasets");
    gen->require_subcommand(1);

    // gen mult
    {
        CLI::App* sub = gen->add_subcommand("mult", "complete k-bit multiplication table");
        const auto dump = add_config_plumbing(sub);
        auto bits = std::make_shared<int>(2);
        auto out = std::make_shared<std::string>(".");
        sub->add_option("--bits", *bits, "bits per factor")->required()->check(CLI::Range(1, 8));
        sub->add_option("--out", *out, "output directory")->required();
        sub->callback([&rc, sub, dump, bits, out] {
            if (*dump) {
                std::cout << sub->config_to_str(true, false);
                return;
            }
            fs::create_directories(*out);
            const btf::Dataset ds = btf::gen_mult_table(*bits);
            const std::string path = join(*out, "train.txt");
            btf::save_dataset(ds, path);
            describe(path, ds);
            rc = 0;
        });
    }

    // gen logic
    {
        CLI::App* sub = gen->add_subcommand("logic", "random sparse logic circuit dataset");
        const auto dump = add_config_plumbing(sub);
        struct O {
            int width = 32, layers = 5, train = 256, test = 0;
            std::string gates = "andor", out = ".";
            std::uint64_t seed = 0;
        };
        auto o = std::make_shared<O>();
        sub->add_option("--width", o->width, "wires per layer")->check(CLI::PositiveNumber);
        sub->add_option("--layers", o->layers, "gate layers")->check(CLI::PositiveNumber);
        sub->add_option("--gates", o->gates, "gate family: andor or maj")
            ->check(CLI::IsMember({"andor", "maj"}));
        sub->add_option("--train", o->train, "training items")->check(CLI::NonNegativeNumber);
        sub->add_option("--test", o->test, "held-out items")->check(CLI::NonNegativeNumber);
        sub->add_option("--seed", o->seed, "random seed");
        sub->add_option("--out", o->out, "output directory")->required();
        sub->callback([&rc, sub, dump, o] {
            if (*dump) {
                std::cout << sub->config_to_str(true, false);
                return;
            }
            fs::create_directories(o->out);
            const btf::GateFamily fam =
                o->gates == "maj" ? btf::GateFamily::Maj : btf::GateFamily::AndOr;
            const btf::LogicCircuit c =
                btf::gen_logic_circuit(o->width, o->layers, fam, o->seed);
            const btf::Dataset all = btf::circuit_dataset(c, o->train + o->test, o->seed);
            const std::string train_path = join(o->out, "train.txt");
            btf::save_dataset(slice(all, 0, o->train), train_path);
            describe(train_path, slice(all, 0, o->train));
            if (o->test > 0) {
                const std::string test_path = join(o->out, "test.txt");
                btf::save_dataset(slice(all, o->train, o->test), test_path);
                describe(test_path, slice(all, o->train, o->test));
            }
            write_text(join(o->out, "circuit.txt"), btf::circuit_to_text(c));
            write_text(join(o->out, "circuit.dot"), btf::circuit_to_dot(c));
            std::printf("wrote %s and %s\n", join(o->out, "circuit.txt").c_str(),
                        join(o->out, "circuit.dot").c_str());
            rc = 0;
        });
    }

    // gen ca
    {
        CLI::App* sub = gen->add_subcommand("ca", "elementary cellular automaton dataset");
        const auto dump = add_config_plumbing(sub);
        struct O {
            int rule = 30, world = 16, steps = 1, train = 128, test = 0;
            std::string out = ".";
            std::uint64_t seed = 0;
        };
        auto o = std::make_shared<O>();
        sub->add_option("--rule", o->rule, "Wolfram rule number")->check(CLI::Range(0, 255));
        sub->add_option("--world", o->world, "cells in the periodic world")
            ->check(CLI::PositiveNumber);
        sub->add_option("--steps", o->steps, "CA steps between input and output")
            ->check(CLI::PositiveNumber);
        sub->add_option("--train", o->train, "training items")->check(CLI::NonNegativeNumber);
        sub->add_option("--test", o->test, "held-out items")->check(CLI::NonNegativeNumber);
        sub->add_option("--seed", o->seed, "random seed");
        sub->add_option("--out", o->out, "output directory")->required();
        sub->callback([&rc, sub, dump, o] {
            if (*dump) {
                std::cout << sub->config_to_str(true, false);
                return;
            }
            fs::create_directories(o->out);
            const btf::Dataset all =
                btf::gen_ca(o->rule, o->world, o->steps, o->train + o->test, o->seed);
            const std::string train_path = join(o->out, "train.txt");
            btf::save_dataset(slice(all, 0, o->train), train_path);
            describe(train_path, slice(all, 0, o->train));
            if (o->test > 0) {
                const std::string test_path = join(o->out, "test.txt");
                btf::save_dataset(slice(all, o->train, o->test), test_path);
                describe(test_path, slice(all, o->train, o->test));
            }
            rc = 0;
        });
    }

    // gen random
    {
        CLI::App* sub =
            gen->add_subcommand("random", "random Boolean identity items (autoencoder data)");
        const auto dump = add_config_plumbing(sub);
        struct O {
            int dim = 8, count = 16, code = 0;
            bool with_replacement = false;
            std::string out = ".";
            std::uint64_t seed = 0;
        };
        auto o = std::make_shared<O>();
        sub->add_option("--dim", o->dim, "bits per item")->check(CLI::PositiveNumber);
        sub->add_option("--count", o->count, "items")->check(CLI::PositiveNumber);
        sub->add_option("--code", o->code,
                        "strip inputs; train generatively at this code width")
            ->check(CLI::NonNegativeNumber);
        sub->add_flag("--with-replacement", o->with_replacement,
                      "allow duplicate items (default: all items distinct)");
        sub->add_option("--seed", o->seed, "random seed");
        sub->add_option("--out", o->out, "output directory")->required();
        sub->callback([&rc, sub, dump, o] {
            if (*dump) {
                std::cout << sub->config_to_str(true, false);
                return;
            }
            fs::create_directories(o->out);
            btf::Dataset ds =
                btf::gen_random_boolean(o->dim, o->count, !o->with_replacement, o->seed);
            if (o->code > 0) ds = btf::make_generative(ds, o->code);
            const std::string path = join(o->out, "train.txt");
            btf::save_dataset(ds, path);
            describe(path, ds);
            rc = 0;
        });
    }

    // gen onehot
    {
        CLI::App* sub = gen->add_subcommand("onehot", "the width-item set of 1-hot vectors");
        const auto dump = add_config_plumbing(sub);
        struct O {
            int width = 16, code = 0;
            std::string out = ".";
        };
        auto o = std::make_shared<O>();
        sub->add_option("--width", o->width, "code width = item count")
            ->check(CLI::PositiveNumber);
        sub->add_option("--code", o->code,
                        "strip inputs; train generatively at this code width")
            ->check(CLI::NonNegativeNumber);
        sub->add_option("--out", o->out, "output directory")->required();
        sub->callback([&rc, sub, dump, o] {
            if (*dump) {
                std::cout << sub->config_to_str(true, false);
                return;
            }
            fs::create_directories(o->out);
            btf::Dataset ds = btf::gen_onehot(o->width);
            if (o->code > 0) ds = btf::make_generative(ds, o->code);
            const std::string path = join(o->out, "train.txt");
            btf::save_dataset(ds, path);
            describe(path, ds);
            rc = 0;
        });
    }

    // ----------------------------------------------------------- train ---
    {
        CLI::App* sub = app.add_subcommand("train", "train a network on a dataset");
        const auto dump = add_config_plumbing(sub);
        auto o = std::make_shared<TrainOpts>();
        sub->add_option("--arch", o->arch, "comma-separated layer widths, e.g. 4,4,4,4")
            ->required();
        sub->add_option("--train", o->train_path, "training dataset file")->required();
        sub->add_option("--test", o->test_path, "held-out dataset file");
        sub->add_option("--sigma", o->sigma, "margin parameter (mu = sqrt(m/sigma))")->capture_default_str();
        sub->add_option("--beta", o->beta, "iteration step size in (0,2)")->capture_default_str();
        sub->add_option("--gamma", o->gamma, "metric adaptation rate")->capture_default_str();
        sub->add_option("--max-iters", o->max_iters, "iteration budget")->capture_default_str();
        sub->add_option("--gap-stop", o->gap_stop, "stop when the gap falls below this")->capture_default_str();
        sub->add_option("--seed", o->seed, "random seed")->capture_default_str();
        sub->add_option("--input-mode", o->input_mode, "data, boolean, or onehot")->capture_default_str()
            ->check(CLI::IsMember({"data", "boolean", "onehot"}));
        sub->add_option("--metric-window", o->metric_window,
                        "smooth per-block gaps over this many iterations")->capture_default_str()
            ->check(CLI::PositiveNumber);
        sub->add_option("--threads", o->threads, "worker threads")->capture_default_str()
            ->check(CLI::PositiveNumber);
        sub->add_option("--model", o->model_path, "model output file")->capture_default_str();
        sub->add_option("--log", o->log_path, "CSV log output file")->capture_default_str();
        sub->add_option("--state-out", o->state_out, "write the full final state here");
        sub->callback([&rc, sub, dump, o] {
            if (*dump) {
                std::cout << sub->config_to_str(true, false);
                return;
            }
            rc = run_train(*o);
        });
    }

    // ------------------------------------------------------------ eval ---
    {
        CLI::App* sub = app.add_subcommand("eval", "bit accuracy of a model on a dataset");
        const auto dump = add_config_plumbing(sub);
        struct O {
            std::string model, data;
            bool argmax = false;
        };
        auto o = std::make_shared<O>();
        sub->add_option("--model", o->model, "model file")->required();
        sub->add_option("--data", o->data, "dataset file")->required();
        sub->add_flag("--argmax", o->argmax,
                      "score items by the argmax of the output sums (1-hot outputs)");
        sub->callback([&rc, sub, dump, o] {
            if (*dump) {
                std::cout << sub->config_to_str(true, false);
                return;
            }
            const btf::BtfModel model = btf::load_model(o->model);
            const btf::Dataset ds = btf::load_dataset(o->data);
            double acc;
            if (o->argmax) {
                if (ds.generative)
                    throw std::runtime_error("eval needs a dataset with inputs");
                long long hits = 0;
                for (int i = 0; i < ds.n_items(); ++i) {
                    const std::vector<double> raw = btf::forward_raw(model, {ds.input(i), static_cast<size_t>(ds.n_in)});
                    int pred = 0, truth = 0;
                    for (int k = 1; k < ds.n_out; ++k) {
                        if (raw[k] > raw[pred]) pred = k;
                        if (ds.output(i)[k] > ds.output(i)[truth]) truth = k;
                    }
                    hits += pred == truth;
                }
                acc = ds.n_items() ? static_cast<double>(hits) / ds.n_items() : 0.0;
            } else {
                acc = btf::accuracy(model, ds);
            }
            std::printf("accuracy=%.6f\n", acc);
            rc = 0;
        });
    }

    // ------------------------------------------------------- interpret ---
    {
        CLI::App* sub =
            app.add_subcommand("interpret", "read a trained model as a gate netlist");
        const auto dump = add_config_plumbing(sub);
        struct O {
            std::string model, out, dot, data;
            double threshold = -1.0;
            std::uint64_t seed = 0;
        };
        auto o = std::make_shared<O>();
        sub->add_option("--model", o->model, "model file")->required();
        sub->add_option("--threshold", o->threshold,
                        "weight magnitude cut (default: per-node halfway point)");
        sub->add_option("--out", o->out, "netlist output file (default: stdout)");
        sub->add_option("--dot", o->dot, "also write a DOT graph here");
        sub->add_option("--data", o->data, "validation dataset for the agreement check");
        sub->add_option("--seed", o->seed, "seed for sampled agreement checks");
        sub->callback([&rc, sub, dump, o] {
            if (*dump) {
                std::cout << sub->config_to_str(true, false);
                return;
            }
            const btf::BtfModel model = btf::load_model(o->model);
            std::optional<btf::Dataset> val;
            if (!o->data.empty()) val = btf::load_dataset(o->data);
            const btf::GateNet net =
                btf::interpret(model, o->threshold, val ? &*val : nullptr, o->seed);
            const std::string text = btf::netlist_to_text(net);
            if (o->out.empty())
                std::cout << text;
            else
                write_text(o->out, text);
            if (!o->dot.empty()) write_text(o->dot, btf::netlist_to_dot(net));
            std::printf("agreement=%.6f negations=%d ambiguous=%d validated_items=%lld\n",
                        net.agreement, net.negation_count, net.ambiguous_nodes,
                        static_cast<long long>(net.validation_items));
            rc = 0;
        });
    }

    // --------------------------------------------------------- analyze ---
    CLI::App* analyze = app.add_subcommand("analyze", "information and weight diagnostics");
    analyze->require_subcommand(1);
    {
        CLI::App* sub = analyze->add_subcommand(
            "info", "circuit-count and multiplicity information content");
        const auto dump = add_config_plumbing(sub);
        struct O {
            int width = 32, layers = 5, sigma = 3;
            double entropy = 0.0;
        };
        auto o = std::make_shared<O>();
        sub->add_option("--width", o->width, "wires per layer")->required();
        sub->add_option("--layers", o->layers, "gate layers")->required();
        sub->add_option("--sigma", o->sigma, "margin parameter (counting needs 3)")->capture_default_str();
        sub->add_option("--entropy-per-item", o->entropy,
                        "output entropy in bits per item; enables items-needed");
        sub->callback([&rc, sub, dump, o] {
            if (*dump) {
                std::cout << sub->config_to_str(true, false);
                return;
            }
            if (o->entropy > 0.0) {
                const btf::SufficiencyReport rep =
                    btf::sufficiency(o->width, o->layers, o->sigma, o->entropy);
                std::printf("log2_circuits=%.6f\nlog2_multiplicity=%.6f\nh_bits=%.6f\n"
                            "entropy_per_item=%.6f\nitems_needed=%.2f\n",
                            rep.log2_circuits, rep.log2_multiplicity, rep.h_bits,
                            rep.entropy_per_item, rep.items_needed);
            } else {
                const double c = btf::log2_circuit_count(o->width, o->layers, o->sigma);
                const double m = btf::log2_multiplicity(o->width, o->layers);
                std::printf("log2_circuits=%.6f\nlog2_multiplicity=%.6f\nh_bits=%.6f\n", c, m,
                            c - m);
            }
            rc = 0;
        });
    }
    {
        CLI::App* sub =
            analyze->add_subcommand("entropy", "plug-in entropy of a dataset's outputs");
        const auto dump = add_config_plumbing(sub);
        auto data = std::make_shared<std::string>();
        sub->add_option("--data", *data, "dataset file")->required();
        sub->callback([&rc, sub, dump, data] {
            if (*dump) {
                std::cout << sub->config_to_str(true, false);
                return;
            }
            const btf::Dataset ds = btf::load_dataset(*data);
            std::printf("entropy_bits=%.6f items=%d\n", btf::output_entropy(ds), ds.n_items());
            rc = 0;
        });
    }
    {
        CLI::App* sub = analyze->add_subcommand("hist", "weight histogram of a model");
        const auto dump = add_config_plumbing(sub);
        struct O {
            std::string model;
            double bin = 0.1;
            int layer = -1;
        };
        auto o = std::make_shared<O>();
        sub->add_option("--model", o->model, "model file")->required();
        sub->add_option("--bin-width", o->bin, "histogram bin width")->capture_default_str()
            ->check(CLI::PositiveNumber);
        sub->add_option("--layer", o->layer, "restrict to edges feeding this layer (1-based)");
        sub->callback([&rc, sub, dump, o] {
            if (*dump) {
                std::cout << sub->config_to_str(true, false);
                return;
            }
            const btf::BtfModel model = btf::load_model(o->model);
            for (const auto& [center, count] : btf::weight_histogram(model, o->bin, o->layer))
                std::printf("%.6g %lld\n", center, count);
            rc = 0;
        });
    }
    {
        CLI::App* sub = analyze->add_subcommand(
            "codes", "codeword usage of a saved generative training state");
        const auto dump = add_config_plumbing(sub);
        struct O {
            std::string state, mode = "boolean";
        };
        auto o = std::make_shared<O>();
        sub->add_option("--state", o->state, "state file written by train --state-out")
            ->required();
        sub->add_option("--mode", o->mode, "boolean or onehot rounding")->capture_default_str()
            ->check(CLI::IsMember({"boolean", "onehot"}));
        sub->callback([&rc, sub, dump, o] {
            if (*dump) {
                std::cout << sub->config_to_str(true, false);
                return;
            }
            const btf::LoadedState ls = btf::load_state(o->state);
            const btf::Topology topo = btf::build_layered(ls.widths);
            const auto usage = btf::codeword_usage(ls.state, topo, parse_mode(o->mode));
            for (const auto& [code, count] : usage)
                std::printf("%s %lld\n", code.c_str(), count);
            std::printf("distinct_codes=%zu\n", usage.size());
            rc = 0;
        });
    }

    // -------------------------------------------------------- baseline ---
    {
        CLI::App* sub =
            app.add_subcommand("baseline", "gradient-descent baseline (ReLU MLP + AdamW)");
        const auto dump = add_config_plumbing(sub);
        auto o = std::make_shared<BaselineOpts>();
        sub->add_option("--arch", o->arch, "comma-separated layer widths")->required();
        sub->add_option("--variant", o->variant, "adamw, penalty, adam, or projected")->capture_default_str()
            ->check(CLI::IsMember({"adamw", "penalty", "adam", "projected"}));
        sub->add_option("--steps", o->steps, "full-batch optimization steps")->capture_default_str()
            ->check(CLI::NonNegativeNumber);
        sub->add_option("--train", o->train_path, "training dataset file")->required();
        sub->add_option("--test", o->test_path, "held-out dataset file");
        sub->add_option("--seed", o->seed, "random seed")->capture_default_str();
        sub->add_option("--log", o->log_path, "CSV log output file")->capture_default_str();
        sub->add_option("--threads", o->threads,
                        "accepted for config compatibility (this path is single-threaded)")->capture_default_str();
        sub->callback([&rc, sub, dump, o] {
            if (*dump) {
                std::cout << sub->config_to_str(true, false);
                return;
            }
            rc = run_baseline(*o);
        });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1; // usage errors
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1; // I/O and validation errors
    }
    return rc;
}
