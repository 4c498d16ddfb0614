#pragma once

#include "btf/dataset.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace btf {

// Fully connected ReLU network with a linear logit head.  Inputs and outputs
// are encoded as {0,1}; W[l] maps layer l to layer l+1 (rows are neurons).
struct MlpParams {
    std::vector<int> widths;
    std::vector<Eigen::MatrixXd> W;
    std::vector<Eigen::VectorXd> b;

    int n_layers() const { return static_cast<int>(W.size()); }
    long long n_params() const;
};

struct MlpGrads {
    std::vector<Eigen::MatrixXd> W;
    std::vector<Eigen::VectorXd> b;
};

enum class BaselineVariant {
    AdamW,     // BCE objective only
    Penalty,   // BCE + row-norm + l1 penalties
    Adam,      // no decoupled weight decay
    Projected, // hard row-norm / row-sparsity projection after each update
};

BaselineVariant parse_variant(const std::string& name);
std::string variant_name(BaselineVariant v);

struct AdamHyper {
    double eta = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double lambda_decay = 1e-4;
    double lambda_norm = 1e-2; // row-norm penalty coefficient
    double lambda_l1 = 1e-4;   // l1 penalty coefficient
};

struct AdamState {
    std::vector<Eigen::MatrixXd> mW, vW;
    std::vector<Eigen::VectorXd> mb, vb;
    long long t = 0;
    AdamHyper hyper;
};

AdamState make_adam_state(const MlpParams& params, const AdamHyper& hyper = {});

// Uniform in ±1/sqrt(fan-in) for both weights and biases, seed-deterministic.
MlpParams kaiming_init(const std::vector<int>& widths, std::uint64_t seed);

// One column per item.  X entries in {0,1}; returns logits.
Eigen::MatrixXd mlp_forward(const MlpParams& params, const Eigen::MatrixXd& X);

// Mean over items and output bits of max(z,0) - y*z + log(1 + exp(-|z|)).
double loss_bce(const Eigen::MatrixXd& Z, const Eigen::MatrixXd& Y);

struct PenaltyReport {
    double row_norm = 0.0; // lambda_norm * sum_l (1/d_l) sum_j (|w_j|^2 - fanin)^2
    double l1 = 0.0;       // lambda_l1 * sum_l (1/(d_l*fanin)) sum |W|
};
PenaltyReport penalty_terms(const MlpParams& params, const AdamHyper& hyper = {});

// Full-batch gradient of BCE (plus the penalties when requested) by direct
// backpropagation.  Biases never receive penalty gradients.
MlpGrads mlp_gradient(const MlpParams& params, const Eigen::MatrixXd& X,
                      const Eigen::MatrixXd& Y, bool with_penalties,
                      const AdamHyper& hyper = {});

// Bias-corrected moments, then theta -= eta*mhat/(sqrt(vhat)+eps) followed by
// the decoupled decay theta -= eta*lambda_decay*theta on every parameter.
void adamw_step(MlpParams& params, AdamState& state, const MlpGrads& grads);

// Fraction of output bits with (logit > 0) matching the dataset labels.
double baseline_accuracy(const MlpParams& params, const Dataset& data);

struct BaselineStats {
    long long step = 0;
    double loss = 0.0; // BCE at the checkpoint (post-update)
    double min_loss = std::numeric_limits<double>::infinity();
    double train_acc = 0.0;
    std::optional<double> test_acc;
    double wall_seconds = 0.0;
};

using BaselineSink = std::function<void(const BaselineStats&)>;

struct BaselineResult {
    MlpParams params;
    std::vector<BaselineStats> history;
    double final_loss = std::numeric_limits<double>::infinity();
};

// Full-batch training loop, geometric checkpoints, no early stopping.
BaselineResult train_baseline(const std::vector<int>& widths, const Dataset& train,
                              const Dataset* test, BaselineVariant variant, long long steps,
                              std::uint64_t seed, const BaselineSink& sink = nullptr,
                              const AdamHyper& hyper = {});

// CSV with the same shape as the trainer log; loss replaces gap.
std::string baseline_csv_header();
std::string baseline_csv_line(const BaselineStats& s);

} // namespace btf
