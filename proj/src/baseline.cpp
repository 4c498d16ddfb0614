#include "btf/baseline.hpp"

#include "btf/rng.hpp"
#include "btf/solver.hpp" // checkpoint_schedule

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace btf {

long long MlpParams::n_params() const {
    long long n = 0;
    for (size_t l = 0; l < W.size(); ++l) n += W[l].size() + b[l].size();
    return n;
}

BaselineVariant parse_variant(const std::string& name) {
    if (name == "adamw") return BaselineVariant::AdamW;
    if (name == "penalty") return BaselineVariant::Penalty;
    if (name == "adam") return BaselineVariant::Adam;
    if (name == "projected") return BaselineVariant::Projected;
    throw std::invalid_argument("unknown baseline variant '" + name +
                                "' (expected adamw, penalty, adam, or projected)");
}

std::string variant_name(BaselineVariant v) {
    switch (v) {
    case BaselineVariant::AdamW: return "adamw";
    case BaselineVariant::Penalty: return "penalty";
    case BaselineVariant::Adam: return "adam";
    case BaselineVariant::Projected: return "projected";
    }
    return "?";
}

MlpParams kaiming_init(const std::vector<int>& widths, std::uint64_t seed) {
    if (widths.size() < 2) throw std::invalid_argument("an MLP needs at least two layers");
    for (const int w : widths)
        if (w < 1) throw std::invalid_argument("layer widths must be positive");
    MlpParams p;
    p.widths = widths;
    Rng rng(seed);
    for (size_t l = 0; l + 1 < widths.size(); ++l) {
        const int fanin = widths[l];
        const int fanout = widths[l + 1];
        const double bound = 1.0 / std::sqrt(static_cast<double>(fanin));
        Eigen::MatrixXd W(fanout, fanin);
        for (int j = 0; j < fanout; ++j)
            for (int k = 0; k < fanin; ++k) W(j, k) = (2.0 * rng.uniform() - 1.0) * bound;
        Eigen::VectorXd b(fanout);
        for (int j = 0; j < fanout; ++j) b(j) = (2.0 * rng.uniform() - 1.0) * bound;
        p.W.push_back(std::move(W));
        p.b.push_back(std::move(b));
    }
    return p;
}

AdamState make_adam_state(const MlpParams& params, const AdamHyper& hyper) {
    AdamState st;
    st.hyper = hyper;
    for (int l = 0; l < params.n_layers(); ++l) {
        st.mW.push_back(Eigen::MatrixXd::Zero(params.W[l].rows(), params.W[l].cols()));
        st.vW.push_back(Eigen::MatrixXd::Zero(params.W[l].rows(), params.W[l].cols()));
        st.mb.push_back(Eigen::VectorXd::Zero(params.b[l].size()));
        st.vb.push_back(Eigen::VectorXd::Zero(params.b[l].size()));
    }
    return st;
}

Eigen::MatrixXd mlp_forward(const MlpParams& params, const Eigen::MatrixXd& X) {
    if (X.rows() != params.widths.front())
        throw std::invalid_argument("input rows do not match the first layer width");
    Eigen::MatrixXd H = X;
    const int L = params.n_layers();
    for (int l = 0; l < L; ++l) {
        Eigen::MatrixXd A = (params.W[l] * H).colwise() + params.b[l];
        if (l + 1 == L) return A;
        H = A.cwiseMax(0.0);
    }
    return H; // unreachable (L >= 1)
}

double loss_bce(const Eigen::MatrixXd& Z, const Eigen::MatrixXd& Y) {
    if (Z.rows() != Y.rows() || Z.cols() != Y.cols())
        throw std::invalid_argument("logit and label shapes differ");
    const auto z = Z.array();
    const auto y = Y.array();
    const Eigen::ArrayXXd soft =
        (-z.abs()).unaryExpr([](double v) { return std::log1p(std::exp(v)); });
    return (z.max(0.0) - y * z + soft).mean();
}

PenaltyReport penalty_terms(const MlpParams& params, const AdamHyper& hyper) {
    PenaltyReport rep;
    for (int l = 0; l < params.n_layers(); ++l) {
        const double fanin = params.widths[l];
        const double d_out = params.widths[l + 1];
        double rn = 0.0;
        for (int j = 0; j < params.W[l].rows(); ++j) {
            const double dev = params.W[l].row(j).squaredNorm() - fanin;
            rn += dev * dev;
        }
        rep.row_norm += rn / d_out;
        rep.l1 += params.W[l].cwiseAbs().sum() / (d_out * fanin);
    }
    rep.row_norm *= hyper.lambda_norm;
    rep.l1 *= hyper.lambda_l1;
    return rep;
}

static double sigmoid(double z) {
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

MlpGrads mlp_gradient(const MlpParams& params, const Eigen::MatrixXd& X,
                      const Eigen::MatrixXd& Y, bool with_penalties, const AdamHyper& hyper) {
    const int L = params.n_layers();
    const auto n_items = X.cols();
    if (Y.cols() != n_items) throw std::invalid_argument("input and label item counts differ");

    std::vector<Eigen::MatrixXd> H(L); // H[l]: activations feeding layer l
    H[0] = X;
    for (int l = 0; l + 1 < L; ++l)
        H[l + 1] = ((params.W[l] * H[l]).colwise() + params.b[l]).cwiseMax(0.0);
    const Eigen::MatrixXd Z = (params.W[L - 1] * H[L - 1]).colwise() + params.b[L - 1];

    MlpGrads g;
    g.W.resize(L);
    g.b.resize(L);
    const double scale = 1.0 / (static_cast<double>(n_items) * params.widths.back());
    Eigen::MatrixXd dA =
        (Z.unaryExpr([](double z) { return sigmoid(z); }) - Y) * scale;
    for (int l = L - 1; l >= 0; --l) {
        g.W[l] = dA * H[l].transpose();
        g.b[l] = dA.rowwise().sum();
        if (l > 0) {
            // ReLU mask: positive activations have positive pre-activations
            dA = (params.W[l].transpose() * dA).array() * (H[l].array() > 0.0).cast<double>();
        }
    }

    if (with_penalties) {
        for (int l = 0; l < L; ++l) {
            const double fanin = params.widths[l];
            const double d_out = params.widths[l + 1];
            for (int j = 0; j < params.W[l].rows(); ++j) {
                const double dev = params.W[l].row(j).squaredNorm() - fanin;
                g.W[l].row(j) += (4.0 * hyper.lambda_norm / d_out * dev) * params.W[l].row(j);
            }
            g.W[l] += (hyper.lambda_l1 / (d_out * fanin)) *
                      params.W[l].unaryExpr([](double v) {
                          return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0);
                      });
        }
    }
    return g;
}

void adamw_step(MlpParams& params, AdamState& state, const MlpGrads& grads) {
    const AdamHyper& h = state.hyper;
    state.t += 1;
    const double bc1 = 1.0 - std::pow(h.beta1, static_cast<double>(state.t));
    const double bc2 = 1.0 - std::pow(h.beta2, static_cast<double>(state.t));
    const double decay = h.eta * h.lambda_decay;
    for (int l = 0; l < params.n_layers(); ++l) {
        state.mW[l] = h.beta1 * state.mW[l] + (1.0 - h.beta1) * grads.W[l];
        state.vW[l] =
            h.beta2 * state.vW[l] + (1.0 - h.beta2) * grads.W[l].cwiseProduct(grads.W[l]);
        const Eigen::ArrayXXd stepW = (state.mW[l].array() / bc1) /
                                      ((state.vW[l].array() / bc2).sqrt() + h.eps);
        params.W[l] -= decay * params.W[l] + h.eta * stepW.matrix();

        state.mb[l] = h.beta1 * state.mb[l] + (1.0 - h.beta1) * grads.b[l];
        state.vb[l] =
            h.beta2 * state.vb[l] + (1.0 - h.beta2) * grads.b[l].cwiseProduct(grads.b[l]);
        const Eigen::ArrayXd stepb =
            (state.mb[l].array() / bc1) / ((state.vb[l].array() / bc2).sqrt() + h.eps);
        params.b[l] -= decay * params.b[l] + h.eta * stepb.matrix();
    }
}

// --------------------------------------------------------------- training

static Eigen::MatrixXd encode(const Dataset& data, bool inputs) {
    const int rows = inputs ? data.n_in : data.n_out;
    Eigen::MatrixXd M(rows, data.n_items());
    for (int i = 0; i < data.n_items(); ++i) {
        const auto v = inputs ? data.input(i) : data.output(i);
        for (int k = 0; k < rows; ++k) M(k, i) = (v[k] + 1.0) / 2.0; // ±1 -> {0,1}
    }
    return M;
}

static void check_boolean(const Dataset& data, const char* which) {
    if (data.analog)
        throw std::invalid_argument(std::string(which) + " set must be Boolean");
    if (data.generative)
        throw std::invalid_argument(std::string(which) + " set must carry inputs");
}

static double accuracy_on(const Eigen::MatrixXd& Z, const Eigen::MatrixXd& Y) {
    long long hits = 0;
    for (Eigen::Index c = 0; c < Z.cols(); ++c)
        for (Eigen::Index r = 0; r < Z.rows(); ++r)
            hits += (Z(r, c) > 0.0) == (Y(r, c) > 0.5);
    return static_cast<double>(hits) / static_cast<double>(Z.size());
}

double baseline_accuracy(const MlpParams& params, const Dataset& data) {
    check_boolean(data, "evaluation");
    if (data.n_in != params.widths.front() || data.n_out != params.widths.back())
        throw std::invalid_argument("dataset dimensions do not match the network");
    return accuracy_on(mlp_forward(params, encode(data, true)), encode(data, false));
}

// Keep each row's three largest-magnitude entries and rescale to the target
// row norm (the rejected projected-gradient variant; kept behind a flag).
static void project_rows(MlpParams& params) {
    for (int l = 0; l < params.n_layers(); ++l) {
        const double fanin = params.widths[l];
        Eigen::MatrixXd& W = params.W[l];
        std::vector<int> order(W.cols());
        for (int j = 0; j < W.rows(); ++j) {
            if (W.cols() > 3) {
                for (size_t k = 0; k < order.size(); ++k) order[k] = static_cast<int>(k);
                std::nth_element(order.begin(), order.begin() + 3, order.end(),
                                 [&](int a, int b) {
                                     return std::abs(W(j, a)) > std::abs(W(j, b));
                                 });
                for (size_t k = 3; k < order.size(); ++k) W(j, order[k]) = 0.0;
            }
            const double n2 = W.row(j).squaredNorm();
            if (n2 == 0.0)
                W(j, 0) = std::sqrt(fanin);
            else
                W.row(j) *= std::sqrt(fanin / n2);
        }
    }
}

BaselineResult train_baseline(const std::vector<int>& widths, const Dataset& train,
                              const Dataset* test, BaselineVariant variant, long long steps,
                              std::uint64_t seed, const BaselineSink& sink,
                              const AdamHyper& hyper) {
    check_boolean(train, "training");
    if (widths.size() < 2) throw std::invalid_argument("an MLP needs at least two layers");
    if (train.n_in != widths.front() || train.n_out != widths.back())
        throw std::invalid_argument("dataset dimensions do not match the network");
    if (test) {
        check_boolean(*test, "test");
        if (test->n_in != widths.front() || test->n_out != widths.back())
            throw std::invalid_argument("test set dimensions do not match the network");
    }

    const Eigen::MatrixXd X = encode(train, true);
    const Eigen::MatrixXd Y = encode(train, false);
    Eigen::MatrixXd Xte, Yte;
    if (test) {
        Xte = encode(*test, true);
        Yte = encode(*test, false);
    }

    AdamHyper h = hyper;
    if (variant == BaselineVariant::Adam) h.lambda_decay = 0.0;
    const bool with_penalties = variant == BaselineVariant::Penalty;

    BaselineResult res;
    res.params = kaiming_init(widths, seed);
    res.final_loss = loss_bce(mlp_forward(res.params, X), Y);
    if (steps <= 0) return res;

    AdamState state = make_adam_state(res.params, h);
    const std::vector<long long> schedule = checkpoint_schedule(steps);
    size_t cp = 0;
    double min_loss = std::numeric_limits<double>::infinity();
    const auto t0 = std::chrono::steady_clock::now();
    for (long long it = 1; it <= steps; ++it) {
        const MlpGrads g = mlp_gradient(res.params, X, Y, with_penalties, h);
        adamw_step(res.params, state, g);
        if (variant == BaselineVariant::Projected) project_rows(res.params);

        while (cp < schedule.size() && schedule[cp] < it) ++cp;
        if (cp < schedule.size() && schedule[cp] == it) {
            const Eigen::MatrixXd Z = mlp_forward(res.params, X);
            BaselineStats st;
            st.step = it;
            st.loss = loss_bce(Z, Y);
            min_loss = std::min(min_loss, st.loss);
            st.min_loss = min_loss;
            st.train_acc = accuracy_on(Z, Y);
            if (test) st.test_acc = accuracy_on(mlp_forward(res.params, Xte), Yte);
            st.wall_seconds =
                std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            res.history.push_back(st);
            if (sink) sink(st);
            res.final_loss = st.loss;
        }
    }
    return res;
}

std::string baseline_csv_header() { return "iter,loss,min_loss,train_acc,test_acc,wall_seconds"; }

std::string baseline_csv_line(const BaselineStats& s) {
    char buf[200];
    std::snprintf(buf, sizeof buf, "%lld,%.10g,%.10g,%.6f,", s.step, s.loss, s.min_loss,
                  s.train_acc);
    std::string line(buf);
    if (s.test_acc) {
        std::snprintf(buf, sizeof buf, "%.6f", *s.test_acc);
        line += buf;
    }
    std::snprintf(buf, sizeof buf, ",%.3f", s.wall_seconds);
    line += buf;
    return line;
}

} // namespace btf
