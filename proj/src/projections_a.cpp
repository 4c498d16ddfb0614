#include "btf/projections.hpp"

#include "btf/parallel.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace btf {
namespace blockmath {

namespace {

constexpr double kBracketEps = 1e-9;

// h_b(λ) and its derivative.  Both share the factor structure
//   h_b = [(1+λ²)s + λP] / (1−λ²)²  −  b·mu
//   h'  = [2λs(3+λ²) + P(1+3λ²)] / (1−λ²)³
// The derivative numerator is strictly positive on (−1,1) whenever P > 2|s|
// is not violated (Cauchy-Schwarz gives P ≥ 2|s|), so h is strictly
// increasing and the bracketed root is unique.
inline double eval_h(double lam, double s, double P, double bmu, double& deriv) {
    const double t = lam * lam;
    const double D = 1.0 - t;
    const double D2 = D * D;
    deriv = (2.0 * lam * s * (3.0 + t) + P * (1.0 + 3.0 * t)) / (D2 * D);
    return ((1.0 + t) * s + lam * P) / D2 - bmu;
}

} // namespace

double solve_lambda_scalar(double s, double P, double mu, int branch, double warm) noexcept {
    const double bmu = branch * mu;
    const double tol = 1e-12 * (1.0 + mu);
    constexpr double lo0 = -1.0 + kBracketEps;
    constexpr double hi0 = 1.0 - kBracketEps;
    double lam = (warm > lo0 && warm < hi0) ? warm : 0.0;
    double deriv;
    double f = eval_h(lam, s, P, bmu, deriv);
    if (std::abs(f) <= tol) return lam;
    // One endpoint check suffices: the root, if any, lies on the side of lam
    // where h crosses zero.  No sign change means w and x are exactly
    // (anti)parallel and the Lagrange path never reaches this branch.  The raw
    // numerator (1+λ²)s + λP cancels catastrophically at the poles in exactly
    // that case, so the endpoint values use it factored about the pole,
    //   s(1∓λ)² + λ(P±2s),   with  P+2s = ‖w+x‖²  and  P−2s = ‖w−x‖²,
    // which keeps the (anti)parallel limit h → s/4 − b·mu finite and exact.
    double lo = lo0, hi = hi0;
    const double invd2 = 1.0 / ((1.0 - lo0 * lo0) * (1.0 - lo0 * lo0));
    if (f < 0.0) {
        const double h_hi = (s * kBracketEps * kBracketEps + hi0 * (P + 2.0 * s)) * invd2 - bmu;
        if (!(h_hi > 0.0))
            return std::numeric_limits<double>::quiet_NaN();
        lo = lam;
    } else {
        const double h_lo = (s * kBracketEps * kBracketEps + lo0 * (P - 2.0 * s)) * invd2 - bmu;
        if (!(h_lo < 0.0))
            return std::numeric_limits<double>::quiet_NaN();
        hi = lam;
    }
    for (int iter = 0; iter < 200; ++iter) {
        if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon()) return 0.5 * (lo + hi);
        double next = lam - f / deriv; // h is strictly increasing, deriv > 0
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        lam = next;
        f = eval_h(lam, s, P, bmu, deriv);
        if (std::abs(f) <= tol) return lam;
        if (f < 0.0) lo = lam; else hi = lam;
    }
    return lam;
}

double move_cost(double s, double P, double lambda) noexcept {
    // ‖w′−w‖² + ‖x′−x‖² along the Lagrange path: since w′−w = λx′ and
    // x′−x = λw′, the move equals λ²(‖w′‖²+‖x′‖²) = λ²[(1+λ²)P + 4λs]/(1−λ²)².
    const double t = lambda * lambda;
    const double D = 1.0 - t;
    const double c = t * ((1.0 + t) * P + 4.0 * lambda * s) / (D * D);
    return c > 0.0 ? c : 0.0;
}

Decision decide_block(double s, double pw, double px, double y, double mu,
                      double* warm_p, double* warm_m) noexcept {
    if (pw == 0.0 && px == 0.0) return {+1, 0.0, true};
    // When the margin already holds on the branch matching sign(y), the other
    // branch can never be cheaper: it must pay a move of at least (2μ)²/P > 0
    // plus a larger y-move.
    if (s >= mu && y >= 0.0) return {+1, 0.0, false};
    if (s <= -mu && y <= 0.0) return {-1, 0.0, false};

    const double inf = std::numeric_limits<double>::infinity();
    const double P = pw + px;
    double lam_p = 0.0, cost_p;
    const double dy_p = 1.0 - y;
    if (s >= mu) {
        cost_p = dy_p * dy_p;
    } else {
        lam_p = solve_lambda_scalar(s, P, mu, +1, warm_p ? *warm_p : 0.0);
        if (std::isnan(lam_p)) {
            cost_p = inf;
        } else {
            cost_p = move_cost(s, P, lam_p) + dy_p * dy_p;
            if (warm_p) *warm_p = lam_p;
        }
    }
    double lam_m = 0.0, cost_m;
    const double dy_m = -1.0 - y;
    if (s <= -mu) {
        cost_m = dy_m * dy_m;
    } else {
        lam_m = solve_lambda_scalar(s, P, mu, -1, warm_m ? *warm_m : 0.0);
        if (std::isnan(lam_m)) {
            cost_m = inf;
        } else {
            cost_m = move_cost(s, P, lam_m) + dy_m * dy_m;
            if (warm_m) *warm_m = lam_m;
        }
    }
    if (cost_p == inf && cost_m == inf) return {+1, 0.0, true}; // w = x = 0, caught above in exact arithmetic
    if (std::abs(cost_p - cost_m) < 1e-12) {
        return y >= 0.0 ? Decision{+1, lam_p, false} : Decision{-1, lam_m, false};
    }
    return cost_p < cost_m ? Decision{+1, lam_p, false} : Decision{-1, lam_m, false};
}

} // namespace blockmath

double solve_lambda(std::span<const double> w, std::span<const double> x, double mu, int branch) {
    const double pw = pairwise_dot(w.data(), w.data(), w.size());
    const double px = pairwise_dot(x.data(), x.data(), x.size());
    if (pw == 0.0 && px == 0.0) throw std::runtime_error("degenerate projection input");
    const double s = pairwise_dot(w.data(), x.data(), w.size());
    const double lam = blockmath::solve_lambda_scalar(s, pw + px, mu, branch);
    if (std::isnan(lam))
        throw std::runtime_error("degenerate projection input (w, x exactly (anti)parallel; "
                                 "no margin crossing on this branch)");
    return lam;
}

void project_btf(std::span<const double> w, std::span<const double> x, double y, double mu,
                 std::span<double> w_out, std::span<double> x_out, double& y_out) {
    const size_t m = w.size();
    const double pw = pairwise_dot(w.data(), w.data(), m);
    const double px = pairwise_dot(x.data(), x.data(), m);
    const double s = pairwise_dot(w.data(), x.data(), m);
    const blockmath::Decision d = blockmath::decide_block(s, pw, px, y, mu);
    if (d.degenerate) {
        // Deterministic fallback on the A₊ boundary: all weight on the bias
        // edge, uniform positive inputs at the matching scale.
        const double sm = std::sqrt(static_cast<double>(m));
        w_out[0] = sm;
        for (size_t j = 1; j < m; ++j) w_out[j] = 0.0;
        const double xv = mu / sm;
        for (size_t j = 0; j < m; ++j) x_out[j] = xv;
        y_out = +1.0;
        return;
    }
    if (d.lambda == 0.0) {
        if (w_out.data() != w.data())
            for (size_t j = 0; j < m; ++j) w_out[j] = w[j];
        if (x_out.data() != x.data())
            for (size_t j = 0; j < m; ++j) x_out[j] = x[j];
    } else {
        const double lam = d.lambda;
        const double inv = 1.0 / (1.0 - lam * lam);
        for (size_t j = 0; j < m; ++j) {
            const double wj = w[j], xj = x[j];
            w_out[j] = (wj + lam * xj) * inv;
            x_out[j] = (xj + lam * wj) * inv;
        }
    }
    y_out = d.branch;
}

std::vector<double> project_inputs(std::span<const double> y_row, InputMode mode,
                                   std::span<const double> clamp) {
    std::vector<double> out(y_row.size());
    switch (mode) {
    case InputMode::Data:
        if (clamp.size() != y_row.size())
            throw std::invalid_argument("input clamp length mismatch");
        for (size_t k = 0; k < y_row.size(); ++k) out[k] = clamp[k];
        break;
    case InputMode::Boolean:
        for (size_t k = 0; k < y_row.size(); ++k) out[k] = y_row[k] < 0.0 ? -1.0 : 1.0;
        break;
    case InputMode::OneHot: {
        size_t best = 0;
        for (size_t k = 1; k < y_row.size(); ++k)
            if (y_row[k] > y_row[best]) best = k;
        for (size_t k = 0; k < y_row.size(); ++k) out[k] = k == best ? 1.0 : -1.0;
        break;
    }
    }
    return out;
}

VariableState apply_PA(const VariableState& state, const MetricState& metric,
                       const Topology& topo, const Hyperparams& hyper, const Dataset& data) {
    (void)metric; // the block constraints each carry a single g, so P_A never depends on it
    const int ni = state.n_items;
    VariableState out = state;

    const int n_in = static_cast<int>(topo.input_nodes.size());
    if (hyper.input_mode == InputMode::Data && data.n_in != n_in)
        throw std::invalid_argument("input mode 'data' needs a dataset with one column per input node");

    std::vector<double> row(n_in), proj;
    for (int i = 0; i < ni; ++i) {
        if (hyper.input_mode == InputMode::Data) {
            const double* vals = data.input(i);
            for (int k = 0; k < n_in; ++k) out.yrow(topo.input_nodes[k])[i] = vals[k];
        } else {
            for (int k = 0; k < n_in; ++k) row[k] = state.yrow(topo.input_nodes[k])[i];
            proj = project_inputs(row, hyper.input_mode);
            for (int k = 0; k < n_in; ++k) out.yrow(topo.input_nodes[k])[i] = proj[k];
        }
    }
    double* cy = out.yrow(topo.constant_id);
    for (int i = 0; i < ni; ++i) cy[i] = -1.0;

    std::vector<double> wv, xv, wo, xo;
    for (int q : topo.btf_nodes) {
        const int m = topo.fanin_count[q];
        const int e0 = topo.fanin_first[q];
        const double mu = std::sqrt(m / hyper.sigma);
        wv.resize(m); xv.resize(m); wo.resize(m); xo.resize(m);
        for (int i = 0; i < ni; ++i) {
            for (int j = 0; j < m; ++j) {
                wv[j] = state.wrow(e0 + j)[i];
                xv[j] = state.xrow(e0 + j)[i];
            }
            double yo = 0.0;
            try {
                project_btf(wv, xv, state.yrow(q)[i], mu, wo, xo, yo);
            } catch (const std::exception& e) {
                throw std::runtime_error("node " + std::to_string(q) + " item " +
                                         std::to_string(i) + ": " + e.what());
            }
            for (int j = 0; j < m; ++j) {
                out.wrow(e0 + j)[i] = wo[j];
                out.xrow(e0 + j)[i] = xo[j];
            }
            out.yrow(q)[i] = yo;
        }
    }
    return out;
}

} // namespace btf
