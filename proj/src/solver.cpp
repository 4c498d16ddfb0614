#include "btf/solver.hpp"

#include "btf/model.hpp"
#include "btf/projections.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace btf {

// ------------------------------------------------------------------- gaps

GapReport compute_gap(const VariableState& zA, const VariableState& zB, const Topology& topo) {
    const int ni = zA.n_items;
    const size_t n_btf = topo.btf_nodes.size();
    const size_t n_in = topo.input_nodes.size();
    GapReport rep;
    rep.block_sq.assign(n_btf * ni, 0.0);
    rep.input_sq.assign(n_in * ni, 0.0);
    for (size_t b = 0; b < n_btf; ++b) {
        const int q = topo.btf_nodes[b];
        const int e0 = topo.fanin_first[q];
        double* acc = rep.block_sq.data() + b * ni;
        for (int j = 0; j < topo.fanin_count[q]; ++j) {
            const double *wa = zA.wrow(e0 + j), *wb = zB.wrow(e0 + j);
            for (int i = 0; i < ni; ++i) {
                const double d = wa[i] - wb[i];
                acc[i] += d * d;
            }
            const double *xa = zA.xrow(e0 + j), *xb = zB.xrow(e0 + j);
            for (int i = 0; i < ni; ++i) {
                const double d = xa[i] - xb[i];
                acc[i] += d * d;
            }
        }
        const double *ya = zA.yrow(q), *yb = zB.yrow(q);
        for (int i = 0; i < ni; ++i) {
            const double d = ya[i] - yb[i];
            acc[i] += d * d;
        }
    }
    for (size_t k = 0; k < n_in; ++k) {
        const int p = topo.input_nodes[k];
        const double *ya = zA.yrow(p), *yb = zB.yrow(p);
        for (int i = 0; i < ni; ++i) {
            const double d = ya[i] - yb[i];
            rep.input_sq[k * ni + i] = d * d;
        }
    }
    const double sum_ho = pairwise_sum(rep.block_sq.data(), rep.block_sq.size());
    const double sum_in = pairwise_sum(rep.input_sq.data(), rep.input_sq.size());
    rep.rms_blocks = std::sqrt(sum_ho / (static_cast<double>(n_btf) * ni));
    rep.reported = std::sqrt((sum_ho + sum_in) / (static_cast<double>(n_btf + n_in) * ni));
    return rep;
}

GapReport rrr_step(VariableState& state, const MetricState& metric, const Topology& topo,
                   const Hyperparams& hyper, const Dataset& data) {
    if (!(hyper.beta >= 0.0 && hyper.beta < 2.0))
        throw std::invalid_argument("beta must lie in [0, 2)");
    const VariableState zA = apply_PA(state, metric, topo, hyper, data);
    VariableState zR = zA;
    for (size_t k = 0; k < zR.y.size(); ++k) zR.y[k] = 2.0 * zA.y[k] - state.y[k];
    for (size_t k = 0; k < zR.x.size(); ++k) zR.x[k] = 2.0 * zA.x[k] - state.x[k];
    for (size_t k = 0; k < zR.w.size(); ++k) zR.w[k] = 2.0 * zA.w[k] - state.w[k];
    const VariableState zB = apply_PB(zR, metric, topo, data);
    GapReport rep = compute_gap(zA, zB, topo);
    const double beta = hyper.beta;
    for (size_t k = 0; k < state.y.size(); ++k) state.y[k] += beta * (zB.y[k] - zA.y[k]);
    for (size_t k = 0; k < state.x.size(); ++k) state.x[k] += beta * (zB.x[k] - zA.x[k]);
    for (size_t k = 0; k < state.w.size(); ++k) state.w[k] += beta * (zB.w[k] - zA.w[k]);
    return rep;
}

void update_metric(MetricState& metric, const std::vector<double>& block_sq,
                   const Topology& topo, double gamma) {
    if (gamma == 0.0) return;
    if (gamma < 0.0) throw std::invalid_argument("gamma must be nonnegative");
    const int ni = metric.n_items;
    const size_t n_btf = topo.btf_nodes.size();
    const double sum = pairwise_sum(block_sq.data(), block_sq.size());
    if (sum == 0.0) return; // already at a solution
    const double inv_rms2 = static_cast<double>(n_btf) * ni / sum;
    for (size_t b = 0; b < n_btf; ++b) {
        double* g = metric.row(topo.btf_nodes[b]);
        const double* v = block_sq.data() + b * ni;
        for (int i = 0; i < ni; ++i) g[i] += gamma * (v[i] * inv_rms2 - g[i]);
    }
}

std::vector<long long> checkpoint_schedule(long long max_iters) {
    std::vector<long long> cps;
    for (double p = 1.0; p <= static_cast<double>(max_iters); p *= 1.25) {
        const long long v = static_cast<long long>(std::ceil(p));
        if (v > max_iters) break;
        if (cps.empty() || v > cps.back()) cps.push_back(v);
    }
    if (max_iters > 0 && (cps.empty() || cps.back() != max_iters)) cps.push_back(max_iters);
    return cps;
}

// ---------------------------------------------------------------- Trainer

struct Trainer::Scratch {
    std::vector<double> s, pw, px, lam, ynew, num, den, wbar;
    std::vector<int> deg;
};

Trainer::~Trainer() = default;

Trainer::Trainer(const Topology& topo, const Dataset& train_data, const Dataset* test_data,
                 const Hyperparams& hyper, int n_threads)
    : topo_(topo), train_(train_data), hyper_(hyper) {
    if (test_data) {
        test_ = *test_data;
        has_test_ = true;
    }
    if (!(hyper_.beta > 0.0 && hyper_.beta < 2.0))
        throw std::invalid_argument("beta must lie in (0, 2)");
    if (hyper_.sigma <= 0.0) throw std::invalid_argument("sigma must be positive");
    if (hyper_.gamma < 0.0) throw std::invalid_argument("gamma must be nonnegative");
    if (hyper_.metric_window < 1) throw std::invalid_argument("metric window must be >= 1");
    if (train_.n_items() == 0) throw std::invalid_argument("training set is empty");
    if (train_.n_in != topo_.widths.front())
        throw std::invalid_argument("dataset input width " + std::to_string(train_.n_in) +
                                    " does not match first layer width " +
                                    std::to_string(topo_.widths.front()));
    if (train_.n_out != topo_.widths.back())
        throw std::invalid_argument("dataset output width " + std::to_string(train_.n_out) +
                                    " does not match last layer width " +
                                    std::to_string(topo_.widths.back()));
    if (train_.generative && hyper_.input_mode == InputMode::Data)
        throw std::invalid_argument("a generative dataset needs input mode boolean or onehot");
    if (has_test_ && test_.generative)
        throw std::invalid_argument("test set must carry inputs");
    if (has_test_ && (test_.n_in != train_.n_in || test_.n_out != train_.n_out))
        throw std::invalid_argument("test set dimensions do not match training set");

    const int ni = train_.n_items();
    auto [z, g] = init_state(topo_, ni, hyper_.seed);
    z_ = std::move(z);
    g_ = std::move(g);
    zA_ = z_;
    zW_ = z_;

    mu_.assign(topo_.n_nodes, 0.0);
    for (const int q : topo_.btf_nodes)
        mu_[q] = std::sqrt(topo_.fanin_count[q] / hyper_.sigma);

    const int n_in = static_cast<int>(topo_.input_nodes.size());
    const int n_out = static_cast<int>(topo_.output_nodes.size());
    if (hyper_.input_mode == InputMode::Data) {
        yA_in_.resize(static_cast<size_t>(n_in) * ni);
        for (int i = 0; i < ni; ++i) {
            const auto in = train_.input(i);
            for (int k = 0; k < n_in; ++k) yA_in_[static_cast<size_t>(k) * ni + i] = in[k];
        }
    }
    yB_out_.resize(static_cast<size_t>(n_out) * ni);
    for (int i = 0; i < ni; ++i) {
        const auto out = train_.output(i);
        for (int k = 0; k < n_out; ++k) yB_out_[static_cast<size_t>(k) * ni + i] = out[k];
    }

    const size_t n_btf = topo_.btf_nodes.size();
    block_sq_.assign(n_btf * ni, 0.0);
    input_sq_.assign(static_cast<size_t>(n_in) * ni, 0.0);
    warm_p_.assign(n_btf * ni, 0.0);
    warm_m_.assign(n_btf * ni, 0.0);
    btf_index_.assign(topo_.n_nodes, -1);
    for (size_t b = 0; b < n_btf; ++b) btf_index_[topo_.btf_nodes[b]] = static_cast<int>(b);

    int max_m = 0;
    for (const int q : topo_.btf_nodes) max_m = std::max(max_m, topo_.fanin_count[q]);
    if (n_threads < 1) n_threads = 1;
    scratch_.resize(n_threads);
    for (auto& sc : scratch_) {
        sc.s.resize(ni);
        sc.pw.resize(ni);
        sc.px.resize(ni);
        sc.lam.resize(ni);
        sc.ynew.resize(ni);
        sc.num.resize(ni);
        sc.den.resize(ni);
        sc.wbar.resize(max_m);
    }
    pool_ = std::make_unique<ThreadPool>(n_threads);
}

void Trainer::sweep_A() {
    const int ni = z_.n_items;
    const int n_in = static_cast<int>(topo_.input_nodes.size());

    switch (hyper_.input_mode) {
    case InputMode::Data:
        for (int k = 0; k < n_in; ++k) {
            const int p = topo_.input_nodes[k];
            const double* c = yA_in_.data() + static_cast<size_t>(k) * ni;
            const double* yz = z_.yrow(p);
            double* ya = zA_.yrow(p);
            double* yr = zW_.yrow(p);
            for (int i = 0; i < ni; ++i) {
                ya[i] = c[i];
                yr[i] = 2.0 * c[i] - yz[i];
            }
        }
        break;
    case InputMode::Boolean:
        for (int k = 0; k < n_in; ++k) {
            const int p = topo_.input_nodes[k];
            const double* yz = z_.yrow(p);
            double* ya = zA_.yrow(p);
            double* yr = zW_.yrow(p);
            for (int i = 0; i < ni; ++i) {
                const double v = yz[i] < 0.0 ? -1.0 : 1.0;
                ya[i] = v;
                yr[i] = 2.0 * v - yz[i];
            }
        }
        break;
    case InputMode::OneHot:
        for (int i = 0; i < ni; ++i) {
            int best = 0;
            double best_v = z_.yrow(topo_.input_nodes[0])[i];
            for (int k = 1; k < n_in; ++k) {
                const double v = z_.yrow(topo_.input_nodes[k])[i];
                if (v > best_v) {
                    best_v = v;
                    best = k;
                }
            }
            for (int k = 0; k < n_in; ++k) {
                const int p = topo_.input_nodes[k];
                const double v = k == best ? 1.0 : -1.0;
                zA_.yrow(p)[i] = v;
                zW_.yrow(p)[i] = 2.0 * v - z_.yrow(p)[i];
            }
        }
        break;
    }
    {
        const int c = topo_.constant_id;
        const double* yz = z_.yrow(c);
        double* ya = zA_.yrow(c);
        double* yr = zW_.yrow(c);
        for (int i = 0; i < ni; ++i) {
            ya[i] = -1.0;
            yr[i] = -2.0 - yz[i];
        }
    }

    pool_->run_chunks(topo_.btf_nodes.size(), [&](size_t b0, size_t b1, int wid) {
        Scratch& sc = scratch_[wid];
        for (size_t b = b0; b < b1; ++b) {
            const int q = topo_.btf_nodes[b];
            const int e0 = topo_.fanin_first[q];
            const int m = topo_.fanin_count[q];
            const double mu = mu_[q];
            double* S = sc.s.data();
            double* PW = sc.pw.data();
            double* PX = sc.px.data();
            std::fill_n(S, ni, 0.0);
            std::fill_n(PW, ni, 0.0);
            std::fill_n(PX, ni, 0.0);
            for (int j = 0; j < m; ++j) {
                const double* w = z_.wrow(e0 + j);
                const double* x = z_.xrow(e0 + j);
                for (int i = 0; i < ni; ++i) {
                    S[i] += w[i] * x[i];
                    PW[i] += w[i] * w[i];
                    PX[i] += x[i] * x[i];
                }
            }
            sc.deg.clear();
            const double* yq = z_.yrow(q);
            double* L = sc.lam.data();
            double* YN = sc.ynew.data();
            double* wp = warm_p_.data() + b * ni;
            double* wm = warm_m_.data() + b * ni;
            for (int i = 0; i < ni; ++i) {
                const blockmath::Decision d =
                    blockmath::decide_block(S[i], PW[i], PX[i], yq[i], mu, &wp[i], &wm[i]);
                if (d.degenerate) {
                    sc.deg.push_back(i);
                    L[i] = 0.0;
                    YN[i] = 1.0;
                } else {
                    L[i] = d.lambda;
                    YN[i] = d.branch;
                }
            }
            for (int j = 0; j < m; ++j) {
                const double* w = z_.wrow(e0 + j);
                const double* x = z_.xrow(e0 + j);
                double* wa = zA_.wrow(e0 + j);
                double* xa = zA_.xrow(e0 + j);
                double* wr = zW_.wrow(e0 + j);
                double* xr = zW_.xrow(e0 + j);
                for (int i = 0; i < ni; ++i) {
                    const double lam = L[i];
                    const double inv = 1.0 / (1.0 - lam * lam); // exactly 1 when lam == 0
                    const double wv = (w[i] + lam * x[i]) * inv;
                    const double xv = (x[i] + lam * w[i]) * inv;
                    wa[i] = wv;
                    wr[i] = 2.0 * wv - w[i];
                    xa[i] = xv;
                    xr[i] = 2.0 * xv - x[i];
                }
            }
            double* ya = zA_.yrow(q);
            double* yr = zW_.yrow(q);
            for (int i = 0; i < ni; ++i) {
                ya[i] = YN[i];
                yr[i] = 2.0 * YN[i] - yq[i];
            }
            for (const int i : sc.deg) {
                // all-zero block: deterministic fallback on the margin boundary
                const double sm = std::sqrt(static_cast<double>(m));
                const double xv = mu / sm;
                for (int j = 0; j < m; ++j) {
                    const double wv = j == 0 ? sm : 0.0;
                    zA_.wrow(e0 + j)[i] = wv;
                    zW_.wrow(e0 + j)[i] = 2.0 * wv - z_.wrow(e0 + j)[i];
                    zA_.xrow(e0 + j)[i] = xv;
                    zW_.xrow(e0 + j)[i] = 2.0 * xv - z_.xrow(e0 + j)[i];
                }
            }
        }
    });
}

void Trainer::sweep_B() {
    const int ni = z_.n_items;
    const size_t n_in = topo_.input_nodes.size();
    const size_t n_hidden = topo_.hidden_nodes.size();

    // fan-out concurrence (inputs and hiddens; outputs have no fan-out)
    pool_->run_chunks(n_in + n_hidden, [&](size_t a0, size_t a1, int wid) {
        Scratch& sc = scratch_[wid];
        for (size_t a = a0; a < a1; ++a) {
            const int p = a < n_in ? topo_.input_nodes[a] : topo_.hidden_nodes[a - n_in];
            const auto& fo = topo_.fanout[p];
            double* num = sc.num.data();
            double* den = sc.den.data();
            std::fill_n(num, ni, 0.0);
            std::fill_n(den, ni, 0.0);
            for (const int e : fo) {
                const double* gq = g_.row(topo_.edge_dst[e]);
                const double* xe = zW_.xrow(e);
                for (int i = 0; i < ni; ++i) {
                    num[i] += gq[i] * xe[i];
                    den[i] += gq[i];
                }
            }
            const double* gp = g_.row(p);
            double* yp = zW_.yrow(p);
            for (int i = 0; i < ni; ++i) yp[i] = (num[i] + gp[i] * yp[i]) / (den[i] + gp[i]);
            for (const int e : fo) {
                double* xe = zW_.xrow(e);
                for (int i = 0; i < ni; ++i) xe[i] = yp[i];
            }
        }
    });

    // the constant node's group is pinned at −1
    {
        double* yc = zW_.yrow(topo_.constant_id);
        std::fill_n(yc, ni, -1.0);
        for (const int e : topo_.fanout[topo_.constant_id])
            std::fill_n(zW_.xrow(e), ni, -1.0);
    }

    // output clamp
    for (size_t k = 0; k < topo_.output_nodes.size(); ++k) {
        double* yo = zW_.yrow(topo_.output_nodes[k]);
        const double* c = yB_out_.data() + k * ni;
        for (int i = 0; i < ni; ++i) yo[i] = c[i];
    }

    // cross-item weight concurrence
    std::atomic<int> bad{-1};
    pool_->run_chunks(topo_.btf_nodes.size(), [&](size_t b0, size_t b1, int wid) {
        Scratch& sc = scratch_[wid];
        for (size_t b = b0; b < b1; ++b) {
            const int q = topo_.btf_nodes[b];
            const int e0 = topo_.fanin_first[q];
            const int m = topo_.fanin_count[q];
            const double* gq = g_.row(q);
            const double gsum = pairwise_sum(gq, ni);
            double norm2 = 0.0;
            for (int j = 0; j < m; ++j) {
                sc.wbar[j] = pairwise_dot(gq, zW_.wrow(e0 + j), ni) / gsum;
                norm2 += sc.wbar[j] * sc.wbar[j];
            }
            if (norm2 == 0.0) {
                bad.store(q, std::memory_order_relaxed);
                continue;
            }
            const double scale = std::sqrt(static_cast<double>(m) / norm2);
            for (int j = 0; j < m; ++j) {
                const double v = sc.wbar[j] * scale;
                std::fill_n(zW_.wrow(e0 + j), ni, v);
            }
        }
    });
    if (bad.load() >= 0)
        throw std::runtime_error("iteration " + std::to_string(iter_ + 1) +
                                 ": degenerate weight concur at node " + std::to_string(bad.load()));
}

void Trainer::sweep_update_gap() {
    const int ni = z_.n_items;
    const double beta = hyper_.beta;
    const size_t n_btf = topo_.btf_nodes.size();
    const size_t n_in = topo_.input_nodes.size();

    pool_->run_chunks(n_btf, [&](size_t b0, size_t b1, int) {
        for (size_t b = b0; b < b1; ++b) {
            const int q = topo_.btf_nodes[b];
            const int e0 = topo_.fanin_first[q];
            double* acc = block_sq_.data() + b * ni;
            std::fill_n(acc, ni, 0.0);
            for (int j = 0; j < topo_.fanin_count[q]; ++j) {
                const double* wa = zA_.wrow(e0 + j);
                const double* wb = zW_.wrow(e0 + j);
                double* wz = z_.wrow(e0 + j);
                for (int i = 0; i < ni; ++i) {
                    const double d = wa[i] - wb[i];
                    acc[i] += d * d;
                    wz[i] += beta * (wb[i] - wa[i]);
                }
                const double* xa = zA_.xrow(e0 + j);
                const double* xb = zW_.xrow(e0 + j);
                double* xz = z_.xrow(e0 + j);
                for (int i = 0; i < ni; ++i) {
                    const double d = xa[i] - xb[i];
                    acc[i] += d * d;
                    xz[i] += beta * (xb[i] - xa[i]);
                }
            }
            const double* ya = zA_.yrow(q);
            const double* yb = zW_.yrow(q);
            double* yz = z_.yrow(q);
            for (int i = 0; i < ni; ++i) {
                const double d = ya[i] - yb[i];
                acc[i] += d * d;
                yz[i] += beta * (yb[i] - ya[i]);
            }
        }
    });

    for (size_t k = 0; k < n_in; ++k) {
        const int p = topo_.input_nodes[k];
        const double* ya = zA_.yrow(p);
        const double* yb = zW_.yrow(p);
        double* yz = z_.yrow(p);
        double* sq = input_sq_.data() + k * ni;
        for (int i = 0; i < ni; ++i) {
            const double d = ya[i] - yb[i];
            sq[i] = d * d;
            yz[i] += beta * (yb[i] - ya[i]);
        }
    }
    // constant node: both projections pin −1, so z stays put

    const double sum_ho = pairwise_sum(block_sq_.data(), block_sq_.size());
    const double sum_in = pairwise_sum(input_sq_.data(), input_sq_.size());
    last_gap_ =
        std::sqrt((sum_ho + sum_in) / (static_cast<double>(n_btf + n_in) * ni));
    min_gap_ = std::min(min_gap_, last_gap_);
}

void Trainer::sweep_metric() {
    if (hyper_.gamma == 0.0) return;
    const int ni = z_.n_items;
    const size_t n_btf = topo_.btf_nodes.size();
    const double* vals;
    if (hyper_.metric_window > 1) {
        if (block_ema_.empty()) {
            block_ema_ = block_sq_;
        } else {
            const double inv_w = 1.0 / hyper_.metric_window;
            pool_->run_chunks(block_ema_.size(), [&](size_t k0, size_t k1, int) {
                for (size_t k = k0; k < k1; ++k)
                    block_ema_[k] += (block_sq_[k] - block_ema_[k]) * inv_w;
            });
        }
        vals = block_ema_.data();
    } else {
        vals = block_sq_.data();
    }
    const double sum = pairwise_sum(vals, n_btf * ni);
    if (sum == 0.0) return;
    const double inv_rms2 = static_cast<double>(n_btf) * ni / sum;
    const double gamma = hyper_.gamma;
    pool_->run_chunks(n_btf, [&](size_t b0, size_t b1, int) {
        for (size_t b = b0; b < b1; ++b) {
            double* g = g_.row(topo_.btf_nodes[b]);
            const double* v = vals + b * ni;
            for (int i = 0; i < ni; ++i) g[i] += gamma * (v[i] * inv_rms2 - g[i]);
        }
    });
}

double Trainer::step() {
    sweep_A();
    sweep_B();
    sweep_update_gap();
    sweep_metric();
    ++iter_;
    return last_gap_;
}

SolutionWeights Trainer::solution() const { return extract_solution(z_, g_, topo_); }

double Trainer::train_accuracy() {
    const BtfModel model = make_model(topo_, solution(), hyper_.sigma);
    if (!train_.generative) return accuracy(model, train_);

    // generative run: read the codes the iterate is using (concurred input
    // rows rounded per mode) and score the decode of each code
    const int ni = z_.n_items;
    const int n_in = static_cast<int>(topo_.input_nodes.size());
    std::vector<double> mean(n_in), code(n_in);
    long long hits = 0, total = 0;
    for (int i = 0; i < ni; ++i) {
        for (int k = 0; k < n_in; ++k) {
            const int p = topo_.input_nodes[k];
            double num = g_.row(p)[i] * z_.yrow(p)[i];
            double den = g_.row(p)[i];
            for (const int e : topo_.fanout[p]) {
                const double gq = g_.row(topo_.edge_dst[e])[i];
                num += gq * z_.xrow(e)[i];
                den += gq;
            }
            mean[k] = num / den;
        }
        if (hyper_.input_mode == InputMode::OneHot) {
            int best = 0;
            for (int k = 1; k < n_in; ++k)
                if (mean[k] > mean[best]) best = k;
            for (int k = 0; k < n_in; ++k) code[k] = k == best ? 1.0 : -1.0;
        } else {
            for (int k = 0; k < n_in; ++k) code[k] = mean[k] < 0.0 ? -1.0 : 1.0;
        }
        const std::vector<double> pred = forward(model, code);
        const auto label = train_.output(i);
        for (size_t k = 0; k < pred.size(); ++k) {
            hits += pred[k] == label[k];
            ++total;
        }
    }
    return static_cast<double>(hits) / static_cast<double>(total);
}

std::optional<double> Trainer::test_accuracy() {
    if (!has_test_) return std::nullopt;
    const BtfModel model = make_model(topo_, solution(), hyper_.sigma);
    return accuracy(model, test_);
}

// ------------------------------------------------------------------ train

TrainResult train(const Topology& topo, const Dataset& train_data, const Dataset* test_data,
                  const Hyperparams& hyper, const StoppingRule& stop, const LogSink& sink,
                  int n_threads) {
    TrainResult res;
    const auto t0 = std::chrono::steady_clock::now();
    const auto elapsed = [&t0] {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    };
    try {
        Trainer tr(topo, train_data, test_data, hyper, n_threads);
        if (stop.max_iters <= 0) {
            res.solution = tr.solution();
            return res;
        }
        const std::vector<long long> schedule = checkpoint_schedule(stop.max_iters);
        size_t cp = 0;
        for (long long it = 1; it <= stop.max_iters; ++it) {
            const double gap = tr.step();
            const bool converged = gap < stop.gap_stop;
            while (cp < schedule.size() && schedule[cp] < it) ++cp;
            const bool scheduled = cp < schedule.size() && schedule[cp] == it;
            if (scheduled || converged || it == stop.max_iters) {
                IterationStats st;
                st.iter = it;
                st.gap = gap;
                st.min_gap = tr.min_gap();
                st.train_acc = tr.train_accuracy();
                st.test_acc = tr.test_accuracy();
                st.wall_seconds = elapsed();
                res.history.push_back(st);
                if (sink) sink(st);
            }
            if (converged) {
                res.converged = true;
                break;
            }
        }
        res.solution = tr.solution();
        res.final_gap = tr.last_gap();
        res.min_gap = tr.min_gap();
        res.iters_run = tr.iter();
    } catch (const std::exception& e) {
        res.error = e.what();
    }
    return res;
}

std::string stats_csv_header() { return "iter,gap,min_gap,train_acc,test_acc,wall_seconds"; }

std::string stats_csv_line(const IterationStats& s) {
    char buf[200];
    std::snprintf(buf, sizeof buf, "%lld,%.10g,%.10g,%.6f,", s.iter, s.gap, s.min_gap,
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
