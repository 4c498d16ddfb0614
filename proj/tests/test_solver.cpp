#include "btf/solver.hpp"

#include "btf/dataset.hpp"
#include "btf/model.hpp"
#include "btf/parallel.hpp"
#include "btf/rng.hpp"
#include "btf/state.hpp"
#include "btf/topology.hpp"

#include "doctest.h"

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

using namespace btf;

namespace {

// Small helper: fill every variable of a state with one constant.
void fill_state(VariableState& z, double v) {
    std::fill(z.y.begin(), z.y.end(), v);
    std::fill(z.x.begin(), z.x.end(), v);
    std::fill(z.w.begin(), z.w.end(), v);
}

} // namespace

TEST_SUITE("solver") {
    TEST_CASE("checkpoint schedule matches the geometric reference list") {
        // ceil(1.25^k), deduplicated, with max_iters appended when absent
        const std::vector<long long> want100 = {1,  2,  3,  4,  5,  6,  8,  10, 12, 15,
                                                19, 23, 29, 36, 45, 56, 70, 87, 100};
        CHECK(checkpoint_schedule(100) == want100);
        CHECK(checkpoint_schedule(0).empty());
        CHECK(checkpoint_schedule(1) == std::vector<long long>{1});
        CHECK(checkpoint_schedule(2) == std::vector<long long>({1, 2}));
        // small budgets visit every iteration up to the first gap at 7 -> 8
        CHECK(checkpoint_schedule(7) == std::vector<long long>({1, 2, 3, 4, 5, 6, 7}));

        const std::vector<long long> big = checkpoint_schedule(1000000);
        CHECK(big.size() == 60);
        REQUIRE(big.size() >= 4);
        CHECK(big[big.size() - 4] == 522025);
        CHECK(big[big.size() - 3] == 652531);
        CHECK(big[big.size() - 2] == 815664);
        CHECK(big.back() == 1000000);
        for (size_t k = 1; k < big.size(); ++k) CHECK(big[k] > big[k - 1]);
        CHECK(big.front() == 1);
    }

    TEST_CASE("gap report: uniform offsets give the closed-form rms") {
        // {2,2,1}: three btf nodes with fan-in 3 each, two input nodes
        const Topology topo = build_layered({2, 2, 1});
        REQUIRE(topo.btf_nodes.size() == 3);
        REQUIRE(topo.input_nodes.size() == 2);
        const int ni = 4;
        auto [zA, gA] = init_state(topo, ni, 1);
        VariableState zB = zA;
        fill_state(zA, 0.75);
        fill_state(zB, 0.25);
        const double d = 0.5;
        GapReport rep = compute_gap(zA, zB, topo);
        // per block: m edges contribute (w and x) 2*m*d^2, plus the y gap
        const double blk = (2.0 * 3.0 + 1.0) * d * d;
        REQUIRE(rep.block_sq.size() == static_cast<size_t>(3 * ni));
        for (double v : rep.block_sq) CHECK(v == doctest::Approx(blk).epsilon(1e-14));
        for (double v : rep.input_sq) CHECK(v == doctest::Approx(d * d).epsilon(1e-14));
        CHECK(rep.rms_blocks == doctest::Approx(std::sqrt(7.0) * d).epsilon(1e-14));
        // reported gap folds the two input nodes in as one extra block each
        const double want = std::sqrt((3 * ni * blk + 2 * ni * d * d) / (5.0 * ni));
        CHECK(rep.reported == doctest::Approx(want).epsilon(1e-14));
    }

    TEST_CASE("gap report: a single perturbed entry lands in the right slot") {
        const Topology topo = build_layered({2, 2, 1});
        const int ni = 4;
        auto [zA, gA] = init_state(topo, ni, 1);
        VariableState zB = zA; // identical -> all gaps zero
        GapReport zero = compute_gap(zA, zB, topo);
        CHECK(zero.reported == 0.0);
        CHECK(zero.rms_blocks == 0.0);

        // bump one weight of the second hidden node on item 2
        const int q = topo.btf_nodes[1];
        const int e0 = topo.fanin_first[q];
        zB.wrow(e0 + 1)[2] += 0.3;
        GapReport rep = compute_gap(zA, zB, topo);
        for (size_t b = 0; b < 3; ++b)
            for (int i = 0; i < ni; ++i) {
                const double want = (b == 1 && i == 2) ? 0.09 : 0.0;
                CHECK(rep.block_sq[b * ni + i] == doctest::Approx(want).epsilon(1e-12));
            }
        CHECK(rep.reported == doctest::Approx(std::sqrt(0.09 / (5.0 * ni))).epsilon(1e-12));
    }

    TEST_CASE("metric update: frozen fractions and pinned rows") {
        const Topology topo = build_layered({2, 2, 1});
        const int ni = 2;
        auto [z, g] = init_state(topo, ni, 1); // g starts at all ones
        // block gaps 1..6 over (3 nodes x 2 items); mean of v*inv_rms2 is 1
        const std::vector<double> sq = {1, 2, 3, 4, 5, 6};
        update_metric(g, sq, topo, 0.5);
        const double want[] = {9.0 / 14, 11.0 / 14, 13.0 / 14,
                               15.0 / 14, 17.0 / 14, 19.0 / 14};
        for (size_t b = 0; b < 3; ++b)
            for (int i = 0; i < ni; ++i)
                CHECK(g.row(topo.btf_nodes[b])[i] ==
                      doctest::Approx(want[b * ni + i]).epsilon(1e-15));
        // input and constant coefficients never move
        for (int p : topo.input_nodes)
            for (int i = 0; i < ni; ++i) CHECK(g.row(p)[i] == 1.0);
        for (int i = 0; i < ni; ++i) CHECK(g.row(topo.constant_id)[i] == 1.0);
        // the normalization keeps the btf-wide mean of g at exactly 1
        double total = 0.0;
        for (int q : topo.btf_nodes) total += pairwise_sum(g.row(q), ni);
        CHECK(total == doctest::Approx(6.0).epsilon(1e-14));
    }

    TEST_CASE("metric update: edge rates") {
        const Topology topo = build_layered({2, 2, 1});
        auto [z, g] = init_state(topo, 2, 1);
        const std::vector<double> sq = {1, 2, 3, 4, 5, 6};
        SUBCASE("gamma = 0 is a no-op") {
            update_metric(g, sq, topo, 0.0);
            for (double v : g.g) CHECK(v == 1.0);
        }
        SUBCASE("all-zero gaps leave the metric alone") {
            update_metric(g, std::vector<double>(6, 0.0), topo, 0.5);
            for (double v : g.g) CHECK(v == 1.0);
        }
        SUBCASE("negative gamma is rejected") {
            CHECK_THROWS_AS(update_metric(g, sq, topo, -0.1), std::invalid_argument);
        }
        SUBCASE("gamma = 1 jumps straight to the normalized gaps") {
            update_metric(g, sq, topo, 1.0);
            CHECK(g.row(topo.btf_nodes[0])[0] == doctest::Approx(2.0 / 7).epsilon(1e-15));
            CHECK(g.row(topo.btf_nodes[2])[1] == doctest::Approx(12.0 / 7).epsilon(1e-15));
        }
    }

    TEST_CASE("reference step: beta = 0 leaves the iterate in place") {
        const Topology topo = build_layered({4, 4, 4, 4});
        const Dataset data = gen_mult_table(2);
        auto [z, g] = init_state(topo, data.n_items(), 3);
        const VariableState before = z;
        Hyperparams hyper;
        hyper.beta = 0.0;
        GapReport rep = rrr_step(z, g, topo, hyper, data);
        CHECK(rep.reported > 0.0);
        CHECK(z.y == before.y);
        CHECK(z.x == before.x);
        CHECK(z.w == before.w);
        hyper.beta = 2.0;
        CHECK_THROWS_AS(rrr_step(z, g, topo, hyper, data), std::invalid_argument);
    }

    TEST_CASE("fused trainer reproduces the reference iteration") {
        // The Trainer runs the same arithmetic as rrr_step + update_metric but
        // fused and in place; over thousands of iterations the two must stay
        // together to within accumulated rounding.
        const Topology topo = build_layered({4, 4, 4, 4});
        const Dataset data = gen_mult_table(2);
        Hyperparams hyper;
        hyper.beta = 0.2;
        hyper.gamma = 1e-3;
        hyper.sigma = 3.0;
        hyper.seed = 7;

        SUBCASE("instantaneous metric (window 1)") {
            hyper.metric_window = 1;
            Trainer tr(topo, data, nullptr, hyper);
            auto [z, g] = init_state(topo, data.n_items(), hyper.seed);
            double ref_gap = 0.0;
            for (int it = 0; it < 2000; ++it) {
                GapReport rep = rrr_step(z, g, topo, hyper, data);
                update_metric(g, rep.block_sq, topo, hyper.gamma);
                ref_gap = rep.reported;
                tr.step();
            }
            CHECK(tr.iter() == 2000);
            CHECK(tr.last_gap() == doctest::Approx(ref_gap).epsilon(1e-9));
            const VariableState& zt = tr.state();
            double worst = 0.0;
            for (size_t k = 0; k < z.w.size(); ++k)
                worst = std::max(worst, std::abs(z.w[k] - zt.w[k]));
            for (size_t k = 0; k < z.x.size(); ++k)
                worst = std::max(worst, std::abs(z.x[k] - zt.x[k]));
            for (size_t k = 0; k < z.y.size(); ++k)
                worst = std::max(worst, std::abs(z.y[k] - zt.y[k]));
            CHECK(worst <= 1e-10);
            double worst_g = 0.0;
            for (size_t k = 0; k < g.g.size(); ++k)
                worst_g = std::max(worst_g, std::abs(g.g[k] - tr.metric().g[k]));
            CHECK(worst_g <= 1e-10);
        }

        SUBCASE("smoothed metric (window 4)") {
            hyper.metric_window = 4;
            Trainer tr(topo, data, nullptr, hyper);
            auto [z, g] = init_state(topo, data.n_items(), hyper.seed);
            std::vector<double> ema;
            for (int it = 0; it < 200; ++it) {
                GapReport rep = rrr_step(z, g, topo, hyper, data);
                if (ema.empty()) {
                    ema = rep.block_sq; // first step seeds the average
                } else {
                    for (size_t k = 0; k < ema.size(); ++k)
                        ema[k] += (rep.block_sq[k] - ema[k]) / hyper.metric_window;
                }
                update_metric(g, ema, topo, hyper.gamma);
                tr.step();
            }
            double worst = 0.0;
            for (size_t k = 0; k < g.g.size(); ++k)
                worst = std::max(worst, std::abs(g.g[k] - tr.metric().g[k]));
            CHECK(worst <= 1e-11);
            for (size_t k = 0; k < z.y.size(); ++k)
                worst = std::max(worst, std::abs(z.y[k] - tr.state().y[k]));
            CHECK(worst <= 1e-11);
        }
    }

    TEST_CASE("trainer runs are reproducible and thread-count independent") {
        const Topology topo = build_layered({4, 4, 4, 4});
        const Dataset data = gen_mult_table(2);
        Hyperparams hyper;
        hyper.seed = 11;
        Trainer a(topo, data, nullptr, hyper, 1);
        Trainer b(topo, data, nullptr, hyper, 3);
        for (int it = 0; it < 300; ++it) {
            const double ga = a.step();
            const double gb = b.step();
            CHECK(ga == gb); // bit-identical for any worker count
        }
        CHECK(a.state().w == b.state().w);
        CHECK(a.state().x == b.state().x);
        CHECK(a.state().y == b.state().y);
        CHECK(a.metric().g == b.metric().g);
    }

    TEST_CASE("trainer constructor validates its inputs") {
        const Topology topo = build_layered({4, 4, 4, 4});
        const Dataset data = gen_mult_table(2);
        Hyperparams hyper;
        SUBCASE("beta range") {
            hyper.beta = 0.0;
            CHECK_THROWS_AS(Trainer(topo, data, nullptr, hyper), std::invalid_argument);
            hyper.beta = 2.0;
            CHECK_THROWS_AS(Trainer(topo, data, nullptr, hyper), std::invalid_argument);
        }
        SUBCASE("sigma and window") {
            hyper.sigma = 0.0;
            CHECK_THROWS_AS(Trainer(topo, data, nullptr, hyper), std::invalid_argument);
            hyper = Hyperparams{};
            hyper.metric_window = 0;
            CHECK_THROWS_AS(Trainer(topo, data, nullptr, hyper), std::invalid_argument);
        }
        SUBCASE("dataset shape") {
            const Topology wrong = build_layered({3, 4, 4});
            CHECK_THROWS_WITH_AS(Trainer(wrong, data, nullptr, hyper),
                                 doctest::Contains("does not match"), std::invalid_argument);
        }
        SUBCASE("generative data needs a code-side input mode") {
            const Dataset gen = make_generative(gen_random_boolean(4, 4, true, 5), 4);
            hyper.input_mode = InputMode::Data;
            CHECK_THROWS_WITH_AS(Trainer(topo, gen, nullptr, hyper),
                                 doctest::Contains("generative"), std::invalid_argument);
            // and a generative test set is never scoreable
            CHECK_THROWS_WITH_AS(Trainer(topo, data, &gen, hyper),
                                 doctest::Contains("test set"), std::invalid_argument);
        }
    }

    TEST_CASE("train: stopping, logging, and determinism") {
        const Topology topo = build_layered({4, 4, 4, 4});
        const Dataset data = gen_mult_table(2);
        Hyperparams hyper;
        hyper.seed = 2;

        SUBCASE("a huge stop gap converges on the first iteration") {
            StoppingRule stop{1e6, 1000};
            TrainResult res = train(topo, data, nullptr, hyper, stop);
            CHECK(res.error.empty());
            CHECK(res.converged);
            CHECK(res.iters_run == 1);
            REQUIRE(res.history.size() == 1);
            CHECK(res.history[0].iter == 1);
            CHECK(res.final_gap < 1e6);
        }

        SUBCASE("max_iters = 0 returns the initial concurrence without stepping") {
            StoppingRule stop{1e-3, 0};
            TrainResult res = train(topo, data, nullptr, hyper, stop);
            CHECK(res.error.empty());
            CHECK(!res.converged);
            CHECK(res.iters_run == 0);
            CHECK(res.history.empty());
            CHECK(res.solution.w.size() == topo.n_edges);
        }

        SUBCASE("an unreachable stop runs the full budget and logs the schedule") {
            StoppingRule stop{0.0, 200}; // gap is never negative
            int sink_calls = 0;
            TrainResult res = train(topo, data, nullptr, hyper, stop,
                                    [&](const IterationStats&) { ++sink_calls; });
            CHECK(res.error.empty());
            CHECK(!res.converged);
            CHECK(res.iters_run == 200);
            const std::vector<long long> want = checkpoint_schedule(200);
            REQUIRE(res.history.size() == want.size());
            for (size_t k = 0; k < want.size(); ++k) CHECK(res.history[k].iter == want[k]);
            CHECK(sink_calls == static_cast<int>(res.history.size()));
            CHECK(res.history.back().gap == res.final_gap);
            for (const auto& st : res.history) {
                CHECK(st.min_gap <= st.gap);
                CHECK(st.train_acc >= 0.0);
                CHECK(st.train_acc <= 1.0);
                CHECK(!st.test_acc.has_value());
            }
        }

        SUBCASE("identical seeds give identical runs") {
            StoppingRule stop{0.0, 150};
            TrainResult r1 = train(topo, data, nullptr, hyper, stop);
            TrainResult r2 = train(topo, data, nullptr, hyper, stop);
            CHECK(r1.final_gap == r2.final_gap);
            CHECK(r1.min_gap == r2.min_gap);
            CHECK(r1.solution.w == r2.solution.w);
            hyper.seed = 3;
            TrainResult r3 = train(topo, data, nullptr, hyper, stop);
            CHECK(r1.final_gap != r3.final_gap);
        }

        SUBCASE("configuration errors surface in the result, not as exceptions") {
            hyper.beta = 2.5;
            StoppingRule stop{1e-3, 10};
            TrainResult res = train(topo, data, nullptr, hyper, stop);
            CHECK(!res.error.empty());
            CHECK(res.history.empty());
        }
    }

    TEST_CASE("train: the four-bit product table is solved and certified") {
        const Topology topo = build_layered({4, 4, 4, 4});
        const Dataset data = gen_mult_table(2);
        Hyperparams hyper;
        hyper.seed = 1;
        StoppingRule stop{1e-3, 50000};
        TrainResult res = train(topo, data, nullptr, hyper, stop);
        REQUIRE(res.error.empty());
        CHECK(res.converged);
        CHECK(res.final_gap < 1e-3);
        const BtfModel model = make_model(topo, res.solution, hyper.sigma);
        CHECK(accuracy(model, data) == 1.0);
        // test-set plumbing reports on held-out items
        Hyperparams h2 = hyper;
        StoppingRule short_run{0.0, 30};
        TrainResult res2 = train(topo, data, &data, h2, short_run);
        REQUIRE(!res2.history.empty());
        CHECK(res2.history.back().test_acc.has_value());
    }

    TEST_CASE("stats csv lines round-trip the header fields") {
        CHECK(stats_csv_header() == "iter,gap,min_gap,train_acc,test_acc,wall_seconds");
        IterationStats st;
        st.iter = 42;
        st.gap = 0.125;
        st.min_gap = 0.0625;
        st.train_acc = 0.75;
        st.wall_seconds = 1.5;
        CHECK(stats_csv_line(st) == "42,0.125,0.0625,0.750000,,1.500");
        st.test_acc = 0.5;
        CHECK(stats_csv_line(st) == "42,0.125,0.0625,0.750000,0.500000,1.500");
    }
}
