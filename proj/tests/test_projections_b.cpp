#include "btf/projections.hpp"

#include "btf/rng.hpp"
#include "btf/state.hpp"
#include "btf/topology.hpp"

#include "doctest.h"

#include <cmath>
#include <stdexcept>
#include <vector>

using namespace btf;

TEST_SUITE("projections_b") {
    TEST_CASE("fan-out concurrence is the g-weighted mean") {
        // x copies weighted by the *receiving* node's g, y by the source's own
        std::vector<double> x = {0.5, -1.0, 2.0};
        std::vector<double> gr = {1.0, 3.0, 0.5};
        double y = 0.25, gs = 2.0;
        double want = (1.0 * 0.5 + 3.0 * -1.0 + 0.5 * 2.0 + 2.0 * 0.25) / (1.0 + 3.0 + 0.5 + 2.0);
        CHECK(concur_fanout(x, y, gr, gs) == doctest::Approx(want).epsilon(1e-15));
        // equal values concur to themselves whatever the metric says
        std::vector<double> same = {0.7, 0.7, 0.7};
        CHECK(concur_fanout(same, 0.7, gr, gs) == doctest::Approx(0.7).epsilon(1e-15));
    }

    TEST_CASE("weight concurrence: weighted mean per edge, then the sphere") {
        // two edges (m=2), three items, edge-major layout
        std::vector<double> w_items = {1.0, 2.0, 3.0,   // edge 0 over items
                                       -1.0, 0.0, 1.0}; // edge 1 over items
        std::vector<double> g = {1.0, 1.0, 2.0};
        // weighted means: edge0 (1+2+2*3)/4 = 2.25, edge1 (-1+0+2)/4 = 0.25
        std::vector<double> got = concur_weights(w_items, 2, 3, g, 0);
        double norm = std::sqrt(2.25 * 2.25 + 0.25 * 0.25);
        double scale = std::sqrt(2.0) / norm;
        REQUIRE(got.size() == 2);
        CHECK(got[0] == doctest::Approx(2.25 * scale).epsilon(1e-14));
        CHECK(got[1] == doctest::Approx(0.25 * scale).epsilon(1e-14));
        // the result really sits on ||w||^2 = m
        CHECK(got[0] * got[0] + got[1] * got[1] == doctest::Approx(2.0).epsilon(1e-14));
    }

    TEST_CASE("weight concurrence flags exact cancellation") {
        std::vector<double> w_items = {1.0, -1.0, 2.0, -2.0};
        std::vector<double> g = {1.0, 1.0};
        CHECK_THROWS_WITH_AS(concur_weights(w_items, 2, 2, g, 7),
                             doctest::Contains("degenerate weight concur"), std::runtime_error);
    }

    TEST_CASE("P_B enforces every concur constraint") {
        Topology t = build_layered({4, 4, 4, 4});
        Dataset data = gen_mult_table(2);
        auto [z, g] = init_state(t, 16, 5);
        Rng rng(substream_seed(41, "pb-metric"));
        for (int q : t.btf_nodes)
            for (int i = 0; i < 16; ++i) g.row(q)[i] = rng.uniform(0.25, 4.0);
        VariableState b = apply_PB(z, g, t, data);

        // all fan-out copies of a node equal its y
        for (int p = 0; p < t.n_nodes; ++p) {
            if (t.fanout[p].empty() || t.kind[p] == NodeKind::Constant) continue;
            for (int e : t.fanout[p])
                for (int i = 0; i < 16; ++i)
                    CHECK(b.xrow(e)[i] == doctest::Approx(b.yrow(p)[i]).epsilon(1e-12));
        }
        // bias copies are pinned to -1
        for (int e : t.fanout[t.constant_id])
            for (int i = 0; i < 16; ++i) CHECK(b.xrow(e)[i] == -1.0);
        // weights agree across items and sit on the sphere
        for (int q : t.btf_nodes) {
            double n2 = 0.0;
            for (int e = t.fanin_first[q]; e < t.fanin_first[q] + t.fanin_count[q]; ++e) {
                for (int i = 1; i < 16; ++i) CHECK(b.wrow(e)[i] == b.wrow(e)[0]);
                n2 += b.wrow(e)[0] * b.wrow(e)[0];
            }
            CHECK(n2 == doctest::Approx(t.fanin_count[q]).epsilon(1e-12));
        }
        // outputs are clamped to the data
        for (size_t k = 0; k < t.output_nodes.size(); ++k)
            for (int i = 0; i < 16; ++i)
                CHECK(b.yrow(t.output_nodes[k])[i] == data.output(i)[k]);
    }

    TEST_CASE("P_B is idempotent") {
        Topology t = build_layered({3, 5, 3});
        Dataset data = gen_random_boolean(3, 7, true, 2);
        auto [z, g] = init_state(t, 7, 9);
        Rng rng(substream_seed(43, "pb-idem"));
        for (int q : t.btf_nodes)
            for (int i = 0; i < 7; ++i) g.row(q)[i] = rng.uniform(0.5, 2.0);
        VariableState b1 = apply_PB(z, g, t, data);
        VariableState b2 = apply_PB(b1, g, t, data);
        for (size_t j = 0; j < b1.y.size(); ++j)
            CHECK(b2.y[j] == doctest::Approx(b1.y[j]).epsilon(1e-12));
        for (size_t j = 0; j < b1.x.size(); ++j) {
            CHECK(b2.x[j] == doctest::Approx(b1.x[j]).epsilon(1e-12));
            CHECK(b2.w[j] == doctest::Approx(b1.w[j]).epsilon(1e-12));
        }
    }

    TEST_CASE("a state already satisfying the constraints is a fixed point") {
        Topology t = build_layered({2, 3, 2});
        Dataset data = gen_random_boolean(2, 3, true, 6);
        auto [z, g] = init_state(t, 3, 11);
        // plant consistency by construction: x copies = source y, weights
        // constant across items on the sphere, outputs = data
        for (size_t k = 0; k < t.output_nodes.size(); ++k)
            for (int i = 0; i < 3; ++i) z.yrow(t.output_nodes[k])[i] = data.output(i)[k];
        for (int i = 0; i < 3; ++i) z.yrow(t.constant_id)[i] = -1.0;
        for (int p = 0; p < t.n_nodes; ++p)
            for (int e : t.fanout[p])
                for (int i = 0; i < 3; ++i) z.xrow(e)[i] = z.yrow(p)[i];
        for (int q : t.btf_nodes) {
            int m = t.fanin_count[q];
            double norm2 = 0.0;
            std::vector<double> v(m);
            for (int j = 0; j < m; ++j) {
                v[j] = 0.3 + 0.2 * j * (q % 3 ? 1 : -1);
                norm2 += v[j] * v[j];
            }
            for (int j = 0; j < m; ++j)
                for (int i = 0; i < 3; ++i)
                    z.wrow(t.fanin_first[q] + j)[i] = v[j] * std::sqrt(m / norm2);
        }
        // metric must not matter on the constraint set
        Rng rng(substream_seed(45, "pb-fixed"));
        for (int q : t.btf_nodes)
            for (int i = 0; i < 3; ++i) g.row(q)[i] = rng.uniform(0.1, 5.0);
        VariableState b = apply_PB(z, g, t, data);
        for (size_t j = 0; j < z.y.size(); ++j) CHECK(b.y[j] == doctest::Approx(z.y[j]).epsilon(1e-13));
        for (size_t j = 0; j < z.x.size(); ++j) {
            CHECK(b.x[j] == doctest::Approx(z.x[j]).epsilon(1e-13));
            CHECK(b.w[j] == doctest::Approx(z.w[j]).epsilon(1e-13));
        }
    }

    TEST_CASE("extract_solution equals the P_B weight step") {
        Topology t = build_layered({3, 4, 3});
        Dataset data = gen_random_boolean(3, 5, true, 13);
        auto [z, g] = init_state(t, 5, 17);
        Rng rng(substream_seed(47, "pb-extract"));
        for (int q : t.btf_nodes)
            for (int i = 0; i < 5; ++i) g.row(q)[i] = rng.uniform(0.5, 3.0);
        VariableState b = apply_PB(z, g, t, data);
        SolutionWeights sol = extract_solution(z, g, t);
        for (int q : t.btf_nodes)
            for (int e = t.fanin_first[q]; e < t.fanin_first[q] + t.fanin_count[q]; ++e)
                CHECK(sol.w[e] == b.wrow(e)[0]);
    }

    TEST_CASE("input rows concur in P_B while outputs clamp to stored targets") {
        Topology t = build_layered({3, 5, 4});
        Dataset base = gen_random_boolean(4, 6, true, 19);
        Dataset gen = make_generative(base, 3);
        auto [z, g] = init_state(t, 6, 23);
        VariableState b = apply_PB(z, g, t, gen);
        // input node y must equal the concurrence of its fan-out copies — for
        // all-ones g that is the plain mean of copies and the current y
        for (size_t k = 0; k < t.input_nodes.size(); ++k) {
            int p = t.input_nodes[k];
            for (int i = 0; i < 6; ++i) {
                double sum = z.yrow(p)[i];
                double cnt = 1.0;
                for (int e : t.fanout[p]) {
                    sum += z.xrow(e)[i];
                    cnt += 1.0;
                }
                CHECK(b.yrow(p)[i] == doctest::Approx(sum / cnt).epsilon(1e-12));
            }
        }
        // outputs still clamp to the stored codewords' targets
        for (size_t k = 0; k < t.output_nodes.size(); ++k)
            for (int i = 0; i < 6; ++i)
                CHECK(b.yrow(t.output_nodes[k])[i] == gen.output(i)[k]);
    }
}
