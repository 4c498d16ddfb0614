#include "btf/state.hpp"

#include "btf/topology.hpp"

#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <stdexcept>
#include <string>

using namespace btf;

TEST_SUITE("state") {
    TEST_CASE("init produces the documented distributions and shapes") {
        Topology t = build_layered({4, 4, 4, 4});
        const int ni = 16;
        auto [z, g] = init_state(t, ni, 7);
        REQUIRE(z.n_items == ni);
        REQUIRE(z.y.size() == static_cast<size_t>(t.n_nodes) * ni);
        REQUIRE(z.x.size() == static_cast<size_t>(t.n_edges) * ni);
        REQUIRE(z.w.size() == static_cast<size_t>(t.n_edges) * ni);
        REQUIRE(g.g.size() == static_cast<size_t>(t.n_nodes) * ni);

        for (double v : z.y) {
            CHECK(v >= -1.0);
            CHECK(v <= 1.0);
        }
        for (double v : z.x) {
            CHECK(v >= -1.0);
            CHECK(v <= 1.0);
        }
        for (double v : g.g) CHECK(v == 1.0);

        // every (neuron, item) weight vector starts on its sphere ||w||^2 = m
        for (int q : t.btf_nodes) {
            int m = t.fanin_count[q];
            for (int i = 0; i < ni; ++i) {
                double n2 = 0.0;
                for (int e = t.fanin_first[q]; e < t.fanin_first[q] + m; ++e)
                    n2 += z.wrow(e)[i] * z.wrow(e)[i];
                CHECK(n2 == doctest::Approx(m).epsilon(1e-12));
            }
        }
    }

    TEST_CASE("row accessors address the flat item-innermost layout") {
        Topology t = build_layered({2, 3, 2});
        auto [z, g] = init_state(t, 5, 1);
        CHECK(z.yrow(3) == z.y.data() + 3 * 5);
        CHECK(z.xrow(2) == z.x.data() + 2 * 5);
        CHECK(z.wrow(4) == z.w.data() + 4 * 5);
        CHECK(g.row(6) == g.g.data() + 6 * 5);
    }

    TEST_CASE("initialization is a pure function of the seed") {
        Topology t = build_layered({3, 4, 3});
        auto [z1, g1] = init_state(t, 8, 42);
        auto [z2, g2] = init_state(t, 8, 42);
        auto [z3, g3] = init_state(t, 8, 43);
        CHECK(z1.y == z2.y);
        CHECK(z1.x == z2.x);
        CHECK(z1.w == z2.w);
        CHECK(z1.w != z3.w);
    }

    TEST_CASE("extract_solution is the g-weighted mean on the sphere") {
        Topology t = build_layered({2, 2});
        const int ni = 3;
        auto [z, g] = init_state(t, ni, 5);
        // node fan-in is 3 (bias + two inputs); plant per-item weights whose
        // plain mean is (1,2,2) -> normalized to sqrt(3)/3 * (1,2,2)
        for (int q : t.btf_nodes) {
            int e0 = t.fanin_first[q];
            double plant[3] = {1.0, 2.0, 2.0};
            for (int k = 0; k < 3; ++k)
                for (int i = 0; i < ni; ++i)
                    z.wrow(e0 + k)[i] = plant[k] + (i - 1) * 0.25; // mean over items = plant
        }
        SolutionWeights sol = extract_solution(z, g, t);
        for (int q : t.btf_nodes) {
            int e0 = t.fanin_first[q];
            double scale = std::sqrt(3.0 / 9.0); // ||(1,2,2)||^2 = 9 -> sphere 3
            CHECK(sol.w[e0 + 0] == doctest::Approx(1.0 * scale).epsilon(1e-12));
            CHECK(sol.w[e0 + 1] == doctest::Approx(2.0 * scale).epsilon(1e-12));
            CHECK(sol.w[e0 + 2] == doctest::Approx(2.0 * scale).epsilon(1e-12));
        }

        // unequal g weights shift the mean: w = a on item 0 (g=3), b elsewhere (g=0.5)
        MetricState gw = g;
        for (int q : t.btf_nodes) {
            gw.row(q)[0] = 3.0;
            gw.row(q)[1] = 0.5;
            gw.row(q)[2] = 0.5;
            int e0 = t.fanin_first[q];
            for (int k = 0; k < 3; ++k) {
                z.wrow(e0 + k)[0] = 2.0;
                z.wrow(e0 + k)[1] = -1.0;
                z.wrow(e0 + k)[2] = -1.0;
            }
        }
        SolutionWeights sol2 = extract_solution(z, gw, t);
        for (int q : t.btf_nodes) {
            int e0 = t.fanin_first[q];
            // weighted mean (3*2 + 0.5*(-1) + 0.5*(-1)) / 4 = 1.25 per edge,
            // then normalized to the sphere: sqrt(3)/ (1.25*sqrt(3)) * 1.25 = 1
            for (int k = 0; k < 3; ++k) CHECK(sol2.w[e0 + k] == doctest::Approx(1.0).epsilon(1e-12));
        }
    }

    TEST_CASE("extract_solution flags an all-zero mean as degenerate") {
        Topology t = build_layered({2, 2});
        auto [z, g] = init_state(t, 2, 5);
        int q = t.btf_nodes[0];
        int e0 = t.fanin_first[q];
        for (int k = 0; k < 3; ++k) {
            z.wrow(e0 + k)[0] = 1.0;
            z.wrow(e0 + k)[1] = -1.0; // items cancel exactly
        }
        CHECK_THROWS_WITH_AS(extract_solution(z, g, t),
                             doctest::Contains("degenerate weight concur"), std::runtime_error);
    }

    TEST_CASE("state checkpoints round-trip exactly") {
        Topology t = build_layered({4, 3, 4});
        auto [z, g] = init_state(t, 6, 99);
        g.row(t.btf_nodes[0])[2] = 1.7320508075688772;
        std::string path =
            (std::filesystem::temp_directory_path() / "btf_test_state.txt").string();
        save_state(path, t, z, g, 12345);
        LoadedState back = load_state(path);
        CHECK(back.widths == t.widths);
        CHECK(back.iter == 12345);
        CHECK(back.state.y == z.y);
        CHECK(back.state.x == z.x);
        CHECK(back.state.w == z.w);
        CHECK(back.metric.g == g.g);
        std::filesystem::remove(path);
    }
}
