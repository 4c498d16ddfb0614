#include "btf/topology.hpp"

#include "doctest.h"

#include <set>
#include <stdexcept>

using namespace btf;

TEST_SUITE("topology") {
    TEST_CASE("4,4,4,4 has the counts the layout promises") {
        Topology t = build_layered({4, 4, 4, 4});
        CHECK(t.n_nodes == 17); // 16 layer nodes + constant
        CHECK(t.constant_id == 16);
        CHECK(t.n_edges == 60); // 12 thresholding nodes with fan-in 5
        CHECK(t.input_nodes.size() == 4);
        CHECK(t.hidden_nodes.size() == 8);
        CHECK(t.output_nodes.size() == 4);
        CHECK(t.btf_nodes.size() == 12);
        CHECK(t.kind[t.constant_id] == NodeKind::Constant);
        CHECK(t.layer_of[t.constant_id] == -1);
        for (int q : t.btf_nodes) CHECK(fan_in_size(t, q) == 5);
        CHECK(validate(t).empty());
    }

    TEST_CASE("bias edge comes first in every fan-in, then the layer below in order") {
        Topology t = build_layered({3, 5, 2});
        for (int q : t.btf_nodes) {
            int first = t.fanin_first[q];
            CHECK(t.edge_src[first] == t.constant_id);
            int layer_below = t.layer_of[q] - 1;
            for (int k = 1; k < t.fanin_count[q]; ++k) {
                int src = t.edge_src[first + k];
                CHECK(t.layer_of[src] == layer_below);
                CHECK(t.pos_in_layer[src] == k - 1);
                CHECK(t.edge_dst[first + k] == q);
            }
        }
    }

    TEST_CASE("edges are grouped contiguously by target node") {
        Topology t = build_layered({2, 3, 4, 1});
        int covered = 0;
        for (int q : t.btf_nodes) {
            for (int e = t.fanin_first[q]; e < t.fanin_first[q] + t.fanin_count[q]; ++e)
                CHECK(t.edge_dst[e] == q);
            covered += t.fanin_count[q];
        }
        CHECK(covered == t.n_edges);
        for (int n : t.input_nodes) {
            CHECK(t.fanin_first[n] == -1);
            CHECK(t.fanin_count[n] == 0);
        }
    }

    TEST_CASE("fanout lists mirror edge_src exactly") {
        Topology t = build_layered({4, 3, 2});
        std::vector<std::set<int>> expect(t.n_nodes);
        for (int e = 0; e < t.n_edges; ++e) expect[t.edge_src[e]].insert(e);
        for (int n = 0; n < t.n_nodes; ++n) {
            std::set<int> got(t.fanout[n].begin(), t.fanout[n].end());
            CHECK(got == expect[n]);
        }
        // constant feeds every thresholding node exactly once
        CHECK(t.fanout[t.constant_id].size() == t.btf_nodes.size());
        // outputs feed nothing
        for (int n : t.output_nodes) CHECK(t.fanout[n].empty());
    }

    TEST_CASE("node ids are assigned layer by layer") {
        Topology t = build_layered({2, 2, 2});
        CHECK(t.layer_first[0] == 0);
        CHECK(t.layer_first[1] == 2);
        CHECK(t.layer_first[2] == 4);
        CHECK(t.node_id(1, 1) == 3);
        CHECK(t.layer_of[3] == 1);
        CHECK(t.pos_in_layer[3] == 1);
        CHECK(t.is_btf(3));
        CHECK(!t.is_btf(0));
    }

    TEST_CASE("bad widths are rejected") {
        CHECK_THROWS_AS(build_layered({}), std::invalid_argument);
        CHECK_THROWS_AS(build_layered({4}), std::invalid_argument);
        CHECK_THROWS_AS(build_layered({4, 0, 4}), std::invalid_argument);
        CHECK_THROWS_AS(build_layered({4, -2}), std::invalid_argument);
    }

    TEST_CASE("arch strings round-trip") {
        CHECK(arch_to_string({4, 4, 4, 4}) == "4,4,4,4");
        CHECK(parse_arch("16,32,32,16") == std::vector<int>{16, 32, 32, 16});
        CHECK(parse_arch(arch_to_string({6, 12, 12, 6})) == std::vector<int>{6, 12, 12, 6});
        CHECK_THROWS(parse_arch("4,,4"));
        CHECK_THROWS(parse_arch("banana"));
        CHECK_THROWS(parse_arch(""));
    }

    TEST_CASE("fan_in_size rejects non-thresholding nodes") {
        Topology t = build_layered({2, 2});
        CHECK_THROWS(fan_in_size(t, t.input_nodes[0]));
        CHECK_THROWS(fan_in_size(t, t.constant_id));
        CHECK(fan_in_size(t, t.output_nodes[0]) == 3);
    }
}
