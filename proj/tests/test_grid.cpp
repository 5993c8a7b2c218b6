#include "dlmpsim/grid.hpp"

#include <cmath>
#include <random>

#include "dlmpsim/errors.hpp"
#include "doctest.h"

using namespace dlmpsim;

namespace {

std::string two_bus_json() {
    return R"({
      "s_base_kva": 5000, "v_base_kv": 4.16,
      "v_min_pu": 0.9025, "v_max_pu": 1.1025,
      "substation": 1,
      "buses": [
        {"id": 1, "p_kw": 0, "q_kvar": 0, "dg_p_max_kw": 0, "dg_q_max_kvar": 0,
         "dr_fraction": 0, "dg_cost_per_kwh": 0, "dr_cost_per_kwh": 0},
        {"id": 2, "p_kw": 500, "q_kvar": 150, "dg_p_max_kw": 0, "dg_q_max_kvar": 0,
         "dr_fraction": 0.1, "dg_cost_per_kwh": 0.02, "dr_cost_per_kwh": 0.03}
      ],
      "lines": [
        {"from": 1, "to": 2, "r_pu": 0.01, "x_pu": 0.02, "flow_limit_pu": 2.0}
      ]
    })";
}

Network chain3() {
    Network net;
    net.substation = 10;
    net.buses = {{10}, {20}, {30}};
    net.buses[1].baseline_load_p_kw = 100;
    net.buses[2].baseline_load_p_kw = 50;
    net.lines = {{10, 20, 0.01, 0.01, 1.0}, {20, 30, 0.01, 0.01, 1.0}};
    return net;
}

}  // namespace

TEST_CASE("smallest valid feeder loads") {
    Network net = parse_network_json(two_bus_json());
    CHECK(net.buses.size() == 2);
    CHECK(net.lines.size() == 1);
    Topology topo = validate_radial(net);
    CHECK(topo.root == net.bus_index(1));
    CHECK(topo.parent[net.bus_index(2)] == net.bus_index(1));
}

TEST_CASE("unknown keys and missing keys are rejected") {
    std::string good = two_bus_json();
    std::string with_extra = good;
    auto pos = with_extra.find("\"substation\"");
    with_extra.insert(pos, "\"mystery\": 1, ");
    CHECK_THROWS_AS(parse_network_json(with_extra), ParseError);

    std::string missing = good;
    auto p2 = missing.find("\"v_base_kv\": 4.16,");
    missing.erase(p2, std::string("\"v_base_kv\": 4.16,").size());
    CHECK_THROWS_AS(parse_network_json(missing), ParseError);
}

TEST_CASE("nonpositive s_base is a unit error") {
    std::string bad = two_bus_json();
    auto pos = bad.find("\"s_base_kva\": 5000");
    bad.replace(pos, std::string("\"s_base_kva\": 5000").size(), "\"s_base_kva\": 0");
    CHECK_THROWS_AS(parse_network_json(bad), UnitError);
}

TEST_CASE("duplicated line forming a cycle is a topology error") {
    std::string bad = two_bus_json();
    auto pos = bad.find("{\"from\": 1");
    bad.insert(pos, R"({"from": 1, "to": 2, "r_pu": 0.01, "x_pu": 0.02, "flow_limit_pu": 2.0}, )");
    CHECK_THROWS_AS(parse_network_json(bad), TopologyError);
}

TEST_CASE("three-bus chain parents") {
    Topology topo = validate_radial(chain3());
    Network net = chain3();
    CHECK(topo.parent[net.bus_index(30)] == net.bus_index(20));
    CHECK(topo.parent[net.bus_index(20)] == net.bus_index(10));
    CHECK(topo.depth_order.size() == 3);
    CHECK(topo.depth_order[0] == topo.root);
}

TEST_CASE("star of four buses around the substation") {
    Network net;
    net.substation = 0;
    net.buses = {{0}, {1}, {2}, {3}};
    net.lines = {{0, 1, 0.01, 0.0, 1.0}, {0, 2, 0.01, 0.0, 1.0}, {0, 3, 0.01, 0.0, 1.0}};
    Topology topo = validate_radial(net);
    for (int id : {1, 2, 3}) CHECK(topo.parent[net.bus_index(id)] == topo.root);
}

TEST_CASE("disconnection is reported") {
    Network net = chain3();
    net.lines[1] = {10, 20, 0.01, 0.01, 1.0};  // duplicate edge, bus 30 unreachable
    CHECK_THROWS_AS(validate_radial(net), TopologyError);
}

TEST_CASE("per-unit round trip is exact to 1e-12 relative") {
    Network net = chain3();
    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> dist(0.1, 9000.0);
    for (int i = 0; i < 200; ++i) {
        double kw = dist(rng);
        double back = net.pu_to_kw(net.kw_to_pu(kw));
        CHECK(std::abs(back - kw) <= 1e-12 * kw);
    }
}

TEST_CASE("attach_ders overrides, identity and errors") {
    Network net = chain3();
    SUBCASE("empty spec list leaves the network unchanged") {
        Network out = attach_ders(net, {});
        CHECK(out.total_dg_nameplate_kw() == 0.0);
        CHECK(out.buses.size() == net.buses.size());
    }
    SUBCASE("override places DG and is idempotent") {
        std::vector<DerSpec> specs{{20, 80.0, 0.0, -1.0, 0.021, -1.0}};
        Network out = attach_ders(net, specs);
        CHECK(out.bus_by_id(20).has_dg);
        CHECK(out.bus_by_id(20).dg_p_max_kw == 80.0);
        CHECK(out.bus_by_id(20).dg_cost_per_kwh == doctest::Approx(0.021));
        Network again = attach_ders(out, specs);
        CHECK(again.bus_by_id(20).dg_p_max_kw == 80.0);
        CHECK(again.total_dg_nameplate_kw() == out.total_dg_nameplate_kw());
    }
    SUBCASE("negative capacity is rejected") {
        CHECK_THROWS_AS(attach_ders(net, {{20, -5.0, 0.0, -1, -1, -1}}), ParseError);
    }
    SUBCASE("unknown bus is rejected") {
        CHECK_THROWS_AS(attach_ders(net, {{99, 5.0, 0.0, -1, -1, -1}}), TopologyError);
    }
}
