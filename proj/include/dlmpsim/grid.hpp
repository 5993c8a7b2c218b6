#pragma once

#include <string>
#include <vector>

namespace dlmpsim {

struct Bus {
    int id = -1;
    double baseline_load_p_kw = 0.0;  // forecast upper bound at alpha = 1
    double baseline_load_q_kvar = 0.0;
    bool has_dg = false;
    double dg_p_max_kw = 0.0;
    double dg_q_max_kvar = 0.0;
    double dr_fraction = 0.0;  // curtailable share of real load, in [0,1]
    double dg_cost_per_kwh = 0.0;
    double dr_cost_per_kwh = 0.0;
};

struct Line {
    int from_bus = -1;
    int to_bus = -1;
    double r_pu = 0.0;
    double x_pu = 0.0;
    double flow_limit_pu = 0.0;  // cap on squared current magnitude
};

/// Balanced single-phase equivalent of a radial feeder, per-unit on s_base.
struct Network {
    std::vector<Bus> buses;
    std::vector<Line> lines;
    int substation = -1;  // bus id of the slack bus
    double s_base_kva = 5000.0;
    double v_base_kv = 4.16;
    double v_min_pu = 0.9025;  // squared-voltage bounds
    double v_max_pu = 1.1025;

    int bus_index(int id) const;  // -1 when the id is unknown
    const Bus& bus_by_id(int id) const;

    double kw_to_pu(double kw) const { return kw / s_base_kva; }
    double pu_to_kw(double pu) const { return pu * s_base_kva; }

    double total_baseline_load_kw() const;
    double total_dg_nameplate_kw() const;
};

/// Rooted-tree view of a validated radial network. All entries are bus
/// indices into Network::buses, not bus ids.
struct Topology {
    int root = -1;
    std::vector<int> parent;       // -1 at the root
    std::vector<int> parent_line;  // line index feeding each bus, -1 at root
    std::vector<std::vector<int>> children;
    std::vector<std::vector<int>> child_lines;
    std::vector<int> depth_order;  // root first, every parent before its children
};

/// Per-bus DER capability override applied on top of a loaded network.
/// Negative values keep the bus's existing setting.
struct DerSpec {
    int bus = -1;
    double dg_p_max_kw = 0.0;
    double dg_q_max_kvar = 0.0;
    double dr_fraction = -1.0;
    double dg_cost_per_kwh = -1.0;
    double dr_cost_per_kwh = -1.0;
};

Network load_network(const std::string& path);
Network parse_network_json(const std::string& text);

// Checks the tree property (single root, connected, acyclic) and returns
// the rooted topology with a valid evaluation order.
Topology validate_radial(const Network& net);

Network attach_ders(const Network& net, const std::vector<DerSpec>& specs);

}  // namespace dlmpsim
