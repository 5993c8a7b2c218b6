#include "dlmpsim/grid.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "dlmpsim/errors.hpp"
#include "json.hpp"

namespace dlmpsim {

using nlohmann::json;

int Network::bus_index(int id) const {
    for (size_t i = 0; i < buses.size(); ++i)
        if (buses[i].id == id) return static_cast<int>(i);
    return -1;
}

const Bus& Network::bus_by_id(int id) const {
    int idx = bus_index(id);
    if (idx < 0) throw TopologyError("unknown bus id " + std::to_string(id));
    return buses[idx];
}

double Network::total_baseline_load_kw() const {
    double s = 0.0;
    for (const auto& b : buses) s += b.baseline_load_p_kw;
    return s;
}

double Network::total_dg_nameplate_kw() const {
    double s = 0.0;
    for (const auto& b : buses) s += b.dg_p_max_kw;
    return s;
}

namespace {

void require_keys(const json& obj, const std::set<std::string>& keys, const std::string& where) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        if (!keys.count(it.key()))
            throw ParseError("unknown key '" + it.key() + "' in " + where);
    }
    for (const auto& k : keys) {
        if (!obj.contains(k))
            throw ParseError("missing key '" + k + "' in " + where);
    }
}

double num(const json& obj, const char* key, const std::string& where) {
    const auto& v = obj.at(key);
    if (!v.is_number())
        throw ParseError(std::string("field '") + key + "' in " + where + " must be a number");
    return v.get<double>();
}

Network parse_network(const json& root) {
    if (!root.is_object()) throw ParseError("network file must be a JSON object");
    require_keys(root,
                 {"s_base_kva", "v_base_kv", "v_min_pu", "v_max_pu", "substation", "buses", "lines"},
                 "network");

    Network net;
    net.s_base_kva = num(root, "s_base_kva", "network");
    net.v_base_kv = num(root, "v_base_kv", "network");
    net.v_min_pu = num(root, "v_min_pu", "network");
    net.v_max_pu = num(root, "v_max_pu", "network");
    net.substation = root.at("substation").get<int>();

    if (net.s_base_kva <= 0.0) throw UnitError("s_base_kva must be positive");
    if (net.v_base_kv <= 0.0) throw UnitError("v_base_kv must be positive");
    if (!(net.v_min_pu < 1.0 && 1.0 < net.v_max_pu))
        throw ParseError("squared-voltage bounds must satisfy v_min < 1 < v_max");

    if (!root.at("buses").is_array() || root.at("buses").empty())
        throw ParseError("network needs a non-empty 'buses' array");
    if (!root.at("lines").is_array())
        throw ParseError("network needs a 'lines' array");

    std::set<int> seen_ids;
    for (const auto& jb : root.at("buses")) {
        const std::string where = "bus entry";
        require_keys(jb,
                     {"id", "p_kw", "q_kvar", "dg_p_max_kw", "dg_q_max_kvar", "dr_fraction",
                      "dg_cost_per_kwh", "dr_cost_per_kwh"},
                     where);
        Bus b;
        b.id = jb.at("id").get<int>();
        b.baseline_load_p_kw = num(jb, "p_kw", where);
        b.baseline_load_q_kvar = num(jb, "q_kvar", where);
        b.dg_p_max_kw = num(jb, "dg_p_max_kw", where);
        b.dg_q_max_kvar = num(jb, "dg_q_max_kvar", where);
        b.dr_fraction = num(jb, "dr_fraction", where);
        b.dg_cost_per_kwh = num(jb, "dg_cost_per_kwh", where);
        b.dr_cost_per_kwh = num(jb, "dr_cost_per_kwh", where);
        b.has_dg = b.dg_p_max_kw > 0.0;

        if (!seen_ids.insert(b.id).second)
            throw ParseError("duplicate bus id " + std::to_string(b.id));
        if (b.baseline_load_p_kw < 0.0 || b.baseline_load_q_kvar < 0.0)
            throw ParseError("negative baseline load at bus " + std::to_string(b.id));
        if (b.dg_p_max_kw < 0.0 || b.dg_q_max_kvar < 0.0)
            throw ParseError("negative DG capacity at bus " + std::to_string(b.id));
        if (b.dr_fraction < 0.0 || b.dr_fraction > 1.0)
            throw ParseError("dr_fraction out of [0,1] at bus " + std::to_string(b.id));
        net.buses.push_back(b);
    }

    for (const auto& jl : root.at("lines")) {
        const std::string where = "line entry";
        require_keys(jl, {"from", "to", "r_pu", "x_pu", "flow_limit_pu"}, where);
        Line l;
        l.from_bus = jl.at("from").get<int>();
        l.to_bus = jl.at("to").get<int>();
        l.r_pu = num(jl, "r_pu", where);
        l.x_pu = num(jl, "x_pu", where);
        l.flow_limit_pu = num(jl, "flow_limit_pu", where);
        if (l.r_pu < 0.0)
            throw ParseError("negative line resistance on " + std::to_string(l.from_bus) + "-" +
                             std::to_string(l.to_bus));
        if (l.flow_limit_pu <= 0.0)
            throw ParseError("flow_limit_pu must be positive on " + std::to_string(l.from_bus) +
                             "-" + std::to_string(l.to_bus));
        if (!seen_ids.count(l.from_bus) || !seen_ids.count(l.to_bus))
            throw TopologyError("line references unknown bus " + std::to_string(l.from_bus) + "-" +
                                std::to_string(l.to_bus));
        net.lines.push_back(l);
    }

    if (!seen_ids.count(net.substation))
        throw TopologyError("substation id " + std::to_string(net.substation) + " not in bus list");

    validate_radial(net);
    return net;
}

}  // namespace

Network parse_network_json(const std::string& text) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::exception& e) {
        throw ParseError(std::string("network JSON parse failure: ") + e.what());
    }
    return parse_network(root);
}

Network load_network(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open network file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_network_json(ss.str());
}

Topology validate_radial(const Network& net) {
    const size_t n = net.buses.size();
    if (net.lines.size() != n - 1)
        throw TopologyError("radial network needs |lines| = |buses| - 1, got " +
                            std::to_string(net.lines.size()) + " lines for " + std::to_string(n) +
                            " buses");

    int root = net.bus_index(net.substation);
    if (root < 0) throw TopologyError("substation bus not found");

    // Undirected adjacency; line orientation in the file is not trusted.
    std::vector<std::vector<std::pair<int, int>>> adj(n);  // (neighbour bus index, line index)
    for (size_t li = 0; li < net.lines.size(); ++li) {
        int a = net.bus_index(net.lines[li].from_bus);
        int b = net.bus_index(net.lines[li].to_bus);
        if (a < 0 || b < 0) throw TopologyError("line references unknown bus");
        if (a == b) throw TopologyError("self-loop at bus " + std::to_string(net.lines[li].from_bus));
        adj[a].push_back({b, static_cast<int>(li)});
        adj[b].push_back({a, static_cast<int>(li)});
    }

    Topology topo;
    topo.root = root;
    topo.parent.assign(n, -1);
    topo.parent_line.assign(n, -1);
    topo.children.assign(n, {});
    topo.child_lines.assign(n, {});

    std::vector<bool> visited(n, false);
    std::vector<int> stack{root};
    visited[root] = true;
    while (!stack.empty()) {
        int u = stack.back();
        stack.pop_back();
        topo.depth_order.push_back(u);
        for (auto [v, li] : adj[u]) {
            if (li == topo.parent_line[u]) continue;
            if (visited[v])
                throw TopologyError("cycle detected through bus " + std::to_string(net.buses[v].id));
            visited[v] = true;
            topo.parent[v] = u;
            topo.parent_line[v] = li;
            topo.children[u].push_back(v);
            topo.child_lines[u].push_back(li);
            stack.push_back(v);
        }
    }
    if (topo.depth_order.size() != n) {
        size_t missing = n - topo.depth_order.size();
        throw TopologyError(std::to_string(missing) + " bus(es) unreachable from the substation");
    }
    // DFS pushes children after their parent, so depth_order is already a
    // valid root-first order; keep child lists in line-file order for
    // reproducible iteration.
    return topo;
}

Network attach_ders(const Network& net, const std::vector<DerSpec>& specs) {
    Network out = net;
    for (const auto& s : specs) {
        int idx = out.bus_index(s.bus);
        if (idx < 0) throw TopologyError("DER spec references unknown bus " + std::to_string(s.bus));
        if (s.dg_p_max_kw < 0.0 || s.dg_q_max_kvar < 0.0)
            throw ParseError("negative DG capacity in DER spec for bus " + std::to_string(s.bus));
        Bus& b = out.buses[idx];
        b.dg_p_max_kw = s.dg_p_max_kw;
        b.dg_q_max_kvar = s.dg_q_max_kvar;
        b.has_dg = b.dg_p_max_kw > 0.0;
        if (s.dr_fraction >= 0.0) {
            if (s.dr_fraction > 1.0)
                throw ParseError("dr_fraction out of [0,1] in DER spec for bus " +
                                 std::to_string(s.bus));
            b.dr_fraction = s.dr_fraction;
        }
        if (s.dg_cost_per_kwh >= 0.0) b.dg_cost_per_kwh = s.dg_cost_per_kwh;
        if (s.dr_cost_per_kwh >= 0.0) b.dr_cost_per_kwh = s.dr_cost_per_kwh;
    }
    return out;
}

}  // namespace dlmpsim
