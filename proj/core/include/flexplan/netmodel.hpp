#pragma once

#include <string>
#include <vector>

#include "flexplan/phys.hpp"

namespace flexplan {

struct TopologyLink {
    std::string a;
    std::string b;
    double length_km = 0.0;

    // Canonical undirected identifier, "min-max" by node name.
    std::string id() const { return a < b ? a + "-" + b : b + "-" + a; }
};

struct Topology {
    std::string name;
    std::vector<std::string> nodes;
    std::vector<TopologyLink> links;

    int node_index(const std::string& node) const;  // -1 when absent
    // Neighbor lists as (node index, length km, link index), neighbors sorted
    // by node index for deterministic traversal.
    std::vector<std::vector<std::tuple<int, double, int>>> adjacency() const;
    double avg_node_degree() const;
    double avg_shortest_path_km() const;  // over all connected unordered pairs
};

// Parses the documented JSON topology format and validates it: known nodes,
// no duplicate edges, positive lengths, connected graph.
Topology load_topology(const std::string& path);
void save_topology(const Topology& topology, const std::string& path);

struct Demand {
    int id = 0;
    std::string src;
    std::string dst;
    double base_rate_gbps = 0.0;
};

// CSV columns: src, dst, rate_gbps_year0.
std::vector<Demand> load_demands(const std::string& path, const Topology& topology);

// Homogeneous-span expansion of a link: span count = round-half-up of
// length over the target span length, clamped to >= 1.
FiberLink expand_spans(double length_km, double target_span_km, const PhysParams& phys);

enum class Granularity { Yearly, Monthly };

// Per-period demand growth factor; monthly splits the annual rate uniformly.
double growth_factor(double annual_rate, Granularity granularity);

// rates[period][demand]: base rate at period 0, compounded growth afterwards.
std::vector<std::vector<double>> grow_demands(const std::vector<Demand>& demands,
                                              double annual_rate, int periods,
                                              Granularity granularity);

}  // namespace flexplan
