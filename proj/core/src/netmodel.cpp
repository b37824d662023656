#include "flexplan/netmodel.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <queue>
#include <set>

#include "flexplan/csv.hpp"
#include "json.hpp"

namespace flexplan {

int Topology::node_index(const std::string& node) const {
    auto it = std::find(nodes.begin(), nodes.end(), node);
    return it == nodes.end() ? -1 : static_cast<int>(it - nodes.begin());
}

std::vector<std::vector<std::tuple<int, double, int>>> Topology::adjacency() const {
    std::vector<std::vector<std::tuple<int, double, int>>> adj(nodes.size());
    for (int li = 0; li < static_cast<int>(links.size()); ++li) {
        const TopologyLink& link = links[static_cast<std::size_t>(li)];
        int ia = node_index(link.a);
        int ib = node_index(link.b);
        adj[static_cast<std::size_t>(ia)].emplace_back(ib, link.length_km, li);
        adj[static_cast<std::size_t>(ib)].emplace_back(ia, link.length_km, li);
    }
    for (auto& list : adj) std::sort(list.begin(), list.end());
    return adj;
}

double Topology::avg_node_degree() const {
    if (nodes.empty()) return 0.0;
    return 2.0 * static_cast<double>(links.size()) / static_cast<double>(nodes.size());
}

namespace {

std::vector<double> dijkstra_lengths(const Topology& topology,
                                     const std::vector<std::vector<std::tuple<int, double, int>>>& adj,
                                     int source) {
    std::vector<double> dist(topology.nodes.size(), std::numeric_limits<double>::infinity());
    dist[static_cast<std::size_t>(source)] = 0.0;
    using Item = std::pair<double, int>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> queue;
    queue.push({0.0, source});
    while (!queue.empty()) {
        auto [d, u] = queue.top();
        queue.pop();
        if (d > dist[static_cast<std::size_t>(u)]) continue;
        for (auto [v, w, li] : adj[static_cast<std::size_t>(u)]) {
            (void)li;
            if (d + w < dist[static_cast<std::size_t>(v)]) {
                dist[static_cast<std::size_t>(v)] = d + w;
                queue.push({d + w, v});
            }
        }
    }
    return dist;
}

}  // namespace

double Topology::avg_shortest_path_km() const {
    auto adj = adjacency();
    double total = 0.0;
    std::size_t pairs = 0;
    for (int s = 0; s < static_cast<int>(nodes.size()); ++s) {
        auto dist = dijkstra_lengths(*this, adj, s);
        for (int t = s + 1; t < static_cast<int>(nodes.size()); ++t) {
            if (std::isfinite(dist[static_cast<std::size_t>(t)])) {
                total += dist[static_cast<std::size_t>(t)];
                ++pairs;
            }
        }
    }
    return pairs == 0 ? 0.0 : total / static_cast<double>(pairs);
}

Topology load_topology(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open topology file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error("topology " + path + ": " + e.what());
    }

    Topology topology;
    try {
        topology.name = j.value("name", std::string("unnamed"));
        for (const auto& node : j.at("nodes")) topology.nodes.push_back(node.get<std::string>());
        for (const auto& link : j.at("links")) {
            TopologyLink tl;
            tl.a = link.at("a").get<std::string>();
            tl.b = link.at("b").get<std::string>();
            tl.length_km = link.at("length_km").get<double>();
            topology.links.push_back(tl);
        }
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error("topology " + path + ": " + e.what());
    }

    std::set<std::string> seen_nodes(topology.nodes.begin(), topology.nodes.end());
    if (seen_nodes.size() != topology.nodes.size())
        throw std::runtime_error("topology " + path + ": duplicate node name");

    std::set<std::string> seen_links;
    for (const auto& link : topology.links) {
        if (topology.node_index(link.a) < 0 || topology.node_index(link.b) < 0)
            throw std::runtime_error("topology " + path + ": link " + link.a + "-" + link.b +
                                     " references an unknown node");
        if (link.a == link.b)
            throw std::runtime_error("topology " + path + ": self-loop at " + link.a);
        if (link.length_km <= 0.0)
            throw std::runtime_error("topology " + path + ": link " + link.id() +
                                     " has non-positive length");
        if (!seen_links.insert(link.id()).second)
            throw std::runtime_error("topology " + path + ": duplicate link " + link.id());
    }

    if (!topology.nodes.empty()) {
        auto adj = topology.adjacency();
        auto dist = dijkstra_lengths(topology, adj, 0);
        for (std::size_t i = 0; i < dist.size(); ++i)
            if (!std::isfinite(dist[i]))
                throw std::runtime_error("topology " + path + ": graph is disconnected (node " +
                                         topology.nodes[i] + " unreachable)");
    }
    return topology;
}

void save_topology(const Topology& topology, const std::string& path) {
    nlohmann::json j;
    j["name"] = topology.name;
    j["nodes"] = topology.nodes;
    nlohmann::json links = nlohmann::json::array();
    for (const auto& link : topology.links)
        links.push_back({{"a", link.a}, {"b", link.b}, {"length_km", link.length_km}});
    j["links"] = std::move(links);
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write topology file: " + path);
    out << j.dump(2) << "\n";
}

std::vector<Demand> load_demands(const std::string& path, const Topology& topology) {
    CsvTable table = read_csv(path);
    table.require_columns({"src", "dst", "rate_gbps_year0"});
    int col_src = table.column("src");
    int col_dst = table.column("dst");
    int col_rate = table.column("rate_gbps_year0");

    std::vector<Demand> demands;
    std::set<std::pair<std::string, std::string>> seen;
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        const auto& row = table.rows[i];
        Demand d;
        d.id = static_cast<int>(i);
        d.src = row[static_cast<std::size_t>(col_src)];
        d.dst = row[static_cast<std::size_t>(col_dst)];
        d.base_rate_gbps = std::stod(row[static_cast<std::size_t>(col_rate)]);
        if (topology.node_index(d.src) < 0 || topology.node_index(d.dst) < 0)
            throw std::runtime_error(path + " row " + std::to_string(i + 1) + ": unknown node");
        if (d.src == d.dst)
            throw std::runtime_error(path + " row " + std::to_string(i + 1) + ": src equals dst");
        if (d.base_rate_gbps <= 0.0)
            throw std::runtime_error(path + " row " + std::to_string(i + 1) +
                                     ": rate must be positive");
        auto key = d.src < d.dst ? std::make_pair(d.src, d.dst) : std::make_pair(d.dst, d.src);
        if (!seen.insert(key).second)
            throw std::runtime_error(path + " row " + std::to_string(i + 1) + ": duplicate demand " +
                                     key.first + "-" + key.second);
        demands.push_back(d);
    }
    return demands;
}

FiberLink expand_spans(double length_km, double target_span_km, const PhysParams& phys) {
    if (length_km <= 0.0) throw std::invalid_argument("expand_spans: length must be positive");
    if (target_span_km <= 0.0) throw std::invalid_argument("expand_spans: target span must be positive");
    // round half up
    int n_span = std::max(1, static_cast<int>(std::floor(length_km / target_span_km + 0.5)));
    return phys.make_link(length_km / n_span, n_span);
}

double growth_factor(double annual_rate, Granularity granularity) {
    if (annual_rate < 0.0) throw std::invalid_argument("growth_factor: annual rate must be >= 0");
    double yearly = 1.0 + annual_rate;
    return granularity == Granularity::Yearly ? yearly : std::pow(yearly, 1.0 / 12.0);
}

std::vector<std::vector<double>> grow_demands(const std::vector<Demand>& demands,
                                              double annual_rate, int periods,
                                              Granularity granularity) {
    double g = growth_factor(annual_rate, granularity);
    std::vector<std::vector<double>> rates;
    rates.reserve(static_cast<std::size_t>(periods));
    for (int t = 0; t < periods; ++t) {
        std::vector<double> row;
        row.reserve(demands.size());
        for (const auto& d : demands) row.push_back(d.base_rate_gbps * std::pow(g, t));
        rates.push_back(std::move(row));
    }
    return rates;
}

}  // namespace flexplan
