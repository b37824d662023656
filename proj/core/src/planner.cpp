#include "flexplan/planner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iostream>
#include <limits>
#include <set>

#include "flexplan/csv.hpp"

namespace flexplan {

RcsaMode rcsa_from_name(const std::string& name) {
    if (name == "eol") return RcsaMode::Eol;
    if (name == "yearly") return RcsaMode::Yearly;
    if (name == "monthly") return RcsaMode::Monthly;
    throw std::runtime_error("unknown rcsa mode: " + name + " (expected eol|yearly|monthly)");
}

const char* rcsa_name(RcsaMode mode) {
    switch (mode) {
        case RcsaMode::Eol: return "eol";
        case RcsaMode::Yearly: return "yearly";
        case RcsaMode::Monthly: return "monthly";
    }
    throw std::logic_error("unknown rcsa mode");
}

// --- plan state -----------------------------------------------------------

std::pair<std::vector<ChannelConfig>, std::vector<std::int64_t>> PlanState::spectrum_of(
    const std::string& link_id) const {
    std::vector<std::pair<ChannelConfig, std::int64_t>> entries;
    for (const auto& lp : lightpaths) {
        if (!lp.active) continue;
        if (std::find(lp.link_ids.begin(), lp.link_ids.end(), link_id) == lp.link_ids.end())
            continue;
        entries.emplace_back(lp.config, lp.id);
    }
    std::sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) {
        return a.first.center_frequency_hz < b.first.center_frequency_hz;
    });
    std::pair<std::vector<ChannelConfig>, std::vector<std::int64_t>> out;
    for (auto& [config, id] : entries) {
        out.first.push_back(config);
        out.second.push_back(id);
    }
    return out;
}

double PlanState::provisioned_gbps(int demand_id) const {
    double total = 0.0;
    for (const auto& lp : lightpaths)
        if (lp.active && lp.demand_id == demand_id) total += lp.config.data_rate_gbps;
    return total;
}

int PlanState::active_count() const {
    int n = 0;
    for (const auto& lp : lightpaths)
        if (lp.active) ++n;
    return n;
}

void PlanState::audit() const {
    // every active lightpath holds exactly its slot range on every link
    for (const auto& lp : lightpaths) {
        for (const auto& link_id : lp.link_ids) {
            const FlexGrid& grid = grids.at(link_id);
            auto range = grid.range_of(lp.id);
            if (lp.active) {
                if (!range || range->start != lp.slots.start || range->count != lp.slots.count)
                    throw std::logic_error("audit: lightpath " + std::to_string(lp.id) +
                                           " slot range mismatch on link " + link_id);
                for (int s = lp.slots.start; s < lp.slots.end(); ++s)
                    if (grid.owner(s) != lp.id)
                        throw std::logic_error("audit: slot owner mismatch on link " + link_id);
                double lo = kGridAnchorHz + lp.slots.start * kSlotWidthHz;
                double hi = kGridAnchorHz + lp.slots.end() * kSlotWidthHz;
                if (lp.config.lower_edge_hz() < lo - 1e-3 || lp.config.upper_edge_hz() > hi + 1e-3)
                    throw std::logic_error("audit: channel band outside its slots on link " + link_id);
            } else if (range) {
                throw std::logic_error("audit: removed lightpath " + std::to_string(lp.id) +
                                       " still occupies slots on link " + link_id);
            }
        }
    }
    // every occupied slot belongs to a consistent active lightpath
    for (const auto& [link_id, grid] : grids) {
        for (int s = 0; s < grid.n_slots(); ++s) {
            std::int64_t owner = grid.owner(s);
            if (owner < 0) continue;
            auto it = std::find_if(lightpaths.begin(), lightpaths.end(),
                                   [&](const Lightpath& lp) { return lp.id == owner; });
            if (it == lightpaths.end() || !it->active)
                throw std::logic_error("audit: slot owned by unknown or removed lightpath on " +
                                       link_id);
            if (s < it->slots.start || s >= it->slots.end())
                throw std::logic_error("audit: slot outside owner range on " + link_id);
            if (std::find(it->link_ids.begin(), it->link_ids.end(), link_id) == it->link_ids.end())
                throw std::logic_error("audit: lightpath does not traverse link " + link_id);
        }
    }
}

// --- routing ---------------------------------------------------------------

namespace {

using Adjacency = std::vector<std::vector<std::tuple<int, double, int>>>;

std::pair<int, int> edge_key(int a, int b) { return a < b ? std::make_pair(a, b) : std::make_pair(b, a); }

// Dijkstra returning the lexicographically smallest node sequence among the
// shortest paths, honoring banned nodes and (undirected) banned edges.
std::optional<RoutedPath> shortest_path(const Adjacency& adj, int src, int dst,
                                        const std::vector<bool>& banned_node,
                                        const std::set<std::pair<int, int>>& banned_edge) {
    std::size_t n = adj.size();
    std::vector<double> dist(n, std::numeric_limits<double>::infinity());
    std::vector<std::vector<int>> path(n);
    std::vector<bool> visited(n, false);
    if (banned_node[static_cast<std::size_t>(src)]) return std::nullopt;
    dist[static_cast<std::size_t>(src)] = 0.0;
    path[static_cast<std::size_t>(src)] = {src};

    for (std::size_t round = 0; round < n; ++round) {
        int u = -1;
        for (std::size_t v = 0; v < n; ++v) {
            if (visited[v] || path[v].empty()) continue;
            if (u < 0 || dist[v] < dist[static_cast<std::size_t>(u)] ||
                (dist[v] == dist[static_cast<std::size_t>(u)] && path[v] < path[static_cast<std::size_t>(u)]))
                u = static_cast<int>(v);
        }
        if (u < 0) break;
        visited[static_cast<std::size_t>(u)] = true;
        if (u == dst) break;
        for (auto [v, w, li] : adj[static_cast<std::size_t>(u)]) {
            (void)li;
            if (visited[static_cast<std::size_t>(v)] || banned_node[static_cast<std::size_t>(v)])
                continue;
            if (banned_edge.count(edge_key(u, v))) continue;
            double alt = dist[static_cast<std::size_t>(u)] + w;
            std::vector<int> cand = path[static_cast<std::size_t>(u)];
            cand.push_back(v);
            if (alt < dist[static_cast<std::size_t>(v)] ||
                (alt == dist[static_cast<std::size_t>(v)] && cand < path[static_cast<std::size_t>(v)])) {
                dist[static_cast<std::size_t>(v)] = alt;
                path[static_cast<std::size_t>(v)] = std::move(cand);
            }
        }
    }
    if (path[static_cast<std::size_t>(dst)].empty()) return std::nullopt;
    return RoutedPath{path[static_cast<std::size_t>(dst)], dist[static_cast<std::size_t>(dst)]};
}

double path_length(const Adjacency& adj, const std::vector<int>& nodes) {
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
        double w = -1.0;
        for (auto [v, len, li] : adj[static_cast<std::size_t>(nodes[i])]) {
            (void)li;
            if (v == nodes[i + 1]) {
                w = len;
                break;
            }
        }
        if (w < 0.0) throw std::logic_error("path_length: edge missing");
        total += w;
    }
    return total;
}

}  // namespace

std::vector<RoutedPath> k_shortest_paths(const Topology& topology, int src, int dst, int k) {
    if (src == dst) throw std::invalid_argument("k_shortest_paths: src equals dst");
    Adjacency adj = topology.adjacency();
    std::vector<bool> no_nodes(topology.nodes.size(), false);
    std::set<std::pair<int, int>> no_edges;

    std::vector<RoutedPath> found;
    auto first = shortest_path(adj, src, dst, no_nodes, no_edges);
    if (!first) return found;
    found.push_back(std::move(*first));

    std::vector<RoutedPath> candidates;
    while (static_cast<int>(found.size()) < k) {
        const std::vector<int>& prev = found.back().nodes;
        for (std::size_t i = 0; i + 1 < prev.size(); ++i) {
            int spur = prev[i];
            std::vector<int> root(prev.begin(), prev.begin() + static_cast<std::ptrdiff_t>(i) + 1);

            std::set<std::pair<int, int>> banned_edges;
            for (const auto& p : found) {
                if (p.nodes.size() > i + 1 &&
                    std::equal(root.begin(), root.end(), p.nodes.begin()))
                    banned_edges.insert(edge_key(p.nodes[i], p.nodes[i + 1]));
            }
            std::vector<bool> banned_nodes(topology.nodes.size(), false);
            for (std::size_t j = 0; j < i; ++j) banned_nodes[static_cast<std::size_t>(root[j])] = true;

            auto spur_path = shortest_path(adj, spur, dst, banned_nodes, banned_edges);
            if (!spur_path) continue;

            std::vector<int> total_nodes(root.begin(), root.end() - 1);
            total_nodes.insert(total_nodes.end(), spur_path->nodes.begin(), spur_path->nodes.end());
            RoutedPath cand{std::move(total_nodes), 0.0};
            cand.length_km = path_length(adj, cand.nodes);

            auto same = [&](const RoutedPath& p) { return p.nodes == cand.nodes; };
            if (std::any_of(found.begin(), found.end(), same) ||
                std::any_of(candidates.begin(), candidates.end(), same))
                continue;
            candidates.push_back(std::move(cand));
        }
        if (candidates.empty()) break;
        auto best = std::min_element(candidates.begin(), candidates.end(),
                                     [](const RoutedPath& a, const RoutedPath& b) {
                                         if (a.length_km != b.length_km) return a.length_km < b.length_km;
                                         return a.nodes < b.nodes;
                                     });
        found.push_back(*best);
        candidates.erase(best);
    }
    return found;
}

std::vector<int> order_demands(const std::vector<Demand>& demands, const Topology& topology,
                               const std::vector<double>& rates, std::vector<int>* unroutable) {
    if (rates.size() != demands.size())
        throw std::invalid_argument("order_demands: rates size mismatch");
    Adjacency adj = topology.adjacency();
    std::vector<bool> no_nodes(topology.nodes.size(), false);
    std::set<std::pair<int, int>> no_edges;

    struct Key {
        double sp_length;
        double rate;
        int id;
    };
    std::vector<Key> keys;
    for (std::size_t i = 0; i < demands.size(); ++i) {
        int s = topology.node_index(demands[i].src);
        int t = topology.node_index(demands[i].dst);
        auto sp = shortest_path(adj, s, t, no_nodes, no_edges);
        if (!sp) {
            if (unroutable) unroutable->push_back(demands[i].id);
            continue;
        }
        keys.push_back(Key{sp->length_km, rates[i], demands[i].id});
    }
    std::sort(keys.begin(), keys.end(), [](const Key& a, const Key& b) {
        if (a.sp_length != b.sp_length) return a.sp_length > b.sp_length;
        if (a.rate != b.rate) return a.rate > b.rate;
        return a.id < b.id;
    });
    std::vector<int> order;
    order.reserve(keys.size());
    for (const auto& k : keys) order.push_back(k.id);
    return order;
}

// --- configuration selection ------------------------------------------------

namespace {

std::vector<std::string> path_link_ids(const RoutedPath& path, const Topology& topology) {
    std::vector<std::string> ids;
    for (std::size_t i = 0; i + 1 < path.nodes.size(); ++i) {
        TopologyLink probe;
        probe.a = topology.nodes[static_cast<std::size_t>(path.nodes[i])];
        probe.b = topology.nodes[static_cast<std::size_t>(path.nodes[i + 1])];
        ids.push_back(probe.id());
    }
    return ids;
}

double combine_path_snr_db(const std::vector<double>& link_snrs_db) {
    double inv = 0.0;
    for (double snr : link_snrs_db) inv += 1.0 / db_to_lin(snr);
    return lin_to_db(1.0 / inv);
}

// Worst-case SNR of one candidate configuration on one link: the candidate
// sits mid-band inside a fully loaded comb of PSD-equalized QPSK carriers.
double eol_link_snr_db(PlanState& state, PathComputationElement& pce, const std::string& link_id,
                       const TransceiverMode& entry, const PlannerOptions& options) {
    const FiberLink& link = state.links.at(link_id);
    int spacing_slots =
        std::max(1, static_cast<int>(std::lround(options.eol_comb_spacing_ghz / 12.5)));
    double comb_b = options.eol_comb_symbol_rate_gbd;
    int n_slots = options.n_slots;
    int cand_start = (n_slots - entry.slots) / 2;
    int cand_end = cand_start + entry.slots;

    std::vector<ChannelConfig> spectrum;
    for (int s = 0; s + spacing_slots <= n_slots; s += spacing_slots) {
        if (s < cand_end && s + spacing_slots > cand_start) continue;  // overlaps candidate
        SlotRange block{s, spacing_slots};
        spectrum.push_back(ChannelConfig{slot_range_center_hz(block), comb_b, Modulation::QPSK, 100,
                                         launch_power_for_dbm(comb_b)});
    }
    SlotRange cand_range{cand_start, entry.slots};
    ChannelConfig cand{slot_range_center_hz(cand_range), entry.symbol_rate_gbd, entry.modulation,
                       entry.data_rate_gbps, launch_power_for_dbm(entry.symbol_rate_gbd)};
    spectrum.push_back(cand);
    std::sort(spectrum.begin(), spectrum.end(), [](const ChannelConfig& a, const ChannelConfig& b) {
        return a.center_frequency_hz < b.center_frequency_hz;
    });
    int cand_index = -1;
    for (int i = 0; i < static_cast<int>(spectrum.size()); ++i)
        if (spectrum[static_cast<std::size_t>(i)].center_frequency_hz == cand.center_frequency_hz)
            cand_index = i;

    std::vector<double> snrs = pce.evaluate(link_id, link, spectrum);
    return snrs[static_cast<std::size_t>(cand_index)];
}

double eol_path_snr_db(PlanState& state, PathComputationElement& pce,
                       const std::vector<std::string>& link_ids, const TransceiverMode& entry,
                       int entry_index, const PlannerOptions& options) {
    std::vector<double> per_link;
    for (const auto& link_id : link_ids) {
        auto key = std::make_pair(link_id, entry_index);
        auto it = state.eol_snr_cache.find(key);
        if (it == state.eol_snr_cache.end()) {
            double snr = eol_link_snr_db(state, pce, link_id, entry, options);
            it = state.eol_snr_cache.emplace(key, snr).first;
        }
        per_link.push_back(it->second);
    }
    return combine_path_snr_db(per_link);
}

// ASE-only SNR; PSD equalization makes it independent of the symbol rate.
double linear_path_snr_db(const PlanState& state, const std::vector<std::string>& link_ids,
                          const TransceiverMode& entry, const PlannerOptions& options) {
    double p_tx = dbm_to_w(launch_power_for_dbm(entry.symbol_rate_gbd));
    double noise = 0.0;
    for (const auto& link_id : link_ids)
        noise += ase_variance_w(state.links.at(link_id), entry.symbol_rate_gbd * 1e9,
                                options.phys.ref_frequency_hz);
    if (noise <= 0.0) return 1e9;
    return lin_to_db(p_tx / noise);
}

double ceil_to_50(double gbps) { return std::ceil(gbps / 50.0 - 1e-9) * 50.0; }

const TransceiverMode& best_entry_for_rate(const std::vector<TransceiverMode>& feasible, int rate) {
    const TransceiverMode* best = nullptr;
    for (const auto& entry : feasible) {
        if (entry.data_rate_gbps != rate) continue;
        if (!best || entry.slots < best->slots ||
            (entry.slots == best->slots &&
             bits_per_symbol(entry.modulation) > bits_per_symbol(best->modulation)))
            best = &entry;
    }
    if (!best) throw std::logic_error("best_entry_for_rate: rate not in feasible set");
    return *best;
}

}  // namespace

std::vector<TransceiverMode> select_candidates(double gap_gbps, const RoutedPath& path,
                                               const Topology& topology, RcsaMode mode,
                                               PathComputationElement& pce, PlanState& state,
                                               const PlannerOptions& options) {
    if (gap_gbps <= 0.0) throw std::invalid_argument("select_candidates: gap must be positive");
    std::vector<std::string> link_ids = path_link_ids(path, topology);
    std::vector<TransceiverMode> menu =
        transceiver_menu(options.phys.guard_band_ghz, options.phys.menu_round_down);

    std::vector<TransceiverMode> feasible;
    for (int idx = 0; idx < static_cast<int>(menu.size()); ++idx) {
        const TransceiverMode& entry = menu[static_cast<std::size_t>(idx)];
        double required = options.thresholds.required_db(entry.modulation) + options.planning_margin_db;
        double snr = mode == RcsaMode::Eol
                         ? eol_path_snr_db(state, pce, link_ids, entry, idx, options)
                         : linear_path_snr_db(state, link_ids, entry, options);
        if (snr >= required - 1e-9) feasible.push_back(entry);
    }
    if (feasible.empty()) return {};

    int max_rate = 0;
    int min_rate = 1 << 30;
    std::set<int> rates;
    for (const auto& entry : feasible) {
        max_rate = std::max(max_rate, entry.data_rate_gbps);
        min_rate = std::min(min_rate, entry.data_rate_gbps);
        rates.insert(entry.data_rate_gbps);
    }

    int n = static_cast<int>(std::ceil(gap_gbps / max_rate - 1e-9));
    double total = std::max(static_cast<double>(n) * min_rate, ceil_to_50(gap_gbps));

    std::vector<TransceiverMode> picks;
    double remaining = total;
    for (int i = 0; i < n; ++i) {
        double reserve = static_cast<double>(n - 1 - i) * min_rate;
        int want = static_cast<int>(std::min<double>(max_rate, remaining - reserve));
        // largest feasible rate not exceeding `want`
        int rate = min_rate;
        for (int r : rates)
            if (r <= want) rate = std::max(rate, r);
        picks.push_back(best_entry_for_rate(feasible, rate));
        remaining -= rate;
    }
    return picks;
}

// --- placement ---------------------------------------------------------------

std::optional<std::int64_t> place_lightpath(PlanState& state, int demand_id, const RoutedPath& path,
                                            const Topology& topology, const TransceiverMode& mode,
                                            const PlannerOptions& options) {
    std::vector<std::string> link_ids = path_link_ids(path, topology);
    std::vector<bool> mask(static_cast<std::size_t>(options.n_slots), true);
    for (const auto& link_id : link_ids) {
        const FlexGrid& grid = state.grids.at(link_id);
        auto link_free = grid.free_mask();
        for (std::size_t s = 0; s < mask.size(); ++s)
            mask[s] = mask[s] && link_free[s];
    }
    auto range = first_fit_in_mask(mask, mode.slots);
    if (!range) return std::nullopt;

    Lightpath lp;
    lp.id = state.next_lightpath_id++;
    lp.demand_id = demand_id;
    lp.path_nodes = path.nodes;
    lp.link_ids = link_ids;
    lp.slots = *range;
    lp.config = ChannelConfig{slot_range_center_hz(*range), mode.symbol_rate_gbd, mode.modulation,
                              mode.data_rate_gbps, launch_power_for_dbm(mode.symbol_rate_gbd)};
    for (const auto& link_id : link_ids) state.grids.at(link_id).place(lp.id, lp.slots);
    state.lightpaths.push_back(std::move(lp));
    return state.lightpaths.back().id;
}

// --- downgrade pass ------------------------------------------------------------

namespace {

// End-to-end SNR of one lightpath under the current plan state, optionally
// with its configuration replaced (same slot footprint).
double lightpath_snr_db(PlanState& state, PathComputationElement& pce, const Lightpath& lp,
                        const ChannelConfig* replacement) {
    std::vector<double> per_link;
    for (const auto& link_id : lp.link_ids) {
        auto [spectrum, ids] = state.spectrum_of(link_id);
        int index = -1;
        for (int i = 0; i < static_cast<int>(ids.size()); ++i)
            if (ids[static_cast<std::size_t>(i)] == lp.id) index = i;
        if (index < 0) throw std::logic_error("lightpath_snr: lightpath missing from its link");
        if (replacement) spectrum[static_cast<std::size_t>(index)] = *replacement;
        std::vector<double> snrs = pce.evaluate(link_id, state.links.at(link_id), spectrum);
        per_link.push_back(snrs[static_cast<std::size_t>(index)]);
    }
    return combine_path_snr_db(per_link);
}

}  // namespace

DowngradeStats downgrade_pass(PlanState& state, PathComputationElement& pce,
                              const PlannerOptions& options) {
    DowngradeStats stats;
    std::vector<TransceiverMode> menu =
        transceiver_menu(options.phys.guard_band_ghz, options.phys.menu_round_down);

    for (;;) {
        ++stats.iterations;
        // one evaluation of every loaded link
        std::map<std::string, std::pair<std::vector<double>, std::vector<std::int64_t>>> link_eval;
        for (const auto& [link_id, grid] : state.grids) {
            auto [spectrum, ids] = state.spectrum_of(link_id);
            if (spectrum.empty()) continue;
            link_eval[link_id] = {pce.evaluate(link_id, state.links.at(link_id), spectrum), ids};
        }
        for (auto& lp : state.lightpaths) {
            if (!lp.active) continue;
            std::vector<double> per_link;
            for (const auto& link_id : lp.link_ids) {
                const auto& [snrs, ids] = link_eval.at(link_id);
                for (std::size_t i = 0; i < ids.size(); ++i)
                    if (ids[i] == lp.id) per_link.push_back(snrs[i]);
            }
            lp.last_snr_db = combine_path_snr_db(per_link);
        }

        bool changed = false;
        for (auto& lp : state.lightpaths) {
            if (!lp.active) continue;
            double required =
                options.thresholds.required_db(lp.config.modulation) + options.planning_margin_db;
            double snr = lp.last_snr_db;
            // earlier changes in this sweep may have lifted this lightpath
            // back above threshold; recheck before acting
            if (changed && snr < required - 1e-9) {
                snr = lightpath_snr_db(state, pce, lp, nullptr);
                lp.last_snr_db = snr;
            }
            if (snr >= required - 1e-9) continue;

            // same-footprint-or-smaller candidates, stepped down by rate
            std::vector<TransceiverMode> candidates;
            for (const auto& entry : menu)
                if (entry.slots <= lp.slots.count && entry.data_rate_gbps < lp.config.data_rate_gbps)
                    candidates.push_back(entry);
            std::sort(candidates.begin(), candidates.end(),
                      [](const TransceiverMode& a, const TransceiverMode& b) {
                          if (a.data_rate_gbps != b.data_rate_gbps)
                              return a.data_rate_gbps > b.data_rate_gbps;
                          if (a.slots != b.slots) return a.slots < b.slots;
                          return bits_per_symbol(a.modulation) > bits_per_symbol(b.modulation);
                      });

            bool applied = false;
            for (const auto& cand : candidates) {
                ChannelConfig config{lp.config.center_frequency_hz, cand.symbol_rate_gbd,
                                     cand.modulation, cand.data_rate_gbps,
                                     launch_power_for_dbm(cand.symbol_rate_gbd)};
                double cand_required =
                    options.thresholds.required_db(cand.modulation) + options.planning_margin_db;
                double cand_snr = lightpath_snr_db(state, pce, lp, &config);
                if (cand_snr >= cand_required - 1e-9) {
                    lp.config = config;
                    lp.downgraded = true;
                    lp.last_snr_db = cand_snr;
                    ++stats.downgraded;
                    changed = true;
                    applied = true;
                    break;
                }
            }
            if (!applied) {
                for (const auto& link_id : lp.link_ids) state.grids.at(link_id).remove(lp.id);
                lp.active = false;
                ++stats.removed;
                changed = true;
            }
        }
        if (!changed) break;
    }
    return stats;
}

double up_ratio(const std::vector<double>& requested_gbps,
                const std::vector<double>& provisioned_gbps) {
    if (requested_gbps.size() != provisioned_gbps.size())
        throw std::invalid_argument("up_ratio: size mismatch");
    double shortfall = 0.0;
    double art = 0.0;
    for (std::size_t i = 0; i < requested_gbps.size(); ++i) {
        art += requested_gbps[i];
        double gap = requested_gbps[i] - provisioned_gbps[i];
        if (gap > 0.0) shortfall += gap;  // overprovisioned demands contribute nothing
    }
    return art <= 0.0 ? 0.0 : shortfall / art;
}

// --- study driver -----------------------------------------------------------

StudyResult run_study(const Topology& topology, const std::vector<Demand>& demands,
                      PathComputationElement& pce, const PlannerOptions& options,
                      PlanState* final_state) {
    StudyResult result;
    if (options.periods <= 0) return result;

    Granularity granularity =
        options.rcsa == RcsaMode::Monthly ? Granularity::Monthly : Granularity::Yearly;
    auto rates = grow_demands(demands, options.annual_growth, options.periods, granularity);

    PlanState state;
    for (const auto& link : topology.links) {
        state.grids.emplace(link.id(), FlexGrid(options.n_slots));
        state.links.emplace(link.id(),
                            expand_spans(link.length_km, options.target_span_km, options.phys));
    }

    // routes are static; compute once
    std::map<int, std::vector<RoutedPath>> routes;
    for (const auto& demand : demands) {
        int s = topology.node_index(demand.src);
        int t = topology.node_index(demand.dst);
        routes[demand.id] = k_shortest_paths(topology, s, t, options.k_paths);
    }

    std::map<int, int> demand_pos;
    for (std::size_t i = 0; i < demands.size(); ++i) demand_pos[demands[i].id] = static_cast<int>(i);

    for (int period = 0; period < options.periods; ++period) {
        auto t0 = std::chrono::steady_clock::now();
        std::uint64_t calls0 = pce.call_count();
        state.period = period;

        std::vector<int> unroutable;
        std::vector<int> order = order_demands(demands, topology, rates[static_cast<std::size_t>(period)],
                                               &unroutable);
        if (period == 0) result.unroutable_demands = unroutable;

        for (int demand_id : order) {
            int di = demand_pos.at(demand_id);
            double requested = rates[static_cast<std::size_t>(period)][static_cast<std::size_t>(di)];
            double gap = requested - state.provisioned_gbps(demand_id);
            if (gap <= 1e-9) continue;
            for (const auto& path : routes.at(demand_id)) {
                auto picks = select_candidates(gap, path, topology, options.rcsa, pce, state, options);
                if (picks.empty()) continue;
                for (const auto& pick : picks) {
                    auto placed = place_lightpath(state, demand_id, path, topology, pick, options);
                    if (!placed) break;  // spectrum blocked here, try the next path
                }
                gap = requested - state.provisioned_gbps(demand_id);
                if (gap <= 1e-9) break;
            }
        }

        if (options.rcsa != RcsaMode::Eol) {
            DowngradeStats stats = downgrade_pass(state, pce, options);
            result.n_downgraded += stats.downgraded;
            result.n_removed += stats.removed;
        } else {
            // evaluation pass for reporting only; placements are final
            for (auto& lp : state.lightpaths)
                if (lp.active) lp.last_snr_db = 0.0;
            std::map<std::string, std::pair<std::vector<double>, std::vector<std::int64_t>>> link_eval;
            for (const auto& [link_id, grid] : state.grids) {
                auto [spectrum, ids] = state.spectrum_of(link_id);
                if (spectrum.empty()) continue;
                link_eval[link_id] = {pce.evaluate(link_id, state.links.at(link_id), spectrum), ids};
            }
            for (auto& lp : state.lightpaths) {
                if (!lp.active) continue;
                std::vector<double> per_link;
                for (const auto& link_id : lp.link_ids) {
                    const auto& [snrs, ids] = link_eval.at(link_id);
                    for (std::size_t i = 0; i < ids.size(); ++i)
                        if (ids[i] == lp.id) per_link.push_back(snrs[i]);
                }
                lp.last_snr_db = combine_path_snr_db(per_link);
            }
        }

        state.audit();

        PeriodReport report;
        report.period = period;
        const auto& req = rates[static_cast<std::size_t>(period)];
        report.art_gbps = 0.0;
        for (double r : req) report.art_gbps += r;
        std::vector<double> provisioned;
        provisioned.reserve(demands.size());
        for (const auto& demand : demands) provisioned.push_back(state.provisioned_gbps(demand.id));
        report.up = up_ratio(req, provisioned);
        report.n_lightpaths = state.active_count();
        double sum_rate = 0.0, sum_snr = 0.0;
        for (const auto& lp : state.lightpaths) {
            if (!lp.active) continue;
            sum_rate += lp.config.data_rate_gbps;
            sum_snr += lp.last_snr_db;
        }
        report.throughput_gbps = sum_rate;
        report.mean_snr_db = report.n_lightpaths > 0 ? sum_snr / report.n_lightpaths : 0.0;
        report.pce_calls = pce.call_count() - calls0;
        report.wall_time_s =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        result.reports.push_back(report);

        if (options.verbose)
            std::cerr << "period " << period << ": lightpaths " << report.n_lightpaths << ", UP "
                      << report.up << ", pce calls " << report.pce_calls << "\n";
    }

    if (final_state) *final_state = std::move(state);
    return result;
}

void write_study_report(const std::string& path, const StudyResult& result,
                        const std::vector<std::string>& comments) {
    CsvTable table;
    table.comments = comments;
    table.header = {"period", "art_gbps", "throughput_gbps", "n_lightpaths", "up",
                    "mean_snr_db", "pce_calls"};
    for (const auto& report : result.reports)
        table.rows.push_back({std::to_string(report.period), format_double(report.art_gbps),
                              format_double(report.throughput_gbps),
                              std::to_string(report.n_lightpaths), format_double(report.up),
                              format_double(report.mean_snr_db), std::to_string(report.pce_calls)});
    write_csv(path, table);

    std::string timing_path = path;
    if (timing_path.size() > 4 && timing_path.substr(timing_path.size() - 4) == ".csv")
        timing_path = timing_path.substr(0, timing_path.size() - 4);
    timing_path += ".times.csv";
    CsvTable times;
    times.comments = {"wall-clock timings; kept out of the main report for reproducibility"};
    times.header = {"period", "wall_time_s"};
    for (const auto& report : result.reports)
        times.rows.push_back({std::to_string(report.period), format_double(report.wall_time_s)});
    write_csv(timing_path, times);
}

}  // namespace flexplan
