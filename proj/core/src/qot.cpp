#include "flexplan/qot.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>

#include "flexplan/csv.hpp"

namespace flexplan {

std::optional<double> SciCache::get(const SciKey& key) const {
    auto it = entries_.find(key);
    if (it == entries_.end()) {
        ++misses_;
        return std::nullopt;
    }
    ++hits_;
    return it->second;
}

void SciCache::put(const SciKey& key, double sci_dbm) {
    auto [it, inserted] = entries_.emplace(key, sci_dbm);
    if (!inserted && std::abs(it->second - sci_dbm) > 1e-9)
        throw std::logic_error("SciCache: conflicting value for an existing entry");
}

void SciCache::save(const std::string& path) const {
    CsvTable table;
    table.comments.push_back("flexplan SCI cache");
    table.header = {"link_id", "center_frequency_hz", "symbol_rate_gbd", "launch_power_dbm",
                    "sci_dbm"};
    for (const auto& [key, value] : entries_)
        table.rows.push_back({key.link_id, format_double(key.center_frequency_hz),
                              format_double(key.symbol_rate_gbd), format_double(key.launch_power_dbm),
                              format_double(value)});
    write_csv(path, table);
}

SciCache SciCache::load(const std::string& path) {
    CsvTable table = read_csv(path);
    table.require_columns({"link_id", "center_frequency_hz", "symbol_rate_gbd", "launch_power_dbm",
                           "sci_dbm"});
    SciCache cache;
    for (const auto& row : table.rows) {
        SciKey key{row[0], std::stod(row[1]), std::stod(row[2]), std::stod(row[3])};
        cache.entries_[key] = std::stod(row[4]);
    }
    return cache;
}

double sci_dbm_from_eta(double eta_db, double launch_power_dbm) {
    return eta_db + 3.0 * launch_power_dbm - 60.0;
}

namespace {

double cached_sci_dbm(const std::string& link_id, const FiberLink& link,
                      const std::vector<ChannelConfig>& spectrum, int index, SciCache& cache,
                      const SciComputeFn& compute) {
    const ChannelConfig& ch = spectrum[static_cast<std::size_t>(index)];
    SciKey key{link_id, ch.center_frequency_hz, ch.symbol_rate_gbd, ch.launch_power_dbm};
    if (auto hit = cache.get(key)) return *hit;
    if (!compute)
        throw SciCacheMissError("SCI cache miss for channel at " +
                                std::to_string(ch.center_frequency_hz * 1e-12) +
                                " THz on link " + link_id + " with computation disabled");
    double value = compute(link, ch);
    cache.put(key, value);
    return value;
}

}  // namespace

NliFeatureVector features_for(const std::string& link_id, const FiberLink& link,
                              const std::vector<ChannelConfig>& spectrum, int cut_index,
                              SciCache& cache, const SciComputeFn& compute) {
    if (cut_index < 0 || cut_index >= static_cast<int>(spectrum.size()))
        throw std::invalid_argument("features_for: cut index out of range");
    const ChannelConfig& cut = spectrum[static_cast<std::size_t>(cut_index)];

    NliFeatureVector v{};
    v[0] = cached_sci_dbm(link_id, link, spectrum, cut_index, cache, compute);
    std::vector<int> neighbors = neighbors_by_distance(spectrum, cut_index, kNeighborCount);
    for (std::size_t n = 0; n < neighbors.size(); ++n) {
        const ChannelConfig& ch = spectrum[static_cast<std::size_t>(neighbors[n])];
        v[1 + n] = cached_sci_dbm(link_id, link, spectrum, neighbors[n], cache, compute);
        v[11 + n] = std::abs(ch.center_frequency_hz - cut.center_frequency_hz) * 1e-9;
    }
    v[21] = cut.launch_power_dbm;
    v[22] = static_cast<double>(spectrum.size());
    v[23] = link.l_span_km;
    v[24] = static_cast<double>(link.n_span);
    return v;
}

std::vector<double> GnPce::evaluate(const std::string& /*link_id*/, const FiberLink& link,
                                    const std::vector<ChannelConfig>& spectrum) {
    ++calls_;
    std::vector<double> snr;
    snr.reserve(spectrum.size());
    for (int i = 0; i < static_cast<int>(spectrum.size()); ++i) {
        NoiseBreakdown nb = gn_closed_eta(link, spectrum, i);
        nb.sigma2_ase_w = ase_variance_w(link, spectrum[static_cast<std::size_t>(i)].bandwidth_hz(),
                                         params_.ref_frequency_hz);
        snr.push_back(combine_snr_db(spectrum[static_cast<std::size_t>(i)].launch_power_w(), nb));
    }
    return snr;
}

// SCI is invariant under translation of the channel along the grid, so the
// oracle result is memoized per (link, symbol rate, launch power) while the
// spec-visible cache stays keyed by full channel identity.
struct MlPce::OracleSet {
    using LinkKey = std::tuple<double, int, double, double, double>;
    std::map<LinkKey, GnIntegralOracle> oracles;
    std::map<std::tuple<double, int, double, double, double, double, double>, double> sci_memo;

    static LinkKey link_key(const FiberLink& link) {
        return {link.l_span_km, link.n_span, link.alpha_db_per_km, link.beta2_ps2_per_km,
                link.gamma_per_w_km};
    }
};

MlPce::MlPce(const GbtModel& model, SciCache& cache, const PhysParams& params)
    : model_(model), cache_(cache), params_(params), oracles_(std::make_unique<OracleSet>()) {
    if (model.feature_width() != kFeatureWidth)
        throw std::invalid_argument("MlPce: model expects " + std::to_string(model.feature_width()) +
                                    " features, NLI solver provides " + std::to_string(kFeatureWidth));
}

MlPce::~MlPce() = default;

double MlPce::compute_sci_dbm(const FiberLink& link, const ChannelConfig& channel) {
    auto memo_key = std::tuple_cat(OracleSet::link_key(link),
                                   std::make_tuple(channel.symbol_rate_gbd, channel.launch_power_dbm));
    auto memo = oracles_->sci_memo.find(memo_key);
    if (memo != oracles_->sci_memo.end()) return memo->second;

    auto link_key = OracleSet::link_key(link);
    auto it = oracles_->oracles.find(link_key);
    if (it == oracles_->oracles.end()) {
        QuadratureSpec spec{params_.quad_tol_db, params_.quad_resolution};
        it = oracles_->oracles.emplace(link_key, GnIntegralOracle(link, spec)).first;
    }
    double eta = it->second.eta_db({channel}, 0, NliMode::SciOnly);
    double sci = sci_dbm_from_eta(eta, channel.launch_power_dbm);
    oracles_->sci_memo.emplace(memo_key, sci);
    return sci;
}

double MlPce::channel_sci_dbm(const std::string& link_id, const FiberLink& link,
                              const ChannelConfig& channel) {
    std::vector<ChannelConfig> one{channel};
    return cached_sci_dbm(link_id, link, one, 0, cache_,
                          [this](const FiberLink& l, const ChannelConfig& c) {
                              return compute_sci_dbm(l, c);
                          });
}

std::vector<double> MlPce::evaluate(const std::string& link_id, const FiberLink& link,
                                    const std::vector<ChannelConfig>& spectrum) {
    ++calls_;
    SciComputeFn compute = [this](const FiberLink& l, const ChannelConfig& c) {
        return compute_sci_dbm(l, c);
    };
    std::vector<double> snr;
    snr.reserve(spectrum.size());
    for (int i = 0; i < static_cast<int>(spectrum.size()); ++i) {
        const ChannelConfig& cut = spectrum[static_cast<std::size_t>(i)];
        NliFeatureVector features = features_for(link_id, link, spectrum, i, cache_, compute);
        double eta_db = model_.predict(features);
        double p_tx = cut.launch_power_w();
        NoiseBreakdown nb;
        nb.sigma2_ase_w = ase_variance_w(link, cut.bandwidth_hz(), params_.ref_frequency_hz);
        // Predicted NLI covers SCI+XCI jointly; the split is not needed for SNR.
        nb.sigma2_sci_w = db_to_lin(eta_db) * p_tx * p_tx * p_tx;
        snr.push_back(combine_snr_db(p_tx, nb));
    }
    return snr;
}

}  // namespace flexplan
