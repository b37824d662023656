#include "flexplan/phys.hpp"

#include <algorithm>
#include <cmath>

namespace flexplan {

namespace {

double q_function(double x) { return 0.5 * std::erfc(x / std::sqrt(2.0)); }

}  // namespace

void check_channels_non_overlapping(const std::vector<ChannelConfig>& spectrum) {
    for (std::size_t i = 0; i < spectrum.size(); ++i) {
        for (std::size_t k = i + 1; k < spectrum.size(); ++k) {
            double df = std::abs(spectrum[i].center_frequency_hz - spectrum[k].center_frequency_hz);
            double min_df = (spectrum[i].bandwidth_hz() + spectrum[k].bandwidth_hz()) / 2.0;
            if (df < min_df - 1e-3)
                throw std::domain_error("overlapping channels at " +
                                        std::to_string(spectrum[i].center_frequency_hz * 1e-12) + " and " +
                                        std::to_string(spectrum[k].center_frequency_hz * 1e-12) + " THz");
        }
    }
}

double ase_variance_w(const FiberLink& link, double b_ref_hz, double ref_frequency_hz) {
    if (b_ref_hz <= 0.0) throw std::invalid_argument("ase_variance: reference bandwidth must be positive");
    if (link.n_span == 0) return 0.0;
    double gain = db_to_lin(link.alpha_db_per_km * link.l_span_km);
    double nf = db_to_lin(link.noise_figure_db);
    return link.n_span * (gain * nf - 1.0) * kPlanckJs * ref_frequency_hz * b_ref_hz;
}

double combine_snr_db(double p_tx_w, const NoiseBreakdown& nb) {
    double total = nb.total_w();
    if (total <= 0.0) throw std::domain_error("combine_snr: total noise variance must be positive");
    return lin_to_db(p_tx_w / total);
}

NoiseBreakdown gn_closed_eta(const FiberLink& link, const std::vector<ChannelConfig>& spectrum,
                             int cut_index) {
    if (spectrum.empty()) throw std::invalid_argument("gn_closed_eta: empty spectrum");
    if (cut_index < 0 || cut_index >= static_cast<int>(spectrum.size()))
        throw std::invalid_argument("gn_closed_eta: cut index out of range");
    check_channels_non_overlapping(spectrum);

    const ChannelConfig& cut = spectrum[static_cast<std::size_t>(cut_index)];
    const double gamma = link.gamma_si();
    const double beta2 = link.beta2_abs_si();
    const double l_eff = link.effective_length_m();
    const double l_eff_a = link.asymptotic_effective_length_m();
    const double b_cut = cut.bandwidth_hz();
    const double p_cut = cut.launch_power_w();

    // Single-channel self interference, asinh form. Self interference
    // accumulates coherently across spans, N^(1+eps); cross terms below stay
    // incoherent.
    double phase_scale = beta2 * l_eff_a * b_cut * b_cut;
    double asinh_term = std::asinh(0.5 * M_PI * M_PI * phase_scale);
    double sci = (8.0 / 27.0) * gamma * gamma * p_cut * p_cut * p_cut * l_eff * l_eff *
                 asinh_term / (M_PI * phase_scale);
    double epsilon =
        0.3 * std::log(1.0 + 6.0 * l_eff_a / (link.span_length_m() * asinh_term));
    sci *= std::pow(link.n_span, epsilon);

    // Cross interference, one logarithmic term per interferer. The 8/27
    // prefactor matches the reference integral in the far-interferer limit.
    double xci = 0.0;
    for (std::size_t k = 0; k < spectrum.size(); ++k) {
        if (static_cast<int>(k) == cut_index) continue;
        const ChannelConfig& other = spectrum[k];
        double df = std::abs(other.center_frequency_hz - cut.center_frequency_hz);
        double b_k = other.bandwidth_hz();
        double p_k = other.launch_power_w();
        double ratio = (df + b_k / 2.0) / (df - b_k / 2.0);
        xci += (8.0 / 27.0) * gamma * gamma * l_eff * l_eff * p_k * p_k * p_cut *
               std::log(ratio) / (M_PI * beta2 * l_eff_a * b_k * b_k);
    }

    NoiseBreakdown nb;
    nb.sigma2_sci_w = link.n_span * sci;
    nb.sigma2_xci_w = link.n_span * xci;
    return nb;
}

EtaNli gn_closed_eta_db(const FiberLink& link, const std::vector<ChannelConfig>& spectrum,
                        int cut_index) {
    NoiseBreakdown nb = gn_closed_eta(link, spectrum, cut_index);
    double p = spectrum[static_cast<std::size_t>(cut_index)].launch_power_w();
    return EtaNli{lin_to_db((nb.sigma2_sci_w + nb.sigma2_xci_w) / (p * p * p))};
}

std::vector<TransceiverMode> transceiver_menu(double guard_ghz, bool round_down) {
    static const Modulation kMods[] = {Modulation::QPSK, Modulation::QAM16, Modulation::QAM32,
                                       Modulation::QAM64};
    // Code rate fixed so that 100G QPSK lands exactly on 35 GBd.
    const double r_code = 100.0 / (2.0 * 2.0 * 35.0);
    std::vector<TransceiverMode> menu;
    for (Modulation mod : kMods) {
        int m = bits_per_symbol(mod);
        for (int rate = 100; rate <= 600; rate += 50) {
            double b = rate / (2.0 * m * r_code);
            if (b > 69.0 + 1e-9) {
                if (!(round_down && b <= 70.0 + 1e-9)) continue;
                b = 69.0;
            }
            if (b < 35.0 - 1e-9) continue;
            menu.push_back(TransceiverMode{mod, rate, b, slots_needed(b, guard_ghz)});
        }
    }
    return menu;
}

double launch_power_for_dbm(double symbol_rate_gbd) {
    if (symbol_rate_gbd <= 0.0) throw std::invalid_argument("launch_power_for: symbol rate must be positive");
    return 10.0 * std::log10(symbol_rate_gbd / 35.0);
}

double mqam_ber(double snr_linear, int constellation_size) {
    double m = constellation_size;
    double bits = std::log2(m);
    return (4.0 / bits) * (1.0 - 1.0 / std::sqrt(m)) * q_function(std::sqrt(3.0 * snr_linear / (m - 1.0)));
}

SnrThresholdTable SnrThresholdTable::standard(double target_ber, double margin_db) {
    SnrThresholdTable table;
    static const std::pair<Modulation, int> kSizes[] = {{Modulation::QPSK, 4},
                                                        {Modulation::QAM16, 16},
                                                        {Modulation::QAM32, 32},
                                                        {Modulation::QAM64, 64}};
    for (auto [mod, size] : kSizes) {
        // mqam_ber is monotone decreasing in SNR; bisect for the BER target.
        double lo = -10.0, hi = 40.0;
        for (int iter = 0; iter < 200; ++iter) {
            double mid = 0.5 * (lo + hi);
            if (mqam_ber(db_to_lin(mid), size) > target_ber)
                lo = mid;
            else
                hi = mid;
        }
        table.set(mod, 0.5 * (lo + hi) + margin_db);
    }
    return table;
}

SnrThresholdTable SnrThresholdTable::from_config(const Config& cfg) {
    SnrThresholdTable table = standard(cfg.get_double("required_snr_ber", 2e-2),
                                       cfg.get_double("required_snr_margin_db", 2.0));
    static const std::pair<Modulation, const char*> kKeys[] = {
        {Modulation::QPSK, "required_snr_qpsk_db"},
        {Modulation::QAM16, "required_snr_16qam_db"},
        {Modulation::QAM32, "required_snr_32qam_db"},
        {Modulation::QAM64, "required_snr_64qam_db"}};
    for (auto [mod, key] : kKeys)
        if (cfg.has(key)) table.set(mod, cfg.get_double(key, 0.0));
    return table;
}

double SnrThresholdTable::required_db(Modulation m) const {
    return thresholds_db_[static_cast<int>(m)];
}

void SnrThresholdTable::set(Modulation m, double snr_db) {
    thresholds_db_[static_cast<int>(m)] = snr_db;
}

PhysParams PhysParams::from_config(const Config& cfg) {
    PhysParams p;
    p.alpha_db_per_km = cfg.get_double("alpha_db_per_km", p.alpha_db_per_km);
    p.beta2_ps2_per_km = cfg.get_double("beta2_ps2_per_km", p.beta2_ps2_per_km);
    p.gamma_per_w_km = cfg.get_double("gamma_per_w_km", p.gamma_per_w_km);
    p.noise_figure_db = cfg.get_double("noise_figure_db", p.noise_figure_db);
    p.ref_frequency_hz = cfg.get_double("ref_frequency_thz", p.ref_frequency_hz * 1e-12) * 1e12;
    p.guard_band_ghz = cfg.get_double("guard_band_ghz", p.guard_band_ghz);
    p.menu_round_down = cfg.get_bool("menu_round_down", p.menu_round_down);
    p.ber_target = cfg.get_double("required_snr_ber", p.ber_target);
    p.snr_margin_db = cfg.get_double("required_snr_margin_db", p.snr_margin_db);
    p.quad_tol_db = cfg.get_double("quad_tol_db", p.quad_tol_db);
    p.quad_resolution = cfg.get_int("quad_resolution", p.quad_resolution);
    return p;
}

FiberLink PhysParams::make_link(double l_span_km, int n_span) const {
    FiberLink link;
    link.l_span_km = l_span_km;
    link.n_span = n_span;
    link.alpha_db_per_km = alpha_db_per_km;
    link.beta2_ps2_per_km = beta2_ps2_per_km;
    link.gamma_per_w_km = gamma_per_w_km;
    link.noise_figure_db = noise_figure_db;
    return link;
}

SnrThresholdTable PhysParams::thresholds(const Config& cfg) const {
    return SnrThresholdTable::from_config(cfg);
}

}  // namespace flexplan
