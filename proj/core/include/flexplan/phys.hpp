#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "flexplan/config.hpp"
#include "flexplan/grid.hpp"

namespace flexplan {

inline constexpr double kPlanckJs = 6.62607015e-34;
inline constexpr double kDefaultRefFrequencyHz = 193.4e12;

inline double db_to_lin(double db) { return std::pow(10.0, db / 10.0); }
inline double lin_to_db(double lin) { return 10.0 * std::log10(lin); }
inline double dbm_to_w(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }
inline double w_to_dbm(double w) { return 10.0 * std::log10(w) + 30.0; }

// Homogeneous-span fiber link: N_span identical spans, each terminated by an
// amplifier that exactly compensates the span loss.
struct FiberLink {
    double l_span_km = 80.0;
    int n_span = 1;
    double alpha_db_per_km = 0.2;
    double beta2_ps2_per_km = -21.3;
    double gamma_per_w_km = 1.3;
    double noise_figure_db = 5.0;

    // Power attenuation coefficient 2*alpha_tilde, in 1/m.
    double alpha2_per_m() const { return alpha_db_per_km * std::log(10.0) / 10.0 / 1000.0; }
    double span_length_m() const { return l_span_km * 1000.0; }
    double beta2_abs_si() const { return std::abs(beta2_ps2_per_km) * 1e-27; }  // s^2/m
    double gamma_si() const { return gamma_per_w_km / 1000.0; }                 // 1/(W*m)
    double effective_length_m() const {
        double a = alpha2_per_m();
        return (1.0 - std::exp(-a * span_length_m())) / a;
    }
    double asymptotic_effective_length_m() const { return 1.0 / alpha2_per_m(); }
    double total_length_km() const { return l_span_km * n_span; }
};

// Eq-style noise bookkeeping, all variances in W referred to the CUT bandwidth.
struct NoiseBreakdown {
    double sigma2_ase_w = 0.0;
    double sigma2_sci_w = 0.0;
    double sigma2_xci_w = 0.0;
    double total_w() const { return sigma2_ase_w + sigma2_sci_w + sigma2_xci_w; }
};

// NLI coefficient: total NLI power normalized by the transmit power cubed.
struct EtaNli {
    double eta_db = 0.0;  // dB re 1/W^2
    double nli_power_w(double p_tx_w) const { return db_to_lin(eta_db) * p_tx_w * p_tx_w * p_tx_w; }
};

// Throws std::domain_error when any two channel bands overlap.
void check_channels_non_overlapping(const std::vector<ChannelConfig>& spectrum);

// --- linear noise ------------------------------------------------------

// ASE of a chain of span amplifiers with gain = span loss, referred to
// bandwidth b_ref_hz.
double ase_variance_w(const FiberLink& link, double b_ref_hz,
                      double ref_frequency_hz = kDefaultRefFrequencyHz);

double combine_snr_db(double p_tx_w, const NoiseBreakdown& nb);

// --- closed-form GN baseline -------------------------------------------

// Per-channel SCI plus XCI of the closed-form GN model, incoherent span
// accumulation. ASE field is left zero.
NoiseBreakdown gn_closed_eta(const FiberLink& link, const std::vector<ChannelConfig>& spectrum,
                             int cut_index);

// Same quantity expressed as an NLI coefficient in dB.
EtaNli gn_closed_eta_db(const FiberLink& link, const std::vector<ChannelConfig>& spectrum,
                        int cut_index);

// --- transceiver model --------------------------------------------------

struct TransceiverMode {
    Modulation modulation = Modulation::QPSK;
    int data_rate_gbps = 0;
    double symbol_rate_gbd = 0.0;
    int slots = 0;
};

// All (modulation, data rate) combinations of the parameter space that fit
// the 35..69 GBd symbol-rate window. `round_down` clips a symbol rate just
// above the window (<= 70 GBd) to 69 GBd instead of dropping the entry.
std::vector<TransceiverMode> transceiver_menu(double guard_ghz = 0.0, bool round_down = false);

// PSD-equalized launch power: 35 GBd carries 0 dBm.
double launch_power_for_dbm(double symbol_rate_gbd);

// Minimum receiver SNR per modulation: AWGN SNR at the pre-FEC BER target
// plus an implementation margin. Computed by numerically inverting the
// Gray-coded M-QAM bit error rate approximation; individual entries may be
// overridden from config (required_snr_qpsk_db, ...).
class SnrThresholdTable {
public:
    static SnrThresholdTable standard(double target_ber = 2e-2, double margin_db = 2.0);
    static SnrThresholdTable from_config(const Config& cfg);

    double required_db(Modulation m) const;
    void set(Modulation m, double snr_db);

private:
    double thresholds_db_[4] = {0, 0, 0, 0};
};

// Gray-coded M-QAM bit error rate at a given Es/N0 (linear).
double mqam_ber(double snr_linear, int constellation_size);

// --- bundled physical-layer parameters ----------------------------------

struct PhysParams {
    double alpha_db_per_km = 0.2;
    double beta2_ps2_per_km = -21.3;
    double gamma_per_w_km = 1.3;
    double noise_figure_db = 5.0;
    double ref_frequency_hz = kDefaultRefFrequencyHz;
    double guard_band_ghz = 0.0;
    bool menu_round_down = false;
    double ber_target = 2e-2;
    double snr_margin_db = 2.0;
    double quad_tol_db = 0.05;
    int quad_resolution = 1;

    static PhysParams from_config(const Config& cfg);
    FiberLink make_link(double l_span_km, int n_span) const;
    SnrThresholdTable thresholds(const Config& cfg) const;
};

}  // namespace flexplan
