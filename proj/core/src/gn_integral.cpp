#include "flexplan/gn_integral.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace flexplan {

namespace {

struct Band {
    double lo = 0.0;
    double hi = 0.0;
    double psd = 0.0;  // W/Hz
};

// PSD value at frequency f, bands sorted by lower edge.
double psd_at(const std::vector<Band>& bands, double f) {
    auto it = std::upper_bound(bands.begin(), bands.end(), f,
                               [](double v, const Band& b) { return v < b.lo; });
    if (it == bands.begin()) return 0.0;
    --it;
    return (f <= it->hi) ? it->psd : 0.0;
}

}  // namespace

struct GnIntegralOracle::Impl {
    // Antiderivative of rho(w)*chi(w) on a uniform grid, cumulated with a
    // per-cell midpoint rule. rho*chi is even in w, so only w >= 0 is stored.
    struct PhiTable {
        double h = 0.0;
        std::vector<double> phi;  // phi[i] = integral over [0, i*h]

        double w_max() const { return h * static_cast<double>(phi.size() - 1); }

        double lookup(double w) const {
            double aw = std::abs(w);
            double x = aw / h;
            auto i = static_cast<std::size_t>(x);
            if (i + 1 >= phi.size()) return std::copysign(phi.back(), w);
            double frac = x - static_cast<double>(i);
            double v = phi[i] + frac * (phi[i + 1] - phi[i]);
            return std::copysign(v, w);
        }
    };

    const FiberLink link;
    const double a2;       // power attenuation, 1/m
    const double c_theta;  // theta = c_theta * w
    const double att;      // exp(-a2 * L_span)
    const int n_span;
    std::map<int, PhiTable> tables;

    explicit Impl(const FiberLink& l)
        : link(l),
          a2(l.alpha2_per_m()),
          c_theta(4.0 * M_PI * M_PI * l.beta2_abs_si() * l.span_length_m()),
          att(std::exp(-l.alpha2_per_m() * l.span_length_m())),
          n_span(l.n_span) {}

    double rho_chi(double w) const {
        double theta = c_theta * w;
        double num = 1.0 - 2.0 * att * std::cos(theta) + att * att;
        double mu = theta / link.span_length_m();  // 4 pi^2 beta2 w
        double rho = num / (a2 * a2 + mu * mu);
        if (n_span == 1) return rho;
        double s = std::sin(0.5 * theta);
        double chi;
        if (std::abs(s) < 1e-12) {
            chi = static_cast<double>(n_span) * n_span;
        } else {
            double t = std::sin(0.5 * n_span * theta) / s;
            chi = t * t;
        }
        return rho * chi;
    }

    const PhiTable& table_for(int resolution, double w_needed) {
        PhiTable& t = tables[resolution];
        if (t.h == 0.0) {
            // Resolve both the coherence peaks of chi (theta period / N) and
            // the Lorentzian scale of rho, with 16*resolution cells per feature.
            double theta_period_w = 2.0 * M_PI / c_theta;
            double lorentz_w = a2 / (4.0 * M_PI * M_PI * link.beta2_abs_si());
            double feature = std::min(theta_period_w / n_span, lorentz_w);
            t.h = feature / (16.0 * resolution);
            t.phi.assign(1, 0.0);
        }
        if (t.w_max() < w_needed) {
            std::size_t cells = static_cast<std::size_t>(w_needed * 1.25 / t.h) + 2;
            std::size_t old = t.phi.size() - 1;
            t.phi.resize(cells + 1);
            for (std::size_t i = old; i < cells; ++i)
                t.phi[i + 1] = t.phi[i] + t.h * rho_chi((static_cast<double>(i) + 0.5) * t.h);
        }
        return t;
    }
};

GnIntegralOracle::GnIntegralOracle(const FiberLink& link, QuadratureSpec spec)
    : link_(link), spec_(spec), impl_(std::make_unique<Impl>(link)) {
    if (spec_.resolution < 1) throw std::invalid_argument("quadrature resolution must be >= 1");
    if (link.n_span < 1) throw std::invalid_argument("oracle needs at least one span");
}

GnIntegralOracle::~GnIntegralOracle() = default;
GnIntegralOracle::GnIntegralOracle(GnIntegralOracle&&) noexcept = default;
GnIntegralOracle& GnIntegralOracle::operator=(GnIntegralOracle&&) noexcept = default;

double GnIntegralOracle::eta_db_at_resolution(const std::vector<ChannelConfig>& spectrum,
                                              int cut_index, NliMode mode, int resolution) const {
    if (spectrum.empty()) throw std::invalid_argument("gn_oracle: empty spectrum");
    if (cut_index < 0 || cut_index >= static_cast<int>(spectrum.size()))
        throw std::invalid_argument("gn_oracle: cut index out of range");
    check_channels_non_overlapping(spectrum);

    const ChannelConfig& cut = spectrum[static_cast<std::size_t>(cut_index)];
    const double f = cut.center_frequency_hz;
    const double b_cut = cut.bandwidth_hz();
    const double half_b = b_cut / 2.0;
    const double p_cut = cut.launch_power_w();
    const double g_cut = p_cut / b_cut;

    // Bands visible to the third PSD factor.
    std::vector<Band> bands;
    if (mode == NliMode::SciOnly) {
        bands.push_back(Band{cut.lower_edge_hz(), cut.upper_edge_hz(), g_cut});
    } else {
        for (const auto& ch : spectrum)
            bands.push_back(Band{ch.lower_edge_hz(), ch.upper_edge_hz(),
                                 ch.launch_power_w() / ch.bandwidth_hz()});
        std::sort(bands.begin(), bands.end(), [](const Band& a, const Band& b) { return a.lo < b.lo; });
    }

    // Outer-dimension islands: the CUT against itself and, in Total mode,
    // against every interferer (doubled by f1 <-> f2 symmetry).
    struct Island {
        double nu_lo, nu_hi, g2, weight;
        int slices;
    };
    // The CUT-against-itself island sees chi's coherence peaks cross its
    // integration window at a nu2 scale that shrinks with the span count, so
    // its slice count grows with N; interferer islands average many peaks per
    // slice and a fixed count suffices.
    double peak_spacing_w = 2.0 * M_PI / (impl_->c_theta * link_.n_span);
    int sci_slices = std::max(
        128, static_cast<int>(std::ceil(4.0 * b_cut * half_b / peak_spacing_w)));
    std::vector<Island> islands;
    islands.push_back(Island{-half_b, half_b, g_cut, 1.0, sci_slices * resolution});
    if (mode == NliMode::Total) {
        for (int k = 0; k < static_cast<int>(spectrum.size()); ++k) {
            if (k == cut_index) continue;
            const auto& ch = spectrum[static_cast<std::size_t>(k)];
            islands.push_back(Island{ch.lower_edge_hz() - f, ch.upper_edge_hz() - f,
                                     ch.launch_power_w() / ch.bandwidth_hz(), 2.0, 64 * resolution});
        }
    }

    double w_needed = 0.0;
    for (const auto& isl : islands)
        w_needed = std::max(w_needed, half_b * std::max(std::abs(isl.nu_lo), std::abs(isl.nu_hi)));
    const Impl::PhiTable& table = impl_->table_for(resolution, w_needed);

    std::vector<double> cuts;  // nu1 breakpoints of one slice
    double total = 0.0;
    for (const auto& isl : islands) {
        double width = (isl.nu_hi - isl.nu_lo) / isl.slices;
        double island_sum = 0.0;
        for (int j = 0; j < isl.slices; ++j) {
            double m = isl.nu_lo + (j + 0.5) * width;  // nu2 of this slice
            // Partition nu1 in [-B/2, B/2] where f + nu1 + m crosses a band edge.
            cuts.clear();
            cuts.push_back(-half_b);
            for (const auto& band : bands) {
                for (double edge : {band.lo, band.hi}) {
                    double nu1 = edge - f - m;
                    if (nu1 > -half_b + 1e-6 && nu1 < half_b - 1e-6) cuts.push_back(nu1);
                }
            }
            cuts.push_back(half_b);
            std::sort(cuts.begin(), cuts.end());
            double acc = 0.0;
            for (std::size_t p = 0; p + 1 < cuts.size(); ++p) {
                double lo = cuts[p], hi = cuts[p + 1];
                if (hi - lo < 1e-9) continue;
                double g3 = psd_at(bands, f + 0.5 * (lo + hi) + m);
                if (g3 <= 0.0) continue;
                acc += g3 * (table.lookup(hi * m) - table.lookup(lo * m)) / m;
            }
            island_sum += acc * width;
        }
        total += isl.weight * g_cut * isl.g2 * island_sum;
    }

    const double gamma = link_.gamma_si();
    double p_nli = (16.0 / 27.0) * gamma * gamma * total * b_cut;
    return lin_to_db(p_nli / (p_cut * p_cut * p_cut));
}

double GnIntegralOracle::eta_db(const std::vector<ChannelConfig>& spectrum, int cut_index,
                                NliMode mode) const {
    double coarse = eta_db_at_resolution(spectrum, cut_index, mode, spec_.resolution);
    double fine = eta_db_at_resolution(spectrum, cut_index, mode, 2 * spec_.resolution);
    double delta = std::abs(fine - coarse);
    if (delta > spec_.tol_db) {
        throw QuadratureError(
            "gn_oracle: quadrature did not converge at cut " +
                std::to_string(spectrum[static_cast<std::size_t>(cut_index)].center_frequency_hz * 1e-12) +
                " THz: grid doubling changed eta by " + std::to_string(delta) + " dB (tol " +
                std::to_string(spec_.tol_db) + ")",
            delta);
    }
    return fine;
}

EtaNli gn_oracle_eta(const FiberLink& link, const std::vector<ChannelConfig>& spectrum, int cut_index,
                     NliMode mode, QuadratureSpec spec) {
    GnIntegralOracle oracle(link, spec);
    return EtaNli{oracle.eta_db(spectrum, cut_index, mode)};
}

}  // namespace flexplan
