#pragma once

#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "flexplan/phys.hpp"

namespace flexplan {

enum class NliMode { SciOnly, Total };

struct QuadratureSpec {
    double tol_db = 0.05;  // grid-doubling convergence requirement
    int resolution = 1;    // base resolution multiplier
};

class QuadratureError : public std::runtime_error {
public:
    QuadratureError(const std::string& what, double delta_db)
        : std::runtime_error(what), delta_db(delta_db) {}
    double delta_db = 0.0;
};

// Full-form GN reference integral
//
//   G_NLI(f) = (16/27) gamma^2 Int G(f1) G(f2) G(f1+f2-f) rho(f1,f2) chi(f1,f2) df1 df2
//
// over rectangular per-channel PSDs, with the single-span four-wave-mixing
// efficiency rho and the multi-span phased-array factor chi. The integrand
// depends on (f1,f2) only through w = (f1-f)(f2-f) apart from the piecewise
// constant PSD factors, so the inner integral is carried out exactly against
// a precomputed antiderivative table Phi(w) of rho*chi, and only the outer
// dimension is discretized. Integration is restricted to the phase-matched
// strips f1 in CUT band or f2 in CUT band (self- plus cross-channel terms);
// contributions with both frequencies away from the CUT are suppressed by
// the 1/w^2 tail of rho and are discarded, consistent with the SNR
// decomposition used throughout.
//
// Every evaluation runs at the requested resolution and at double that
// resolution; a change above tol_db raises QuadratureError.
class GnIntegralOracle {
public:
    explicit GnIntegralOracle(const FiberLink& link, QuadratureSpec spec = {});
    ~GnIntegralOracle();
    GnIntegralOracle(GnIntegralOracle&&) noexcept;
    GnIntegralOracle& operator=(GnIntegralOracle&&) noexcept;

    // NLI coefficient of the CUT in dB re 1/W^2 (NLI power over launch
    // power cubed). SciOnly restricts all PSD factors to the CUT band.
    double eta_db(const std::vector<ChannelConfig>& spectrum, int cut_index, NliMode mode) const;

    // Same evaluation at a single fixed resolution, no convergence check.
    // Exposed for convergence studies.
    double eta_db_at_resolution(const std::vector<ChannelConfig>& spectrum, int cut_index,
                                NliMode mode, int resolution) const;

    const FiberLink& link() const { return link_; }

private:
    struct Impl;
    FiberLink link_;
    QuadratureSpec spec_;
    std::unique_ptr<Impl> impl_;
};

// One-shot convenience wrapper.
EtaNli gn_oracle_eta(const FiberLink& link, const std::vector<ChannelConfig>& spectrum,
                     int cut_index, NliMode mode, QuadratureSpec spec = {});

}  // namespace flexplan
