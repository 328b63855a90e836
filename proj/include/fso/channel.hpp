#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string_view>

#include "fso/specfun.hpp"

namespace fso::channel {

using specfun::SeriesConfig;

/// Physical description of a horizontal FSO link. SI units throughout.
struct LinkGeometry {
    double length_m = 1000.0 / 3.0;
    double wavelength_m = 1550e-9;
    double tx_waist_m = 0.015;
    double rx_aperture_radius_m = 0.02;
    double cn2 = 1e-14;             // m^(-2/3)
    double jitter_sigma_m = 0.01;   // per-axis pointing jitter

    void validate() const;
    double wave_number() const;
};

struct TurbulenceParams {
    double alpha = 0.0;
    double beta = 0.0;
    double rytov_var = 0.0;
};

/// How receiver geometry maps onto the (A0, xi^2) shape of the pointing
/// error density f(I_p) = xi^2 / A0^xi^2 * I_p^(xi^2 - 1), 0 <= I_p <= A0.
enum class PointingModel {
    FaridHranilovic,  // A0 = erf(v)^2, xi = w_Leq / (2 sigma_e)
    ModifiedUniform,  // A0 = 1 - exp(-2 rA^2 / wL^2), xi^2 = rA^2 / (2 sigma_e^2 A0)
};

std::string_view to_string(PointingModel model);
PointingModel parse_pointing_model(std::string_view text);

struct PointingParams {
    double a0 = 1.0;
    double xi2 = 0.0;
    double rx_beam_waist_m = 0.0;
    // beam-spread diagnostics (0 when built directly from a0/xi2)
    double epsilon = 0.0;
    double rho0_m = 0.0;

    double xi() const;
};

enum class Variant { GgOnly, GgPointing };

/// Immutable fading law of I = I_a * I_p.
class ChannelModel {
public:
    static ChannelModel gg_only(const TurbulenceParams& t);
    static ChannelModel gg_pointing(const TurbulenceParams& t, const PointingParams& p);

    Variant variant() const { return variant_; }
    bool has_pointing() const { return variant_ == Variant::GgPointing; }
    const TurbulenceParams& turbulence() const { return turbulence_; }
    const PointingParams& pointing() const;

    double alpha() const { return turbulence_.alpha; }
    double beta() const { return turbulence_.beta; }
    /// A0, or 1 without pointing error.
    double a0() const { return has_pointing() ? pointing_->a0 : 1.0; }
    /// xi^2, or +inf without pointing error.
    double xi2() const;

    /// Copy with beta and xi^2 nudged by `eps` wherever the power-series
    /// coefficients would hit a pole (alpha - beta integer, xi^2 - beta or
    /// xi^2 - alpha a non-negative integer).
    ChannelModel regularized(double eps) const;

private:
    ChannelModel(Variant v, TurbulenceParams t, std::optional<PointingParams> p)
        : variant_(v), turbulence_(t), pointing_(p) {}

    Variant variant_;
    TurbulenceParams turbulence_;
    std::optional<PointingParams> pointing_;
};

double rytov_variance(const LinkGeometry& geom);

/// C_n^2 that produces the requested Rytov variance on this geometry.
double cn2_for_rytov(double rytov_var, const LinkGeometry& geom);

TurbulenceParams gg_params(double rytov_var);

struct BeamWaist {
    double w_l_m;
    double epsilon;
    double rho0_m;
};

/// Received beam waist under turbulence-induced spreading.
BeamWaist beam_spread(const LinkGeometry& geom);
double beam_waist_at_rx(const LinkGeometry& geom);

PointingParams pointing_params(double rx_aperture_radius_m, double w_l_m, double jitter_sigma_m,
                               PointingModel model = PointingModel::FaridHranilovic);

/// Pointing parameters for a full geometry, including the beam-spread diagnostics.
PointingParams pointing_params(const LinkGeometry& geom,
                               PointingModel model = PointingModel::FaridHranilovic);

double gg_pdf(double ia, const TurbulenceParams& t, const SeriesConfig& cfg = {});

double composite_pdf(double i, const ChannelModel& m, const SeriesConfig& cfg = {});
double composite_cdf(double i, const ChannelModel& m, const SeriesConfig& cfg = {});

/// E[I^n] in closed form.
double moment(double n, const ChannelModel& m);

/// Result of a truncated power series.
struct SeriesValue {
    double value = 0.0;
    int terms = 0;
    bool converged = false;
};

/// Sum over the generalized power series of the composite density,
///   sum_j w_j u^(e_j) / e_j^order,  u = i / A0,
/// where f_I(i) = (1/A0) sum_j w_j u^(e_j - 1). order 1 gives the CDF,
/// order 2 gives the integral of CDF(y)/y over [0, i]. order 0 returns
/// sum_j w_j u^(e_j), i.e. A0 * i/A0 * f_I(i).
///
/// The exponents are k + beta and k + alpha for k = 0, 1, ... and, with
/// pointing error, the additional exponent xi^2 carried by the Mellin pole
/// of the inner integral. Throws SingularityError on a vanishing
/// denominator.
SeriesValue irradiance_power_series(double u, int order, const ChannelModel& m,
                                    const SeriesConfig& cfg);

/// E over I_a of inner(I_a) by adaptive quadrature against the
/// gamma-gamma density. `breakpoints` mark kinks of `inner`.
double expect_over_turbulence(const TurbulenceParams& t,
                              const std::function<double(double)>& inner,
                              std::span<const double> breakpoints = {},
                              const SeriesConfig& cfg = {});

/// Draws I = I_a * I_p with I_a = G(alpha, 1/alpha) G(beta, 1/beta) and
/// I_p = A0 U^(1/xi^2).
class IrradianceSampler {
public:
    explicit IrradianceSampler(const ChannelModel& m);
    double operator()(RandomStream& rng);

private:
    specfun::GammaVariate large_scale_;
    specfun::GammaVariate small_scale_;
    std::uniform_real_distribution<double> uniform_{0.0, 1.0};
    bool pointing_;
    double a0_;
    double inv_xi2_;
};

double sample_irradiance(const ChannelModel& m, RandomStream& rng);

}  // namespace fso::channel
