#include "fso/channel.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "fso/errors.hpp"
#include "fso/numeric.hpp"

namespace fso::channel {
namespace {

using std::numbers::pi;
using specfun::gamma_sign;
using specfun::ln_abs_gamma;
using specfun::ln_gamma;

void require_positive(double v, const char* what) {
    if (!(v > 0.0) || !std::isfinite(v)) {
        throw DomainError(std::string(what) + " must be finite and > 0, got " + std::to_string(v));
    }
}

bool near_integer(double v, double eps) { return std::abs(v - std::round(v)) < eps; }

// xi^2 - xbar a non-negative integer puts a pole in both the S_k
// denominators and the Gamma(xbar - xi^2) of the extra term.
bool pointing_pole(double xi2, double xbar, double eps) {
    const double d = xi2 - xbar;
    return d > -eps && near_integer(d, eps);
}

numeric::QuadOptions expectation_options() {
    numeric::QuadOptions o;
    o.abs_tol = 1e-300;
    o.rel_tol = 1e-12;
    o.max_intervals = 3000;
    return o;
}

}  // namespace

void LinkGeometry::validate() const {
    require_positive(length_m, "geometry.length_m");
    require_positive(wavelength_m, "geometry.wavelength_m");
    require_positive(tx_waist_m, "geometry.tx_waist_m");
    require_positive(rx_aperture_radius_m, "geometry.rx_aperture_radius_m");
    require_positive(cn2, "geometry.cn2");
    require_positive(jitter_sigma_m, "geometry.jitter_sigma_m");
    if (wavelength_m >= 1e-5) throw DomainError("geometry.wavelength_m must be < 1e-5 m");
    if (length_m < 1.0) throw DomainError("geometry.length_m must be >= 1 m");
}

double LinkGeometry::wave_number() const { return 2.0 * pi / wavelength_m; }

std::string_view to_string(PointingModel model) {
    switch (model) {
        case PointingModel::FaridHranilovic: return "farid";
        case PointingModel::ModifiedUniform: return "modified";
    }
    return "?";
}

PointingModel parse_pointing_model(std::string_view text) {
    if (text == "farid") return PointingModel::FaridHranilovic;
    if (text == "modified") return PointingModel::ModifiedUniform;
    throw DomainError("unknown pointing model '" + std::string(text) + "' (farid|modified)");
}

double PointingParams::xi() const { return std::sqrt(xi2); }

ChannelModel ChannelModel::gg_only(const TurbulenceParams& t) {
    require_positive(t.alpha, "alpha");
    require_positive(t.beta, "beta");
    return ChannelModel(Variant::GgOnly, t, std::nullopt);
}

ChannelModel ChannelModel::gg_pointing(const TurbulenceParams& t, const PointingParams& p) {
    require_positive(t.alpha, "alpha");
    require_positive(t.beta, "beta");
    require_positive(p.xi2, "xi2");
    if (!(p.a0 > 0.0 && p.a0 <= 1.0)) throw DomainError("a0 must lie in (0, 1]");
    return ChannelModel(Variant::GgPointing, t, p);
}

const PointingParams& ChannelModel::pointing() const {
    if (!pointing_) throw DomainError("channel model has no pointing error");
    return *pointing_;
}

double ChannelModel::xi2() const {
    return has_pointing() ? pointing_->xi2 : std::numeric_limits<double>::infinity();
}

ChannelModel ChannelModel::regularized(double eps) const {
    ChannelModel out = *this;
    TurbulenceParams& t = out.turbulence_;
    while (near_integer(t.alpha - t.beta, eps)) t.beta += eps;
    if (out.pointing_) {
        double& xi2 = out.pointing_->xi2;
        for (int guard = 0; guard < 8 && (pointing_pole(xi2, t.alpha, eps) ||
                                           pointing_pole(xi2, t.beta, eps));
             ++guard) {
            xi2 += eps;
        }
    }
    return out;
}

double rytov_variance(const LinkGeometry& geom) {
    geom.validate();
    return 1.23 * geom.cn2 * std::pow(geom.wave_number(), 7.0 / 6.0) *
           std::pow(geom.length_m, 11.0 / 6.0);
}

double cn2_for_rytov(double rytov_var, const LinkGeometry& geom) {
    require_positive(rytov_var, "rytov variance");
    return rytov_var /
           (1.23 * std::pow(geom.wave_number(), 7.0 / 6.0) * std::pow(geom.length_m, 11.0 / 6.0));
}

TurbulenceParams gg_params(double rytov_var) {
    require_positive(rytov_var, "rytov variance");
    const double s = rytov_var;
    // sigma_R^(12/5) = (sigma_R^2)^(6/5)
    const double s125 = std::pow(s, 1.2);
    const double alpha = 1.0 / std::expm1(0.49 * s / std::pow(1.0 + 1.11 * s125, 7.0 / 6.0));
    const double beta = 1.0 / std::expm1(0.51 * s / std::pow(1.0 + 0.69 * s125, 5.0 / 6.0));
    return {alpha, beta, rytov_var};
}

BeamWaist beam_spread(const LinkGeometry& geom) {
    geom.validate();
    const double k = geom.wave_number();
    const double rho0 = std::pow(1.46 * geom.cn2 * k * k * geom.length_m, -0.6);
    const double w0 = geom.tx_waist_m;
    const double eps = 1.0 + 2.0 * w0 * w0 / (rho0 * rho0);
    const double diffraction = geom.wavelength_m * geom.length_m / (pi * w0 * w0);
    return {w0 * std::sqrt(1.0 + eps * diffraction * diffraction), eps, rho0};
}

double beam_waist_at_rx(const LinkGeometry& geom) { return beam_spread(geom).w_l_m; }

PointingParams pointing_params(double rx_aperture_radius_m, double w_l_m, double jitter_sigma_m,
                               PointingModel model) {
    require_positive(rx_aperture_radius_m, "rx aperture radius");
    require_positive(w_l_m, "rx beam waist");
    require_positive(jitter_sigma_m, "jitter sigma");
    const double ra = rx_aperture_radius_m;
    const double se2 = jitter_sigma_m * jitter_sigma_m;
    PointingParams p;
    p.rx_beam_waist_m = w_l_m;
    if (model == PointingModel::ModifiedUniform) {
        p.a0 = -std::expm1(-2.0 * ra * ra / (w_l_m * w_l_m));
        p.xi2 = ra * ra / (2.0 * se2 * p.a0);
    } else {
        const double v = std::sqrt(pi / 2.0) * ra / w_l_m;
        const double erf_v = std::erf(v);
        p.a0 = erf_v * erf_v;
        const double w_leq2 =
            w_l_m * w_l_m * std::sqrt(pi) * erf_v * std::exp(v * v) / (2.0 * v);
        p.xi2 = w_leq2 / (4.0 * se2);
    }
    return p;
}

PointingParams pointing_params(const LinkGeometry& geom, PointingModel model) {
    const BeamWaist w = beam_spread(geom);
    PointingParams p = pointing_params(geom.rx_aperture_radius_m, w.w_l_m, geom.jitter_sigma_m, model);
    p.epsilon = w.epsilon;
    p.rho0_m = w.rho0_m;
    return p;
}

double gg_pdf(double ia, const TurbulenceParams& t, const SeriesConfig& cfg) {
    if (!(ia >= 0.0)) throw DomainError("gg_pdf: irradiance must be >= 0");
    const double a = t.alpha, b = t.beta;
    const double ab = a * b;
    const double log_c = std::log(2.0) + 0.5 * (a + b) * std::log(ab) - ln_gamma(a) - ln_gamma(b);
    if (ia == 0.0) {
        const double lo = std::min(a, b);
        if (lo > 1.0) return 0.0;
        if (lo < 1.0) return std::numeric_limits<double>::infinity();
        const double nu = std::abs(a - b);
        return std::exp(log_c + ln_gamma(nu) - std::log(2.0) - 0.5 * nu * std::log(ab));
    }
    if (std::isinf(ia)) return 0.0;
    const double z = 2.0 * std::sqrt(ab * ia);
    const double nu = a - b;
    const double step = std::max(1e-4, 2.0 * cfg.singularity_eps);
    double k;
    if (near_integer(nu, step)) {
        // K is smooth in the order; interpolate across the integer pole.
        const double r = std::round(nu);
        const double lo = specfun::bessel_k_frac(r - step, z, cfg);
        const double hi = specfun::bessel_k_frac(r + step, z, cfg);
        k = lo + (nu - r + step) / (2.0 * step) * (hi - lo);
    } else {
        k = specfun::bessel_k_frac(nu, z, cfg);
    }
    if (k == 0.0) return 0.0;
    return std::exp(log_c + (0.5 * (a + b) - 1.0) * std::log(ia) + std::log(k));
}

SeriesValue irradiance_power_series(double u, int order, const ChannelModel& m,
                                    const SeriesConfig& cfg) {
    cfg.validate();
    if (!(u >= 0.0)) throw DomainError("irradiance_power_series: u must be >= 0");
    const double a = m.alpha(), b = m.beta();
    const double eps = cfg.singularity_eps;
    if (near_integer(a - b, eps)) {
        throw SingularityError("alpha - beta is within singularity_eps of an integer; perturb beta");
    }
    const bool pe = m.has_pointing();
    const double xi2 = m.xi2();
    if (pe && (pointing_pole(xi2, a, eps) || pointing_pole(xi2, b, eps))) {
        throw SingularityError("xi^2 - k - xbar vanishes for some k; perturb xi^2");
    }
    if (u == 0.0) return {0.0, 0, true};

    const double log_u = std::log(u);
    const double log_ab = std::log(a * b);
    const double log_gamma_ab = ln_gamma(a) + ln_gamma(b);
    auto weighted = [&](double log_mag, double sign, double e) {
        return sign * std::exp(log_mag + e * log_u - order * std::log(e));
    };

    SeriesValue out;
    if (pe) {
        // Mellin pole term: w = xi^2 (ab)^xi^2 Gamma(a - xi^2) Gamma(b - xi^2) / (Gamma(a) Gamma(b))
        const double log_mag = std::log(xi2) + xi2 * log_ab + ln_abs_gamma(a - xi2) +
                               ln_abs_gamma(b - xi2) - log_gamma_ab;
        const double sign = gamma_sign(a - xi2) * gamma_sign(b - xi2);
        out.value += weighted(log_mag, sign, xi2);
    }

    struct Branch {
        double x, xbar, log_base, sign;
    };
    std::array<Branch, 2> branches{};
    const std::array<std::pair<double, double>, 2> pairs{{{a, b}, {b, a}}};
    for (std::size_t j = 0; j < 2; ++j) {
        const auto [x, xbar] = pairs[j];
        const double s = std::sin(pi * (x - xbar));
        branches[j] = {x, xbar, std::log(pi / std::abs(s)) - log_gamma_ab, s > 0.0 ? 1.0 : -1.0};
    }

    const double growth = a * b * u;  // terms rise while k^2 < growth
    for (int k = 0; k < cfg.max_terms; ++k) {
        double step = 0.0;
        for (const Branch& br : branches) {
            const double e = k + br.xbar;
            const double shifted = k - br.x + br.xbar + 1.0;
            double log_mag = br.log_base + e * log_ab - ln_abs_gamma(shifted) - ln_gamma(k + 1.0);
            double sign = br.sign * gamma_sign(shifted);
            if (pe) {
                const double denom = xi2 - e;  // xi^2 S_k = a_k xi^2 / (xi^2 - k - xbar)
                log_mag += std::log(xi2 / std::abs(denom));
                if (denom < 0.0) sign = -sign;
            }
            const double term = weighted(log_mag, sign, e);
            out.value += term;
            step += std::abs(term);
        }
        out.terms = k + 1;
        if (static_cast<double>(k) * k > growth &&
            step <= cfg.convergence_tol * std::abs(out.value)) {
            out.converged = true;
            break;
        }
    }
    return out;
}

double expect_over_turbulence(const TurbulenceParams& t,
                              const std::function<double(double)>& inner,
                              std::span<const double> breakpoints, const SeriesConfig& cfg) {
    std::vector<double> points(breakpoints.begin(), breakpoints.end());
    points.push_back(1.0);
    auto integrand = [&](double ia) {
        const double g = inner(ia);
        if (g == 0.0) return 0.0;
        return g * gg_pdf(ia, t, cfg);
    };
    return numeric::integrate(integrand, 0.0, numeric::kInf, points, expectation_options()).value;
}

double composite_pdf(double i, const ChannelModel& m, const SeriesConfig& cfg) {
    if (!(i >= 0.0)) throw DomainError("composite_pdf: irradiance must be >= 0");
    if (!m.has_pointing()) return gg_pdf(i, m.turbulence(), cfg);
    const double a0 = m.a0(), xi2 = m.xi2();
    if (i == 0.0) {
        const double lo = std::min({m.alpha(), m.beta(), xi2});
        return lo > 1.0 ? 0.0 : std::numeric_limits<double>::infinity();
    }
    if (std::isinf(i)) return 0.0;
    const double u = i / a0;
    if (u <= 1.0) {
        const SeriesValue s = irradiance_power_series(u, 0, m, cfg);
        if (s.converged) return std::max(0.0, s.value / i);
    }
    // f(i) = xi^2 / i * E_a[(i / (A0 a))^xi^2 ; a >= i / A0]
    const double edge = u;
    // the weight decays over ~edge / xi^2 past the edge
    const double kinks[] = {edge, edge * (1.0 + 1.0 / xi2), edge * (1.0 + 10.0 / xi2)};
    const double tail = expect_over_turbulence(
        m.turbulence(), [&](double ia) { return ia < edge ? 0.0 : std::pow(edge / ia, xi2); },
        kinks, cfg);
    return xi2 / i * tail;
}

double composite_cdf(double i, const ChannelModel& m, const SeriesConfig& cfg) {
    if (!(i >= 0.0)) throw DomainError("composite_cdf: irradiance must be >= 0");
    if (i == 0.0) return 0.0;
    if (std::isinf(i)) return 1.0;
    const double a0 = m.a0();
    const double u = i / a0;
    if (u <= 1.0) {
        const SeriesValue s = irradiance_power_series(u, 1, m, cfg);
        if (s.converged) return std::clamp(s.value, 0.0, 1.0);
    }
    const TurbulenceParams& t = m.turbulence();
    double value;
    if (!m.has_pointing()) {
        const double edge = i;
        if (u <= 1.0) {
            value = expect_over_turbulence(t, [&](double ia) { return ia <= edge ? 1.0 : 0.0; },
                                           std::span<const double>(&edge, 1), cfg);
        } else {
            value = 1.0 - expect_over_turbulence(
                              t, [&](double ia) { return ia <= edge ? 0.0 : 1.0; },
                              std::span<const double>(&edge, 1), cfg);
        }
    } else {
        const double xi2 = m.xi2();
        const double edge = u;  // I <= i  <=>  I_p <= i / I_a, certain once I_a <= i / A0
        if (u <= 1.0) {
            value = expect_over_turbulence(
                t, [&](double ia) { return ia <= edge ? 1.0 : std::pow(edge / ia, xi2); },
                std::span<const double>(&edge, 1), cfg);
        } else {
            value = 1.0 - expect_over_turbulence(
                              t,
                              [&](double ia) {
                                  return ia <= edge ? 0.0 : 1.0 - std::pow(edge / ia, xi2);
                              },
                              std::span<const double>(&edge, 1), cfg);
        }
    }
    return std::clamp(value, 0.0, 1.0);
}

double moment(double n, const ChannelModel& m) {
    const double a = m.alpha(), b = m.beta();
    if (!(a + n > 0.0) || !(b + n > 0.0) || (m.has_pointing() && !(n + m.xi2() > 0.0))) {
        throw DomainError("moment: order " + std::to_string(n) + " does not exist");
    }
    double log_m = ln_gamma(a + n) + ln_gamma(b + n) - ln_gamma(a) - ln_gamma(b) - n * std::log(a * b);
    double value = std::exp(log_m);
    if (m.has_pointing()) value *= std::pow(m.a0(), n) * m.xi2() / (n + m.xi2());
    return value;
}

IrradianceSampler::IrradianceSampler(const ChannelModel& m)
    : large_scale_(m.alpha(), 1.0 / m.alpha()),
      small_scale_(m.beta(), 1.0 / m.beta()),
      pointing_(m.has_pointing()),
      a0_(m.a0()),
      inv_xi2_(m.has_pointing() ? 1.0 / m.xi2() : 0.0) {}

double IrradianceSampler::operator()(RandomStream& rng) {
    const double ia = large_scale_(rng) * small_scale_(rng);
    if (!pointing_) return ia;
    return ia * a0_ * std::pow(uniform_(rng), inv_xi2_);
}

double sample_irradiance(const ChannelModel& m, RandomStream& rng) {
    IrradianceSampler s(m);
    return s(rng);
}

}  // namespace fso::channel
