#include "fso/adapt.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <string>

#include "fso/errors.hpp"
#include "fso/numeric.hpp"

namespace fso::adapt {
namespace {

using channel::expect_over_turbulence;

// (1 - r^s) / s, continuous through s = 0 where it equals -ln r.
double one_minus_pow_over(double r, double s) {
    const double log_r = std::log(r);
    if (std::abs(s * log_r) < 1e-12) return -log_r;
    return -std::expm1(s * log_r) / s;
}

// E_p[1/p ; p >= t] for the pointing density on [0, A0], t < A0.
double inverse_pointing_tail(double t, double a0, double xi2) {
    return xi2 / a0 * one_minus_pow_over(t / a0, xi2 - 1.0);
}

// Kink of an inner expectation that switches on once I_a * A0 reaches `threshold`.
double kink(double threshold, const ChannelModel& m) { return threshold / m.a0(); }

// E[I^-1 ; I >= t] conditioned on I_a.
double inverse_tail_given(double ia, double t, const ChannelModel& m) {
    if (!m.has_pointing()) return ia >= t ? 1.0 / ia : 0.0;
    const double edge = t / ia;  // I_p threshold
    if (edge >= m.a0()) return 0.0;
    return inverse_pointing_tail(edge, m.a0(), m.xi2()) / ia;
}

void require_snr(const SnrSpec& snr) {
    if (!(snr.snr_linear > 0.0) || !std::isfinite(snr.snr_linear)) {
        throw DomainError("SNR must be finite and > 0 (linear)");
    }
}

// Solves decreasing constraint(c) = target in ln c.
AdaptiveSolution solve_log_cutoff(const std::function<double(double)>& constraint, double target,
                                  const char* what) {
    auto g = [&](double log_c) { return constraint(std::exp(log_c)) - target; };
    const double log_lo = std::log(1e-12);
    if (!(g(log_lo) > 0.0)) {
        throw BracketError(std::string(what) +
                           ": power budget cannot be spent even at the smallest cutoff");
    }
    numeric::RootOptions opts;
    opts.x_tol = 1e-12;
    opts.f_tol = 1e-11 * target;
    const auto r =
        numeric::brent_expanding(g, log_lo, std::log(1.0 / target), std::log(10.0), 40, opts);
    AdaptiveSolution sol;
    sol.cutoff = std::exp(r.root);
    sol.constraint_residual = r.f_root;
    sol.iterations = r.iterations;
    return sol;
}

}  // namespace

BerPolicy BerPolicy::from_target(double target_ber) {
    if (!(target_ber > 0.0 && target_ber < 0.2)) {
        throw DomainError("target BER must lie in (0, 0.2)");
    }
    return {target_ber, -1.5 / std::log(5.0 * target_ber)};
}

SnrSpec SnrSpec::from_db(double db) {
    if (!std::isfinite(db)) throw DomainError("SNR in dB must be finite");
    return {db, std::pow(10.0, db / 10.0)};
}

SnrSpec SnrSpec::from_linear(double linear) {
    if (!(linear > 0.0) || !std::isfinite(linear)) throw DomainError("linear SNR must be > 0");
    return {10.0 * std::log10(linear), linear};
}

void ConstellationSet::validate() const {
    if (sizes.size() < 2 || sizes.front() != 0) {
        throw DomainError("constellation set must start with 0 and hold at least one size");
    }
    for (std::size_t i = 1; i < sizes.size(); ++i) {
        const int m = sizes[i];
        if (m <= sizes[i - 1]) throw DomainError("constellation sizes must be strictly increasing");
        int v = m;
        while (v > 1 && v % 4 == 0) v /= 4;
        if (v != 1 || m < 4) throw DomainError("constellation size " + std::to_string(m) +
                                               " is not a square QAM order 4^i");
    }
}

double ber_bound(int m, double inst_snr) {
    if (m < 2) throw DomainError("ber_bound: constellation size must be >= 2");
    if (!(inst_snr >= 0.0)) throw DomainError("ber_bound: SNR must be >= 0");
    return 0.2 * std::exp(-1.5 * inst_snr / (m - 1.0));
}

double constellation_size_law(double i, double tx_power_norm, const BerPolicy& policy) {
    return 1.0 + policy.k_margin * i * tx_power_norm;
}

double optimal_power(double i, double cutoff, const BerPolicy& policy) {
    if (!(cutoff > 0.0)) throw DomainError("optimal_power: cutoff must be > 0");
    if (i <= cutoff) return 0.0;
    return (1.0 / cutoff - 1.0 / i) / policy.k_margin;
}

double continuous_constraint(double cutoff, const ChannelModel& m, const SeriesConfig& cfg) {
    const double edge = kink(cutoff, m);
    auto inner = [&](double ia) {
        if (!m.has_pointing()) return ia > cutoff ? 1.0 / cutoff - 1.0 / ia : 0.0;
        const double t = cutoff / ia;
        if (t >= m.a0()) return 0.0;
        const double r = t / m.a0();
        return (1.0 - std::pow(r, m.xi2())) / cutoff - inverse_pointing_tail(t, m.a0(), m.xi2()) / ia;
    };
    return expect_over_turbulence(m.turbulence(), inner, std::span<const double>(&edge, 1), cfg);
}

AdaptiveSolution solve_cutoff_continuous(const SnrSpec& snr, const BerPolicy& policy,
                                         const ChannelModel& m, const SeriesConfig& cfg) {
    require_snr(snr);
    return solve_log_cutoff([&](double c) { return continuous_constraint(c, m, cfg); },
                            policy.k_margin * snr.snr_linear, "solve_cutoff_continuous");
}

double ase_quadrature(double cutoff, const ChannelModel& m, const SeriesConfig& cfg) {
    const double edge = kink(cutoff, m);
    auto inner = [&](double ia) {
        const double q = ia * m.a0() / cutoff;
        if (q <= 1.0) return 0.0;
        if (!m.has_pointing()) return std::log(q);
        // E_p[ln(q p / A0)^+] with p / A0 ~ U^(1/xi^2)
        return std::log(q) - one_minus_pow_over(1.0 / q, m.xi2());
    };
    return expect_over_turbulence(m.turbulence(), inner, std::span<const double>(&edge, 1), cfg) /
           std::numbers::ln2;
}

channel::SeriesValue ase_series(double cutoff, const ChannelModel& m, const SeriesConfig& cfg) {
    if (!(cutoff > 0.0)) throw DomainError("ase_series: cutoff must be > 0");
    const double a = m.alpha(), b = m.beta();
    double log_part = std::log(m.a0() / (a * b * cutoff)) + specfun::digamma(a) + specfun::digamma(b);
    if (m.has_pointing()) log_part -= 1.0 / m.xi2();
    channel::SeriesValue s = channel::irradiance_power_series(cutoff / m.a0(), 2, m, cfg);
    s.value = (log_part + s.value) / std::numbers::ln2;
    return s;
}

AdaptiveSolution ase_limit(const SnrSpec& snr, const BerPolicy& policy, const ChannelModel& m,
                           const SeriesConfig& cfg) {
    AdaptiveSolution sol = solve_cutoff_continuous(snr, policy, m, cfg);
    const channel::SeriesValue s = ase_series(sol.cutoff, m, cfg);
    sol.series_terms = s.terms;
    if (s.converged) {
        sol.method = AseMethod::Series;
        sol.ase_bits = std::max(0.0, s.value);
    } else {
        sol.method = AseMethod::Quadrature;
        sol.ase_bits = std::max(0.0, ase_quadrature(sol.cutoff, m, cfg));
    }
    return sol;
}

double high_snr_ase(const SnrSpec& snr, const BerPolicy& policy, const ChannelModel& m) {
    require_snr(snr);
    const double a = m.alpha(), b = m.beta();
    double v = std::log(policy.k_margin * m.a0() / (a * b)) + specfun::digamma(a) +
               specfun::digamma(b) + std::log(snr.snr_linear);
    if (m.has_pointing()) v -= 1.0 / m.xi2();
    return v / std::numbers::ln2;
}

double pointing_penalty(const ChannelModel& m) {
    if (!m.has_pointing()) throw DomainError("pointing_penalty requires a pointing-error model");
    return (1.0 / m.xi2() - std::log(m.a0())) / std::numbers::ln2;
}

std::vector<DiscreteRegion> discrete_regions(const ConstellationSet& set, double cutoff_star) {
    set.validate();
    if (!(cutoff_star > 0.0)) throw DomainError("discrete_regions: cutoff must be > 0");
    std::vector<DiscreteRegion> out;
    out.reserve(set.sizes.size());
    for (std::size_t i = 0; i < set.sizes.size(); ++i) {
        const double hi = i + 1 < set.sizes.size() ? set.sizes[i + 1] * cutoff_star : numeric::kInf;
        out.push_back({set.sizes[i] * cutoff_star, hi, set.sizes[i]});
    }
    return out;
}

std::size_t region_index(const std::vector<DiscreteRegion>& regions, double i) {
    auto it = std::upper_bound(regions.begin(), regions.end(), i,
                               [](double v, const DiscreteRegion& r) { return v < r.i_low; });
    return it == regions.begin() ? 0 : static_cast<std::size_t>(it - regions.begin()) - 1;
}

double discrete_power(double i, int region_m, const BerPolicy& policy) {
    if (region_m < 2) return 0.0;
    return (region_m - 1.0) / (policy.k_margin * i);
}

double discrete_constraint(double cutoff_star, const ChannelModel& m, const ConstellationSet& set,
                           const SeriesConfig& cfg) {
    // Telescoped: (M_1 - 1) h(M_1 c) + sum_{r>=2} (M_r - M_{r-1}) h(M_r c),
    // h(t) = E[I^-1 ; I >= t].
    std::vector<std::pair<double, double>> steps;  // (threshold, weight)
    std::vector<double> edges;
    for (std::size_t r = 1; r < set.sizes.size(); ++r) {
        const double weight = r == 1 ? set.sizes[1] - 1.0 : set.sizes[r] - set.sizes[r - 1] + 0.0;
        const double t = set.sizes[r] * cutoff_star;
        steps.emplace_back(t, weight);
        edges.push_back(kink(t, m));
    }
    auto inner = [&](double ia) {
        double s = 0.0;
        for (const auto& [t, w] : steps) s += w * inverse_tail_given(ia, t, m);
        return s;
    };
    return expect_over_turbulence(m.turbulence(), inner, edges, cfg);
}

AdaptiveSolution solve_cutoff_discrete(const SnrSpec& snr, const BerPolicy& policy,
                                       const ChannelModel& m, const ConstellationSet& set,
                                       const SeriesConfig& cfg) {
    require_snr(snr);
    set.validate();
    return solve_log_cutoff([&](double c) { return discrete_constraint(c, m, set, cfg); },
                            policy.k_margin * snr.snr_linear, "solve_cutoff_discrete");
}

AdaptiveSolution discrete_ase(const SnrSpec& snr, const BerPolicy& policy, const ChannelModel& m,
                              const ConstellationSet& set, const SeriesConfig& cfg) {
    AdaptiveSolution sol = solve_cutoff_discrete(snr, policy, m, set, cfg);
    sol.method = AseMethod::Quadrature;
    const auto regions = discrete_regions(set, sol.cutoff);
    double cdf_low = channel::composite_cdf(regions[1].i_low, m, cfg);
    double rate = 0.0;
    for (std::size_t r = 1; r < regions.size(); ++r) {
        const double cdf_high = channel::composite_cdf(regions[r].i_high, m, cfg);
        rate += std::log2(static_cast<double>(regions[r].m)) * std::max(0.0, cdf_high - cdf_low);
        cdf_low = cdf_high;
    }
    sol.ase_bits = rate;
    return sol;
}

double fixed_average_ber(const SnrSpec& snr, double m_size, const ChannelModel& m,
                         const SeriesConfig& cfg) {
    require_snr(snr);
    if (!(m_size > 1.0)) throw DomainError("fixed_average_ber: constellation size must be > 1");
    const double rate = 1.5 * snr.snr_linear / (m_size - 1.0);
    auto inner = [&](double ia) {
        if (!m.has_pointing()) return 0.2 * std::exp(-rate * ia);
        // xi^2 * int_0^1 u^(xi^2-1) exp(-z u) du
        const double xi2 = m.xi2();
        const double z = rate * ia * m.a0();
        if (z < 1.0) {
            double term = 1.0, sum = 0.0;
            for (int n = 0; n < 200; ++n) {
                const double add = term * xi2 / (xi2 + n);
                sum += add;
                if (std::abs(add) < 1e-17 * std::abs(sum)) break;
                term *= -z / (n + 1.0);
            }
            return 0.2 * sum;
        }
        const double log_scale = std::log(xi2) + specfun::ln_gamma(xi2) - xi2 * std::log(z);
        return 0.2 * std::exp(log_scale) * specfun::regularized_gamma_p(xi2, z);
    };
    const std::array<double, 3> scales{0.1 / rate, 1.0 / rate, 10.0 / rate};
    return expect_over_turbulence(m.turbulence(), inner, scales, cfg);
}

SnrSpec fixed_required_snr(double target_rb, double target_ber, const ChannelModel& m,
                           const SeriesConfig& cfg) {
    if (!(target_rb > 0.0)) throw DomainError("target R/B must be > 0");
    if (!(target_ber > 0.0 && target_ber < 0.2)) throw DomainError("target BER must lie in (0, 0.2)");
    const double m_size = std::exp2(target_rb);
    const double log_target = std::log(target_ber);
    auto f = [&](double db) {
        return std::log(fixed_average_ber(SnrSpec::from_db(db), m_size, m, cfg)) - log_target;
    };
    numeric::RootOptions opts;
    opts.x_tol = 1e-9;
    return SnrSpec::from_db(numeric::brent(f, -20.0, 160.0, opts).root);
}

SnrSpec adaptive_required_snr(double target_rb, const BerPolicy& policy, const ChannelModel& m,
                              const SeriesConfig& cfg) {
    if (!(target_rb > 0.0)) throw DomainError("target R/B must be > 0");
    auto f = [&](double db) {
        return ase_limit(SnrSpec::from_db(db), policy, m, cfg).ase_bits - target_rb;
    };
    numeric::RootOptions opts;
    opts.x_tol = 1e-9;
    return SnrSpec::from_db(numeric::brent(f, -30.0, 120.0, opts).root);
}

}  // namespace fso::adapt
