#pragma once

#include <cstdint>
#include <random>

namespace fso {

/// Random stream used throughout the library. One per worker, never shared.
using RandomStream = std::mt19937_64;

/// Deterministic stream for worker `index` of a run seeded with `seed`.
RandomStream make_stream(std::uint64_t seed, std::uint64_t index = 0);

}  // namespace fso

namespace fso::specfun {

/// Truncation controls for every power series in the library.
struct SeriesConfig {
    int max_terms = 20;
    double singularity_eps = 1e-6;
    double convergence_tol = 1e-12;

    void validate() const;
    static SeriesConfig high_accuracy() { return {40, 1e-6, 1e-12}; }
};

/// ln Gamma(x) for x > 0.
double ln_gamma(double x);

/// ln |Gamma(x)| for any real x that is not a non-positive integer.
double ln_abs_gamma(double x);

/// Sign of Gamma(x) (+1 or -1); x must not be a non-positive integer.
int gamma_sign(double x);

/// psi(x) = d/dx ln Gamma(x), x > 0.
double digamma(double x);

/// Regularized lower incomplete gamma P(a, x), a > 0, x >= 0.
double regularized_gamma_p(double a, double x);

/// Modified Bessel function of the second kind K_nu(x) for non-integer nu.
///
/// For x <= 2 this sums the ascending series
///   K_nu(x) = pi / (2 sin(pi nu)) * sum_k [(x/2)^(2k-nu) / (Gamma(k-nu+1) k!)
///                                         - (x/2)^(2k+nu) / (Gamma(k+nu+1) k!)]
/// truncated per `cfg`; for x > 2 it switches to Steed's continued fraction
/// with forward recurrence in the order. Throws DomainError when nu lies
/// within cfg.singularity_eps of an integer or x <= 0.
double bessel_k_frac(double nu, double x, const SeriesConfig& cfg = {});

namespace detail {
double bessel_k_series(double nu, double x, const SeriesConfig& cfg);
double bessel_k_continued_fraction(double nu, double x);
}  // namespace detail

/// Gamma(shape, scale) variate; parameters checked once on construction.
class GammaVariate {
public:
    GammaVariate(double shape, double scale);

    double operator()(RandomStream& rng) { return dist_(rng); }
    double shape() const { return dist_.alpha(); }
    double scale() const { return dist_.beta(); }

private:
    std::gamma_distribution<double> dist_;
};

/// One Gamma(shape, scale) draw.
double sample_gamma(double shape, double scale, RandomStream& rng);

}  // namespace fso::specfun
