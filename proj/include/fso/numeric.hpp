#pragma once

#include <functional>
#include <limits>
#include <span>

namespace fso::numeric {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

struct QuadOptions {
    double abs_tol = 1e-15;
    double rel_tol = 1e-12;
    int max_intervals = 4000;
};

struct QuadResult {
    double value = 0.0;
    double abs_error = 0.0;
    int evaluations = 0;
};

/// Globally adaptive 7/15-point Gauss-Kronrod quadrature of f over [a, b].
/// `b` may be +infinity; the last segment is then mapped onto [0, 1).
/// Interior `breakpoints` (kinks, discontinuities) seed the initial
/// partition; points outside (a, b) are ignored.
QuadResult integrate(const std::function<double(double)>& f, double a, double b,
                     std::span<const double> breakpoints = {}, const QuadOptions& opts = {});

struct RootOptions {
    double x_tol = 1e-12;  // absolute tolerance on the root
    double f_tol = 0.0;    // stop early once |f| <= f_tol
    int max_iterations = 200;
};

struct RootResult {
    double root = 0.0;
    double f_root = 0.0;
    int iterations = 0;
};

/// Brent's method on a bracket [lo, hi] with f(lo), f(hi) of opposite sign.
/// Throws BracketError when the endpoints do not bracket a root.
RootResult brent(const std::function<double(double)>& f, double lo, double hi,
                 const RootOptions& opts = {});

/// Grows `hi` by `step` (additively) until f(hi) has the opposite sign of
/// f(lo), then runs brent. Intended for monotone functions.
RootResult brent_expanding(const std::function<double(double)>& f, double lo, double hi,
                           double step, int max_expansions, const RootOptions& opts = {});

}  // namespace fso::numeric
