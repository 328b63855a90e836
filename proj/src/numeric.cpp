#include "fso/numeric.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <queue>
#include <string>
#include <vector>

#include "fso/errors.hpp"

namespace fso::numeric {
namespace {

constexpr std::array<double, 8> kKronrodNodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};

constexpr std::array<double, 8> kKronrodWeights = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};

// Gauss weights for the odd Kronrod nodes 1, 3, 5, 7.
constexpr std::array<double, 4> kGaussWeights = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Segment {
    double lo;
    double hi;
    bool mapped;  // [lo, hi) is in t-space, x = origin + t / (1 - t)
    double origin;
    double value;
    double error;
};

struct ByError {
    bool operator()(const Segment& a, const Segment& b) const { return a.error < b.error; }
};

class Evaluator {
public:
    explicit Evaluator(const std::function<double(double)>& f) : f_(f) {}

    void apply(Segment& s) {
        const double center = 0.5 * (s.lo + s.hi);
        const double half = 0.5 * (s.hi - s.lo);
        const double fc = eval(s, center);
        double kronrod = fc * kKronrodWeights[7];
        double gauss = fc * kGaussWeights[3];
        for (std::size_t j = 0; j < 7; ++j) {
            const double dx = half * kKronrodNodes[j];
            const double sum = eval(s, center - dx) + eval(s, center + dx);
            kronrod += kKronrodWeights[j] * sum;
            if (j % 2 == 1) gauss += kGaussWeights[j / 2] * sum;
        }
        s.value = kronrod * half;
        s.error = std::abs((kronrod - gauss) * half);
    }

    int evaluations() const { return count_; }

private:
    double eval(const Segment& s, double t) {
        ++count_;
        double y;
        if (s.mapped) {
            const double one_minus = 1.0 - t;
            const double x = s.origin + t / one_minus;
            if (!std::isfinite(x)) return 0.0;
            y = f_(x) / (one_minus * one_minus);
        } else {
            y = f_(t);
        }
        return std::isfinite(y) ? y : 0.0;
    }

    const std::function<double(double)>& f_;
    int count_ = 0;
};

}  // namespace

QuadResult integrate(const std::function<double(double)>& f, double a, double b,
                     std::span<const double> breakpoints, const QuadOptions& opts) {
    if (!(a <= b) || std::isnan(a) || std::isnan(b) || std::isinf(a)) {
        throw DomainError("integrate: require finite a <= b");
    }
    if (a == b) return {};

    std::vector<double> points{a};
    for (double p : breakpoints) {
        if (p > a && p < b && std::isfinite(p)) points.push_back(p);
    }
    std::sort(points.begin(), points.end());
    points.erase(std::unique(points.begin(), points.end()), points.end());

    Evaluator ev(f);
    std::priority_queue<Segment, std::vector<Segment>, ByError> heap;
    double total = 0.0;
    double total_err = 0.0;
    auto push = [&](Segment s) {
        ev.apply(s);
        total += s.value;
        total_err += s.error;
        heap.push(s);
    };

    for (std::size_t i = 0; i + 1 < points.size(); ++i) {
        push({points[i], points[i + 1], false, 0.0, 0.0, 0.0});
    }
    if (std::isinf(b)) {
        push({0.0, 1.0, true, points.back(), 0.0, 0.0});
    } else {
        push({points.back(), b, false, 0.0, 0.0, 0.0});
    }

    int intervals = static_cast<int>(heap.size());
    while (total_err > std::max(opts.abs_tol, opts.rel_tol * std::abs(total)) &&
           intervals < opts.max_intervals) {
        Segment worst = heap.top();
        const double mid = 0.5 * (worst.lo + worst.hi);
        if (!(mid > worst.lo && mid < worst.hi)) break;  // cannot split further
        heap.pop();
        total -= worst.value;
        total_err -= worst.error;
        push({worst.lo, mid, worst.mapped, worst.origin, 0.0, 0.0});
        push({mid, worst.hi, worst.mapped, worst.origin, 0.0, 0.0});
        ++intervals;
    }

    // Re-sum to shed the drift of the running updates.
    total = 0.0;
    total_err = 0.0;
    while (!heap.empty()) {
        total += heap.top().value;
        total_err += heap.top().error;
        heap.pop();
    }
    return {total, total_err, ev.evaluations()};
}

RootResult brent(const std::function<double(double)>& f, double lo, double hi,
                 const RootOptions& opts) {
    double a = lo, b = hi;
    double fa = f(a), fb = f(b);
    if (fa == 0.0) return {a, fa, 0};
    if (fb == 0.0) return {b, fb, 0};
    if (std::isnan(fa) || std::isnan(fb) || (fa > 0.0) == (fb > 0.0)) {
        throw BracketError("brent: f(" + std::to_string(lo) + ")=" + std::to_string(fa) +
                           " and f(" + std::to_string(hi) + ")=" + std::to_string(fb) +
                           " do not bracket a root");
    }
    double c = b, fc = fb, d = 0.0, e = 0.0;
    for (int iter = 1; iter <= opts.max_iterations; ++iter) {
        if ((fb > 0.0) == (fc > 0.0)) {
            c = a;
            fc = fa;
            d = e = b - a;
        }
        if (std::abs(fc) < std::abs(fb)) {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        const double tol = 2.0 * 1e-16 * std::abs(b) + 0.5 * opts.x_tol;
        const double m = 0.5 * (c - b);
        if (std::abs(m) <= tol || fb == 0.0 || std::abs(fb) <= opts.f_tol) {
            return {b, fb, iter};
        }
        if (std::abs(e) >= tol && std::abs(fa) > std::abs(fb)) {
            double p, q, r;
            const double s = fb / fa;
            if (a == c) {
                p = 2.0 * m * s;
                q = 1.0 - s;
            } else {
                q = fa / fc;
                r = fb / fc;
                p = s * (2.0 * m * q * (q - r) - (b - a) * (r - 1.0));
                q = (q - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if (p > 0.0) q = -q;
            p = std::abs(p);
            if (2.0 * p < std::min(3.0 * m * q - std::abs(tol * q), std::abs(e * q))) {
                e = d;
                d = p / q;
            } else {
                d = m;
                e = d;
            }
        } else {
            d = m;
            e = d;
        }
        a = b;
        fa = fb;
        b += std::abs(d) > tol ? d : (m > 0.0 ? tol : -tol);
        fb = f(b);
    }
    return {b, fb, opts.max_iterations};
}

RootResult brent_expanding(const std::function<double(double)>& f, double lo, double hi,
                           double step, int max_expansions, const RootOptions& opts) {
    const double flo = f(lo);
    double fhi = f(hi);
    int n = 0;
    while ((flo > 0.0) == (fhi > 0.0) && fhi != 0.0) {
        if (++n > max_expansions) {
            throw BracketError("brent_expanding: no sign change up to " + std::to_string(hi));
        }
        lo = hi;
        hi += step;
        fhi = f(hi);
    }
    return brent(f, lo, hi, opts);
}

}  // namespace fso::numeric
