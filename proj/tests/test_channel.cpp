#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "fso/channel.hpp"
#include "fso/errors.hpp"
#include "fso/numeric.hpp"
#include "fso/presets.hpp"

using namespace fso;
using namespace fso::channel;
using numeric::integrate;
using numeric::kInf;

namespace {

double round4(double x) { return std::round(x * 1e4) / 1e4; }

bool rel_close(double got, double want, double tol) {
    return std::abs(got - want) <= tol * std::max(1.0, std::abs(want));
}

ChannelModel preset(presets::Turbulence t, bool pe) { return presets::reference_model(t, pe); }

}  // namespace

TEST_CASE("reference turbulence and pointing parameters") {
    using presets::Turbulence;
    struct Row { Turbulence t; double alpha, beta, xi, a0; };
    const Row rows[] = {
        {Turbulence::Weak, 6.8755, 5.3384, 1.7808, 0.7180},
        {Turbulence::Moderate, 4.3939, 2.5636, 2.0491, 0.4948},
        {Turbulence::Strong, 3.9929, 1.7018, 2.5848, 0.3025},
    };
    for (const auto& r : rows) {
        CAPTURE(presets::name(r.t));
        const auto tp = gg_params(presets::rytov_of(r.t));
        CHECK(round4(tp.alpha) == doctest::Approx(r.alpha).epsilon(1e-12));
        CHECK(round4(tp.beta) == doctest::Approx(r.beta).epsilon(1e-12));
        const auto geom = presets::reference_geometry(r.t);
        CHECK(rytov_variance(geom) == doctest::Approx(presets::rytov_of(r.t)).epsilon(1e-12));
        const auto pp = pointing_params(geom.rx_aperture_radius_m, beam_waist_at_rx(geom),
                                        geom.jitter_sigma_m);
        CHECK(round4(pp.xi()) == doctest::Approx(r.xi).epsilon(1e-12));
        CHECK(round4(pp.a0) == doctest::Approx(r.a0).epsilon(1e-12));
    }
}

TEST_CASE("modified uniform pointing model") {
    const auto geom = presets::reference_geometry(presets::Turbulence::Moderate);
    const auto pp = pointing_params(geom, PointingModel::ModifiedUniform);
    const double w = beam_waist_at_rx(geom), ra = geom.rx_aperture_radius_m;
    CHECK(pp.a0 == doctest::Approx(1.0 - std::exp(-2.0 * ra * ra / (w * w))));
    CHECK(pp.xi2 == doctest::Approx(ra * ra / (2.0 * 0.01 * 0.01 * pp.a0)));
    CHECK(round4(pp.xi()) == doctest::Approx(1.9995));
    CHECK(parse_pointing_model(to_string(PointingModel::ModifiedUniform)) == PointingModel::ModifiedUniform);
    CHECK_THROWS_AS(parse_pointing_model("gaussian"), DomainError);
}

TEST_CASE("beam spread") {
    LinkGeometry g;
    const auto b = beam_spread(g);
    CHECK(b.epsilon > 1.0);
    CHECK(b.w_l_m > g.tx_waist_m);
    // without turbulence spreading reduces to diffraction
    g.cn2 = 1e-30;
    const double zr = g.wavelength_m * g.length_m / (std::numbers::pi * g.tx_waist_m * g.tx_waist_m);
    CHECK(beam_waist_at_rx(g) == doctest::Approx(g.tx_waist_m * std::sqrt(1 + zr * zr)).epsilon(1e-9));
}

TEST_CASE("geometry validation and Rytov round trip") {
    LinkGeometry g;
    g.length_m = -1;
    CHECK_THROWS_AS(g.validate(), DomainError);
    LinkGeometry h;
    const double cn2 = cn2_for_rytov(1.3, h);
    h.cn2 = cn2;
    CHECK(rytov_variance(h) == doctest::Approx(1.3).epsilon(1e-13));
    CHECK_THROWS_AS(gg_params(0.0), DomainError);
}

TEST_CASE("gamma-gamma density against high-precision values") {
    const auto t = gg_params(1.0);
    struct { double i, v; } cases[] = {
        {0.05, 0.1932998382641812}, {0.5, 0.78453815718298041}, {1.0, 0.47498604103907212},
        {2.0, 0.13005165166248562}, {5.0, 0.0038124903097343487},
    };
    for (auto c : cases) {
        CAPTURE(c.i);
        CHECK(rel_close(gg_pdf(c.i, t), c.v, 1e-10));
    }
}

TEST_CASE("composite density and CDF against high-precision values") {
    struct Case { presets::Turbulence t; double pdf[5]; double cdf[3]; };
    const double at_pdf[] = {0.02, 0.1, 0.3, 0.6, 1.5};
    const double at_cdf[] = {0.1, 0.4, 1.0};
    const Case cases[] = {
        {presets::Turbulence::Moderate,
         {0.60061556805039711, 1.9693880660776131, 1.5309191062695381, 0.60209513358389562, 0.041528681301502969},
         {0.12319453771316645, 0.63270344178066563, 0.9380829837821546}},
        {presets::Turbulence::Strong,
         {2.5923889235241039, 3.0313754438195662, 1.2650458233200105, 0.34344772662217438, 0.014735409509564894},
         {0.28594737852363801, 0.7992578486307689, 0.97651860218132073}},
    };
    for (const auto& c : cases) {
        const auto m = preset(c.t, true);
        for (int k = 0; k < 5; ++k) {
            CAPTURE(at_pdf[k]);
            CHECK(rel_close(composite_pdf(at_pdf[k], m), c.pdf[k], 1e-8));
        }
        for (int k = 0; k < 3; ++k) {
            CAPTURE(at_cdf[k]);
            CHECK(rel_close(composite_cdf(at_cdf[k], m), c.cdf[k], 1e-8));
        }
    }
}

TEST_CASE("composite density matches nested quadrature") {
    for (const auto& nm : presets::reference_models()) {
        if (!nm.pointing) continue;
        const auto& m = nm.model;
        const double a0 = m.a0(), x2 = m.xi2();
        for (double i : {0.01, 0.07, 0.25, 0.8, 2.0}) {
            // f_I(i) = int f_p(i / ia) f_a(ia) / ia dia, f_p(y) = x2 y^(x2-1) / a0^x2 on [0, a0]
            const double lo = i / a0;
            const double bp[] = {lo + 1.0, lo + 4.0};
            const double nested = integrate(
                [&](double ia) {
                    const double y = i / ia;
                    return x2 * std::pow(y / a0, x2 - 1.0) / a0 * gg_pdf(ia, m.turbulence()) / ia;
                },
                lo, kInf, bp).value;
            CAPTURE(nm.name);
            CAPTURE(i);
            CHECK(rel_close(composite_pdf(i, m), nested, 1e-8));
        }
    }
}

TEST_CASE("density normalization, CDF shape and moments") {
    for (const auto& nm : presets::reference_models()) {
        CAPTURE(nm.name);
        const auto& m = nm.model;
        const double bp[] = {0.5 * m.a0(), m.a0(), 3.0};
        const double total = integrate([&](double i) { return composite_pdf(i, m); }, 0.0, kInf, bp).value;
        CHECK(std::abs(total - 1.0) < 1e-8);

        double prev = 0.0;
        for (double i = 0.01; i < 6.0; i *= 1.3) {
            const double c = composite_cdf(i, m);
            CHECK(c >= prev - 1e-14);
            CHECK(c <= 1.0);
            prev = c;
        }
        // continuous through the series / quadrature switch at A0
        CHECK(std::abs(composite_cdf(m.a0() * (1 - 1e-9), m) - composite_cdf(m.a0() * (1 + 1e-9), m)) < 1e-8);

        for (double n : {0.0, 1.0, 2.0, -0.5}) {
            const double q = integrate([&](double i) { return std::pow(i, n) * composite_pdf(i, m); },
                                       0.0, kInf, bp).value;
            CAPTURE(n);
            CHECK(rel_close(moment(n, m), q, 1e-7));
        }
        // E[I_a] = 1 so E[I] = A0 xi^2 / (xi^2 + 1)
        const double mean = m.has_pointing() ? m.a0() * m.xi2() / (m.xi2() + 1) : 1.0;
        CHECK(moment(1.0, m) == doctest::Approx(mean).epsilon(1e-13));
    }
}

TEST_CASE("pointing model collapses to gamma-gamma for mild jitter") {
    const auto t = gg_params(1.0);
    PointingParams p;
    p.a0 = 1.0;
    p.xi2 = 1e6;
    const auto m = ChannelModel::gg_pointing(t, p);
    for (double i : {0.1, 0.7, 1.6}) {
        CHECK(rel_close(composite_pdf(i, m), gg_pdf(i, t), 1e-4));
    }
    CHECK(ChannelModel::gg_only(t).a0() == 1.0);
    CHECK(std::isinf(ChannelModel::gg_only(t).xi2()));
}

TEST_CASE("power series poles") {
    TurbulenceParams t{3.5, 1.5, 0.0};
    const auto m = ChannelModel::gg_only(t);
    CHECK_THROWS_AS(irradiance_power_series(0.3, 1, m, {}), SingularityError);
    const auto r = m.regularized(1e-6);
    const auto s = irradiance_power_series(0.3, 1, r, specfun::SeriesConfig::high_accuracy());
    CHECK(s.converged);
    // the nudged series still matches the CDF obtained by quadrature
    const double cdf = integrate([&](double i) { return gg_pdf(i, t); }, 0.0, 0.3).value;
    CHECK(std::abs(s.value - cdf) < 1e-5);
}

TEST_CASE("sampler reproduces the analytic CDF") {
    for (const auto& nm : presets::reference_models()) {
        CAPTURE(nm.name);
        RandomStream rng = make_stream(42, 3);
        IrradianceSampler draw(nm.model);
        std::vector<double> xs(200000);
        for (auto& x : xs) x = draw(rng);
        std::sort(xs.begin(), xs.end());
        double d = 0.0;
        const auto n = static_cast<double>(xs.size());
        for (std::size_t k = 0; k < xs.size(); k += 97) {
            const double f = composite_cdf(xs[k], nm.model);
            d = std::max({d, std::abs(f - k / n), std::abs(f - (k + 1) / n)});
        }
        CHECK(d < 0.005);
        if (nm.pointing) CHECK(xs.back() <= nm.model.a0() * 40.0);
    }
}

TEST_CASE("gamma-gamma density at integer Bessel order") {
    CHECK(rel_close(gg_pdf(0.7, {3.5, 1.5, 0.0}), 0.53545169995984794, 1e-7));
    CHECK(rel_close(gg_pdf(0.3, {2.2, 2.2, 0.0}), 0.86557789922385557, 1e-7));
    CHECK(rel_close(gg_pdf(1.3, {2.2, 2.2, 0.0}), 0.26265731688917635, 1e-7));
}
