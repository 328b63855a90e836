#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <ostream>
#include <sstream>
#include <thread>

#include "fso/cli.hpp"
#include "fso/errors.hpp"
#include "fso/presets.hpp"

namespace fso::cli {
namespace {

using channel::ChannelModel;

std::string fixed(double x, int decimals) {
    if (!std::isfinite(x)) return "nan";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", decimals, x);
    // keep "-0.0" out of the tables
    if (std::string_view(buf).find_first_not_of("-0.") == std::string_view::npos && buf[0] == '-') {
        return buf + 1;
    }
    return buf;
}

std::string db(double x) { return fixed(x, 1); }
std::string p4(double x) { return fixed(x, 4); }

// Runs f(0..n-1) over `workers` threads; results come back in index order.
template <typename T>
std::vector<T> parallel_map(std::size_t n, unsigned workers, const std::function<T(std::size_t)>& f) {
    std::vector<T> out(n);
    workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
    if (workers == 1) {
        for (std::size_t i = 0; i < n; ++i) out[i] = f(i);
        return out;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (std::size_t i; (i = next.fetch_add(1)) < n;) out[i] = f(i);
        });
    }
    for (auto& t : pool) t.join();
    return out;
}

// One independent stream per grid point, so output does not depend on
// how many threads sweep the grid.
mc::McConfig row_mc(const mc::McConfig& base, std::uint64_t row) {
    mc::McConfig c = base;
    c.seed = base.seed ^ (0x9E3779B97F4A7C15ULL * (row + 1));
    c.workers = 1;
    return c;
}

// NaN sentinel on numerical failure; `failed` latches.
double guarded(std::atomic<bool>& failed, const std::function<double()>& f) {
    try {
        return f();
    } catch (const NumericalError&) {
        failed = true;
        return std::nan("");
    }
}

struct AseRow {
    double limit = 0, discrete = 0, mc_mean = 0, mc_se = 0, high_snr = 0;
};

AseRow ase_row(double snr_db, const ChannelModel& m, const RunConfig& cfg, std::uint64_t row,
               bool with_mc, std::atomic<bool>& failed) {
    const auto snr = adapt::SnrSpec::from_db(snr_db);
    const auto pol = cfg.policy();
    AseRow r;
    double cutoff = std::nan("");
    r.limit = guarded(failed, [&] {
        const auto sol = adapt::ase_limit(snr, pol, m, cfg.series);
        cutoff = sol.cutoff;
        return sol.ase_bits;
    });
    r.discrete = guarded(failed, [&] {
        return adapt::discrete_ase(snr, pol, m, cfg.constellations, cfg.series).ase_bits;
    });
    if (with_mc && std::isfinite(cutoff)) {
        const auto e = mc::estimate_ase_mc(cutoff, m, row_mc(cfg.mc, row));
        r.mc_mean = e.mean;
        r.mc_se = e.std_err;
    } else {
        r.mc_mean = r.mc_se = std::nan("");
    }
    r.high_snr = adapt::high_snr_ase(snr, pol, m);
    return r;
}

struct Table2 {
    std::string csv;
    std::string dat;
    bool failed = false;
};

Table2 required_snr_table(const RunConfig& cfg) {
    // columns: {fixed, adaptive} x {weak, strong} x {gg, pe}
    struct Col {
        bool adaptive;
        bool strong;
        bool pe;
    };
    std::vector<Col> cols;
    for (bool a : {false, true})
        for (bool s : {false, true})
            for (bool pe : {false, true}) cols.push_back({a, s, pe});

    auto model_for = [&](bool strong, bool pe) {
        RunConfig c = cfg;
        c.rytov_variance = strong ? cfg.strong_rytov : cfg.weak_rytov;
        c.pointing_enabled = pe;
        return c.model();
    };
    const ChannelModel models[2][2] = {{model_for(false, false), model_for(false, true)},
                                       {model_for(true, false), model_for(true, true)}};

    const auto& targets = cfg.required_snr_targets;
    std::atomic<bool> failed{false};
    const auto cells = parallel_map<double>(
        targets.size() * cols.size(), cfg.mc.workers, [&](std::size_t k) {
            const double rb = targets[k / cols.size()];
            const Col& c = cols[k % cols.size()];
            const ChannelModel& m = models[c.strong][c.pe];
            return guarded(failed, [&] {
                return c.adaptive
                           ? adapt::adaptive_required_snr(rb, cfg.policy(), m, cfg.series).snr_db
                           : adapt::fixed_required_snr(rb, cfg.ber_target, m, cfg.series).snr_db;
            });
        });

    std::ostringstream csv, dat;
    csv << "target_rb";
    dat << "# target_rb";
    for (const Col& c : cols) {
        const std::string name = std::string(c.adaptive ? "adaptive" : "fixed") + "_" +
                                 (c.strong ? "strong" : "weak") + "_" + (c.pe ? "pe" : "gg");
        csv << ',' << name;
        dat << ' ' << name;
    }
    csv << '\n';
    dat << '\n';
    for (std::size_t r = 0; r < targets.size(); ++r) {
        csv << fixed(targets[r], 0);
        dat << fixed(targets[r], 0);
        for (std::size_t c = 0; c < cols.size(); ++c) {
            csv << ',' << db(cells[r * cols.size() + c]);
            dat << ' ' << db(cells[r * cols.size() + c]);
        }
        csv << '\n';
        dat << '\n';
    }
    return {csv.str(), dat.str(), failed.load()};
}

// Reproduction runs pin everything except MC seed/size/workers.
RunConfig reproduction_config(const RunConfig& user) {
    RunConfig c;
    c.pointing_model = user.pointing_model;
    c.mc = user.mc;
    return c;
}

Artifact table3(const RunConfig& user) {
    std::ostringstream csv, dat;
    csv << "turbulence,rytov_variance,alpha,beta,xi,a0\n";
    dat << "# turbulence rytov_variance alpha beta xi a0\n";
    for (auto t : presets::kAllTurbulence) {
        const auto m = presets::reference_model(t, true, user.pointing_model);
        const std::string fields[] = {std::string(presets::name(t)), p4(presets::rytov_of(t)),
                                      p4(m.alpha()), p4(m.beta()), p4(m.pointing().xi()),
                                      p4(m.a0())};
        for (int i = 0; i < 6; ++i) {
            csv << (i ? "," : "") << fields[i];
            dat << (i ? " " : "") << fields[i];
        }
        csv << '\n';
        dat << '\n';
    }
    return {csv.str(), dat.str(), kExitOk};
}

Artifact fig2(const RunConfig& user) {
    const RunConfig cfg = reproduction_config(user);
    const auto models = presets::reference_models();
    const auto grid = cfg.snr.points();
    std::atomic<bool> failed{false};
    const auto rows = parallel_map<AseRow>(
        models.size() * grid.size(), cfg.mc.workers, [&](std::size_t k) {
            return ase_row(grid[k % grid.size()], models[k / grid.size()].model, cfg, k, true,
                           failed);
        });
    std::ostringstream csv, dat;
    csv << "snr_db";
    for (const auto& nm : models) csv << ',' << nm.name << "_limit," << nm.name << "_mc," << nm.name << "_mc_stderr";
    csv << '\n';
    for (std::size_t s = 0; s < grid.size(); ++s) {
        csv << db(grid[s]);
        for (std::size_t c = 0; c < models.size(); ++c) {
            const auto& r = rows[c * grid.size() + s];
            csv << ',' << p4(r.limit) << ',' << p4(r.mc_mean) << ',' << p4(r.mc_se);
        }
        csv << '\n';
    }
    for (std::size_t c = 0; c < models.size(); ++c) {
        if (c) dat << "\n\n";
        dat << "# " << models[c].name << "\n# snr_db ase_limit ase_mc ase_mc_stderr\n";
        for (std::size_t s = 0; s < grid.size(); ++s) {
            const auto& r = rows[c * grid.size() + s];
            dat << db(grid[s]) << ' ' << p4(r.limit) << ' ' << p4(r.mc_mean) << ' ' << p4(r.mc_se)
                << '\n';
        }
    }
    return {csv.str(), dat.str(), failed ? kExitNumerical : kExitOk};
}

Artifact discrete_figure(const RunConfig& user, presets::Turbulence t) {
    const RunConfig cfg = reproduction_config(user);
    const auto grid = cfg.snr.points();
    const ChannelModel models[2] = {presets::reference_model(t, false, cfg.pointing_model),
                                    presets::reference_model(t, true, cfg.pointing_model)};
    std::atomic<bool> failed{false};
    const auto rows = parallel_map<AseRow>(2 * grid.size(), cfg.mc.workers, [&](std::size_t k) {
        return ase_row(grid[k % grid.size()], models[k / grid.size()], cfg, k, false, failed);
    });
    std::ostringstream csv, dat;
    csv << "snr_db,gg_limit,gg_discrete,pe_limit,pe_discrete\n";
    dat << "# " << presets::name(t) << " turbulence\n# snr_db gg_limit gg_discrete pe_limit pe_discrete\n";
    for (std::size_t s = 0; s < grid.size(); ++s) {
        const auto& g = rows[s];
        const auto& p = rows[grid.size() + s];
        csv << db(grid[s]) << ',' << p4(g.limit) << ',' << p4(g.discrete) << ',' << p4(p.limit)
            << ',' << p4(p.discrete) << '\n';
        dat << db(grid[s]) << ' ' << p4(g.limit) << ' ' << p4(g.discrete) << ' ' << p4(p.limit)
            << ' ' << p4(p.discrete) << '\n';
    }
    return {csv.str(), dat.str(), failed ? kExitNumerical : kExitOk};
}

}  // namespace

int cmd_params(const RunConfig& cfg, std::ostream& out) {
    cfg.validate();
    const auto g = cfg.resolved_geometry();
    const auto m = cfg.model();
    const auto beam = channel::beam_spread(g);
    char cn2[32];
    std::snprintf(cn2, sizeof cn2, "%.4e", g.cn2);
    out << "parameter,value\n";
    out << "model," << (m.has_pointing() ? "GG_POINTING" : "GG_ONLY") << '\n';
    out << "cn2," << cn2 << '\n';
    out << "rytov_variance," << p4(m.turbulence().rytov_var) << '\n';
    out << "alpha," << p4(m.alpha()) << '\n';
    out << "beta," << p4(m.beta()) << '\n';
    out << "w_l_cm," << p4(beam.w_l_m * 100.0) << '\n';
    if (m.has_pointing()) {
        out << "pointing_model," << channel::to_string(cfg.pointing_model) << '\n';
        out << "a0," << p4(m.a0()) << '\n';
        out << "xi," << p4(m.pointing().xi()) << '\n';
    }
    out << "k_margin," << p4(cfg.policy().k_margin) << '\n';
    return kExitOk;
}

int cmd_ase(const RunConfig& cfg, std::ostream& out) {
    cfg.validate();
    const auto m = cfg.model();
    const auto grid = cfg.snr.points();
    std::atomic<bool> failed{false};
    const auto rows = parallel_map<AseRow>(grid.size(), cfg.mc.workers, [&](std::size_t k) {
        return ase_row(grid[k], m, cfg, k, true, failed);
    });
    out << "snr_db,ase_limit,ase_discrete,ase_mc,ase_mc_stderr,high_snr_approx\n";
    for (std::size_t k = 0; k < grid.size(); ++k) {
        const auto& r = rows[k];
        out << db(grid[k]) << ',' << p4(r.limit) << ',' << p4(r.discrete) << ',' << p4(r.mc_mean)
            << ',' << p4(r.mc_se) << ',' << p4(r.high_snr) << '\n';
    }
    return failed ? kExitNumerical : kExitOk;
}

int cmd_required_snr(const RunConfig& cfg, std::ostream& out) {
    cfg.validate();
    const auto t = required_snr_table(cfg);
    out << t.csv;
    return t.failed ? kExitNumerical : kExitOk;
}

int cmd_mc(const RunConfig& cfg, std::ostream& out) {
    cfg.validate();
    const auto m = cfg.model();
    const auto grid = cfg.snr.points();
    const auto pol = cfg.policy();
    struct Row {
        double limit, mc, mc_se, disc, disc_mc, disc_se, z_cont, z_disc;
    };
    std::atomic<bool> failed{false};
    const auto rows = parallel_map<Row>(grid.size(), cfg.mc.workers, [&](std::size_t k) {
        const auto snr = adapt::SnrSpec::from_db(grid[k]);
        const auto mcfg = row_mc(cfg.mc, k);
        const double nan = std::nan("");
        Row r{nan, nan, nan, nan, nan, nan, nan, nan};
        try {
            const auto sol = adapt::ase_limit(snr, pol, m, cfg.series);
            const auto e = mc::estimate_ase_mc(sol.cutoff, m, mcfg);
            const auto a = mc::audit_power_constraint(snr, pol, m, sol, mc::Scheme::Continuous,
                                                      cfg.constellations, mcfg);
            r.limit = sol.ase_bits;
            r.mc = e.mean;
            r.mc_se = e.std_err;
            r.z_cont = a.z_score;
        } catch (const NumericalError&) {
            failed = true;
        }
        try {
            const auto sol = adapt::discrete_ase(snr, pol, m, cfg.constellations, cfg.series);
            const auto e = mc::estimate_discrete_ase_mc(sol.cutoff, pol, m, cfg.constellations, mcfg);
            r.disc = sol.ase_bits;
            r.disc_mc = e.rate.mean;
            r.disc_se = e.rate.std_err;
            r.z_disc = e.power.std_err > 0 ? (e.power.mean - snr.snr_linear) / e.power.std_err : 0.0;
        } catch (const NumericalError&) {
            failed = true;
        }
        return r;
    });
    out << "snr_db,ase_limit,ase_mc,ase_mc_stderr,ase_discrete,ase_discrete_mc,"
           "ase_discrete_mc_stderr,power_z_continuous,power_z_discrete\n";
    for (std::size_t k = 0; k < grid.size(); ++k) {
        const auto& r = rows[k];
        out << db(grid[k]) << ',' << p4(r.limit) << ',' << p4(r.mc) << ',' << p4(r.mc_se) << ','
            << p4(r.disc) << ',' << p4(r.disc_mc) << ',' << p4(r.disc_se) << ','
            << fixed(r.z_cont, 2) << ',' << fixed(r.z_disc, 2) << '\n';
    }
    return failed ? kExitNumerical : kExitOk;
}

Artifact render_artifact(std::string_view id, const RunConfig& cfg) {
    if (id == "table3") return table3(cfg);
    if (id == "table2") {
        const auto t = required_snr_table(reproduction_config(cfg));
        return {t.csv, t.dat, t.failed ? kExitNumerical : kExitOk};
    }
    if (id == "fig2") return fig2(cfg);
    if (id == "fig3") return discrete_figure(cfg, presets::Turbulence::Weak);
    if (id == "fig4") return discrete_figure(cfg, presets::Turbulence::Strong);
    return {"", "", kExitUsage};
}

int cmd_reproduce(std::string_view id, const RunConfig& cfg, const std::filesystem::path& out_dir,
                  std::ostream& log) {
    bool known = false;
    for (auto a : kArtifacts) known = known || a == id;
    if (!known) {
        log << "unknown artifact '" << id << "' (table2|table3|fig2|fig3|fig4)\n";
        return kExitUsage;
    }
    const Artifact art = render_artifact(id, cfg);
    std::filesystem::create_directories(out_dir);
    for (const auto& [ext, body] : {std::pair{".csv", &art.csv}, std::pair{".dat", &art.dat}}) {
        const auto path = out_dir / (std::string(id) + ext);
        std::ofstream f(path, std::ios::binary);
        if (!f) {
            log << "cannot write " << path.string() << '\n';
            return kExitUsage;
        }
        f << *body;
        log << "wrote " << path.string() << '\n';
    }
    return art.exit_code;
}

}  // namespace fso::cli
