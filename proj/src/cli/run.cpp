#include <charconv>
#include <cstdlib>
#include <fstream>
#include <ostream>

#include <CLI11.hpp>

#include "fso/cli.hpp"
#include "fso/errors.hpp"

namespace fso::cli {
namespace {

struct Common {
    std::string config_path;
    std::vector<std::string> sets;
    std::string out;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> samples;
    std::optional<unsigned> workers;
};

void add_common(CLI::App* sub, Common& c) {
    sub->add_option("--config", c.config_path, "key=value config file")->check(CLI::ExistingFile);
    sub->add_option("--set", c.sets, "override one key, e.g. --set snr.step_db=5")
        ->allow_extra_args(false);
    sub->add_option("--out", c.out, "output file (directory for reproduce)");
    sub->add_option("--seed", c.seed, "Monte Carlo seed");
    sub->add_option("--samples", c.samples, "Monte Carlo sample count")->check(CLI::PositiveNumber);
    sub->add_option("--workers", c.workers, "worker threads")->check(CLI::PositiveNumber);
}

RunConfig build_config(const Common& c) {
    RunConfig cfg = c.config_path.empty() ? RunConfig{} : RunConfig::load(c.config_path);
    for (const auto& kv : c.sets) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) throw ConfigError("--set", 0, "", "expected key=value, got '" + kv + "'");
        cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
    }
    if (c.seed) cfg.mc.seed = *c.seed;
    if (c.samples) cfg.mc.n_samples = *c.samples;
    if (c.workers) cfg.mc.workers = *c.workers;
    if (const char* env = std::getenv("FSO_ADAPT_WORKERS"); env && *env) {
        const std::string_view v(env);
        unsigned w = 0;
        const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), w);
        if (ec != std::errc() || p != v.data() + v.size() || w == 0) {
            throw ConfigError("FSO_ADAPT_WORKERS", 0, "", "must be a positive integer");
        }
        cfg.mc.workers = w;
    }
    cfg.validate();
    return cfg;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Adaptive MQAM spectral efficiency over gamma-gamma FSO links", "fso-adapt"};
    app.require_subcommand(1, 1);

    Common common;
    std::string artifact;
    auto* params = app.add_subcommand("params", "channel parameter report");
    auto* ase = app.add_subcommand("ase", "ASE limit, discrete-rate ASE and MC estimate per SNR");
    auto* req = app.add_subcommand("required-snr", "required SNR table, fixed vs adaptive");
    auto* mcc = app.add_subcommand("mc", "Monte Carlo ASE estimates and power-constraint audits");
    auto* rep = app.add_subcommand("reproduce", "write reference table/figure data");
    rep->add_option("artifact", artifact, "table2|table3|fig2|fig3|fig4")->required();
    for (auto* s : {params, ase, req, mcc, rep}) add_common(s, common);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        const RunConfig cfg = build_config(common);
        if (rep->parsed()) {
            const std::string dir = !common.out.empty() ? common.out
                                    : !cfg.output_path.empty() ? cfg.output_path
                                                               : ".";
            return cmd_reproduce(artifact, cfg, dir, err);
        }
        const std::string path = !common.out.empty() ? common.out : cfg.output_path;
        std::ofstream file;
        if (!path.empty()) {
            file.open(path, std::ios::binary);
            if (!file) {
                err << "cannot write " << path << '\n';
                return kExitUsage;
            }
        }
        std::ostream& sink = path.empty() ? out : file;
        if (params->parsed()) return cmd_params(cfg, sink);
        if (ase->parsed()) return cmd_ase(cfg, sink);
        if (req->parsed()) return cmd_required_snr(cfg, sink);
        return cmd_mc(cfg, sink);
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const DomainError& e) {
        err << "invalid input: " << e.what() << '\n';
        return kExitUsage;
    } catch (const NumericalError& e) {
        err << "numerical failure: " << e.what() << '\n';
        return kExitNumerical;
    }
}

}  // namespace fso::cli
