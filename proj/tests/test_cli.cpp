#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "fso/cli.hpp"

using namespace fso;
using namespace fso::cli;

namespace {

struct Ran {
    int code;
    std::string out;
    std::string err;
};

Ran run_cli(std::vector<std::string> args) {
    args.insert(args.begin(), "fso-adapt");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = run(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
    std::vector<std::vector<std::string>> rows;
    std::istringstream in(text);
    for (std::string line; std::getline(in, line);) {
        std::vector<std::string> row;
        std::istringstream ls(line);
        for (std::string cell; std::getline(ls, cell, ',');) row.push_back(cell);
        rows.push_back(row);
    }
    return rows;
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::filesystem::path scratch(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / "fso_cli_test";
    std::filesystem::create_directories(dir);
    return dir / name;
}

}  // namespace

TEST_CASE("config parse, diagnostics and round trip") {
    const std::string text =
        "# moderate link\n"
        "geometry.length_m = 500   # metres\n"
        "turbulence.rytov_variance=1\n"
        "pointing.model=modified\n"
        "pointing.sigma_e_m=0.012\n"
        "constellations=0,4,16,64\n"
        "snr.start_db=-5\n"
        "snr.step_db=2.5\n"
        "mc.seed=99\n"
        "required_snr.targets=1.5,3\n";
    const auto cfg = RunConfig::parse(text, "t.cfg");
    CHECK(cfg.geometry.length_m == 500.0);
    CHECK(cfg.rytov_variance.value() == 1.0);
    CHECK(cfg.pointing_model == channel::PointingModel::ModifiedUniform);
    CHECK(cfg.geometry.jitter_sigma_m == 0.012);
    CHECK(cfg.constellations.sizes == std::vector<int>{0, 4, 16, 64});
    CHECK(cfg.mc.seed == 99);
    CHECK(cfg.snr.points().size() == 15);
    CHECK(cfg.snr.points().back() == doctest::Approx(30.0));

    const auto again = RunConfig::parse(cfg.to_text());
    CHECK(again.to_text() == cfg.to_text());
    CHECK(again.geometry.wavelength_m == cfg.geometry.wavelength_m);
    CHECK(again.required_snr_targets == cfg.required_snr_targets);
    CHECK(again.model().alpha() == cfg.model().alpha());
    CHECK(again.model().xi2() == cfg.model().xi2());

    // defaults survive too, including a cn2 given directly
    RunConfig d;
    d.set("geometry.cn2", "2.5e-14");
    CHECK(RunConfig::parse(d.to_text()).to_text() == d.to_text());
    CHECK(RunConfig::parse(d.to_text()).geometry.cn2 == 2.5e-14);

    try {
        RunConfig::parse("snr.step_db=1\n\nber.target=abc\n", "x.cfg");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(e.line() == 3);
        CHECK(e.key() == "ber.target");
        CHECK(std::string(e.what()).find("x.cfg:3") != std::string::npos);
    }
    CHECK_THROWS_AS(RunConfig::parse("nonsense\n"), ConfigError);
    CHECK_THROWS_AS(RunConfig::parse("geometry.size=3\n"), ConfigError);
    CHECK_THROWS_AS(RunConfig::parse("geometry.length_m=-3\n"), ConfigError);
    CHECK_THROWS_AS(RunConfig::parse("constellations=0,4,8\n"), ConfigError);
    CHECK_THROWS_AS(RunConfig::parse("pointing.enabled=maybe\n"), ConfigError);
    CHECK_THROWS_AS(RunConfig::parse("snr.start_db=10\nsnr.stop_db=0\n").validate(), ConfigError);
}

TEST_CASE("params report") {
    auto r = run_cli({"params", "--set", "turbulence.rytov_variance=1"});
    REQUIRE(r.code == 0);
    CHECK(r.out.find("alpha,4.3939\n") != std::string::npos);
    CHECK(r.out.find("beta,2.5636\n") != std::string::npos);
    CHECK(r.out.find("xi,2.0491\n") != std::string::npos);
    CHECK(r.out.find("a0,0.4948\n") != std::string::npos);

    r = run_cli({"params", "--set", "turbulence.rytov_variance=0.4", "--set", "pointing.enabled=false"});
    REQUIRE(r.code == 0);
    CHECK(r.out.find("model,GG_ONLY") != std::string::npos);
    CHECK(r.out.find("alpha,6.8755") != std::string::npos);
    CHECK(r.out.find("a0,") == std::string::npos);
    CHECK(r.out.find("xi,") == std::string::npos);
}

TEST_CASE("exit codes") {
    CHECK(run_cli({}).code == kExitUsage);
    CHECK(run_cli({"frobnicate"}).code == kExitUsage);
    CHECK(run_cli({"params", "--set", "bogus.key=1"}).code == kExitUsage);
    CHECK(run_cli({"params", "--set", "noequals"}).code == kExitUsage);
    CHECK(run_cli({"params", "--config", "/nonexistent/x.cfg"}).code == kExitUsage);
    CHECK(run_cli({"reproduce", "fig9", "--out", scratch("r").string()}).code == kExitUsage);
    CHECK(run_cli({"--help"}).code == kExitOk);
    // the discrete budget cannot be spent this far up: sentinel row, exit 3
    const auto r = run_cli({"ase", "--set", "snr.start_db=80", "--set", "snr.stop_db=80", "--samples", "1000"});
    CHECK(r.code == kExitNumerical);
    CHECK(r.out.find(",nan,") != std::string::npos);
}

TEST_CASE("worker override from the environment") {
    ::setenv("FSO_ADAPT_WORKERS", "zero", 1);
    CHECK(run_cli({"params"}).code == kExitUsage);
    ::setenv("FSO_ADAPT_WORKERS", "2", 1);
    CHECK(run_cli({"params"}).code == kExitOk);
    ::unsetenv("FSO_ADAPT_WORKERS");
}

TEST_CASE("config file and output path") {
    const auto cfg_path = scratch("weak.cfg");
    {
        std::ofstream f(cfg_path);
        f << "turbulence.rytov_variance=0.4\npointing.enabled=false\nsnr.start_db=0\nsnr.stop_db=30\nsnr.step_db=5\n";
    }
    const auto out_path = scratch("ase.csv");
    std::filesystem::remove(out_path);
    const auto r = run_cli({"ase", "--config", cfg_path.string(), "--out", out_path.string(),
                            "--samples", "20000", "--seed", "4", "--workers", "3"});
    REQUIRE(r.code == 0);
    const auto rows = parse_csv(slurp(out_path));
    REQUIRE(rows.size() == 8);
    CHECK(rows[0] == std::vector<std::string>{"snr_db", "ase_limit", "ase_discrete", "ase_mc",
                                              "ase_mc_stderr", "high_snr_approx"});
    double prev = -1.0;
    for (std::size_t k = 1; k < rows.size(); ++k) {
        const double lim = std::stod(rows[k][1]), disc = std::stod(rows[k][2]);
        const double mc = std::stod(rows[k][3]), se = std::stod(rows[k][4]);
        CHECK(lim > prev);
        CHECK(disc <= lim);
        CHECK(lim - disc <= 0.2);
        CHECK(std::abs(mc - lim) <= 5.0 * se + 1e-4);
        prev = lim;
    }
    // grid sweep results do not depend on the thread count
    const auto one = run_cli({"ase", "--config", cfg_path.string(), "--samples", "20000", "--seed", "4", "--workers", "1"});
    CHECK(one.out == slurp(out_path));
}

TEST_CASE("mc command audits both schemes") {
    const auto r = run_cli({"mc", "--set", "turbulence.rytov_variance=2", "--set", "snr.step_db=15",
                            "--samples", "50000"});
    REQUIRE(r.code == 0);
    const auto rows = parse_csv(r.out);
    REQUIRE(rows.size() == 4);
    CHECK(rows[0].size() == 9);
    for (std::size_t k = 1; k < rows.size(); ++k) {
        CHECK(std::abs(std::stod(rows[k][7])) <= 5.0);
        CHECK(std::abs(std::stod(rows[k][8])) <= 5.0);
    }
}

TEST_CASE("required-snr table") {
    const auto r = run_cli({"required-snr", "--set", "required_snr.targets=2,8"});
    REQUIRE(r.code == 0);
    const auto rows = parse_csv(r.out);
    REQUIRE(rows.size() == 3);
    REQUIRE(rows[0].size() == 9);
    CHECK(rows[0][8] == "adaptive_strong_pe");
    CHECK(rows[1][8] == "17.0");
    CHECK(rows[2][1] == "33.3");
    for (std::size_t k = 1; k < rows.size(); ++k) {
        for (int c = 1; c <= 4; ++c) CHECK(std::stod(rows[k][c + 4]) < std::stod(rows[k][c]));
    }
}

TEST_CASE("reproduced artifacts match the golden files") {
    const auto dir = scratch("golden_run");
    for (const char* id : {"table2", "table3", "fig3", "fig4"}) {
        CAPTURE(id);
        REQUIRE(run_cli({"reproduce", id, "--out", dir.string()}).code == 0);
        CHECK(slurp(dir / (std::string(id) + ".csv")) ==
              slurp(std::filesystem::path(FSO_GOLDEN_DIR) / (std::string(id) + ".csv")));
        CHECK(std::filesystem::file_size(dir / (std::string(id) + ".dat")) > 0);
    }
}

TEST_CASE("fig2 layout") {
    RunConfig cfg;
    cfg.mc.n_samples = 2000;
    const auto art = render_artifact("fig2", cfg);
    CHECK(art.exit_code == 0);
    const auto rows = parse_csv(art.csv);
    REQUIRE(rows.size() == 32);
    CHECK(rows[0].size() == 1 + 6 * 3);
    CHECK(rows[0][1] == "weak_gg_limit");
    CHECK(rows[31][0] == "30.0");
    // six gnuplot index blocks
    std::size_t blocks = 0;
    for (std::size_t p = 0; (p = art.dat.find("# snr_db", p)) != std::string::npos; ++p) ++blocks;
    CHECK(blocks == 6);
}
