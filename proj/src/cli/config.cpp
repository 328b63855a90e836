#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "fso/cli.hpp"
#include "fso/errors.hpp"

namespace fso::cli {
namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

[[noreturn]] void bad(std::string_view key, const std::string& what) {
    throw ConfigError("", 0, std::string(key), what);
}

double to_double(std::string_view key, std::string_view v) {
    v = trim(v);
    double x = 0.0;
    const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
    if (ec != std::errc() || p != v.data() + v.size() || !std::isfinite(x)) {
        bad(key, "not a number: '" + std::string(v) + "'");
    }
    return x;
}

long long to_int(std::string_view key, std::string_view v) {
    v = trim(v);
    long long x = 0;
    const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
    if (ec != std::errc() || p != v.data() + v.size()) {
        bad(key, "not an integer: '" + std::string(v) + "'");
    }
    return x;
}

double to_positive(std::string_view key, std::string_view v) {
    const double x = to_double(key, v);
    if (!(x > 0.0)) bad(key, "must be > 0");
    return x;
}

std::size_t to_count(std::string_view key, std::string_view v) {
    const long long x = to_int(key, v);
    if (x <= 0) bad(key, "must be a positive integer");
    return static_cast<std::size_t>(x);
}

bool to_bool(std::string_view key, std::string_view v) {
    v = trim(v);
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    bad(key, "expected true/false, got '" + std::string(v) + "'");
}

template <typename F>
void for_each_item(std::string_view v, F f) {
    while (true) {
        const auto comma = v.find(',');
        const auto item = trim(v.substr(0, comma));
        if (!item.empty()) f(item);
        if (comma == std::string_view::npos) break;
        v.remove_prefix(comma + 1);
    }
}

std::string num(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    // shortest form that still round-trips
    for (int prec = 1; prec < 17; ++prec) {
        char shorter[40];
        std::snprintf(shorter, sizeof shorter, "%.*g", prec, x);
        if (std::strtod(shorter, nullptr) == x) return shorter;
    }
    return buf;
}

}  // namespace

ConfigError::ConfigError(std::string origin, int line, std::string key, const std::string& what)
    : std::runtime_error([&] {
          std::string msg;
          if (!origin.empty()) msg += origin + ":";
          if (line > 0) msg += std::to_string(line) + ":";
          if (!msg.empty()) msg += " ";
          if (!key.empty()) msg += key + ": ";
          return msg + what;
      }()),
      origin_(std::move(origin)),
      line_(line),
      key_(std::move(key)) {}

void SnrGrid::validate() const {
    if (!(step_db > 0.0)) bad("snr.step_db", "must be > 0");
    if (!(start_db <= stop_db)) bad("snr.start_db", "must not exceed snr.stop_db");
}

std::vector<double> SnrGrid::points() const {
    validate();
    std::vector<double> pts;
    const auto n = static_cast<long>(std::floor((stop_db - start_db) / step_db + 1e-9));
    for (long i = 0; i <= n; ++i) pts.push_back(start_db + static_cast<double>(i) * step_db);
    return pts;
}

const std::vector<std::string>& config_keys() {
    static const std::vector<std::string> keys{
        "geometry.length_m",        "geometry.wavelength_m",   "geometry.tx_waist_m",
        "geometry.rx_aperture_radius_m", "geometry.cn2",       "turbulence.rytov_variance",
        "pointing.enabled",         "pointing.sigma_e_m",      "pointing.model",
        "ber.target",               "snr.start_db",            "snr.stop_db",
        "snr.step_db",              "constellations",          "series.max_terms",
        "series.singularity_eps",   "series.convergence_tol",  "mc.n_samples",
        "mc.seed",                  "mc.workers",              "output.path",
        "required_snr.targets",     "required_snr.weak_rytov", "required_snr.strong_rytov",
    };
    return keys;
}

void RunConfig::set(std::string_view key, std::string_view value) {
    value = trim(value);
    auto& g = geometry;
    if (key == "geometry.length_m") {
        g.length_m = to_positive(key, value);
    } else if (key == "geometry.wavelength_m") {
        g.wavelength_m = to_positive(key, value);
    } else if (key == "geometry.tx_waist_m") {
        g.tx_waist_m = to_positive(key, value);
    } else if (key == "geometry.rx_aperture_radius_m") {
        g.rx_aperture_radius_m = to_positive(key, value);
    } else if (key == "geometry.cn2") {
        g.cn2 = to_positive(key, value);
        rytov_variance.reset();
    } else if (key == "turbulence.rytov_variance" || key == "turbulence.sigma_r2") {
        rytov_variance = to_positive(key, value);
    } else if (key == "pointing.enabled") {
        pointing_enabled = to_bool(key, value);
    } else if (key == "pointing.sigma_e_m" || key == "geometry.jitter_sigma_m") {
        g.jitter_sigma_m = to_positive(key, value);
    } else if (key == "pointing.model") {
        try {
            pointing_model = channel::parse_pointing_model(value);
        } catch (const DomainError& e) {
            bad(key, e.what());
        }
    } else if (key == "ber.target") {
        const double t = to_double(key, value);
        if (!(t > 0.0 && t < 0.2)) bad(key, "must lie in (0, 0.2)");
        ber_target = t;
    } else if (key == "snr.start_db") {
        snr.start_db = to_double(key, value);
    } else if (key == "snr.stop_db") {
        snr.stop_db = to_double(key, value);
    } else if (key == "snr.step_db") {
        snr.step_db = to_positive(key, value);
    } else if (key == "constellations") {
        std::vector<int> sizes;
        for_each_item(value, [&](std::string_view item) {
            sizes.push_back(static_cast<int>(to_int(key, item)));
        });
        adapt::ConstellationSet set{sizes};
        try {
            set.validate();
        } catch (const DomainError& e) {
            bad(key, e.what());
        }
        constellations = std::move(set);
    } else if (key == "series.max_terms") {
        series.max_terms = static_cast<int>(to_count(key, value));
    } else if (key == "series.singularity_eps") {
        series.singularity_eps = to_positive(key, value);
    } else if (key == "series.convergence_tol") {
        series.convergence_tol = to_positive(key, value);
    } else if (key == "mc.n_samples") {
        mc.n_samples = to_count(key, value);
    } else if (key == "mc.seed") {
        const long long s = to_int(key, value);
        if (s < 0) bad(key, "must be non-negative");
        mc.seed = static_cast<std::uint64_t>(s);
    } else if (key == "mc.workers") {
        mc.workers = static_cast<unsigned>(to_count(key, value));
    } else if (key == "output.path") {
        output_path = std::string(value);
    } else if (key == "required_snr.targets") {
        std::vector<double> t;
        for_each_item(value, [&](std::string_view item) { t.push_back(to_positive(key, item)); });
        if (t.empty()) bad(key, "needs at least one target");
        required_snr_targets = std::move(t);
    } else if (key == "required_snr.weak_rytov") {
        weak_rytov = to_positive(key, value);
    } else if (key == "required_snr.strong_rytov") {
        strong_rytov = to_positive(key, value);
    } else {
        bad(key, "unknown key");
    }
}

void RunConfig::validate() const {
    try {
        geometry.validate();
        series.validate();
        mc.validate();
        constellations.validate();
    } catch (const DomainError& e) {
        throw ConfigError("", 0, "", e.what());
    }
    snr.validate();
    if (rytov_variance && !(*rytov_variance > 0.0)) bad("turbulence.rytov_variance", "must be > 0");
}

channel::LinkGeometry RunConfig::resolved_geometry() const {
    channel::LinkGeometry g = geometry;
    if (rytov_variance) g.cn2 = channel::cn2_for_rytov(*rytov_variance, g);
    return g;
}

channel::ChannelModel RunConfig::model() const {
    const auto g = resolved_geometry();
    const auto t = channel::gg_params(channel::rytov_variance(g));
    if (!pointing_enabled) return channel::ChannelModel::gg_only(t);
    return channel::ChannelModel::gg_pointing(t, channel::pointing_params(g, pointing_model));
}

std::string RunConfig::to_text() const {
    std::ostringstream os;
    auto line = [&](std::string_view k, const std::string& v) { os << k << '=' << v << '\n'; };
    auto list = [](const auto& xs) {
        std::string s;
        for (const auto& x : xs) {
            if (!s.empty()) s += ',';
            s += num(static_cast<double>(x));
        }
        return s;
    };
    line("geometry.length_m", num(geometry.length_m));
    line("geometry.wavelength_m", num(geometry.wavelength_m));
    line("geometry.tx_waist_m", num(geometry.tx_waist_m));
    line("geometry.rx_aperture_radius_m", num(geometry.rx_aperture_radius_m));
    if (rytov_variance) {
        line("turbulence.rytov_variance", num(*rytov_variance));
    } else {
        line("geometry.cn2", num(geometry.cn2));
    }
    line("pointing.enabled", pointing_enabled ? "true" : "false");
    line("pointing.sigma_e_m", num(geometry.jitter_sigma_m));
    line("pointing.model", std::string(channel::to_string(pointing_model)));
    line("ber.target", num(ber_target));
    line("snr.start_db", num(snr.start_db));
    line("snr.stop_db", num(snr.stop_db));
    line("snr.step_db", num(snr.step_db));
    line("constellations", list(constellations.sizes));
    line("series.max_terms", std::to_string(series.max_terms));
    line("series.singularity_eps", num(series.singularity_eps));
    line("series.convergence_tol", num(series.convergence_tol));
    line("mc.n_samples", std::to_string(mc.n_samples));
    line("mc.seed", std::to_string(mc.seed));
    line("mc.workers", std::to_string(mc.workers));
    if (!output_path.empty()) line("output.path", output_path);
    line("required_snr.targets", list(required_snr_targets));
    line("required_snr.weak_rytov", num(weak_rytov));
    line("required_snr.strong_rytov", num(strong_rytov));
    return os.str();
}

RunConfig RunConfig::parse(std::string_view text, const std::string& origin) {
    RunConfig cfg;
    int lineno = 0;
    while (!text.empty()) {
        const auto nl = text.find('\n');
        std::string_view raw = text.substr(0, nl);
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
        ++lineno;
        if (const auto hash = raw.find('#'); hash != std::string_view::npos) raw = raw.substr(0, hash);
        const auto ln = trim(raw);
        if (ln.empty()) continue;
        const auto eq = ln.find('=');
        if (eq == std::string_view::npos) {
            throw ConfigError(origin, lineno, "", "expected key=value, got '" + std::string(ln) + "'");
        }
        const auto key = trim(ln.substr(0, eq));
        try {
            cfg.set(key, ln.substr(eq + 1));
        } catch (const ConfigError& e) {
            throw ConfigError(origin, lineno, e.key(),
                              std::string(e.what()).substr(e.key().empty() ? 0 : e.key().size() + 2));
        }
    }
    return cfg;
}

RunConfig RunConfig::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError(path.string(), 0, "", "cannot open config file");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse(ss.str(), path.string());
}

}  // namespace fso::cli
