#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "fso/adapt.hpp"
#include "fso/mc.hpp"

namespace fso::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitNumerical = 3;

/// Bad config file or override. `line` is 0 for command-line overrides.
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string origin, int line, std::string key, const std::string& what);

    const std::string& origin() const { return origin_; }
    int line() const { return line_; }
    const std::string& key() const { return key_; }

private:
    std::string origin_;
    int line_;
    std::string key_;
};

struct SnrGrid {
    double start_db = 0.0;
    double stop_db = 30.0;
    double step_db = 1.0;

    void validate() const;
    std::vector<double> points() const;
};

struct RunConfig {
    channel::LinkGeometry geometry;
    // When set, replaces geometry.cn2 (C_n^2 is back-solved from it).
    std::optional<double> rytov_variance;
    bool pointing_enabled = true;
    channel::PointingModel pointing_model = channel::PointingModel::FaridHranilovic;
    double ber_target = 1e-3;
    SnrGrid snr;
    adapt::ConstellationSet constellations;
    specfun::SeriesConfig series;
    mc::McConfig mc{40000, 1, 1};
    std::string output_path;
    std::vector<double> required_snr_targets{2, 4, 6, 8, 10};
    double weak_rytov = 0.4;
    double strong_rytov = 2.0;

    void validate() const;

    /// Applies one dotted key. Throws ConfigError naming the key.
    void set(std::string_view key, std::string_view value);

    /// Geometry with cn2 resolved from rytov_variance when that is set.
    channel::LinkGeometry resolved_geometry() const;
    channel::ChannelModel model() const;
    adapt::BerPolicy policy() const { return adapt::BerPolicy::from_target(ber_target); }

    /// key=value text that parse() turns back into the same config.
    std::string to_text() const;

    static RunConfig parse(std::string_view text, const std::string& origin = "<string>");
    static RunConfig load(const std::filesystem::path& path);
};

/// Keys accepted by RunConfig::set, in to_text() order.
const std::vector<std::string>& config_keys();

// Each command writes CSV to `out` and returns an exit code.
int cmd_params(const RunConfig& cfg, std::ostream& out);
int cmd_ase(const RunConfig& cfg, std::ostream& out);
int cmd_required_snr(const RunConfig& cfg, std::ostream& out);
int cmd_mc(const RunConfig& cfg, std::ostream& out);

inline constexpr std::string_view kArtifacts[] = {"table2", "table3", "fig2", "fig3", "fig4"};

/// Writes <id>.csv and <id>.dat into `out_dir`. Unknown id -> kExitUsage.
int cmd_reproduce(std::string_view id, const RunConfig& cfg, const std::filesystem::path& out_dir,
                  std::ostream& log);

/// CSV and gnuplot text for one artifact.
struct Artifact {
    std::string csv;
    std::string dat;
    int exit_code = kExitOk;
};
Artifact render_artifact(std::string_view id, const RunConfig& cfg);

/// Full command-line entry point.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace fso::cli
