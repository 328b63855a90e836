#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "fso/channel.hpp"

// Reference link: 1/3 km at 1550 nm, 1.5 cm Tx waist, 2 cm Rx aperture
// radius, 1 cm jitter, with C_n^2 chosen to hit each Rytov variance.
namespace fso::presets {

enum class Turbulence { Weak, Moderate, Strong };

inline constexpr Turbulence kAllTurbulence[] = {Turbulence::Weak, Turbulence::Moderate,
                                                Turbulence::Strong};

double rytov_of(Turbulence t);
std::string_view name(Turbulence t);

channel::LinkGeometry reference_geometry(Turbulence t);

channel::ChannelModel reference_model(
    Turbulence t, bool pointing,
    channel::PointingModel model = channel::PointingModel::FaridHranilovic);

struct NamedModel {
    std::string name;  // e.g. "weak_gg", "strong_pe"
    Turbulence turbulence;
    bool pointing;
    channel::ChannelModel model;
};

/// The six reference configurations, GG-only rows first.
std::vector<NamedModel> reference_models();

}  // namespace fso::presets
