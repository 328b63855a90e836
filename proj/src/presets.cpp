#include "fso/presets.hpp"

namespace fso::presets {

double rytov_of(Turbulence t) {
    switch (t) {
        case Turbulence::Weak: return 0.4;
        case Turbulence::Moderate: return 1.0;
        case Turbulence::Strong: return 2.0;
    }
    return 0.0;
}

std::string_view name(Turbulence t) {
    switch (t) {
        case Turbulence::Weak: return "weak";
        case Turbulence::Moderate: return "moderate";
        case Turbulence::Strong: return "strong";
    }
    return "?";
}

channel::LinkGeometry reference_geometry(Turbulence t) {
    channel::LinkGeometry g;
    g.cn2 = channel::cn2_for_rytov(rytov_of(t), g);
    return g;
}

channel::ChannelModel reference_model(Turbulence t, bool pointing, channel::PointingModel model) {
    const auto turb = channel::gg_params(rytov_of(t));
    if (!pointing) return channel::ChannelModel::gg_only(turb);
    return channel::ChannelModel::gg_pointing(
        turb, channel::pointing_params(reference_geometry(t), model));
}

std::vector<NamedModel> reference_models() {
    std::vector<NamedModel> out;
    for (bool pe : {false, true}) {
        for (Turbulence t : kAllTurbulence) {
            out.push_back({std::string(name(t)) + (pe ? "_pe" : "_gg"), t, pe, reference_model(t, pe)});
        }
    }
    return out;
}

}  // namespace fso::presets
