#pragma once

#include <optional>
#include <vector>

#include "lod2/refine.hpp"
#include "lod2/roof.hpp"

namespace lod2 {

// Table-style merged roof-type lookup; nullopt means the pair never merges
// (pyramid with pyramid).
std::optional<RoofType> merged_type(RoofType a, RoofType b);

// Joint roof-type labeling (5 labels); changed models are refit with their
// new type. Footprints, centers and orientations are untouched.
std::vector<RoofModel> refine_types(const std::vector<RoofModel>& models,
                                    const GeoRaster& dsm, const AffinityConfig& cfg,
                                    const FitConfig& fit_cfg = {});

// A reconstructed building: one rectangle model, or several merged into a
// rectilinear footprint fitted in the dominant member's frame.
struct SceneModel {
    RoofModel model;
    std::vector<int> members;       // source rectangle ids
    std::vector<Vec2> footprint;    // CCW world ring
    bool merged = false;
};

SceneModel scene_model_from(const RoofModel& model);

// Greedy pairwise merging (smallest color+height distance first) of models
// that pass the adjacency criteria (rectangle-closure rule excluded) and
// whose types combine per the decision matrix.
std::vector<SceneModel> merge_models(const std::vector<RoofModel>& models,
                                     const GeoRaster& dsm, const GeoRaster& ortho,
                                     const DecomposeConfig& cfg,
                                     const FitConfig& fit_cfg = {});

// Outline of the union of two boxes that are axis-aligned in a common frame;
// empty when the union is disconnected. Exposed for testing.
struct FrameRect {
    double u0, u1, v0, v1;
};
std::vector<Vec2> rectilinear_union_outline(const FrameRect& a, const FrameRect& b);

}  // namespace lod2
