#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "lod2/manifest.hpp"
#include "lod2/refine.hpp"

namespace lod2 {

enum class OrientationPolicy { SharedPerBlock, Independent };

struct SynthSpec {
    std::uint32_t seed = 1;
    double scene_size = 256.0;  // meters, square
    double cell_size = 0.5;
    int min_buildings = 5;
    int max_buildings = 10;
    double min_length = 12.0, max_length = 24.0;
    double min_width = 8.0, max_width = 12.0;
    std::array<double, 5> type_mix = {0.2, 0.2, 0.2, 0.2, 0.2};
    OrientationPolicy orientation_policy = OrientationPolicy::SharedPerBlock;
    double block_orientation = 90.0;  // used by the shared policy
    double dsm_noise_sigma = 0.0;     // meters
    int mask_perturb_cells = 0;       // erode/dilate radius
    double split_probability = 0.0;   // emit a building as two mask instances
    double gap = 2.0;                 // minimum footprint separation, meters
    bool with_road = true;

    void validate() const;
};

struct SynthScene {
    std::vector<SceneModel> truth;
    GeoRaster dsm;
    GeoRaster ortho;
    GeoRaster mask;  // instance labels
    std::vector<RoadVector> roads;
    double terrain_base = 0.0, terrain_gx = 0.0, terrain_gy = 0.0;

    double terrain_at(const Vec2& p) const {
        return terrain_base + terrain_gx * p.x + terrain_gy * p.y;
    }
};

SynthScene generate(const SynthSpec& spec);

}  // namespace lod2
