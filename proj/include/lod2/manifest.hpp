#pragma once

#include <string>
#include <vector>

#include "lod2/merge.hpp"

namespace lod2 {

struct SceneGeoref {
    int width = 0, height = 0;
    double cell_size = 0.5;
    double origin_x = 0.0, origin_y = 0.0;
};

struct ModelManifest {
    int version = 1;
    SceneGeoref georef;
    std::vector<SceneModel> buildings;
};

SceneGeoref georef_of(const GeoRaster& raster);

void write_manifest(const ModelManifest& manifest, const std::string& path);
ModelManifest read_manifest(const std::string& path);

}  // namespace lod2
