#pragma once

#include <string>
#include <utility>
#include <vector>

#include "lod2/merge.hpp"
#include "lod2/raster.hpp"

namespace lod2 {

struct EvalReport {
    long long tp = 0, fp = 0, fn = 0, tp3d = 0;
    double iou2 = 0.0, iou3 = 0.0;
    std::string variant = "none";  // none | OSM | GC | OSM+GC
    bool degenerate = false;       // both masks empty
};

// Footprint mask (0/1) and roof-surface height raster on the given grid;
// overlaps resolve to the higher roof.
std::pair<GeoRaster, GeoRaster> rasterize_models(const std::vector<SceneModel>& models,
                                                 const GeoRaster& frame);

EvalReport evaluate(const GeoRaster& pred_mask, const GeoRaster& pred_height,
                    const GeoRaster& gt_mask, const GeoRaster& gt_height,
                    double tol = 2.0);

void write_report_json(const EvalReport& report, const std::string& path);
std::string format_report_table(const std::vector<EvalReport>& reports);

}  // namespace lod2
