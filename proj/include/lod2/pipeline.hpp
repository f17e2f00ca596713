#pragma once

#include <optional>
#include <string>
#include <vector>

#include "lod2/eval.hpp"
#include "lod2/fusion.hpp"
#include "lod2/manifest.hpp"
#include "lod2/mesh.hpp"
#include "lod2/synth.hpp"

namespace lod2 {

struct PipelineConfig {
    double fusion_threshold = 0.15;
    int min_component_area = 40;
    PolygonConfig polygon;
    DecomposeConfig decompose;
    AffinityConfig affinity;
    FitConfig fit;
    double eval_tol = 2.0;

    void validate() const;
};

// Flat JSON object; unknown keys rejected. Missing keys keep defaults.
PipelineConfig load_config(const std::string& path);
void save_config(const PipelineConfig& cfg, const std::string& path);
std::string dump_config(const PipelineConfig& cfg);

struct PipelineResult {
    ModelManifest manifest;
    std::vector<BuildingPolygon> polygons;
    std::vector<BuildingRectangle> rectangles;
    std::optional<EvalReport> report;
};

// fuse -> extract -> decompose -> refine orientation (OSM then graph cut)
// -> fit -> refine type -> merge. Per-building degenerate geometry skips
// that building with a warning; artifacts are written to artifact_dir when
// it is non-empty.
PipelineResult run_pipeline(const GeoRaster& dsm, const GeoRaster& ortho,
                            const GeoRaster& mask,
                            const std::vector<FusionCandidate>* candidates,
                            const std::vector<RoadVector>* roads,
                            const PipelineConfig& cfg,
                            const GeoRaster* gt_mask = nullptr,
                            const GeoRaster* gt_height = nullptr,
                            const std::string& artifact_dir = "");

void write_polygons_geojson(const std::vector<BuildingPolygon>& polygons,
                            const std::string& path);
std::vector<BuildingPolygon> read_polygons_geojson(const std::string& path);

}  // namespace lod2
