#include "lod2/pipeline.hpp"

#include <algorithm>
#include <fstream>
#include <iostream>

#include <json.hpp>

#include "lod2/raster_io.hpp"

namespace lod2 {

void PipelineConfig::validate() const {
    if (!(fusion_threshold > 0.0 && fusion_threshold <= 1.0))
        throw InvalidInputError("fusion_threshold must lie in (0, 1]");
    if (min_component_area < 1) throw InvalidInputError("min_component_area must be >= 1");
    if (polygon.simplify_tolerance <= 0 || polygon.orientation_threshold <= 0 ||
        polygon.merge_distance_cells <= 0)
        throw InvalidInputError("polygon config values must be positive");
    decompose.validate();
    affinity.validate();
    fit.validate();
    if (eval_tol <= 0) throw InvalidInputError("eval_tol must be positive");
}

namespace {

template <typename T>
void bind(nlohmann::json& doc, const char* key, T& value, bool writing) {
    if (writing) {
        doc[key] = value;
    } else if (doc.contains(key)) {
        value = doc.at(key).get<T>();
        doc.erase(key);
    }
}

void bind_all(nlohmann::json& doc, PipelineConfig& cfg, bool writing) {
    bind(doc, "fusion_threshold", cfg.fusion_threshold, writing);
    bind(doc, "min_component_area", cfg.min_component_area, writing);
    bind(doc, "simplify_tolerance", cfg.polygon.simplify_tolerance, writing);
    bind(doc, "orientation_threshold", cfg.polygon.orientation_threshold, writing);
    bind(doc, "merge_distance_cells", cfg.polygon.merge_distance_cells, writing);
    bind(doc, "grad_threshold", cfg.decompose.grad_threshold, writing);
    bind(doc, "nms_window", cfg.decompose.nms_window, writing);
    bind(doc, "color_threshold", cfg.decompose.color_threshold, writing);
    bind(doc, "height_threshold", cfg.decompose.height_threshold, writing);
    bind(doc, "gap_threshold", cfg.decompose.gap_threshold, writing);
    bind(doc, "dilate", cfg.decompose.dilate, writing);
    bind(doc, "edge_len_tol", cfg.decompose.edge_len_tol, writing);
    bind(doc, "pyramid_levels", cfg.decompose.pyramid_levels, writing);
    bind(doc, "residual_stop", cfg.decompose.residual_stop, writing);
    bind(doc, "snap_cells", cfg.decompose.snap_cells, writing);
    bind(doc, "sigma", cfg.affinity.sigma, writing);
    bind(doc, "lambda", cfg.affinity.lambda, writing);
    bind(doc, "k_neighbors", cfg.affinity.k_neighbors, writing);
    bind(doc, "max_neighbor_dist", cfg.affinity.max_neighbor_dist, writing);
    bind(doc, "angle_scale", cfg.affinity.angle_scale, writing);
    bind(doc, "z_eave_range", cfg.fit.z_eave_range, writing);
    bind(doc, "z_step", cfg.fit.z_step, writing);
    bind(doc, "ridge_min_above", cfg.fit.ridge_min_above, writing);
    bind(doc, "ridge_max_above", cfg.fit.ridge_max_above, writing);
    bind(doc, "hip_step", cfg.fit.hip_step, writing);
    bind(doc, "polish_step", cfg.fit.polish_step, writing);
    bind(doc, "min_valid_cells", cfg.fit.min_valid_cells, writing);
    bind(doc, "eval_tol", cfg.eval_tol, writing);
}

}  // namespace

PipelineConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidInputError("cannot open " + path);
    nlohmann::json doc = nlohmann::json::parse(in);
    if (!doc.is_object()) throw InvalidInputError("config must be a JSON object");
    PipelineConfig cfg;
    bind_all(doc, cfg, false);
    if (!doc.empty())
        throw InvalidInputError("unknown config key: " + doc.begin().key());
    cfg.validate();
    return cfg;
}

std::string dump_config(const PipelineConfig& cfg) {
    nlohmann::json doc = nlohmann::json::object();
    bind_all(doc, const_cast<PipelineConfig&>(cfg), true);
    return doc.dump(2) + "\n";
}

void save_config(const PipelineConfig& cfg, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw InvalidInputError("cannot write " + path);
    out << dump_config(cfg);
}

void write_polygons_geojson(const std::vector<BuildingPolygon>& polygons,
                            const std::string& path) {
    nlohmann::json features = nlohmann::json::array();
    for (const auto& poly : polygons) {
        nlohmann::json ring = nlohmann::json::array();
        for (const auto& p : poly.vertices) ring.push_back({p.x, p.y});
        if (!poly.vertices.empty())
            ring.push_back({poly.vertices.front().x, poly.vertices.front().y});
        features.push_back(
            {{"type", "Feature"},
             {"properties",
              {{"instance_id", poly.instance_id},
               {"main_orientations", poly.main_orientations},
               {"irregular", poly.irregular}}},
             {"geometry",
              {{"type", "Polygon"}, {"coordinates", nlohmann::json::array({ring})}}}});
    }
    nlohmann::json doc = {{"type", "FeatureCollection"}, {"features", features}};
    std::ofstream out(path);
    if (!out) throw InvalidInputError("cannot write " + path);
    out << doc.dump(2) << "\n";
}

std::vector<BuildingPolygon> read_polygons_geojson(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidInputError("cannot open " + path);
    nlohmann::json doc = nlohmann::json::parse(in);
    std::vector<BuildingPolygon> out;
    for (const auto& feature : doc.at("features")) {
        BuildingPolygon poly;
        const auto& props = feature.at("properties");
        poly.instance_id = props.at("instance_id");
        poly.irregular = props.value("irregular", false);
        if (props.contains("main_orientations"))
            for (const auto& o : props.at("main_orientations"))
                poly.main_orientations.push_back(o);
        const auto& ring = feature.at("geometry").at("coordinates").at(0);
        for (const auto& p : ring) poly.vertices.push_back({p.at(0), p.at(1)});
        if (poly.vertices.size() > 1 &&
            (poly.vertices.front() - poly.vertices.back()).norm() < 1e-12)
            poly.vertices.pop_back();
        out.push_back(std::move(poly));
    }
    return out;
}

PipelineResult run_pipeline(const GeoRaster& dsm, const GeoRaster& ortho,
                            const GeoRaster& mask,
                            const std::vector<FusionCandidate>* candidates,
                            const std::vector<RoadVector>* roads,
                            const PipelineConfig& cfg, const GeoRaster* gt_mask,
                            const GeoRaster* gt_height, const std::string& artifact_dir) {
    cfg.validate();
    if (!dsm.same_grid(ortho) || !dsm.same_grid(mask))
        throw InvalidInputError("pipeline inputs are not co-registered");

    auto artifact = [&](const std::string& name) { return artifact_dir + "/" + name; };

    // stage 1: mask fusion
    GeoRaster fused = fuse_masks(mask, candidates ? *candidates : std::vector<FusionCandidate>{},
                                 cfg.fusion_threshold, cfg.min_component_area);
    if (!artifact_dir.empty()) write_raster(fused, artifact("fused.pgm"));

    // stage 2: polygon extraction
    PipelineResult result;
    std::vector<PixelRegion> regions;
    try {
        regions = connected_components(fused, cfg.min_component_area);
    } catch (const std::exception& e) {
        throw StageError("extract", e.what());
    }
    for (const auto& region : regions) {
        try {
            BuildingPolygon poly =
                extract_polygon(region, fused, &ortho, nullptr, cfg.polygon);
            poly.instance_id = region.instance_id;
            result.polygons.push_back(std::move(poly));
        } catch (const DegenerateGeometryError& e) {
            std::cerr << "warning: skipping instance " << region.instance_id
                      << " at polygon extraction: " << e.what() << "\n";
        }
    }
    if (!artifact_dir.empty())
        write_polygons_geojson(result.polygons, artifact("polygons.geojson"));

    // stage 3: rectangle decomposition + within-polygon merging; road-aligned
    // polygon orientations give rectangle frames the OSM correction up front
    if (roads && !roads->empty())
        result.polygons = snap_polygon_orientations(result.polygons, *roads);
    int next_id = 1;
    for (const auto& poly : result.polygons) {
        try {
            auto rects = decompose(poly, dsm, ortho, cfg.decompose);
            rects = merge_pass(std::move(rects), dsm, ortho, cfg.decompose);
            for (auto& r : rects) {
                r.id = next_id++;
                result.rectangles.push_back(r);
            }
        } catch (const DegenerateGeometryError& e) {
            std::cerr << "warning: skipping instance " << poly.instance_id
                      << " at decomposition: " << e.what() << "\n";
        }
    }
    if (!artifact_dir.empty())
        write_rectangles_json(result.rectangles, artifact("rectangles.json"));

    result.manifest.georef = georef_of(dsm);
    if (result.rectangles.empty()) return result;

    // stage 4: orientation refinement (OSM first, then graph cut)
    try {
        if (roads && !roads->empty())
            result.rectangles = refine_with_osm(result.rectangles, result.polygons, *roads);
        result.rectangles = refine_orientations(result.rectangles, cfg.affinity);
    } catch (const std::exception& e) {
        throw StageError("refine-orient", e.what());
    }
    if (!artifact_dir.empty())
        write_rectangles_json(result.rectangles, artifact("rectangles_refined.json"));

    // stage 5: roof fitting
    std::vector<RoofModel> models;
    for (const auto& rect : result.rectangles) {
        try {
            models.push_back(fit_model(rect, dsm, cfg.fit));
        } catch (const DegenerateGeometryError& e) {
            std::cerr << "warning: skipping rectangle " << rect.id << " at fitting: "
                      << e.what() << "\n";
        }
    }

    // stage 6: roof-type consistency
    try {
        models = refine_types(models, dsm, cfg.affinity, cfg.fit);
    } catch (const std::exception& e) {
        throw StageError("refine-type", e.what());
    }

    // stage 7: model merging
    std::vector<SceneModel> merged;
    try {
        merged = merge_models(models, dsm, ortho, cfg.decompose, cfg.fit);
    } catch (const std::exception& e) {
        throw StageError("merge", e.what());
    }
    result.manifest.buildings = std::move(merged);
    if (!artifact_dir.empty()) write_manifest(result.manifest, artifact("models.json"));

    if (gt_mask && gt_height) {
        auto [pred_mask, pred_height] = rasterize_models(result.manifest.buildings, dsm);
        EvalReport rep = evaluate(pred_mask, pred_height, *gt_mask, *gt_height, cfg.eval_tol);
        rep.variant = roads && !roads->empty() ? "OSM+GC" : "GC";
        result.report = rep;
        if (!artifact_dir.empty()) write_report_json(rep, artifact("report.json"));
    }
    return result;
}

}  // namespace lod2
