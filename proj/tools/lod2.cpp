#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "lod2/pipeline.hpp"
#include "lod2/raster_io.hpp"

namespace fs = std::filesystem;
using namespace lod2;

namespace {

struct Options {
    std::string dsm, ortho, mask, candidates, roads, gt_mask, gt_height;
    std::string config, out, polygons, rectangles, models;
    unsigned seed = 1;
    bool dump_config = false;
    // synth knobs
    double size = 256.0, noise = 0.0, split = 0.0;
    int buildings = 8, perturb = 0;
};

void add_shared(CLI::App* cmd, Options& opt) {
    cmd->add_option("--dsm", opt.dsm);
    cmd->add_option("--ortho", opt.ortho);
    cmd->add_option("--mask", opt.mask);
    cmd->add_option("--candidates", opt.candidates);
    cmd->add_option("--roads", opt.roads);
    cmd->add_option("--gt-mask", opt.gt_mask);
    cmd->add_option("--gt-height", opt.gt_height);
    cmd->add_option("--config", opt.config);
    cmd->add_option("--out", opt.out);
    cmd->add_option("--seed", opt.seed);
    cmd->add_flag("--dump-config", opt.dump_config);
}

PipelineConfig effective_config(const Options& opt) {
    PipelineConfig cfg = opt.config.empty() ? PipelineConfig{} : load_config(opt.config);
    if (opt.dump_config) std::cout << dump_config(cfg);
    return cfg;
}

std::string require(const std::string& value, const char* flag) {
    if (value.empty())
        throw InvalidInputError(std::string("missing required flag ") + flag);
    return value;
}

int dispatch(const std::string& sub, Options& opt) {
    PipelineConfig cfg = effective_config(opt);

    if (sub == "synth") {
        SynthSpec spec;
        spec.seed = opt.seed;
        spec.scene_size = opt.size;
        spec.min_buildings = spec.max_buildings = opt.buildings;
        spec.dsm_noise_sigma = opt.noise;
        spec.mask_perturb_cells = opt.perturb;
        spec.split_probability = opt.split;
        spec.type_mix = {0.2, 0.2, 0.2, 0.2, 0.2};
        SynthScene scene = generate(spec);
        fs::path dir = require(opt.out, "--out");
        fs::create_directories(dir);
        write_raster(scene.dsm, (dir / "dsm.asc").string());
        write_raster(scene.ortho, (dir / "ortho.ppm").string());
        write_raster(scene.mask, (dir / "mask.pgm").string());
        write_roads_geojson(scene.roads, (dir / "roads.geojson").string());
        ModelManifest truth{1, georef_of(scene.dsm), scene.truth};
        write_manifest(truth, (dir / "truth.json").string());
        auto [gt_mask, gt_height] = rasterize_models(scene.truth, scene.dsm);
        write_raster(gt_mask, (dir / "gt_mask.pgm").string());
        write_raster(gt_height, (dir / "gt_height.asc").string());
        return 0;
    }
    if (sub == "fuse") {
        GeoRaster mask = read_raster(require(opt.mask, "--mask"));
        std::vector<FusionCandidate> cands;
        if (!opt.candidates.empty()) cands = read_candidates_json(opt.candidates);
        GeoRaster fused =
            fuse_masks(mask, cands, cfg.fusion_threshold, cfg.min_component_area);
        write_raster(fused, require(opt.out, "--out"));
        return 0;
    }
    if (sub == "extract") {
        GeoRaster mask = read_raster(require(opt.mask, "--mask"));
        std::optional<GeoRaster> ortho;
        if (!opt.ortho.empty()) ortho = read_raster(opt.ortho);
        std::vector<BuildingPolygon> polys;
        for (const auto& region : connected_components(mask, cfg.min_component_area)) {
            try {
                BuildingPolygon poly = extract_polygon(
                    region, mask, ortho ? &*ortho : nullptr, nullptr, cfg.polygon);
                poly.instance_id = region.instance_id;
                polys.push_back(std::move(poly));
            } catch (const DegenerateGeometryError& e) {
                std::cerr << "warning: skipping instance " << region.instance_id << ": "
                          << e.what() << "\n";
            }
        }
        write_polygons_geojson(polys, require(opt.out, "--out"));
        return 0;
    }
    if (sub == "decompose") {
        GeoRaster dsm = read_raster(require(opt.dsm, "--dsm"));
        GeoRaster ortho = read_raster(require(opt.ortho, "--ortho"));
        auto polys = read_polygons_geojson(require(opt.polygons, "--polygons"));
        if (!opt.roads.empty())
            polys = snap_polygon_orientations(polys, read_roads_geojson(opt.roads));
        std::vector<BuildingRectangle> rects;
        int next_id = 1;
        for (const auto& poly : polys) {
            try {
                auto part = merge_pass(decompose(poly, dsm, ortho, cfg.decompose), dsm,
                                       ortho, cfg.decompose);
                for (auto& r : part) {
                    r.id = next_id++;
                    rects.push_back(r);
                }
            } catch (const DegenerateGeometryError& e) {
                std::cerr << "warning: skipping instance " << poly.instance_id << ": "
                          << e.what() << "\n";
            }
        }
        write_rectangles_json(rects, require(opt.out, "--out"));
        return 0;
    }
    if (sub == "refine") {
        auto rects = read_rectangles_json(require(opt.rectangles, "--rectangles"));
        std::vector<BuildingPolygon> polys;
        if (!opt.polygons.empty()) polys = read_polygons_geojson(opt.polygons);
        if (!opt.roads.empty())
            rects = refine_with_osm(rects, polys, read_roads_geojson(opt.roads));
        rects = refine_orientations(rects, cfg.affinity);
        write_rectangles_json(rects, require(opt.out, "--out"));
        return 0;
    }
    if (sub == "fit") {
        GeoRaster dsm = read_raster(require(opt.dsm, "--dsm"));
        auto rects = read_rectangles_json(require(opt.rectangles, "--rectangles"));
        ModelManifest manifest;
        manifest.georef = georef_of(dsm);
        for (const auto& rect : rects) {
            try {
                manifest.buildings.push_back(scene_model_from(fit_model(rect, dsm, cfg.fit)));
            } catch (const DegenerateGeometryError& e) {
                std::cerr << "warning: skipping rectangle " << rect.id << ": " << e.what()
                          << "\n";
            }
        }
        write_manifest(manifest, require(opt.out, "--out"));
        return 0;
    }
    if (sub == "merge") {
        GeoRaster dsm = read_raster(require(opt.dsm, "--dsm"));
        GeoRaster ortho = read_raster(require(opt.ortho, "--ortho"));
        ModelManifest manifest = read_manifest(require(opt.models, "--models"));
        std::vector<RoofModel> models;
        for (const auto& sm : manifest.buildings) models.push_back(sm.model);
        models = refine_types(models, dsm, cfg.affinity, cfg.fit);
        ModelManifest out;
        out.georef = manifest.georef;
        out.buildings = merge_models(models, dsm, ortho, cfg.decompose, cfg.fit);
        write_manifest(out, require(opt.out, "--out"));
        return 0;
    }
    if (sub == "eval") {
        ModelManifest manifest = read_manifest(require(opt.models, "--models"));
        GeoRaster gt_mask = read_raster(require(opt.gt_mask, "--gt-mask"));
        GeoRaster gt_height = read_raster(require(opt.gt_height, "--gt-height"));
        auto [pred_mask, pred_height] = rasterize_models(manifest.buildings, gt_mask);
        EvalReport rep = evaluate(pred_mask, pred_height, gt_mask, gt_height, cfg.eval_tol);
        std::cout << format_report_table({rep});
        if (!opt.out.empty()) write_report_json(rep, opt.out);
        return 0;
    }
    if (sub == "pipeline") {
        GeoRaster dsm = read_raster(require(opt.dsm, "--dsm"));
        GeoRaster ortho = read_raster(require(opt.ortho, "--ortho"));
        GeoRaster mask = read_raster(require(opt.mask, "--mask"));
        std::vector<FusionCandidate> cands;
        if (!opt.candidates.empty()) cands = read_candidates_json(opt.candidates);
        std::vector<RoadVector> roads;
        if (!opt.roads.empty()) roads = read_roads_geojson(opt.roads);
        std::optional<GeoRaster> gt_mask, gt_height;
        if (!opt.gt_mask.empty()) gt_mask = read_raster(opt.gt_mask);
        if (!opt.gt_height.empty()) gt_height = read_raster(opt.gt_height);
        std::string dir = require(opt.out, "--out");
        fs::create_directories(dir);
        PipelineResult res = run_pipeline(
            dsm, ortho, mask, opt.candidates.empty() ? nullptr : &cands,
            opt.roads.empty() ? nullptr : &roads, cfg, gt_mask ? &*gt_mask : nullptr,
            gt_height ? &*gt_height : nullptr, dir);
        write_manifest(res.manifest, dir + "/models.json");
        export_obj(res.manifest, dir + "/models.obj");
        if (res.report) std::cout << format_report_table({*res.report});
        return 0;
    }
    if (sub == "export") {
        ModelManifest manifest = read_manifest(require(opt.models, "--models"));
        export_obj(manifest, require(opt.out, "--out"));
        return 0;
    }
    throw InvalidInputError("unknown subcommand " + sub);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"LoD-2 building reconstruction from DSM + orthophoto + masks"};
    app.require_subcommand(0, 1);
    Options opt;

    const char* names[] = {"synth", "fuse", "extract", "decompose", "refine",
                           "fit",   "merge", "eval",   "pipeline",  "export"};
    for (const char* name : names) {
        CLI::App* cmd = app.add_subcommand(name);
        add_shared(cmd, opt);
        cmd->add_option("--polygons", opt.polygons);
        cmd->add_option("--rectangles", opt.rectangles);
        cmd->add_option("--models", opt.models);
        if (std::string(name) == "synth") {
            cmd->add_option("--size", opt.size);
            cmd->add_option("--buildings", opt.buildings);
            cmd->add_option("--noise", opt.noise);
            cmd->add_option("--perturb", opt.perturb);
            cmd->add_option("--split", opt.split);
        }
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }

    auto subs = app.get_subcommands();
    if (subs.empty()) {
        std::cout << app.help();
        return 0;
    }
    try {
        return dispatch(subs.front()->get_name(), opt);
    } catch (const InvalidInputError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const StageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}
