#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "lod2/pipeline.hpp"

using namespace lod2;

namespace {

std::string tmp_path(const char* name) {
    return (std::filesystem::temp_directory_path() / name).string();
}

SynthScene small_scene(std::uint32_t seed) {
    SynthSpec spec;
    spec.seed = seed;
    spec.scene_size = 128.0;
    spec.min_buildings = 4;
    spec.max_buildings = 6;
    return generate(spec);
}

}  // namespace

TEST_CASE("synthetic scenes are deterministic for a fixed seed") {
    SynthScene a = small_scene(3);
    SynthScene b = small_scene(3);
    REQUIRE(a.truth.size() == b.truth.size());
    for (size_t i = 0; i < a.truth.size(); ++i) {
        CHECK(a.truth[i].model.rect.center.x == b.truth[i].model.rect.center.x);
        CHECK(a.truth[i].model.z_ridge == b.truth[i].model.z_ridge);
        CHECK(a.truth[i].model.roof_type == b.truth[i].model.roof_type);
    }
    CHECK(a.dsm.data() == b.dsm.data());
    CHECK(a.mask.data() == b.mask.data());
    SynthScene c = small_scene(4);
    CHECK(a.dsm.data() != c.dsm.data());
}

TEST_CASE("config round trips and rejects unknown keys") {
    PipelineConfig cfg;
    cfg.fusion_threshold = 0.22;
    cfg.decompose.gap_threshold = 0.35;
    cfg.affinity.lambda = 2.5;
    cfg.fit.z_step = 0.1;
    std::string path = tmp_path("lod2_cfg.json");
    save_config(cfg, path);
    PipelineConfig back = load_config(path);
    CHECK(back.fusion_threshold == doctest::Approx(0.22));
    CHECK(back.decompose.gap_threshold == doctest::Approx(0.35));
    CHECK(back.affinity.lambda == doctest::Approx(2.5));
    CHECK(back.fit.z_step == doctest::Approx(0.1));
    CHECK(dump_config(back) == dump_config(cfg));

    std::ofstream(path) << "{\"no_such_option\": 1}\n";
    CHECK_THROWS_AS(load_config(path), InvalidInputError);
    std::ofstream(path) << "{\"fusion_threshold\": -2}\n";
    CHECK_THROWS_AS(load_config(path), InvalidInputError);
    std::remove(path.c_str());
}

TEST_CASE("polygons geojson round trip") {
    BuildingPolygon poly;
    poly.instance_id = 7;
    poly.vertices = {{0, 0}, {10, 0}, {10, 6}, {0, 6}};
    poly.main_orientations = {0.0, 45.0};
    poly.irregular = true;
    std::string path = tmp_path("lod2_polys.json");
    write_polygons_geojson({poly}, path);
    auto back = read_polygons_geojson(path);
    REQUIRE(back.size() == 1);
    CHECK(back[0].instance_id == 7);
    REQUIRE(back[0].vertices.size() == 4);
    CHECK(back[0].vertices[2].x == doctest::Approx(10.0));
    CHECK(back[0].vertices[2].y == doctest::Approx(6.0));
    REQUIRE(back[0].main_orientations.size() == 2);
    CHECK(back[0].main_orientations[1] == doctest::Approx(45.0));
    CHECK(back[0].irregular);
    std::remove(path.c_str());
}

TEST_CASE("manifest json round trips every model field") {
    SynthScene scene = small_scene(5);
    ModelManifest manifest;
    manifest.georef = georef_of(scene.dsm);
    manifest.buildings = scene.truth;
    std::string path = tmp_path("lod2_manifest.json");
    write_manifest(manifest, path);
    ModelManifest back = read_manifest(path);
    CHECK(back.version == manifest.version);
    CHECK(back.georef.width == manifest.georef.width);
    CHECK(back.georef.cell_size == doctest::Approx(manifest.georef.cell_size));
    REQUIRE(back.buildings.size() == manifest.buildings.size());
    for (size_t i = 0; i < back.buildings.size(); ++i) {
        const auto& a = back.buildings[i];
        const auto& b = manifest.buildings[i];
        CHECK(a.model.roof_type == b.model.roof_type);
        CHECK(a.model.z_eave == doctest::Approx(b.model.z_eave));
        CHECK(a.model.z_ridge == doctest::Approx(b.model.z_ridge));
        CHECK(a.model.hipl == doctest::Approx(b.model.hipl));
        CHECK(a.model.rect.orientation == doctest::Approx(b.model.rect.orientation));
        CHECK(a.model.terrain_z == doctest::Approx(b.model.terrain_z));
        CHECK(a.members == b.members);
        CHECK(a.merged == b.merged);
        REQUIRE(a.footprint.size() == b.footprint.size());
    }
    std::remove(path.c_str());
}

TEST_CASE("end-to-end pipeline reconstructs a small clean scene") {
    SynthScene scene = small_scene(11);
    PipelineConfig cfg;
    auto [gt_mask, gt_height] = rasterize_models(scene.truth, scene.dsm);
    PipelineResult res = run_pipeline(scene.dsm, scene.ortho, scene.mask, nullptr,
                                      &scene.roads, cfg, &gt_mask, &gt_height);
    CHECK(res.manifest.buildings.size() == scene.truth.size());
    REQUIRE(res.report.has_value());
    CHECK(res.report->iou2 >= 0.9);
    CHECK(res.report->iou3 >= 0.9);
    // every reconstructed solid is watertight
    for (const auto& sm : res.manifest.buildings)
        CHECK(mesh_is_watertight(building_mesh(sm)));
}

TEST_CASE("pipeline runs are byte-identical") {
    SynthScene scene = small_scene(9);
    PipelineConfig cfg;
    std::string pa = tmp_path("lod2_run_a.json"), pb = tmp_path("lod2_run_b.json");
    for (const std::string& p : {pa, pb}) {
        PipelineResult res = run_pipeline(scene.dsm, scene.ortho, scene.mask, nullptr,
                                          &scene.roads, cfg);
        write_manifest(res.manifest, p);
    }
    auto slurp = [](const std::string& p) {
        std::ifstream in(p, std::ios::binary);
        return std::string((std::istreambuf_iterator<char>(in)), {});
    };
    std::string a = slurp(pa);
    CHECK_FALSE(a.empty());
    CHECK(a == slurp(pb));
    std::remove(pa.c_str());
    std::remove(pb.c_str());
}
