#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

#include "lod2/eval.hpp"

using namespace lod2;

namespace {

GeoRaster mask_raster(int size) { return GeoRaster(size, size, BandKind::Label, 1.0); }

GeoRaster height_raster(int size, double fill) {
    GeoRaster h(size, size, BandKind::Elevation, 1.0);
    for (int r = 0; r < size; ++r)
        for (int c = 0; c < size; ++c) h.at(r, c) = fill;
    return h;
}

}  // namespace

TEST_CASE("iou counts match a worked example exactly") {
    // prediction covers columns 0..5, truth columns 3..8, on one 10-cell row:
    // tp = 3, fp = 3, fn = 3 -> iou2 = 1/3. All heights agree -> iou3 = 1/3.
    GeoRaster pm = mask_raster(10), gm = mask_raster(10);
    for (int c = 0; c <= 5; ++c) pm.at(0, c) = 1;
    for (int c = 3; c <= 8; ++c) gm.at(0, c) = 1;
    GeoRaster ph = height_raster(10, 7.0), gh = height_raster(10, 7.0);
    EvalReport rep = evaluate(pm, ph, gm, gh, 2.0);
    CHECK(rep.tp == 3);
    CHECK(rep.fp == 3);
    CHECK(rep.fn == 3);
    CHECK(rep.tp3d == 3);
    CHECK(rep.iou2 == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
    CHECK(rep.iou3 == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
    CHECK_FALSE(rep.degenerate);

    // knock one overlap cell out of height tolerance: tp3d drops, tp does not
    ph.at(0, 4) = 12.0;
    rep = evaluate(pm, ph, gm, gh, 2.0);
    CHECK(rep.tp == 3);
    CHECK(rep.tp3d == 2);
    CHECK(rep.iou3 == doctest::Approx(2.0 / 8.0).epsilon(1e-12));
}

TEST_CASE("iou3 never exceeds iou2 on random raster pairs") {
    std::mt19937 rng(17);
    for (int trial = 0; trial < 100; ++trial) {
        GeoRaster pm = mask_raster(12), gm = mask_raster(12);
        GeoRaster ph = height_raster(12, 0.0), gh = height_raster(12, 0.0);
        for (int r = 0; r < 12; ++r)
            for (int c = 0; c < 12; ++c) {
                pm.at(r, c) = rng() % 2;
                gm.at(r, c) = rng() % 2;
                ph.at(r, c) = (rng() % 100) / 10.0;
                gh.at(r, c) = (rng() % 100) / 10.0;
            }
        EvalReport rep = evaluate(pm, ph, gm, gh, 2.0);
        CHECK(rep.iou3 <= rep.iou2 + 1e-12);
        CHECK(rep.iou2 >= 0.0);
        CHECK(rep.iou2 <= 1.0);
    }
}

TEST_CASE("iou3 is monotone in the height tolerance") {
    std::mt19937 rng(23);
    GeoRaster pm = mask_raster(16), gm = mask_raster(16);
    GeoRaster ph = height_raster(16, 0.0), gh = height_raster(16, 0.0);
    for (int r = 0; r < 16; ++r)
        for (int c = 0; c < 16; ++c) {
            pm.at(r, c) = rng() % 3 != 0;
            gm.at(r, c) = rng() % 3 != 0;
            ph.at(r, c) = (rng() % 100) / 10.0;
            gh.at(r, c) = (rng() % 100) / 10.0;
        }
    double prev = -1.0;
    for (double tol : {0.5, 1.0, 2.0, 4.0}) {
        EvalReport rep = evaluate(pm, ph, gm, gh, tol);
        CHECK(rep.iou3 >= prev);
        prev = rep.iou3;
    }
}

TEST_CASE("empty masks are flagged degenerate") {
    GeoRaster pm = mask_raster(4), gm = mask_raster(4);
    GeoRaster h = height_raster(4, 0.0);
    EvalReport rep = evaluate(pm, h, gm, h);
    CHECK(rep.degenerate);
    CHECK(rep.iou2 == 0.0);
    CHECK(rep.iou3 == 0.0);
}

TEST_CASE("evaluate requires co-registered grids") {
    GeoRaster pm = mask_raster(4);
    GeoRaster gm(5, 5, BandKind::Label, 1.0);
    GeoRaster h = height_raster(4, 0.0);
    CHECK_THROWS_AS(evaluate(pm, h, gm, h), InvalidInputError);
}

TEST_CASE("rasterize_models resolves overlaps to the higher roof") {
    RoofModel tall;
    tall.roof_type = RoofType::Flat;
    tall.rect.center = {8, 8};
    tall.rect.length = 8;
    tall.rect.width = 8;
    tall.rect.orientation = 0;
    tall.z_eave = tall.z_ridge = 12.0;
    tall.apply_type_constraints();
    RoofModel low = tall;
    low.rect.center = {12, 8};
    low.z_eave = low.z_ridge = 6.0;
    low.apply_type_constraints();

    GeoRaster frame(32, 32, BandKind::Elevation, 0.5, 0.0, 16.0);
    auto [mask, height] = rasterize_models({scene_model_from(tall), scene_model_from(low)},
                                           frame);
    // overlap region x in [8, 12]: the 12 m roof wins
    int r, c;
    frame.world_to_cell({10.0, 8.0}, r, c);
    CHECK(mask.at(r, c) == 1.0);
    CHECK(height.at(r, c) == doctest::Approx(12.0));
    // low-only region
    frame.world_to_cell({14.0, 8.0}, r, c);
    CHECK(height.at(r, c) == doctest::Approx(6.0));
    // outside both
    frame.world_to_cell({2.0, 2.0}, r, c);
    CHECK(mask.at(r, c) == 0.0);
    CHECK(height.is_nodata(r, c));
}

TEST_CASE("report json and table round trip the counters") {
    EvalReport rep;
    rep.tp = 30;
    rep.fp = 5;
    rep.fn = 10;
    rep.tp3d = 25;
    rep.iou2 = 30.0 / 45.0;
    rep.iou3 = 25.0 / 40.0;
    rep.variant = "OSM+GC";
    std::string path =
        (std::filesystem::temp_directory_path() / "lod2_report.json").string();
    write_report_json(rep, path);
    std::ifstream in(path);
    std::string text((std::istreambuf_iterator<char>(in)), {});
    CHECK(text.find("\"tp\": 30") != std::string::npos);
    CHECK(text.find("OSM+GC") != std::string::npos);
    std::remove(path.c_str());

    std::string table = format_report_table({rep});
    CHECK(table.find("variant") != std::string::npos);
    CHECK(table.find("OSM+GC") != std::string::npos);
    CHECK(table.find("0.6250") != std::string::npos);
}
