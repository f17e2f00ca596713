#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <random>

#include "lod2/fusion.hpp"

using namespace lod2;

namespace {

FusionCandidate make_candidate(int rmin, int cmin, int rmax, int cmax, int filled) {
    FusionCandidate cand;
    cand.row_min = rmin;
    cand.col_min = cmin;
    cand.row_max = rmax;
    cand.col_max = cmax;
    std::vector<std::pair<int, int>> cells;
    for (int r = rmin; r <= rmax && filled > 0; ++r)
        for (int c = cmin; c <= cmax && filled > 0; ++c, --filled) cells.push_back({r, c});
    cand.cells = PixelRegion::from_cells(std::move(cells));
    return cand;
}

}  // namespace

TEST_CASE("decision weight matches exact rational evaluation on 50 cases") {
    std::mt19937 rng(11);
    for (int trial = 0; trial < 50; ++trial) {
        int h = 1 + static_cast<int>(rng() % 12);
        int w = 1 + static_cast<int>(rng() % 12);
        long long bbox = static_cast<long long>(h) * w;
        int filled = 1 + static_cast<int>(rng() % bbox);
        FusionCandidate cand = make_candidate(2, 3, 2 + h - 1, 3 + w - 1, filled);
        // weight = class area / bbox area squared, evaluated as exact integers
        long long num = filled;
        long long den = bbox * bbox;
        CHECK(decision_weight(cand) ==
              doctest::Approx(static_cast<double>(num) / static_cast<double>(den))
                  .epsilon(1e-12));
    }
}

TEST_CASE("threshold behavior at the 0.1 / 0.2 endpoints is strict") {
    // 2x2 bbox fully covered: weight = 4 / 16 = 0.25
    FusionCandidate cand = make_candidate(0, 0, 1, 1, 4);
    CHECK(decision_weight(cand) == doctest::Approx(0.25));

    GeoRaster semantic(8, 8, BandKind::Label, 0.5);
    // weight 0.25 >= 0.25 accepts (>= rule); > 0.25 threshold rejects
    GeoRaster accepted = fuse_masks(semantic, {cand}, 0.25, 1);
    CHECK(accepted.at(0, 0) != 0.0);
    GeoRaster rejected = fuse_masks(semantic, {cand}, 0.2500001, 1);
    CHECK(rejected.at(0, 0) == 0.0);
}

TEST_CASE("accepted candidates erase the semantic mask inside their bbox") {
    GeoRaster semantic(10, 10, BandKind::Label, 0.5);
    for (int r = 0; r < 6; ++r)
        for (int c = 0; c < 6; ++c) semantic.at(r, c) = 1;
    // candidate bbox covers rows/cols 0..3, its cells only rows/cols 0..1
    FusionCandidate cand = make_candidate(0, 0, 3, 3, 0);
    cand.cells = PixelRegion::from_cells({{0, 0}, {0, 1}, {1, 0}, {1, 1}});
    GeoRaster fused = fuse_masks(semantic, {cand}, 0.01, 1);
    CHECK(fused.at(0, 0) != 0.0);
    CHECK(fused.at(2, 2) == 0.0);  // erased bbox interior, not in cells
    CHECK(fused.at(5, 5) != 0.0);  // leftover semantic area survives
    CHECK(fused.at(0, 0) != fused.at(5, 5));  // distinct instances
}

TEST_CASE("overlapping candidates stamp in descending weight order") {
    GeoRaster semantic(8, 8, BandKind::Label, 0.5);
    FusionCandidate heavy = make_candidate(0, 0, 1, 1, 4);    // weight 0.25
    FusionCandidate light = make_candidate(0, 0, 3, 3, 8);    // weight 8/256
    GeoRaster fused = fuse_masks(semantic, {light, heavy}, 0.01, 1);
    // the lighter candidate stamps first, the heavier overwrites the overlap
    double heavy_id = fused.at(0, 0);
    CHECK(heavy_id != 0.0);
    double light_id = fused.at(1, 3);
    CHECK(light_id != 0.0);
    CHECK(heavy_id != light_id);
}

TEST_CASE("small leftover components are dropped") {
    GeoRaster semantic(8, 8, BandKind::Label, 0.5);
    semantic.at(7, 7) = 1;  // 1-cell blob
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) semantic.at(r, c) = 1;
    GeoRaster fused = fuse_masks(semantic, {}, 0.5, 4);
    CHECK(fused.at(7, 7) == 0.0);
    CHECK(fused.at(1, 1) != 0.0);
}

TEST_CASE("fused raster keeps distinct ids for touching instances") {
    GeoRaster semantic(6, 6, BandKind::Label, 0.5);
    FusionCandidate left = make_candidate(0, 0, 5, 2, 18);
    FusionCandidate right = make_candidate(0, 3, 5, 5, 18);
    GeoRaster fused = fuse_masks(semantic, {left, right}, 0.01, 1);
    CHECK(fused.at(2, 1) != 0.0);
    CHECK(fused.at(2, 4) != 0.0);
    CHECK(fused.at(2, 1) != fused.at(2, 4));
}

TEST_CASE("candidates json round trip") {
    std::string path =
        (std::filesystem::temp_directory_path() / "lod2_cands.json").string();
    std::vector<FusionCandidate> cands{make_candidate(1, 2, 3, 5, 7),
                                       make_candidate(0, 0, 2, 2, 9)};
    write_candidates_json(cands, path);
    auto back = read_candidates_json(path);
    REQUIRE(back.size() == 2);
    for (size_t i = 0; i < 2; ++i) {
        CHECK(back[i].row_min == cands[i].row_min);
        CHECK(back[i].col_max == cands[i].col_max);
        CHECK(back[i].area_class() == cands[i].area_class());
        CHECK(decision_weight(back[i]) == doctest::Approx(decision_weight(cands[i])));
    }
    std::remove(path.c_str());
}
