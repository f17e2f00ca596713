#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>

#include "lod2/refine.hpp"

using namespace lod2;

namespace {

BuildingRectangle make_rect(double cx, double cy, double orientation,
                            double length = 12.0, double width = 8.0) {
    BuildingRectangle r;
    r.center = {cx, cy};
    r.length = length;
    r.width = width;
    r.orientation = orientation;
    r.mean_color = {120, 120, 120};
    r.color_std = {5, 5, 5};
    r.mean_height = 8.0;
    return r;
}

RoadVector north_road(double x) {
    RoadVector road;
    road.points = {{x, -100.0}, {x, 100.0}};
    return road;
}

}  // namespace

TEST_CASE("orientation data cost follows 1 - exp(-d/s)") {
    BuildingRectangle r = make_rect(0, 0, 0.0);
    CHECK(orientation_data_cost(r, 0) == doctest::Approx(0.0));

    r.orientation = 2.0;
    CHECK(orientation_data_cost(r, 0, 1.0) ==
          doctest::Approx(1.0 - std::exp(-2.0)).epsilon(1e-12));
    CHECK(orientation_data_cost(r, 0, 10.0) ==
          doctest::Approx(1.0 - std::exp(-0.2)).epsilon(1e-12));

    // circular mod-180 distance: 179 deg is 1 deg away from label 0
    r.orientation = 179.0;
    CHECK(orientation_data_cost(r, 0, 1.0) ==
          doctest::Approx(1.0 - std::exp(-1.0)).epsilon(1e-12));

    CHECK_THROWS_AS(orientation_data_cost(r, 90), InvalidInputError);
    CHECK_THROWS_AS(orientation_data_cost(r, -1), InvalidInputError);
}

TEST_CASE("affinity kernel matches the weighted feature distance") {
    AffinityConfig cfg;
    cfg.sigma = 1.0;
    RectangleFeatures a, b;
    CHECK(affinity(a, b, cfg) == doctest::Approx(1.0));

    // distance exactly 2 sigma^2 gives exp(-1)
    b.ntheta = 2.0;  // dist = sqrt(1 * 4) = 2 = 2 sigma^2
    CHECK(affinity(a, b, cfg) == doctest::Approx(std::exp(-1.0)).epsilon(1e-12));

    // center offset carries weight 3
    b = RectangleFeatures{};
    b.nx = 0.1;
    double dist = std::sqrt(3.0 * 0.01);
    CHECK(affinity(a, b, cfg) == doctest::Approx(std::exp(-dist / 2.0)).epsilon(1e-12));

    // color and std carry weight 0.3
    b = RectangleFeatures{};
    b.nc[1] = 0.5;
    b.nsigma[2] = 0.5;
    dist = std::sqrt(0.3 * 0.25 + 0.3 * 0.25);
    CHECK(affinity(a, b, cfg) == doctest::Approx(std::exp(-dist / 2.0)).epsilon(1e-12));

    cfg.sigma = 0.5;
    b = RectangleFeatures{};
    b.ntheta = 1.0;
    CHECK(affinity(a, b, cfg) == doctest::Approx(std::exp(-2.0)).epsilon(1e-12));

    AffinityConfig bad;
    bad.sigma = 0.0;
    CHECK_THROWS_AS(affinity(a, b, bad), InvalidInputError);
}

TEST_CASE("normalize_features min-max scales each field") {
    std::vector<BuildingRectangle> rects{make_rect(0, 0, 10, 10, 5),
                                         make_rect(20, 40, 50, 30, 15),
                                         make_rect(10, 20, 30, 20, 10)};
    auto feats = normalize_features(rects);
    REQUIRE(feats.size() == 3);
    CHECK(feats[0].nx == doctest::Approx(0.0));
    CHECK(feats[1].nx == doctest::Approx(1.0));
    CHECK(feats[2].nx == doctest::Approx(0.5));
    CHECK(feats[2].ntheta == doctest::Approx(0.5));
    CHECK(feats[2].nl1 == doctest::Approx(0.5));
    // constant fields normalize to zero rather than dividing by zero
    CHECK(feats[0].nc[0] == doctest::Approx(0.0));
    CHECK(feats[1].nc[0] == doctest::Approx(0.0));
}

TEST_CASE("neighbor pairs are symmetric and respect the distance cap") {
    std::vector<BuildingRectangle> rects{make_rect(0, 0, 0), make_rect(10, 0, 0),
                                         make_rect(20, 0, 0), make_rect(200, 0, 0)};
    AffinityConfig cfg;
    auto pairs = neighbor_pairs(rects, cfg);
    for (auto [i, j] : pairs) {
        CHECK(i < j);
        CHECK((rects[i].center - rects[j].center).norm() < cfg.max_neighbor_dist);
        CHECK(j != 3);  // the far rectangle has no neighbors in range
    }
    CHECK(pairs.size() == 3);  // complete graph over the close trio
}

TEST_CASE("a single rectangle rounds to the nearest two-degree label") {
    AffinityConfig cfg;
    auto out = refine_orientations({make_rect(0, 0, 30.7)}, cfg);
    CHECK(out[0].orientation == doctest::Approx(30.0));
    out = refine_orientations({make_rect(0, 0, 31.4)}, cfg);
    CHECK(out[0].orientation == doctest::Approx(32.0));
}

TEST_CASE("smoothing flips a misoriented outlier toward its block") {
    std::vector<BuildingRectangle> rects;
    for (int i = 0; i < 9; ++i) rects.push_back(make_rect(2.0 * i, 0.0, 30.0));
    rects.push_back(make_rect(9.0, 0.0, 38.0));
    AffinityConfig cfg;
    cfg.lambda = 5.0;
    auto out = refine_orientations(rects, cfg);
    for (const auto& r : out) CHECK(r.orientation == doctest::Approx(30.0));
    // only the orientation field may change
    CHECK(out[9].center.x == doctest::Approx(9.0));
    CHECK(out[9].length == doctest::Approx(12.0));
}

TEST_CASE("lambda zero keeps every per-rectangle argmin") {
    std::vector<BuildingRectangle> rects{make_rect(0, 0, 30.0), make_rect(5, 0, 38.0)};
    AffinityConfig cfg;
    cfg.lambda = 0.0;
    auto out = refine_orientations(rects, cfg);
    CHECK(out[0].orientation == doctest::Approx(30.0));
    CHECK(out[1].orientation == doctest::Approx(38.0));
}

TEST_CASE("osm snap aligns near-road-aligned rectangles to the road family") {
    BuildingRectangle rect = make_rect(5, 0, 12.0);
    rect.parent_polygon = 1;
    BuildingPolygon poly;
    poly.instance_id = 1;
    poly.vertices = {{0, -5}, {10, -5}, {10, 5}, {0, 5}};
    poly.main_orientations = {12.0};
    std::vector<RoadVector> roads{north_road(0.0)};

    auto out = refine_with_osm({rect}, {poly}, roads);
    CHECK(out[0].orientation == doctest::Approx(0.0));

    // nearer to the perpendicular family member: snap to 90
    rect.orientation = 75.0;
    poly.main_orientations = {75.0};
    out = refine_with_osm({rect}, {poly}, roads);
    CHECK(out[0].orientation == doctest::Approx(90.0));

    // idempotent once aligned
    auto again = refine_with_osm(out, {poly}, roads);
    CHECK(again[0].orientation == doctest::Approx(out[0].orientation));

    // beyond 30 degrees from the family: untouched
    rect.orientation = 40.0;
    poly.main_orientations = {40.0};
    out = refine_with_osm({rect}, {poly}, roads);
    CHECK(out[0].orientation == doctest::Approx(40.0));

    // no roads: identity
    out = refine_with_osm({rect}, {poly}, {});
    CHECK(out[0].orientation == doctest::Approx(40.0));
}

TEST_CASE("polygon orientations snap to the nearest road family member") {
    BuildingPolygon poly;
    poly.instance_id = 1;
    poly.vertices = {{0, 0}, {10, 0}, {10, 6}, {0, 6}};
    poly.main_orientations = {12.0, 100.0};
    std::vector<RoadVector> roads{north_road(-3.0)};

    auto out = snap_polygon_orientations({poly}, roads);
    REQUIRE(out.size() == 1);
    REQUIRE(out[0].main_orientations.size() == 2);
    CHECK(out[0].main_orientations[0] == doctest::Approx(0.0));
    CHECK(out[0].main_orientations[1] == doctest::Approx(90.0));

    // collapsing both onto one family member deduplicates
    poly.main_orientations = {12.0, 168.0};
    out = snap_polygon_orientations({poly}, roads);
    REQUIRE(out[0].main_orientations.size() == 1);
    CHECK(out[0].main_orientations[0] == doctest::Approx(0.0));

    // far from the family: unchanged
    poly.main_orientations = {40.0};
    out = snap_polygon_orientations({poly}, roads);
    CHECK(out[0].main_orientations[0] == doctest::Approx(40.0));
}

TEST_CASE("roads geojson round trip") {
    std::string path =
        (std::filesystem::temp_directory_path() / "lod2_roads.json").string();
    std::vector<RoadVector> roads{north_road(2.5)};
    roads[0].points.push_back({7.5, 120.0});
    write_roads_geojson(roads, path);
    auto back = read_roads_geojson(path);
    REQUIRE(back.size() == 1);
    REQUIRE(back[0].points.size() == 3);
    CHECK(back[0].points[2].x == doctest::Approx(7.5));
    CHECK(back[0].points[2].y == doctest::Approx(120.0));
    std::remove(path.c_str());
}
