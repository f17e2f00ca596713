#include <doctest.h>

#include <cmath>

#include "lod2/merge.hpp"

using namespace lod2;

namespace {

BuildingRectangle make_rect(double cx, double cy, double length, double width,
                            double orientation, int id) {
    BuildingRectangle r;
    r.id = id;
    r.center = {cx, cy};
    r.length = length;
    r.width = width;
    r.orientation = orientation;
    r.mean_color = {120, 120, 120};
    r.color_std = {4, 4, 4};
    r.mean_height = 8.0;
    return r;
}

struct Scene {
    GeoRaster dsm;
    GeoRaster ortho;
};

Scene render(const std::vector<RoofModel>& truths, int size = 80) {
    Scene s{GeoRaster(size, size, BandKind::Elevation, 0.5, 0.0, size * 0.5),
            GeoRaster(size, size, BandKind::Color, 0.5, 0.0, size * 0.5)};
    for (int r = 0; r < size; ++r)
        for (int c = 0; c < size; ++c) {
            Vec2 p = s.dsm.cell_center(r, c);
            double z = 0.0;
            for (const auto& t : truths)
                if (auto h = roof_height(t, p)) z = std::max(z, *h);
            s.dsm.at(r, c) = z;
            for (int b = 0; b < 3; ++b) s.ortho.at(r, c, b) = 120.0;
        }
    return s;
}

RoofModel make_model(RoofType type, const BuildingRectangle& rect, double ze, double zr,
                     double hipl, double hipw) {
    RoofModel m;
    m.roof_type = type;
    m.rect = rect;
    m.z_eave = ze;
    m.z_ridge = zr;
    m.hipl = hipl;
    m.hipw = hipw;
    m.terrain_z = 0.0;
    m.apply_type_constraints();
    return m;
}

}  // namespace

TEST_CASE("merged type lookup covers all 25 pairs") {
    using T = RoofType;
    const T F = T::Flat, G = T::Gable, H = T::Hip, P = T::Pyramid, M = T::Mansard;
    struct Row {
        T a;
        T expected[5];  // against F, G, H, P, M; P-P handled separately
    };
    const Row rows[] = {
        {F, {F, G, H, F, M}},
        {G, {G, G, H, G, M}},
        {H, {H, H, H, H, M}},
        {P, {F, G, H, P /*placeholder*/, M}},
        {M, {M, M, M, M, M}},
    };
    const T cols[] = {F, G, H, P, M};
    for (const Row& row : rows)
        for (int j = 0; j < 5; ++j) {
            auto got = merged_type(row.a, cols[j]);
            if (row.a == P && cols[j] == P) {
                CHECK_FALSE(got.has_value());
            } else {
                REQUIRE(got.has_value());
                CHECK(*got == row.expected[j]);
            }
        }
    // the matrix is symmetric
    for (T a : cols)
        for (T b : cols) {
            auto ab = merged_type(a, b), ba = merged_type(b, a);
            CHECK(ab.has_value() == ba.has_value());
            if (ab && ba) CHECK(*ab == *ba);
        }
}

TEST_CASE("refine_types leaves an isolated model alone") {
    BuildingRectangle rect = make_rect(20, 20, 16, 8, 90, 1);
    RoofModel m = make_model(RoofType::Gable, rect, 7, 9, 0, 4);
    Scene s = render({m});
    AffinityConfig cfg;
    auto out = refine_types({m}, s.dsm, cfg);
    REQUIRE(out.size() == 1);
    CHECK(out[0].roof_type == RoofType::Gable);
    CHECK(out[0].z_ridge == doctest::Approx(m.z_ridge));
}

TEST_CASE("refine_types with lambda zero changes nothing") {
    BuildingRectangle r1 = make_rect(12, 20, 14, 8, 90, 1);
    BuildingRectangle r2 = make_rect(28, 20, 14, 8, 90, 2);
    RoofModel m1 = make_model(RoofType::Gable, r1, 7, 9, 0, 4);
    RoofModel m2 = make_model(RoofType::Hip, r2, 7, 9, 3.5, 4);
    Scene s = render({m1, m2});
    AffinityConfig cfg;
    cfg.lambda = 0.0;
    auto out = refine_types({m1, m2}, s.dsm, cfg);
    CHECK(out[0].roof_type == RoofType::Gable);
    CHECK(out[1].roof_type == RoofType::Hip);
}

TEST_CASE("type smoothing flips a lone mislabel in a uniform block") {
    // nine near-identical gable buildings; one is mislabeled hip. All share a
    // footprint location so the features tie exactly and the kernel is 1.
    BuildingRectangle rect = make_rect(20, 20, 16, 8, 90, 1);
    RoofModel gable = make_model(RoofType::Gable, rect, 7, 9, 0, 4);
    Scene s = render({gable});
    std::vector<RoofModel> models(9, gable);
    for (int i = 0; i < 9; ++i) models[i].rect.id = i + 1;
    models[8].roof_type = RoofType::Hip;
    models[8].hipl = 4.0;
    AffinityConfig cfg;
    auto out = refine_types(models, s.dsm, cfg);
    for (const auto& m : out) CHECK(m.roof_type == RoofType::Gable);
    // only the relabeled model was refit; footprints never move
    for (size_t i = 0; i < out.size(); ++i) {
        CHECK(out[i].rect.center.x == doctest::Approx(models[i].rect.center.x));
        CHECK(out[i].rect.orientation == doctest::Approx(models[i].rect.orientation));
        CHECK(out[i].rect.length == doctest::Approx(models[i].rect.length));
    }
    // the flipped model was refit against the gable surface
    CHECK(out[8].fit_rmse <= 0.05);
    CHECK(out[8].hipl == doctest::Approx(0.0));
}

TEST_CASE("merge_models joins two gable halves into one gable") {
    // a 24 x 10 gable split down the middle into two 12 x 10 rectangles
    BuildingRectangle full = make_rect(20, 20, 24, 10, 90, 0);
    RoofModel truth = make_model(RoofType::Gable, full, 7, 9, 0, 5);
    Scene s = render({truth});

    BuildingRectangle left = make_rect(14, 20, 12, 10, 90, 1);
    BuildingRectangle right = make_rect(26, 20, 12, 10, 90, 2);
    populate_rectangle_stats(left, s.dsm, s.ortho);
    populate_rectangle_stats(right, s.dsm, s.ortho);
    RoofModel ml = fit_model(left, s.dsm);
    RoofModel mr = fit_model(right, s.dsm);

    DecomposeConfig cfg;
    auto scene = merge_models({ml, mr}, s.dsm, s.ortho, cfg);
    REQUIRE(scene.size() == 1);
    CHECK(scene[0].merged);
    CHECK(scene[0].members == std::vector<int>{1, 2});
    CHECK(scene[0].model.roof_type == RoofType::Gable);
    CHECK(scene[0].model.fit_rmse <= 0.05);
    CHECK(scene[0].model.rect.length == doctest::Approx(24.0).epsilon(0.05));
    CHECK(scene[0].model.rect.width == doctest::Approx(10.0).epsilon(0.06));
    CHECK(std::fabs(scene[0].model.z_ridge - 9.0) <= 0.2 + 1e-9);
    CHECK(std::fabs(scene[0].model.z_eave - 7.0) <= 0.2 + 1e-9);
    // footprint covers the full building
    CHECK(ring_area(scene[0].footprint) == doctest::Approx(240.0).epsilon(0.1));
}

TEST_CASE("two abutting pyramids never merge") {
    BuildingRectangle ra = make_rect(14, 20, 12, 10, 90, 1);
    BuildingRectangle rb = make_rect(26, 20, 12, 10, 90, 2);
    RoofModel a = make_model(RoofType::Pyramid, ra, 7, 9, 6, 5);
    RoofModel b = make_model(RoofType::Pyramid, rb, 7, 9, 6, 5);
    Scene s = render({a, b});
    populate_rectangle_stats(a.rect, s.dsm, s.ortho);
    populate_rectangle_stats(b.rect, s.dsm, s.ortho);
    DecomposeConfig cfg;
    auto scene = merge_models({a, b}, s.dsm, s.ortho, cfg);
    REQUIRE(scene.size() == 2);
    CHECK_FALSE(scene[0].merged);
    CHECK_FALSE(scene[1].merged);
}

TEST_CASE("merge output count never exceeds the input count") {
    BuildingRectangle rect = make_rect(20, 20, 16, 8, 90, 1);
    RoofModel m = make_model(RoofType::Flat, rect, 8, 8, 0, 0);
    Scene s = render({m});
    populate_rectangle_stats(m.rect, s.dsm, s.ortho);
    DecomposeConfig cfg;
    auto scene = merge_models({m}, s.dsm, s.ortho, cfg);
    CHECK(scene.size() == 1);
    CHECK_FALSE(scene[0].merged);
    CHECK(ring_area(scene[0].footprint) == doctest::Approx(16.0 * 8.0));
}

TEST_CASE("rectilinear union outline handles L, cross, and disjoint cases") {
    // identical boxes: plain rectangle
    auto same = rectilinear_union_outline({0, 10, 0, 4}, {0, 10, 0, 4});
    REQUIRE(same.size() == 4);
    CHECK(std::fabs(ring_area(same)) == doctest::Approx(40.0));

    // L-shape: six corners
    auto ell = rectilinear_union_outline({0, 10, 0, 4}, {0, 4, 4, 10});
    REQUIRE(ell.size() == 6);
    CHECK(std::fabs(ring_area(ell)) == doctest::Approx(64.0));

    // cross: twelve corners, overlap counted once
    auto cross = rectilinear_union_outline({0, 10, 4, 6}, {4, 6, 0, 10});
    REQUIRE(cross.size() == 12);
    CHECK(std::fabs(ring_area(cross)) == doctest::Approx(36.0));

    // disjoint: no single outline
    auto gap = rectilinear_union_outline({0, 4, 0, 4}, {6, 10, 0, 4});
    CHECK(gap.empty());
}
