#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <string>

#include "lod2/raster.hpp"
#include "lod2/raster_io.hpp"

using namespace lod2;

namespace {

std::string tmp_path(const char* name) {
    return (std::filesystem::temp_directory_path() / name).string();
}

}  // namespace

TEST_CASE("cell center and world_to_cell are inverse") {
    GeoRaster r(10, 8, BandKind::Elevation, 0.5, 100.0, 200.0);
    for (int row = 0; row < 8; row += 3)
        for (int col = 0; col < 10; col += 3) {
            Vec2 p = r.cell_center(row, col);
            int rr, cc;
            r.world_to_cell(p, rr, cc);
            CHECK(rr == row);
            CHECK(cc == col);
        }
    // origin is the outer corner of the top-left cell
    Vec2 tl = r.cell_center(0, 0);
    CHECK(tl.x == doctest::Approx(100.25));
    CHECK(tl.y == doctest::Approx(199.75));
}

TEST_CASE("ascii grid round trip preserves values, georef and nodata") {
    GeoRaster r(5, 4, BandKind::Elevation, 0.5, 10.0, 20.0);
    for (int row = 0; row < 4; ++row)
        for (int col = 0; col < 5; ++col) r.at(row, col) = row * 10 + col + 0.125;
    r.at(2, 3) = r.nodata();
    std::string path = tmp_path("lod2_test.asc");
    write_ascii_grid(r, path);
    GeoRaster back = read_ascii_grid(path);
    REQUIRE(back.same_grid(r));
    CHECK(back.is_nodata(2, 3));
    for (int row = 0; row < 4; ++row)
        for (int col = 0; col < 5; ++col)
            CHECK(back.at(row, col) == doctest::Approx(r.at(row, col)));
    std::remove(path.c_str());
}

TEST_CASE("ppm round trip with sidecar georeferencing") {
    GeoRaster r(3, 2, BandKind::Color, 1.0, -5.0, 7.0);
    int v = 0;
    for (int row = 0; row < 2; ++row)
        for (int col = 0; col < 3; ++col)
            for (int b = 0; b < 3; ++b) r.at(row, col, b) = (v += 13) % 256;
    std::string path = tmp_path("lod2_test.ppm");
    write_ppm(r, path);
    GeoRaster back = read_ppm(path);
    REQUIRE(back.same_grid(r));
    REQUIRE(back.bands() == 3);
    for (int row = 0; row < 2; ++row)
        for (int col = 0; col < 3; ++col)
            for (int b = 0; b < 3; ++b) CHECK(back.at(row, col, b) == r.at(row, col, b));
    std::remove(path.c_str());
    std::remove((path + ".hdr").c_str());
}

TEST_CASE("pgm round trip carries 16-bit labels") {
    GeoRaster r(4, 3, BandKind::Label, 0.5, 0.0, 0.0);
    r.at(0, 0) = 1;
    r.at(1, 1) = 300;     // needs the 16-bit range
    r.at(2, 3) = 65535;
    std::string path = tmp_path("lod2_test.pgm");
    write_pgm(r, path);
    GeoRaster back = read_pgm(path);
    REQUIRE(back.same_grid(r));
    CHECK(back.at(0, 0) == 1);
    CHECK(back.at(1, 1) == 300);
    CHECK(back.at(2, 3) == 65535);
    CHECK(back.at(0, 2) == 0);
    std::remove(path.c_str());
    std::remove((path + ".hdr").c_str());
}

TEST_CASE("read_raster dispatches on extension") {
    GeoRaster r(2, 2, BandKind::Elevation, 1.0, 0.0, 2.0);
    r.at(0, 0) = 5;
    std::string path = tmp_path("lod2_dispatch.asc");
    write_raster(r, path);
    CHECK(read_raster(path).at(0, 0) == doctest::Approx(5.0));
    std::remove(path.c_str());
    CHECK_THROWS_AS(read_raster(tmp_path("missing.asc")), InvalidInputError);
}

TEST_CASE("gradient magnitude of a linear ramp is the per-cell slope") {
    GeoRaster dsm(6, 5, BandKind::Elevation, 0.5);
    for (int row = 0; row < 5; ++row)
        for (int col = 0; col < 6; ++col) dsm.at(row, col) = 0.7 * col + 10.0;
    GeoRaster gx = gradient_magnitude(dsm, GradientAxis::Horizontal);
    GeoRaster gy = gradient_magnitude(dsm, GradientAxis::Vertical);
    for (int row = 0; row < 5; ++row)
        for (int col = 0; col < 6; ++col) {
            CHECK(gx.at(row, col) == doctest::Approx(0.7));
            CHECK(gy.at(row, col) == doctest::Approx(0.0));
        }
}

TEST_CASE("pyramid halves size with mean for elevation, majority for labels") {
    GeoRaster dsm(4, 4, BandKind::Elevation, 0.5, 0.0, 2.0);
    double v = 0;
    for (int row = 0; row < 4; ++row)
        for (int col = 0; col < 4; ++col) dsm.at(row, col) = v++;
    auto pyr = build_pyramid(dsm, 2);
    REQUIRE(pyr.size() == 2);
    CHECK(pyr[1].width() == 2);
    CHECK(pyr[1].height() == 2);
    CHECK(pyr[1].cell_size() == doctest::Approx(1.0));
    CHECK(pyr[1].at(0, 0) == doctest::Approx((0 + 1 + 4 + 5) / 4.0));
    CHECK(pyr[1].at(1, 1) == doctest::Approx((10 + 11 + 14 + 15) / 4.0));

    GeoRaster lab(4, 2, BandKind::Label, 0.5);
    lab.at(0, 0) = 1;
    lab.at(0, 1) = 1;
    lab.at(1, 0) = 1;
    lab.at(1, 1) = 2;
    auto lpyr = build_pyramid(lab, 2);
    CHECK(lpyr[1].at(0, 0) == 1);  // 3-of-4 majority
}

TEST_CASE("rotate_resample by 90 degrees maps content correctly") {
    GeoRaster lab(3, 3, BandKind::Label, 1.0, 0.0, 3.0);
    lab.at(0, 2) = 7;  // north-east corner cell, center (2.5, 2.5)
    Vec2 pivot{1.5, 1.5};
    GeoRaster rot = rotate_resample(lab, pivot, 90.0);
    // output cell whose pre-image is (2.5, 2.5): rotating the query point by
    // +90 cw must land there, so the content moves counterclockwise
    bool found = false;
    for (int row = 0; row < rot.height(); ++row)
        for (int col = 0; col < rot.width(); ++col)
            if (rot.at(row, col) == 7) {
                Vec2 p = rot.cell_center(row, col);
                Vec2 src = pivot + rotate_cw(p - pivot, 90.0);
                CHECK(src.x == doctest::Approx(2.5).epsilon(0.3));
                CHECK(src.y == doctest::Approx(2.5).epsilon(0.3));
                found = true;
            }
    CHECK(found);
}

TEST_CASE("connected components split touching equal-speed labels by value") {
    GeoRaster lab(6, 3, BandKind::Label, 0.5);
    for (int col = 0; col < 3; ++col) {
        for (int row = 0; row < 3; ++row) lab.at(row, col) = 4;
        for (int row = 0; row < 3; ++row) lab.at(row, col + 3) = 9;
    }
    auto regions = connected_components(lab, 1);
    REQUIRE(regions.size() == 2);
    CHECK(regions[0].cell_count() == 9);
    CHECK(regions[1].cell_count() == 9);
    CHECK(regions[0].instance_id == 1);
    CHECK(regions[1].instance_id == 2);
}

TEST_CASE("connected components joins diagonal cells and filters small blobs") {
    GeoRaster lab(5, 5, BandKind::Label, 0.5);
    lab.at(0, 0) = 1;
    lab.at(1, 1) = 1;  // 8-connected with (0,0)
    lab.at(4, 4) = 1;  // isolated single cell
    auto regions = connected_components(lab, 2);
    REQUIRE(regions.size() == 1);
    CHECK(regions[0].cell_count() == 2);
}

TEST_CASE("bilinear sampling respects nodata") {
    GeoRaster dsm(2, 2, BandKind::Elevation, 1.0, 0.0, 2.0);
    dsm.at(0, 0) = 1;
    dsm.at(0, 1) = 3;
    dsm.at(1, 0) = 5;
    dsm.at(1, 1) = 7;
    auto mid = dsm.sample_bilinear({1.0, 1.0});
    REQUIRE(mid.has_value());
    CHECK(*mid == doctest::Approx(4.0));
    dsm.at(1, 1) = dsm.nodata();
    CHECK_FALSE(dsm.sample_bilinear({1.0, 1.0}).has_value());
    CHECK_FALSE(dsm.sample_bilinear({10.0, 1.0}).has_value());
}
