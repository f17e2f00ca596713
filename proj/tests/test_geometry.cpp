#include <doctest.h>

#include <random>

#include "lod2/geometry.hpp"

using namespace lod2;

TEST_CASE("orientation_dir points clockwise from north") {
    Vec2 n = orientation_dir(0.0);
    CHECK(n.x == doctest::Approx(0.0));
    CHECK(n.y == doctest::Approx(1.0));
    Vec2 e = orientation_dir(90.0);
    CHECK(e.x == doctest::Approx(1.0));
    CHECK(e.y == doctest::Approx(0.0).epsilon(1e-9));
    Vec2 ne = orientation_dir(45.0);
    CHECK(ne.x == doctest::Approx(ne.y));
}

TEST_CASE("direction_orientation inverts orientation_dir") {
    for (double deg = 0.0; deg < 180.0; deg += 7.5)
        CHECK(direction_orientation(orientation_dir(deg)) == doctest::Approx(deg).epsilon(1e-9));
    // opposite directions share an orientation
    CHECK(direction_orientation({0, -1}) == doctest::Approx(0.0));
    CHECK(direction_orientation({-1, 0}) == doctest::Approx(90.0));
}

TEST_CASE("rotate_cw round trip and quarter turns") {
    Vec2 p{3.0, -2.0};
    Vec2 back = rotate_cw(rotate_cw(p, 37.0), -37.0);
    CHECK(back.x == doctest::Approx(p.x));
    CHECK(back.y == doctest::Approx(p.y));
    // clockwise quarter turn sends north to east
    Vec2 q = rotate_cw({0, 1}, 90.0);
    CHECK(q.x == doctest::Approx(1.0));
    CHECK(q.y == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("angle differences are circular") {
    CHECK(angle_diff_180(179.0, 0.0) == doctest::Approx(1.0));
    CHECK(angle_diff_180(0.0, 179.0) == doctest::Approx(1.0));
    CHECK(angle_diff_180(90.0, 0.0) == doctest::Approx(90.0));
    CHECK(angle_diff_180(40.0, 42.0) == doctest::Approx(2.0));
    CHECK(angle_diff_90(89.0, 0.0) == doctest::Approx(1.0));
    CHECK(angle_diff_90(12.0, 102.0) == doctest::Approx(0.0));
    CHECK(normalize_angle_180(-10.0) == doctest::Approx(170.0));
    CHECK(normalize_angle_180(185.0) == doctest::Approx(5.0));
}

TEST_CASE("ring area sign and centroid") {
    std::vector<Vec2> ccw{{0, 0}, {2, 0}, {2, 1}, {0, 1}};
    CHECK(ring_area(ccw) == doctest::Approx(2.0));
    std::vector<Vec2> cw(ccw.rbegin(), ccw.rend());
    CHECK(ring_area(cw) == doctest::Approx(-2.0));
    Vec2 c = ring_centroid(ccw);
    CHECK(c.x == doctest::Approx(1.0));
    CHECK(c.y == doctest::Approx(0.5));
}

TEST_CASE("point_in_ring handles boundary-adjacent interior points") {
    std::vector<Vec2> ring{{0, 0}, {4, 0}, {4, 4}, {0, 4}};
    CHECK(point_in_ring({2, 2}, ring));
    CHECK(point_in_ring({0.01, 3.99}, ring));
    CHECK_FALSE(point_in_ring({5, 2}, ring));
    CHECK_FALSE(point_in_ring({-0.01, 2}, ring));
}

TEST_CASE("point distances") {
    CHECK(point_segment_distance({0, 1}, {-1, 0}, {1, 0}) == doctest::Approx(1.0));
    CHECK(point_segment_distance({3, 0}, {-1, 0}, {1, 0}) == doctest::Approx(2.0));
    CHECK(point_line_distance({3, 1}, {-1, 0}, {1, 0}) == doctest::Approx(1.0));
}

TEST_CASE("line intersection") {
    OrientedLine l1{{0, 0}, 0.0};    // north-south through origin
    OrientedLine l2{{0, 3}, 90.0};   // east-west through y=3
    Vec2 p;
    REQUIRE(line_intersection(l1, l2, p));
    CHECK(p.x == doctest::Approx(0.0));
    CHECK(p.y == doctest::Approx(3.0));
    OrientedLine l3{{5, 0}, 0.0};
    CHECK_FALSE(line_intersection(l1, l3, p));
}

TEST_CASE("ring self intersection detector") {
    std::vector<Vec2> simple{{0, 0}, {2, 0}, {2, 2}, {0, 2}};
    CHECK_FALSE(ring_self_intersects(simple));
    std::vector<Vec2> bow{{0, 0}, {2, 2}, {2, 0}, {0, 2}};
    CHECK(ring_self_intersects(bow));
}

TEST_CASE("segments_intersect excludes shared-endpoint touches") {
    CHECK(segments_intersect({0, 0}, {2, 2}, {0, 2}, {2, 0}));
    CHECK_FALSE(segments_intersect({0, 0}, {1, 0}, {2, 0}, {3, 0}));
}
