#pragma once

#include <string>
#include <vector>

#include "lod2/decompose.hpp"
#include "lod2/graphcut.hpp"
#include "lod2/polygon.hpp"

namespace lod2 {

// Min-max normalized rectangle descriptors used by the affinity kernel.
struct RectangleFeatures {
    double nx = 0, ny = 0;          // center
    double ntheta = 0;              // orientation
    double nl1 = 0, nl2 = 0;        // length, width
    double nc[3] = {0, 0, 0};       // mean color
    double nsigma[3] = {0, 0, 0};   // color std
};

struct AffinityConfig {
    double sigma = 0.5;        // kernel bandwidth
    double lambda = 1.0;       // smoothness weight
    int k_neighbors = 5;
    double max_neighbor_dist = 50.0;  // meters, center distance
    double angle_scale = 10.0;        // degrees; 1.0 is the literal data term

    void validate() const;
};

struct RoadVector {
    std::vector<Vec2> points;  // polyline, world meters
};

std::vector<RectangleFeatures> normalize_features(
    const std::vector<BuildingRectangle>& rects);

// 1 - exp(-d/s) with d the circular mod-180 difference between the rectangle
// orientation and the label angle 2*label degrees.
double orientation_data_cost(const BuildingRectangle& rect, int label,
                             double angle_scale = 10.0);

double affinity(const RectangleFeatures& a, const RectangleFeatures& b,
                const AffinityConfig& cfg);

// Symmetric neighbor edges: k nearest centers within the distance cap.
std::vector<std::pair<int, int>> neighbor_pairs(
    const std::vector<BuildingRectangle>& rects, const AffinityConfig& cfg);

// Joint orientation labeling over 90 two-degree labels; only the orientation
// field changes.
std::vector<BuildingRectangle> refine_orientations(
    const std::vector<BuildingRectangle>& rects, const AffinityConfig& cfg);

// Snap to the nearest road-orientation family member when the parent
// polygon's main orientation is within 30 degrees of the family.
std::vector<BuildingRectangle> refine_with_osm(
    const std::vector<BuildingRectangle>& rects,
    const std::vector<BuildingPolygon>& polygons,
    const std::vector<RoadVector>& roads);

// Same road-family snap applied to polygon main orientations, ahead of
// decomposition, so the rectangle frames are road-aligned from the start.
std::vector<BuildingPolygon> snap_polygon_orientations(
    const std::vector<BuildingPolygon>& polygons, const std::vector<RoadVector>& roads);

// GeoJSON FeatureCollection of LineStrings, world meters.
std::vector<RoadVector> read_roads_geojson(const std::string& path);
void write_roads_geojson(const std::vector<RoadVector>& roads, const std::string& path);

}  // namespace lod2
