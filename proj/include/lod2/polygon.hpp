#pragma once

#include <string>
#include <vector>

#include "lod2/raster.hpp"

namespace lod2 {

struct BuildingPolygon {
    int instance_id = 0;
    std::vector<Vec2> vertices;  // closed ring, counterclockwise, last != first
    std::vector<double> main_orientations;  // degrees in [0, 90)
    bool irregular = false;  // regularization fell back to the unsnapped ring
};

struct EdgeLine {
    Vec2 a, b;
    double strength = 0.0;
    double orientation() const { return direction_orientation(b - a); }
};

// Counterclockwise outer boundary of the cell set, on cell corners, collinear
// runs collapsed. Inner rings (holes) are discarded.
std::vector<Vec2> trace_boundary(const PixelRegion& region, const GeoRaster& frame);

// Douglas-Peucker over a closed ring: split at the two farthest-apart points,
// simplify each half. Tolerance in meters.
std::vector<Vec2> simplify_ring(const std::vector<Vec2>& ring, double tolerance);

// Douglas-Peucker on an open chain; endpoints are always kept.
std::vector<Vec2> simplify_chain(const std::vector<Vec2>& chain, double tolerance);

// Length-weighted orientation histogram over [0, 90) with 9 bins of 10 deg
// (orthogonal orientations identified). Bins whose summed length exceeds
// threshold_len (strictly) each yield their weighted mean orientation; if no
// bin passes, the longest edge's orientation is returned alone.
std::vector<double> main_orientations(const std::vector<Segment>& segments,
                                      double threshold_len);

// Snaps each ring edge to the nearest main orientation (or its orthogonal),
// rotating about the edge midpoint, then re-intersects consecutive lines.
// Falls back to the unsnapped ring (irregular flag) on self-intersection.
BuildingPolygon adjust_lines(const std::vector<Vec2>& ring,
                             const std::vector<double>& orientations,
                             double merge_distance);

// Default edge-line provider: gradient-orientation region growing on the
// ortho luminance within the region's dilated bounding box.
std::vector<EdgeLine> detect_edge_lines(const GeoRaster& ortho, const PixelRegion& region,
                                        int dilate_cells = 3, double align_tol_deg = 22.5,
                                        int min_len_cells = 10);

// Re-snaps polygon edges whose orientation family is confirmed by a nearby
// strong image line (midpoint within max_dist_cells, orientation within
// gate_deg); identity when no line matches.
BuildingPolygon regularize_with_edges(const BuildingPolygon& polygon,
                                      const std::vector<EdgeLine>& lines,
                                      double cell_size, double max_dist_cells = 3.0,
                                      double gate_deg = 10.0);

struct PolygonConfig {
    double simplify_tolerance = 1.0;      // meters (2 cells at 0.5 m)
    double orientation_threshold = 120.0;  // cells; scaled by cell_size to meters
    double merge_distance_cells = 1.0;
};

// Full three-step extraction for one region.
BuildingPolygon extract_polygon(const PixelRegion& region, const GeoRaster& frame,
                                const GeoRaster* ortho, const std::vector<EdgeLine>* ext_lines,
                                const PolygonConfig& cfg);

// External line file: JSON array [{x1,y1,x2,y2,strength}] in world meters.
std::vector<EdgeLine> read_edge_lines_json(const std::string& path);

std::vector<Segment> ring_segments(const std::vector<Vec2>& ring);

}  // namespace lod2
