#pragma once

#include <array>
#include <string>
#include <vector>

#include "lod2/polygon.hpp"
#include "lod2/raster.hpp"

namespace lod2 {

// Oriented rectangle primitive. Orientation is the direction of the length
// axis, degrees clockwise from north in [0, 180); length >= width.
struct BuildingRectangle {
    int id = 0;
    int parent_polygon = 0;
    Vec2 center;
    double length = 0.0;
    double width = 0.0;
    double orientation = 0.0;
    std::array<double, 3> mean_color{0, 0, 0};
    std::array<double, 3> color_std{0, 0, 0};
    double mean_height = 0.0;

    // Rectangle-frame coordinates of p: u along the length axis, v along width.
    Vec2 to_frame(const Vec2& p) const {
        Vec2 d = p - center;
        Vec2 lu = orientation_dir(orientation);
        Vec2 lv{lu.y, -lu.x};  // 90 deg clockwise of the length axis
        return {d.dot(lu), d.dot(lv)};
    }
    Vec2 from_frame(const Vec2& uv) const {
        Vec2 lu = orientation_dir(orientation);
        Vec2 lv{lu.y, -lu.x};
        return center + lu * uv.x + lv * uv.y;
    }
    bool contains(const Vec2& p) const {
        Vec2 uv = to_frame(p);
        return std::fabs(uv.x) <= length / 2 && std::fabs(uv.y) <= width / 2;
    }
    double area() const { return length * width; }
    std::array<Vec2, 4> corners() const;
};

struct DecomposeConfig {
    double grad_threshold = 0.3;   // T_g, meters
    int nms_window = 7;            // cells, odd
    double color_threshold = 10.0; // T_d, 8-bit intensity
    double height_threshold = 1.0; // T_h1, meters
    double gap_threshold = 0.2;    // T_h2, meters
    int dilate = 7;                // cells
    int edge_len_tol = 5;          // cells
    int pyramid_levels = 3;
    double residual_stop = 0.10;   // stop refilling a piece below this fraction
    int snap_cells = 5;            // level-0 edge re-snap search radius

    void validate() const;
};

// Axis-aligned box in cell coordinates, end-exclusive.
struct CellBox {
    int row0 = 0, col0 = 0, row1 = 0, col1 = 0;
    long long area() const {
        return static_cast<long long>(row1 - row0) * (col1 - col0);
    }
};

struct SplitLine {
    bool vertical;  // true: column split, false: row split
    int index;      // cell row/col index at the analysis level
};

// Maximum-area axis-aligned rectangle of set cells (histogram-stack dynamic
// program). Ties break by (min row, min col, larger width).
CellBox max_inner_rectangle(const GeoRaster& binary_mask);

// Candidate Manhattan split lines from DSM gradients gated by color
// difference; inputs must be rotated so the main orientation is x-aligned.
std::vector<SplitLine> candidate_split_lines(const GeoRaster& dsm_rot,
                                             const GeoRaster& ortho_rot,
                                             const GeoRaster& mask_rot,
                                             const DecomposeConfig& cfg);

// Full grid-based decomposition of one polygon into building rectangles.
std::vector<BuildingRectangle> decompose(const BuildingPolygon& polygon,
                                         const GeoRaster& dsm, const GeoRaster& ortho,
                                         const DecomposeConfig& cfg);

enum class MergeDecision { Merge, Keep };

MergeDecision should_merge(const BuildingRectangle& a, const BuildingRectangle& b,
                           const GeoRaster& dsm, const GeoRaster& ortho,
                           const DecomposeConfig& cfg,
                           bool require_rect_closure = true);

// Greedy merging of adjacent rectangles (smallest color+height distance
// first) until no pair merges.
std::vector<BuildingRectangle> merge_pass(std::vector<BuildingRectangle> rects,
                                          const GeoRaster& dsm, const GeoRaster& ortho,
                                          const DecomposeConfig& cfg);

// Recomputes mean_color/color_std/mean_height from the rasters.
void populate_rectangle_stats(BuildingRectangle& rect, const GeoRaster& dsm,
                              const GeoRaster& ortho);

// JSON rectangle dump (array of objects).
void write_rectangles_json(const std::vector<BuildingRectangle>& rects,
                           const std::string& path);
std::vector<BuildingRectangle> read_rectangles_json(const std::string& path);

}  // namespace lod2
