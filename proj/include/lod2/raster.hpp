#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "lod2/errors.hpp"
#include "lod2/geometry.hpp"

namespace lod2 {

enum class BandKind {
    Elevation,  // 1 band, meters, with no-data sentinel
    Color,      // 3 bands, 8-bit values stored as double
    Label,      // 1 band, nonnegative integer instance ids, 0 = background
};

// Georeferenced raster. Origin is the world coordinate of the outer corner of
// the top-left cell; x grows east, y grows north, rows increase southward.
class GeoRaster {
public:
    static constexpr double kDefaultNoData = -9999.0;

    GeoRaster() = default;
    GeoRaster(int width, int height, BandKind kind, double cell_size = 0.5,
              double origin_x = 0.0, double origin_y = 0.0, double fill = 0.0);

    int width() const { return width_; }
    int height() const { return height_; }
    int bands() const { return kind_ == BandKind::Color ? 3 : 1; }
    BandKind kind() const { return kind_; }
    double cell_size() const { return cell_size_; }
    double origin_x() const { return origin_x_; }
    double origin_y() const { return origin_y_; }
    double nodata() const { return nodata_; }
    void set_nodata(double v) { nodata_ = v; }
    void set_origin(double x, double y) { origin_x_ = x; origin_y_ = y; }

    bool in_bounds(int row, int col) const {
        return row >= 0 && row < height_ && col >= 0 && col < width_;
    }

    double at(int row, int col, int band = 0) const {
        return data_[(static_cast<size_t>(row) * width_ + col) * bands() + band];
    }
    double& at(int row, int col, int band = 0) {
        return data_[(static_cast<size_t>(row) * width_ + col) * bands() + band];
    }

    bool is_nodata(int row, int col) const {
        return kind_ == BandKind::Elevation && at(row, col) == nodata_;
    }

    // World coordinate of the center of cell (row, col).
    Vec2 cell_center(int row, int col) const {
        return {origin_x_ + (col + 0.5) * cell_size_, origin_y_ - (row + 0.5) * cell_size_};
    }
    // Cell containing world point p (may be out of bounds).
    void world_to_cell(const Vec2& p, int& row, int& col) const {
        col = static_cast<int>(std::floor((p.x - origin_x_) / cell_size_));
        row = static_cast<int>(std::floor((origin_y_ - p.y) / cell_size_));
    }
    // Fractional cell coordinates of p: (row_f, col_f) such that the center of
    // cell (r, c) maps to (r + 0.5, c + 0.5).
    void world_to_fractional(const Vec2& p, double& row_f, double& col_f) const {
        col_f = (p.x - origin_x_) / cell_size_;
        row_f = (origin_y_ - p.y) / cell_size_;
    }

    // Bilinear sample at world point p; nodata-aware for elevation bands.
    // Returns nullopt outside the raster or when a contributing cell is nodata.
    std::optional<double> sample_bilinear(const Vec2& p, int band = 0) const;
    // Nearest-neighbour sample (labels).
    std::optional<double> sample_nearest(const Vec2& p, int band = 0) const;

    bool same_grid(const GeoRaster& other) const {
        return width_ == other.width_ && height_ == other.height_ &&
               std::fabs(cell_size_ - other.cell_size_) < 1e-9 &&
               std::fabs(origin_x_ - other.origin_x_) < 1e-6 &&
               std::fabs(origin_y_ - other.origin_y_) < 1e-6;
    }

    const std::vector<double>& data() const { return data_; }
    std::vector<double>& data() { return data_; }

private:
    int width_ = 0;
    int height_ = 0;
    BandKind kind_ = BandKind::Elevation;
    double cell_size_ = 0.5;
    double origin_x_ = 0.0;
    double origin_y_ = 0.0;
    double nodata_ = kDefaultNoData;
    std::vector<double> data_;
};

// One building segment's cell set, run-length encoded per row.
struct PixelRegion {
    struct Run {
        int row;
        int col_begin;  // inclusive
        int col_end;    // exclusive
    };

    int instance_id = 0;
    std::vector<Run> runs;          // sorted by (row, col_begin)
    int row_min = 0, row_max = -1;  // tight bounding box (inclusive)
    int col_min = 0, col_max = -1;

    size_t cell_count() const {
        size_t n = 0;
        for (const auto& r : runs) n += static_cast<size_t>(r.col_end - r.col_begin);
        return n;
    }
    bool empty() const { return runs.empty(); }
    bool contains(int row, int col) const;

    template <typename F>
    void for_each_cell(F&& f) const {
        for (const auto& r : runs)
            for (int c = r.col_begin; c < r.col_end; ++c) f(r.row, c);
    }

    static PixelRegion from_cells(std::vector<std::pair<int, int>> cells, int instance_id = 0);
    // Binary mask over the scene grid (label raster, 1 inside).
    GeoRaster to_mask(const GeoRaster& frame) const;
};

enum class GradientAxis { Horizontal, Vertical };

// Per-cell absolute central difference along the axis, meters per cell.
// Border cells use one-sided differences; nodata propagates.
GeoRaster gradient_magnitude(const GeoRaster& dsm, GradientAxis axis);

// Level 0 is the input; each level halves width/height (ceiling) by 2x2 mean
// (elevation/color) or majority (labels).
std::vector<GeoRaster> build_pyramid(const GeoRaster& raster, int levels);

// Rotates raster content clockwise by `angle` degrees about the world point
// `pivot`. Output covers the rotated bounding box of the input extent.
// Elevation/color sample bilinearly, labels by nearest neighbour; cells
// outside the source become nodata (elevation) or 0.
GeoRaster rotate_resample(const GeoRaster& raster, const Vec2& pivot, double angle);

// 8-connectivity components of nonzero cells, ordered by (min row, min col).
// Components smaller than min_area cells are dropped. Instance ids are
// assigned 1..n in output order.
std::vector<PixelRegion> connected_components(const GeoRaster& labels_or_binary,
                                              int min_area = 40);

}  // namespace lod2
