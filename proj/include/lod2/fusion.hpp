#pragma once

#include <string>
#include <vector>

#include "lod2/raster.hpp"

namespace lod2 {

// One instance detection: a raster-aligned bounding box plus the masked cells
// inside it.
struct FusionCandidate {
    int row_min = 0, col_min = 0;  // inclusive
    int row_max = 0, col_max = 0;  // inclusive
    PixelRegion cells;

    long long area_bbox() const {
        return static_cast<long long>(row_max - row_min + 1) * (col_max - col_min + 1);
    }
    long long area_class() const { return static_cast<long long>(cells.cell_count()); }
};

// Eq.-style decision weight: masked area over squared bbox area.
double decision_weight(const FusionCandidate& candidate);

// Starts from the semantic mask; every candidate with weight >= threshold
// erases the semantic mask inside its bbox and stamps its own cells with a
// fresh instance id (stamping order: descending weight, ties by bbox min
// row/col). Remaining semantic cells become instances via connected
// components.
GeoRaster fuse_masks(const GeoRaster& semantic, std::vector<FusionCandidate> candidates,
                     double threshold, int min_component_area = 40);

// Candidates file: JSON array of {bbox:[rmin,cmin,rmax,cmax], rle:[...]} with
// row-major run-length cell encoding (alternating skip/fill counts over the
// bbox cells).
std::vector<FusionCandidate> read_candidates_json(const std::string& path);
void write_candidates_json(const std::vector<FusionCandidate>& candidates,
                           const std::string& path);

}  // namespace lod2
