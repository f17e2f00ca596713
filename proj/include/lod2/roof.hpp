#pragma once

#include <optional>
#include <string>
#include <vector>

#include "lod2/decompose.hpp"
#include "lod2/raster.hpp"

namespace lod2 {

// Order is the fit tie-break order.
enum class RoofType { Flat = 0, Gable, Hip, Pyramid, Mansard };

const char* roof_type_name(RoofType t);
RoofType roof_type_from_name(const std::string& name);

struct RoofModel {
    RoofType roof_type = RoofType::Flat;
    BuildingRectangle rect;  // position P, dimensions C
    double z_ridge = 0.0;
    double z_eave = 0.0;
    double hipl = 0.0;
    double hipw = 0.0;
    double terrain_z = 0.0;
    double fit_rmse = 0.0;

    void apply_type_constraints();
    bool satisfies_invariants() const;
};

// Roof surface height at a world point; nullopt outside the footprint.
// Plateau half-extents a = length/2 - hipl, b = width/2 - hipw; slope
// fraction s = max(du, dv) interpolates ridge down to eave.
std::optional<double> roof_height(const RoofModel& model, const Vec2& p);

// Same surface with the frame coordinates clamped into the footprint; used
// when a merged footprint extends marginally past the bounding rectangle.
double roof_height_clamped(const RoofModel& model, const Vec2& p);

struct FitConfig {
    double z_eave_range = 3.0;   // +- around the initial value
    double z_step = 0.2;
    double ridge_min_above = 0.5;  // Z_ridge lower offset above Z_eave
    double ridge_max_above = 4.0;
    double hip_step = 0.4;       // hip ranges are +- extent/8
    double polish_step = 0.05;   // local hip refinement after the coarse grid
    int min_valid_cells = 4;

    void validate() const;
};

// Inclusive sample grid lo, lo+step, ...; hi appended when the last step
// does not land on it.
std::vector<double> grid_values(double lo, double hi, double step);

// Per-type initial parameters (Table-style constants) plus terrain height
// from a 5 m ring outside the footprint.
RoofModel initial_parameters(RoofType type, const BuildingRectangle& rect,
                             const GeoRaster& dsm, const FitConfig& cfg = {});

// Search grid for one parameter of one type, exposed for conformance tests.
// z_ridge grid is relative to a given z_eave.
std::vector<double> z_eave_grid(const RoofModel& init, const FitConfig& cfg);
std::vector<double> z_ridge_grid(double z_eave, const FitConfig& cfg);
std::vector<double> hipl_grid(const RoofModel& init, const FitConfig& cfg);
std::vector<double> hipw_grid(const RoofModel& init, const FitConfig& cfg);

// Exhaustive search over all five types; lowest RMSE wins, ties to the
// earlier type then lexicographically smaller (z_eave, z_ridge, hipl, hipw).
RoofModel fit_model(const BuildingRectangle& rect, const GeoRaster& dsm,
                    const FitConfig& cfg = {});

// Same search restricted to one roof type.
RoofModel fit_model_typed(RoofType type, const BuildingRectangle& rect,
                          const GeoRaster& dsm, const FitConfig& cfg = {});

// RMSE of a model against the DSM over its footprint cells.
double model_rmse(const RoofModel& model, const GeoRaster& dsm);

// Rectangle-frame height observation (u along length, v along width).
struct HeightSample {
    Vec2 uv;
    double z;
};

// Footprint cell-center samples of the DSM in the rectangle frame.
std::vector<HeightSample> footprint_samples(const BuildingRectangle& rect,
                                            const GeoRaster& dsm);

// Grid search + height polish over an explicit sample set; `init` supplies
// the grid anchors and frame. Used for merged polygonal footprints too.
RoofModel fit_samples(RoofType type, const RoofModel& init,
                      const std::vector<HeightSample>& samples, const FitConfig& cfg);

}  // namespace lod2
