#include "lod2/roof.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "lod2/errors.hpp"

namespace lod2 {

const char* roof_type_name(RoofType t) {
    switch (t) {
        case RoofType::Flat: return "flat";
        case RoofType::Gable: return "gable";
        case RoofType::Hip: return "hip";
        case RoofType::Pyramid: return "pyramid";
        case RoofType::Mansard: return "mansard";
    }
    return "flat";
}

RoofType roof_type_from_name(const std::string& name) {
    for (RoofType t : {RoofType::Flat, RoofType::Gable, RoofType::Hip, RoofType::Pyramid,
                       RoofType::Mansard})
        if (name == roof_type_name(t)) return t;
    throw InvalidInputError("unknown roof type: " + name);
}

void RoofModel::apply_type_constraints() {
    switch (roof_type) {
        case RoofType::Flat:
            z_ridge = z_eave;
            hipl = 0.0;
            hipw = 0.0;
            break;
        case RoofType::Gable:
            hipl = 0.0;
            hipw = rect.width / 2;
            break;
        case RoofType::Hip:
            hipw = rect.width / 2;
            break;
        case RoofType::Pyramid:
            hipl = rect.length / 2;
            hipw = rect.width / 2;
            break;
        case RoofType::Mansard:
            break;
    }
    hipl = std::clamp(hipl, 0.0, rect.length / 2);
    hipw = std::clamp(hipw, 0.0, rect.width / 2);
    if (z_ridge < z_eave) z_ridge = z_eave;
}

bool RoofModel::satisfies_invariants() const {
    if (z_ridge < z_eave - 1e-9) return false;
    if (hipl < -1e-9 || hipl > rect.length / 2 + 1e-9) return false;
    if (hipw < -1e-9 || hipw > rect.width / 2 + 1e-9) return false;
    return z_eave > terrain_z;
}

namespace {

// slope fraction at rect-frame coordinates; 0 on the plateau, 1 at the eave
double slope_fraction(const RoofModel& m, double u, double v) {
    double a = m.rect.length / 2 - m.hipl;
    double b = m.rect.width / 2 - m.hipw;
    double du = 0.0, dv = 0.0;
    if (std::fabs(u) > a && m.hipl > 0) du = (std::fabs(u) - a) / m.hipl;
    if (std::fabs(v) > b && m.hipw > 0) dv = (std::fabs(v) - b) / m.hipw;
    return std::min(1.0, std::max(du, dv));
}

}  // namespace

std::optional<double> roof_height(const RoofModel& model, const Vec2& p) {
    Vec2 uv = model.rect.to_frame(p);
    if (std::fabs(uv.x) > model.rect.length / 2 || std::fabs(uv.y) > model.rect.width / 2)
        return std::nullopt;
    double s = slope_fraction(model, uv.x, uv.y);
    return model.z_ridge - (model.z_ridge - model.z_eave) * s;
}

double roof_height_clamped(const RoofModel& model, const Vec2& p) {
    Vec2 uv = model.rect.to_frame(p);
    double u = std::clamp(uv.x, -model.rect.length / 2, model.rect.length / 2);
    double v = std::clamp(uv.y, -model.rect.width / 2, model.rect.width / 2);
    double s = slope_fraction(model, u, v);
    return model.z_ridge - (model.z_ridge - model.z_eave) * s;
}

void FitConfig::validate() const {
    if (z_step <= 0 || hip_step <= 0 || polish_step <= 0)
        throw InvalidInputError("fit steps must be positive");
    if (z_eave_range <= 0 || ridge_max_above <= ridge_min_above)
        throw InvalidInputError("fit ranges must be non-empty");
}

std::vector<double> grid_values(double lo, double hi, double step) {
    std::vector<double> out;
    for (double v = lo; v <= hi + 1e-9; v += step) out.push_back(v);
    if (out.empty() || out.back() < hi - 1e-9) out.push_back(hi);
    return out;
}

std::vector<HeightSample> footprint_samples(const BuildingRectangle& rect,
                                            const GeoRaster& dsm) {
    // symmetric grid inset by >= half a cell: edge samples stay clear of
    // ground cells when the rectangle is misaligned by a fraction of a cell
    std::vector<HeightSample> out;
    double cs = dsm.cell_size();
    int nu = std::max(1, static_cast<int>(std::floor((rect.length - cs) / cs)));
    int nv = std::max(1, static_cast<int>(std::floor((rect.width - cs) / cs)));
    for (int i = 0; i < nu; ++i) {
        double u = (i - (nu - 1) * 0.5) * cs;
        for (int j = 0; j < nv; ++j) {
            double v = (j - (nv - 1) * 0.5) * cs;
            auto z = dsm.sample_bilinear(rect.from_frame({u, v}));
            if (z) out.push_back({{u, v}, *z});
        }
    }
    return out;
}

RoofModel initial_parameters(RoofType type, const BuildingRectangle& rect,
                             const GeoRaster& dsm, const FitConfig& cfg) {
    cfg.validate();
    auto samples = footprint_samples(rect, dsm);
    if (static_cast<int>(samples.size()) < cfg.min_valid_cells)
        throw DegenerateGeometryError("rectangle covers too few valid DSM cells");
    double mean_h = 0;
    for (const auto& s : samples) mean_h += s.z;
    mean_h /= static_cast<double>(samples.size());

    RoofModel m;
    m.roof_type = type;
    m.rect = rect;
    m.z_eave = mean_h - 0.5;
    m.z_ridge = (type == RoofType::Flat) ? mean_h - 0.5 : mean_h;
    switch (type) {
        case RoofType::Flat:
        case RoofType::Gable:
            m.hipl = 0.0;
            break;
        case RoofType::Hip:
        case RoofType::Mansard:
            m.hipl = rect.length / 4;
            break;
        case RoofType::Pyramid:
            m.hipl = rect.length / 2;
            break;
    }
    m.hipw = (type == RoofType::Mansard) ? rect.width / 4 : rect.width / 2;
    if (type == RoofType::Flat) m.hipw = 0.0;
    m.apply_type_constraints();

    // terrain: 5th percentile of the DSM in a 5 m ring outside the footprint
    std::vector<double> ring;
    double margin = 5.0;
    double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
    for (const auto& c : rect.corners()) {
        xmin = std::min(xmin, c.x);
        xmax = std::max(xmax, c.x);
        ymin = std::min(ymin, c.y);
        ymax = std::max(ymax, c.y);
    }
    int r0, c0, r1, c1;
    dsm.world_to_cell({xmin - margin, ymax + margin}, r0, c0);
    dsm.world_to_cell({xmax + margin, ymin - margin}, r1, c1);
    for (int r = std::max(0, r0); r <= std::min(dsm.height() - 1, r1); ++r)
        for (int c = std::max(0, c0); c <= std::min(dsm.width() - 1, c1); ++c) {
            if (dsm.is_nodata(r, c)) continue;
            Vec2 uv = rect.to_frame(dsm.cell_center(r, c));
            bool inside = std::fabs(uv.x) <= rect.length / 2 &&
                          std::fabs(uv.y) <= rect.width / 2;
            bool in_ring = std::fabs(uv.x) <= rect.length / 2 + margin &&
                           std::fabs(uv.y) <= rect.width / 2 + margin;
            if (!inside && in_ring) ring.push_back(dsm.at(r, c));
        }
    if (ring.empty()) {
        double zmin = samples.front().z;
        for (const auto& s : samples) zmin = std::min(zmin, s.z);
        m.terrain_z = zmin - 3.0;
    } else {
        size_t idx = static_cast<size_t>(0.05 * static_cast<double>(ring.size() - 1));
        std::nth_element(ring.begin(), ring.begin() + static_cast<long>(idx), ring.end());
        m.terrain_z = ring[idx];
    }
    return m;
}

std::vector<double> z_eave_grid(const RoofModel& init, const FitConfig& cfg) {
    return grid_values(init.z_eave - cfg.z_eave_range, init.z_eave + cfg.z_eave_range,
                       cfg.z_step);
}

std::vector<double> z_ridge_grid(double z_eave, const FitConfig& cfg) {
    return grid_values(z_eave + cfg.ridge_min_above, z_eave + cfg.ridge_max_above,
                       cfg.z_step);
}

std::vector<double> hipl_grid(const RoofModel& init, const FitConfig& cfg) {
    double lo = std::max(0.0, init.hipl - init.rect.length / 8);
    double hi = std::min(init.rect.length / 2, init.hipl + init.rect.length / 8);
    return grid_values(lo, hi, cfg.hip_step);
}

std::vector<double> hipw_grid(const RoofModel& init, const FitConfig& cfg) {
    double lo = std::max(0.0, init.hipw - init.rect.width / 8);
    double hi = std::min(init.rect.width / 2, init.hipw + init.rect.width / 8);
    return grid_values(lo, hi, cfg.hip_step);
}

namespace {

// moments over the samples for one (hipl, hipw): the model height is
// z = Z_ridge*(1-s) + Z_eave*s, so RMSE over any (Z_eave, Z_ridge) pair is
// a closed form of these sums.
struct SlopeMoments {
    double n = 0, sum_s = 0, sum_s2 = 0, sum_z = 0, sum_sz = 0, sum_z2 = 0;

    double sse(double z_ridge, double z_eave) const {
        double g = z_ridge - z_eave;  // z = z_ridge - g*s
        return n * z_ridge * z_ridge - 2 * z_ridge * g * sum_s + g * g * sum_s2 -
               2 * z_ridge * sum_z + 2 * g * sum_sz + sum_z2;
    }
};

SlopeMoments compute_moments(const RoofModel& shape,
                             const std::vector<HeightSample>& samples) {
    SlopeMoments m;
    for (const auto& s : samples) {
        double sf = slope_fraction(shape, s.uv.x, s.uv.y);
        m.n += 1;
        m.sum_s += sf;
        m.sum_s2 += sf * sf;
        m.sum_z += s.z;
        m.sum_sz += sf * s.z;
        m.sum_z2 += s.z * s.z;
    }
    return m;
}

// least-squares (Z_ridge, Z_eave) for fixed slopes; falls back to the mean
// when the slope field is constant.
bool polish_heights(const SlopeMoments& m, double& z_ridge, double& z_eave) {
    if (m.n <= 0) return false;
    double st2 = m.n - 2 * m.sum_s + m.sum_s2;  // sum of (1-s)^2
    double sts = m.sum_s - m.sum_s2;            // sum of (1-s)*s
    double stz = m.sum_z - m.sum_sz;            // sum of (1-s)*z
    double det = st2 * m.sum_s2 - sts * sts;
    if (std::fabs(det) < 1e-9 * m.n * m.n) {
        z_ridge = z_eave = m.sum_z / m.n;
        return true;
    }
    double zr = (stz * m.sum_s2 - sts * m.sum_sz) / det;
    double ze = (st2 * m.sum_sz - sts * stz) / det;
    if (zr < ze) return false;
    z_ridge = zr;
    z_eave = ze;
    return true;
}

bool hip_free_l(RoofType t) { return t == RoofType::Hip || t == RoofType::Mansard; }
bool hip_free_w(RoofType t) { return t == RoofType::Mansard; }

}  // namespace

namespace {

RoofModel fit_core(RoofType type, const RoofModel& init,
                   const std::vector<HeightSample>& samples, const FitConfig& cfg) {
    RoofModel shape = init;
    shape.roof_type = type;
    shape.apply_type_constraints();

    std::vector<double> hl = hip_free_l(type) ? hipl_grid(shape, cfg)
                                              : std::vector<double>{shape.hipl};
    std::vector<double> hw = hip_free_w(type) ? hipw_grid(shape, cfg)
                                              : std::vector<double>{shape.hipw};
    std::vector<double> eaves = z_eave_grid(shape, cfg);

    RoofModel best = shape;
    double best_sse = std::numeric_limits<double>::infinity();

    auto search = [&](const std::vector<double>& hls, const std::vector<double>& hws) {
        for (double l : hls) {
            for (double w : hws) {
                RoofModel cand = shape;
                cand.hipl = l;
                cand.hipw = w;
                cand.apply_type_constraints();
                SlopeMoments mom = compute_moments(cand, samples);
                for (double ze : eaves) {
                    if (type == RoofType::Flat) {
                        double sse = mom.sse(ze, ze);
                        if (sse < best_sse) {
                            best_sse = sse;
                            best = cand;
                            best.z_eave = best.z_ridge = ze;
                        }
                        continue;
                    }
                    for (double zr : z_ridge_grid(ze, cfg)) {
                        double sse = mom.sse(zr, ze);
                        if (sse < best_sse) {
                            best_sse = sse;
                            best = cand;
                            best.z_eave = ze;
                            best.z_ridge = zr;
                        }
                    }
                }
            }
        }
    };
    search(hl, hw);

    // local hip refinement around the coarse winner
    if (hip_free_l(type) || hip_free_w(type)) {
        auto local = [&](double center, double half_extent_max, bool free_axis) {
            if (!free_axis) return std::vector<double>{center};
            double lo = std::max(0.0, center - cfg.hip_step);
            double hi = std::min(half_extent_max, center + cfg.hip_step);
            return grid_values(lo, hi, cfg.polish_step);
        };
        search(local(best.hipl, shape.rect.length / 2, hip_free_l(type)),
               local(best.hipw, shape.rect.width / 2, hip_free_w(type)));
    }

    // closed-form height polish at the winning slope field
    {
        RoofModel cand = best;
        SlopeMoments mom = compute_moments(cand, samples);
        double zr = cand.z_ridge, ze = cand.z_eave;
        if (type == RoofType::Flat) {
            zr = ze = mom.sum_z / mom.n;
            double sse = mom.sse(zr, ze);
            if (sse <= best_sse) {
                best_sse = sse;
                best.z_ridge = zr;
                best.z_eave = ze;
            }
        } else if (polish_heights(mom, zr, ze)) {
            double sse = mom.sse(zr, ze);
            if (sse <= best_sse && zr >= ze) {
                best_sse = sse;
                best.z_ridge = zr;
                best.z_eave = ze;
            }
        }
    }

    best.fit_rmse = std::sqrt(std::max(0.0, best_sse) / static_cast<double>(samples.size()));
    return best;
}

}  // namespace

RoofModel fit_samples(RoofType type, const RoofModel& init,
                      const std::vector<HeightSample>& samples, const FitConfig& cfg) {
    cfg.validate();
    // discard unambiguous ground samples picked up at misaligned edges
    std::vector<HeightSample> kept;
    for (const auto& s : samples)
        if (s.z >= init.terrain_z + 2.0) kept.push_back(s);
    if (static_cast<int>(kept.size()) < cfg.min_valid_cells)
        throw DegenerateGeometryError("too few valid samples to fit");

    RoofModel best = fit_core(type, init, kept, cfg);

    // one residual-trim pass: mixed roof/ground cells at the footprint edge
    // otherwise dominate the error
    std::vector<HeightSample> inliers;
    for (const auto& s : kept) {
        double h = best.z_ridge -
                   (best.z_ridge - best.z_eave) * slope_fraction(best, s.uv.x, s.uv.y);
        if (std::fabs(h - s.z) <= 1.0) inliers.push_back(s);
    }
    if (inliers.size() < kept.size() &&
        inliers.size() >= static_cast<size_t>(cfg.min_valid_cells) &&
        inliers.size() >= kept.size() * 4 / 5)
        best = fit_core(type, init, inliers, cfg);
    return best;
}

RoofModel fit_model_typed(RoofType type, const BuildingRectangle& rect,
                          const GeoRaster& dsm, const FitConfig& cfg) {
    RoofModel init = initial_parameters(type, rect, dsm, cfg);
    auto samples = footprint_samples(rect, dsm);
    RoofModel fitted = fit_samples(type, init, samples, cfg);
    fitted.terrain_z = init.terrain_z;
    return fitted;
}

RoofModel fit_model(const BuildingRectangle& rect, const GeoRaster& dsm,
                    const FitConfig& cfg) {
    // also hypothesize the 90-degree-swapped frame: decomposition picks the
    // longer extent as the length axis, which puts the ridge on the wrong axis
    // for e.g. the wide half of a split gable
    BuildingRectangle swapped = rect;
    std::swap(swapped.length, swapped.width);
    swapped.orientation = normalize_angle_180(rect.orientation + 90.0);

    std::vector<RoofModel> fits;
    double best_rmse = std::numeric_limits<double>::infinity();
    for (RoofType t : {RoofType::Flat, RoofType::Gable, RoofType::Pyramid, RoofType::Hip,
                       RoofType::Mansard}) {
        fits.push_back(fit_model_typed(t, rect, dsm, cfg));
        best_rmse = std::min(best_rmse, fits.back().fit_rmse);
        if (t != RoofType::Flat) {
            fits.push_back(fit_model_typed(t, swapped, dsm, cfg));
            best_rmse = std::min(best_rmse, fits.back().fit_rmse);
        }
    }
    // prefer the simplest type (fewest free parameters) whose fit is within a
    // small margin of the best; richer models otherwise win on noise alone
    double margin = std::max(0.005, 0.05 * best_rmse);
    for (const RoofModel& m : fits)
        if (m.fit_rmse <= best_rmse + margin) return m;
    return fits.back();
}

double model_rmse(const RoofModel& model, const GeoRaster& dsm) {
    auto samples = footprint_samples(model.rect, dsm);
    if (samples.empty()) return 0.0;
    double sse = 0;
    for (const auto& s : samples) {
        double h = model.z_ridge -
                   (model.z_ridge - model.z_eave) * slope_fraction(model, s.uv.x, s.uv.y);
        sse += (h - s.z) * (h - s.z);
    }
    return std::sqrt(sse / static_cast<double>(samples.size()));
}

}  // namespace lod2
