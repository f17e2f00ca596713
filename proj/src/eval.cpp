#include "lod2/eval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "lod2/errors.hpp"

namespace lod2 {

std::pair<GeoRaster, GeoRaster> rasterize_models(const std::vector<SceneModel>& models,
                                                 const GeoRaster& frame) {
    GeoRaster mask(frame.width(), frame.height(), BandKind::Label, frame.cell_size(),
                   frame.origin_x(), frame.origin_y());
    GeoRaster height(frame.width(), frame.height(), BandKind::Elevation, frame.cell_size(),
                     frame.origin_x(), frame.origin_y());
    for (int r = 0; r < height.height(); ++r)
        for (int c = 0; c < height.width(); ++c) height.at(r, c) = height.nodata();

    for (const auto& sm : models) {
        double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
        for (const auto& p : sm.footprint) {
            xmin = std::min(xmin, p.x);
            xmax = std::max(xmax, p.x);
            ymin = std::min(ymin, p.y);
            ymax = std::max(ymax, p.y);
        }
        int r0, c0, r1, c1;
        frame.world_to_cell({xmin, ymax}, r0, c0);
        frame.world_to_cell({xmax, ymin}, r1, c1);
        for (int r = std::max(0, r0); r <= std::min(frame.height() - 1, r1); ++r)
            for (int c = std::max(0, c0); c <= std::min(frame.width() - 1, c1); ++c) {
                Vec2 p = frame.cell_center(r, c);
                bool in = sm.merged ? point_in_ring(p, sm.footprint)
                                    : sm.model.rect.contains(p);
                if (!in) continue;
                double h = roof_height_clamped(sm.model, p);
                if (mask.at(r, c) == 0.0 || height.is_nodata(r, c) || h > height.at(r, c)) {
                    mask.at(r, c) = 1.0;
                    height.at(r, c) = h;
                }
            }
    }
    return {std::move(mask), std::move(height)};
}

EvalReport evaluate(const GeoRaster& pred_mask, const GeoRaster& pred_height,
                    const GeoRaster& gt_mask, const GeoRaster& gt_height, double tol) {
    if (!pred_mask.same_grid(gt_mask))
        throw InvalidInputError("evaluate: masks are not co-registered");
    EvalReport rep;
    for (int r = 0; r < pred_mask.height(); ++r)
        for (int c = 0; c < pred_mask.width(); ++c) {
            bool p = pred_mask.at(r, c) != 0.0;
            bool g = gt_mask.at(r, c) != 0.0;
            if (p && g) {
                ++rep.tp;
                double dh = pred_height.at(r, c) - gt_height.at(r, c);
                if (pred_height.is_nodata(r, c) || gt_height.is_nodata(r, c)) continue;
                if (std::fabs(dh) <= tol) ++rep.tp3d;
            } else if (p) {
                ++rep.fp;
            } else if (g) {
                ++rep.fn;
            }
        }
    long long den2 = rep.tp + rep.fp + rep.fn;
    long long den3 = rep.tp3d + rep.fp + rep.fn;
    rep.degenerate = den2 == 0;
    rep.iou2 = den2 > 0 ? static_cast<double>(rep.tp) / static_cast<double>(den2) : 0.0;
    rep.iou3 = den3 > 0 ? static_cast<double>(rep.tp3d) / static_cast<double>(den3) : 0.0;
    if (rep.degenerate) rep.iou3 = 0.0;
    return rep;
}

void write_report_json(const EvalReport& report, const std::string& path) {
    nlohmann::json doc = {{"variant", report.variant}, {"tp", report.tp},
                          {"fp", report.fp},           {"fn", report.fn},
                          {"tp3d", report.tp3d},       {"iou2", report.iou2},
                          {"iou3", report.iou3}};
    if (report.degenerate) doc["degenerate"] = true;
    std::ofstream out(path);
    out << doc.dump(2) << "\n";
}

std::string format_report_table(const std::vector<EvalReport>& reports) {
    std::ostringstream os;
    os << "variant      iou2     iou3       tp       fp       fn     tp3d\n";
    char line[160];
    for (const auto& r : reports) {
        std::snprintf(line, sizeof(line), "%-9s %8.4f %8.4f %8lld %8lld %8lld %8lld\n",
                      r.variant.c_str(), r.iou2, r.iou3, r.tp, r.fp, r.fn, r.tp3d);
        os << line;
    }
    return os.str();
}

}  // namespace lod2
