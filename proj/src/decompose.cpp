#include "lod2/decompose.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>

#include <json.hpp>

namespace lod2 {

std::array<Vec2, 4> BuildingRectangle::corners() const {
    return {from_frame({-length / 2, -width / 2}), from_frame({length / 2, -width / 2}),
            from_frame({length / 2, width / 2}), from_frame({-length / 2, width / 2})};
}

void DecomposeConfig::validate() const {
    if (grad_threshold <= 0 || color_threshold <= 0 || height_threshold <= 0 ||
        gap_threshold <= 0 || dilate <= 0 || edge_len_tol <= 0 || pyramid_levels < 1)
        throw InvalidInputError("decompose config values must be positive");
    if (nms_window < 1 || nms_window % 2 == 0)
        throw InvalidInputError("nms_window must be odd and positive");
}

CellBox max_inner_rectangle(const GeoRaster& mask) {
    if (mask.bands() != 1) throw InvalidInputError("max_inner_rectangle needs a binary mask");
    int h = mask.height(), w = mask.width();
    bool any = false;
    std::vector<int> heights(w, 0);
    CellBox best{0, 0, 0, 0};
    auto better = [&](const CellBox& cand) {
        if (cand.area() != best.area()) return cand.area() > best.area();
        if (cand.row0 != best.row0) return cand.row0 < best.row0;
        if (cand.col0 != best.col0) return cand.col0 < best.col0;
        return (cand.col1 - cand.col0) > (best.col1 - best.col0);
    };
    for (int r = 0; r < h; ++r) {
        for (int c = 0; c < w; ++c) {
            if (mask.at(r, c) != 0.0) {
                ++heights[c];
                any = true;
            } else {
                heights[c] = 0;
            }
        }
        // largest rectangle in histogram (monotonic stack)
        std::vector<int> stack;
        for (int c = 0; c <= w; ++c) {
            int cur = (c < w) ? heights[c] : 0;
            while (!stack.empty() && heights[stack.back()] >= cur) {
                int top = stack.back();
                stack.pop_back();
                int hgt = heights[top];
                if (hgt == 0) continue;
                int left = stack.empty() ? 0 : stack.back() + 1;
                CellBox cand{r - hgt + 1, left, r + 1, c};
                if (cand.area() > 0 && better(cand)) best = cand;
            }
            stack.push_back(c);
        }
    }
    if (!any) throw InvalidInputError("max_inner_rectangle: empty mask");
    return best;
}

namespace {

// per-index scores (mean masked gradient) -> indices surviving threshold + NMS
std::vector<int> threshold_nms(const std::vector<double>& score, double threshold,
                               int window) {
    int half = window / 2;
    std::vector<int> out;
    int n = static_cast<int>(score.size());
    for (int i = 0; i < n; ++i) {
        if (score[i] <= threshold) continue;
        bool is_max = true;
        for (int j = std::max(0, i - half); j <= std::min(n - 1, i + half); ++j) {
            if (score[j] > score[i] || (score[j] == score[i] && j < i)) {
                is_max = false;
                break;
            }
        }
        if (is_max) out.push_back(i);
    }
    return out;
}

}  // namespace

std::vector<SplitLine> candidate_split_lines(const GeoRaster& dsm_rot,
                                             const GeoRaster& ortho_rot,
                                             const GeoRaster& mask_rot,
                                             const DecomposeConfig& cfg) {
    cfg.validate();
    int h = dsm_rot.height(), w = dsm_rot.width();
    GeoRaster gx = gradient_magnitude(dsm_rot, GradientAxis::Horizontal);
    GeoRaster gy = gradient_magnitude(dsm_rot, GradientAxis::Vertical);

    auto masked = [&](int r, int c) { return mask_rot.at(r, c) != 0.0; };

    std::vector<double> col_score(w, 0.0), row_score(h, 0.0);
    std::vector<int> col_n(w, 0), row_n(h, 0);
    for (int r = 0; r < h; ++r)
        for (int c = 0; c < w; ++c) {
            if (!masked(r, c)) continue;
            if (!gx.is_nodata(r, c)) {
                col_score[c] += gx.at(r, c);
                ++col_n[c];
            }
            if (!gy.is_nodata(r, c)) {
                row_score[r] += gy.at(r, c);
                ++row_n[r];
            }
        }
    for (int c = 0; c < w; ++c) col_score[c] = col_n[c] ? col_score[c] / col_n[c] : 0.0;
    for (int r = 0; r < h; ++r) row_score[r] = row_n[r] ? row_score[r] / row_n[r] : 0.0;

    // mean per-band color difference between 2-cell buffers either side
    auto color_gate_col = [&](int c) {
        double sum_l[3] = {0, 0, 0}, sum_r[3] = {0, 0, 0};
        int nl = 0, nr = 0;
        for (int r = 0; r < h; ++r) {
            for (int d = 1; d <= 2; ++d) {
                if (c - d >= 0 && masked(r, c - d)) {
                    for (int b = 0; b < 3; ++b) sum_l[b] += ortho_rot.at(r, c - d, b);
                    ++nl;
                }
                if (c + d < w && masked(r, c + d)) {
                    for (int b = 0; b < 3; ++b) sum_r[b] += ortho_rot.at(r, c + d, b);
                    ++nr;
                }
            }
        }
        if (nl == 0 || nr == 0) return false;
        double diff = 0;
        for (int b = 0; b < 3; ++b) diff += std::fabs(sum_l[b] / nl - sum_r[b] / nr);
        return diff / 3.0 > cfg.color_threshold;
    };
    auto color_gate_row = [&](int r) {
        double sum_a[3] = {0, 0, 0}, sum_b[3] = {0, 0, 0};
        int na = 0, nb = 0;
        for (int c = 0; c < w; ++c) {
            for (int d = 1; d <= 2; ++d) {
                if (r - d >= 0 && masked(r - d, c)) {
                    for (int b = 0; b < 3; ++b) sum_a[b] += ortho_rot.at(r - d, c, b);
                    ++na;
                }
                if (r + d < h && masked(r + d, c)) {
                    for (int b = 0; b < 3; ++b) sum_b[b] += ortho_rot.at(r + d, c, b);
                    ++nb;
                }
            }
        }
        if (na == 0 || nb == 0) return false;
        double diff = 0;
        for (int b = 0; b < 3; ++b) diff += std::fabs(sum_a[b] / na - sum_b[b] / nb);
        return diff / 3.0 > cfg.color_threshold;
    };

    std::vector<SplitLine> lines;
    for (int c : threshold_nms(col_score, cfg.grad_threshold, cfg.nms_window))
        if (color_gate_col(c)) lines.push_back({true, c});
    for (int r : threshold_nms(row_score, cfg.grad_threshold, cfg.nms_window))
        if (color_gate_row(r)) lines.push_back({false, r});
    return lines;
}

namespace {

GeoRaster crop(const GeoRaster& src, int row0, int col0, int row1, int col1) {
    row0 = std::clamp(row0, 0, src.height() - 1);
    col0 = std::clamp(col0, 0, src.width() - 1);
    row1 = std::clamp(row1, row0 + 1, src.height());
    col1 = std::clamp(col1, col0 + 1, src.width());
    GeoRaster out(col1 - col0, row1 - row0, src.kind(), src.cell_size(),
                  src.origin_x() + col0 * src.cell_size(),
                  src.origin_y() - row0 * src.cell_size());
    out.set_nodata(src.nodata());
    for (int r = row0; r < row1; ++r)
        for (int c = col0; c < col1; ++c)
            for (int b = 0; b < src.bands(); ++b)
                out.at(r - row0, c - col0, b) = src.at(r, c, b);
    return out;
}

GeoRaster rasterize_polygon_mask(const BuildingPolygon& poly, const GeoRaster& frame,
                                 int pad_cells) {
    double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
    for (const auto& p : poly.vertices) {
        xmin = std::min(xmin, p.x);
        xmax = std::max(xmax, p.x);
        ymin = std::min(ymin, p.y);
        ymax = std::max(ymax, p.y);
    }
    int r0, c0, r1, c1;
    frame.world_to_cell({xmin, ymax}, r0, c0);
    frame.world_to_cell({xmax, ymin}, r1, c1);
    r0 = std::max(0, r0 - pad_cells);
    c0 = std::max(0, c0 - pad_cells);
    r1 = std::min(frame.height() - 1, r1 + pad_cells);
    c1 = std::min(frame.width() - 1, c1 + pad_cells);
    GeoRaster mask(c1 - c0 + 1, r1 - r0 + 1, BandKind::Label, frame.cell_size(),
                   frame.origin_x() + c0 * frame.cell_size(),
                   frame.origin_y() - r0 * frame.cell_size());
    for (int r = 0; r < mask.height(); ++r)
        for (int c = 0; c < mask.width(); ++c)
            if (point_in_ring(mask.cell_center(r, c), poly.vertices)) mask.at(r, c) = 1.0;
    return mask;
}

struct Level0Box {
    int row0, col0, row1, col1;  // end-exclusive, level-0 rotated grid
};

long long box_mask_score(const GeoRaster& mask, const Level0Box& b) {
    long long inside = 0, outside = 0;
    for (int r = std::max(0, b.row0); r < std::min(mask.height(), b.row1); ++r)
        for (int c = std::max(0, b.col0); c < std::min(mask.width(), b.col1); ++c)
            (mask.at(r, c) != 0.0 ? inside : outside)++;
    return inside - outside;
}

void snap_box_to_mask(const GeoRaster& mask, Level0Box& box, int radius) {
    for (int pass = 0; pass < 2; ++pass) {
        for (int side = 0; side < 4; ++side) {
            Level0Box best = box;
            long long best_score = box_mask_score(mask, box);
            for (int d = -radius; d <= radius; ++d) {
                Level0Box cand = box;
                if (side == 0) cand.row0 += d;
                if (side == 1) cand.row1 += d;
                if (side == 2) cand.col0 += d;
                if (side == 3) cand.col1 += d;
                if (cand.row1 - cand.row0 < 1 || cand.col1 - cand.col0 < 1) continue;
                long long s = box_mask_score(mask, cand);
                if (s > best_score) {
                    best_score = s;
                    best = cand;
                }
            }
            box = best;
        }
    }
}

struct OrientationRun {
    std::vector<BuildingRectangle> rects;
    double iou = 0.0;
};

OrientationRun decompose_for_orientation(const BuildingPolygon& polygon, double theta,
                                         const GeoRaster& dsm, const GeoRaster& ortho,
                                         const DecomposeConfig& cfg) {
    OrientationRun run;
    Vec2 pivot = ring_centroid(polygon.vertices);
    double angle = theta - 90.0;  // content rotation aligning theta with the x-axis

    GeoRaster mask0 = rasterize_polygon_mask(polygon, dsm, cfg.dilate + 2);
    int r0, c0, r1, c1;
    dsm.world_to_cell({mask0.origin_x(), mask0.origin_y()}, r0, c0);
    r1 = r0 + mask0.height();
    c1 = c0 + mask0.width();
    GeoRaster dsm_crop = crop(dsm, r0, c0, r1, c1);
    GeoRaster ortho_crop = crop(ortho, r0, c0, r1, c1);

    GeoRaster mask_rot = rotate_resample(mask0, pivot, angle);
    GeoRaster dsm_rot = rotate_resample(dsm_crop, pivot, angle);
    GeoRaster ortho_rot = rotate_resample(ortho_crop, pivot, angle);

    auto mask_pyr = build_pyramid(mask_rot, cfg.pyramid_levels);
    auto dsm_pyr = build_pyramid(dsm_rot, cfg.pyramid_levels);
    auto ortho_pyr = build_pyramid(ortho_rot, cfg.pyramid_levels);
    const GeoRaster& mask_c = mask_pyr.back();
    int scale = 1 << (cfg.pyramid_levels - 1);

    bool any = false;
    for (int r = 0; r < mask_c.height() && !any; ++r)
        for (int c = 0; c < mask_c.width(); ++c)
            if (mask_c.at(r, c) != 0.0) {
                any = true;
                break;
            }
    if (!any) return run;

    auto lines = candidate_split_lines(dsm_pyr.back(), ortho_pyr.back(), mask_c, cfg);

    // full-span split lines partition the coarse grid into tile bands
    std::vector<int> row_cuts, col_cuts;
    for (const auto& l : lines) (l.vertical ? col_cuts : row_cuts).push_back(l.index);
    std::sort(row_cuts.begin(), row_cuts.end());
    std::sort(col_cuts.begin(), col_cuts.end());
    auto band = [](const std::vector<int>& cuts, int idx) {
        return static_cast<int>(std::upper_bound(cuts.begin(), cuts.end(), idx) -
                                cuts.begin());
    };

    std::map<std::pair<int, int>, std::vector<std::pair<int, int>>> pieces;
    for (int r = 0; r < mask_c.height(); ++r)
        for (int c = 0; c < mask_c.width(); ++c)
            if (mask_c.at(r, c) != 0.0)
                pieces[{band(row_cuts, r), band(col_cuts, c)}].push_back({r, c});

    std::vector<Level0Box> boxes;
    for (auto& [key, cells] : pieces) {
        GeoRaster piece(mask_c.width(), mask_c.height(), BandKind::Label,
                        mask_c.cell_size(), mask_c.origin_x(), mask_c.origin_y());
        for (auto& [r, c] : cells) piece.at(r, c) = 1.0;
        long long total = static_cast<long long>(cells.size());
        long long remaining = total;
        while (remaining > 0 &&
               static_cast<double>(remaining) >= cfg.residual_stop * total) {
            CellBox box = max_inner_rectangle(piece);
            if (box.area() < 2 && remaining != total) break;  // degenerate refill
            boxes.push_back({box.row0 * scale, box.col0 * scale, box.row1 * scale,
                             box.col1 * scale});
            for (int r = box.row0; r < box.row1; ++r)
                for (int c = box.col0; c < box.col1; ++c)
                    if (piece.at(r, c) != 0.0) {
                        piece.at(r, c) = 0.0;
                        --remaining;
                    }
            if (box.area() < 2) break;
        }
    }

    for (auto& box : boxes) {
        box.row1 = std::min(box.row1, mask_rot.height());
        box.col1 = std::min(box.col1, mask_rot.width());
        snap_box_to_mask(mask_rot, box, cfg.snap_cells);
    }

    // snapping can expand boxes until residual pieces are mostly redundant;
    // drop any box whose area is covered >=50% by larger kept boxes
    {
        std::stable_sort(boxes.begin(), boxes.end(),
                         [](const Level0Box& a, const Level0Box& b) {
                             long long aa = static_cast<long long>(a.row1 - a.row0) *
                                            (a.col1 - a.col0);
                             long long ab = static_cast<long long>(b.row1 - b.row0) *
                                            (b.col1 - b.col0);
                             return aa > ab;
                         });
        GeoRaster cover(mask_rot.width(), mask_rot.height(), BandKind::Label,
                        mask_rot.cell_size(), mask_rot.origin_x(), mask_rot.origin_y());
        std::vector<Level0Box> kept;
        for (const auto& b : boxes) {
            long long area = 0, covered = 0;
            for (int r = std::max(0, b.row0); r < std::min(cover.height(), b.row1); ++r)
                for (int c = std::max(0, b.col0); c < std::min(cover.width(), b.col1); ++c) {
                    ++area;
                    if (cover.at(r, c) != 0.0) ++covered;
                }
            if (area == 0 || 2 * covered >= area) continue;
            for (int r = std::max(0, b.row0); r < std::min(cover.height(), b.row1); ++r)
                for (int c = std::max(0, b.col0); c < std::min(cover.width(), b.col1); ++c)
                    cover.at(r, c) = 1.0;
            kept.push_back(b);
        }
        boxes = std::move(kept);
    }

    // run quality: footprint IOU of the union of boxes against the mask
    {
        long long inter = 0, uni = 0;
        GeoRaster cover(mask_rot.width(), mask_rot.height(), BandKind::Label,
                        mask_rot.cell_size(), mask_rot.origin_x(), mask_rot.origin_y());
        for (const auto& b : boxes)
            for (int r = std::max(0, b.row0); r < std::min(cover.height(), b.row1); ++r)
                for (int c = std::max(0, b.col0); c < std::min(cover.width(), b.col1); ++c)
                    cover.at(r, c) = 1.0;
        for (int r = 0; r < cover.height(); ++r)
            for (int c = 0; c < cover.width(); ++c) {
                bool in_cover = cover.at(r, c) != 0.0;
                bool in_mask = mask_rot.at(r, c) != 0.0;
                if (in_cover && in_mask) ++inter;
                if (in_cover || in_mask) ++uni;
            }
        run.iou = uni > 0 ? static_cast<double>(inter) / uni : 0.0;
    }

    double cs = mask_rot.cell_size();
    for (const auto& b : boxes) {
        double x_extent = (b.col1 - b.col0) * cs;
        double y_extent = (b.row1 - b.row0) * cs;
        Vec2 center_rot{mask_rot.origin_x() + (b.col0 + b.col1) * 0.5 * cs,
                        mask_rot.origin_y() - (b.row0 + b.row1) * 0.5 * cs};
        BuildingRectangle rect;
        rect.parent_polygon = polygon.instance_id;
        rect.center = pivot + rotate_cw(center_rot - pivot, angle);
        if (x_extent >= y_extent) {
            rect.length = x_extent;
            rect.width = y_extent;
            rect.orientation = normalize_angle_180(theta);
        } else {
            rect.length = y_extent;
            rect.width = x_extent;
            rect.orientation = normalize_angle_180(theta + 90.0);
        }
        if (rect.width < 2.0 * dsm.cell_size()) continue;  // reject slivers
        populate_rectangle_stats(rect, dsm, ortho);
        run.rects.push_back(rect);
    }
    return run;
}

}  // namespace

void populate_rectangle_stats(BuildingRectangle& rect, const GeoRaster& dsm,
                              const GeoRaster& ortho) {
    double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
    for (const auto& p : rect.corners()) {
        xmin = std::min(xmin, p.x);
        xmax = std::max(xmax, p.x);
        ymin = std::min(ymin, p.y);
        ymax = std::max(ymax, p.y);
    }
    int r0, c0, r1, c1;
    dsm.world_to_cell({xmin, ymax}, r0, c0);
    dsm.world_to_cell({xmax, ymin}, r1, c1);
    double hsum = 0;
    int hn = 0;
    double csum[3] = {0, 0, 0}, csum2[3] = {0, 0, 0};
    int cn = 0;
    for (int r = std::max(0, r0); r <= std::min(dsm.height() - 1, r1); ++r) {
        for (int c = std::max(0, c0); c <= std::min(dsm.width() - 1, c1); ++c) {
            Vec2 p = dsm.cell_center(r, c);
            if (!rect.contains(p)) continue;
            if (!dsm.is_nodata(r, c)) {
                hsum += dsm.at(r, c);
                ++hn;
            }
            int orow, ocol;
            ortho.world_to_cell(p, orow, ocol);
            if (ortho.in_bounds(orow, ocol)) {
                for (int b = 0; b < 3; ++b) {
                    double v = ortho.at(orow, ocol, b);
                    csum[b] += v;
                    csum2[b] += v * v;
                }
                ++cn;
            }
        }
    }
    rect.mean_height = hn > 0 ? hsum / hn : 0.0;
    for (int b = 0; b < 3; ++b) {
        double mean = cn > 0 ? csum[b] / cn : 0.0;
        double var = cn > 0 ? std::max(0.0, csum2[b] / cn - mean * mean) : 0.0;
        rect.mean_color[b] = mean;
        rect.color_std[b] = std::sqrt(var);
    }
}

std::vector<BuildingRectangle> decompose(const BuildingPolygon& polygon,
                                         const GeoRaster& dsm, const GeoRaster& ortho,
                                         const DecomposeConfig& cfg) {
    cfg.validate();
    if (polygon.vertices.size() < 3)
        throw DegenerateGeometryError("decompose: polygon has too few vertices");
    if (!dsm.same_grid(ortho))
        throw InvalidInputError("decompose: DSM and ortho are not co-registered");

    std::vector<double> orients = polygon.main_orientations;
    if (orients.empty()) orients.push_back(0.0);

    OrientationRun best;
    bool have = false;
    for (double theta : orients) {
        OrientationRun run = decompose_for_orientation(polygon, theta, dsm, ortho, cfg);
        if (!have || run.iou > best.iou) {
            best = std::move(run);
            have = true;
        }
    }
    if (best.rects.empty())
        throw DegenerateGeometryError("decompose: polygon footprint rasterized to nothing");
    for (size_t i = 0; i < best.rects.size(); ++i)
        best.rects[i].id = static_cast<int>(i) + 1;
    return best.rects;
}

namespace {

struct FrameBox {
    double u0, u1, v0, v1;
    bool valid = false;
};

// b expressed as an axis-aligned box in a's frame; invalid when orientations
// are not parallel/orthogonal.
FrameBox box_in_frame(const BuildingRectangle& a, const BuildingRectangle& b,
                      double tol_deg = 1.0) {
    FrameBox fb;
    Vec2 c = a.to_frame(b.center);
    double d_par = angle_diff_180(a.orientation, b.orientation);
    double d_orth = std::fabs(90.0 - d_par);
    double hu, hv;
    if (d_par <= tol_deg) {
        hu = b.length / 2;
        hv = b.width / 2;
    } else if (d_orth <= tol_deg) {
        hu = b.width / 2;
        hv = b.length / 2;
    } else {
        return fb;
    }
    fb = {c.x - hu, c.x + hu, c.y - hv, c.y + hv, true};
    return fb;
}

}  // namespace

MergeDecision should_merge(const BuildingRectangle& a, const BuildingRectangle& b,
                           const GeoRaster& dsm, const GeoRaster& ortho,
                           const DecomposeConfig& cfg, bool require_rect_closure) {
    double cell = dsm.cell_size();
    FrameBox fa{-a.length / 2, a.length / 2, -a.width / 2, a.width / 2, true};
    FrameBox fb = box_in_frame(a, b);
    if (!fb.valid) return MergeDecision::Keep;

    double d = cfg.dilate * cell;
    double ov_u = std::min(fa.u1, fb.u1) - std::max(fa.u0, fb.u0) + 2 * d;
    double ov_v = std::min(fa.v1, fb.v1) - std::max(fa.v0, fb.v0) + 2 * d;
    if (ov_u <= 0 || ov_v <= 0) return MergeDecision::Keep;  // no dilated overlap

    // abutting axis = larger gap direction; compare side lengths along the
    // common edge direction
    double gap_u = std::max(fb.u0 - fa.u1, fa.u0 - fb.u1);
    double gap_v = std::max(fb.v0 - fa.v1, fa.v0 - fb.v1);
    bool abut_u = gap_u >= gap_v;
    double len_a = abut_u ? (fa.v1 - fa.v0) : (fa.u1 - fa.u0);
    double len_b = abut_u ? (fb.v1 - fb.v0) : (fb.u1 - fb.u0);
    if (std::fabs(len_a - len_b) >= cfg.edge_len_tol * cell) return MergeDecision::Keep;

    double color_diff = 0;
    for (int band = 0; band < 3; ++band)
        color_diff += std::fabs(a.mean_color[band] - b.mean_color[band]);
    color_diff /= 3.0;
    if (!(color_diff < cfg.color_threshold)) return MergeDecision::Keep;
    if (!(std::fabs(a.mean_height - b.mean_height) < cfg.height_threshold))
        return MergeDecision::Keep;

    // no height jump across the seam: max |dH| over smoothed sample pairs
    // straddling the common edge
    auto smoothed = [&](const Vec2& p, double& out) {
        int row, col;
        dsm.world_to_cell(p, row, col);
        double sum = 0;
        int cnt = 0;
        for (int dr = -1; dr <= 1; ++dr)
            for (int dc = -1; dc <= 1; ++dc) {
                int r = row + dr, c = col + dc;
                if (!dsm.in_bounds(r, c) || dsm.is_nodata(r, c)) continue;
                sum += dsm.at(r, c);
                ++cnt;
            }
        if (cnt == 0) return false;
        out = sum / cnt;
        return true;
    };
    double seam = abut_u ? ((std::min(fa.u1, fb.u1) + std::max(fa.u0, fb.u0)) / 2)
                         : ((std::min(fa.v1, fb.v1) + std::max(fa.v0, fb.v0)) / 2);
    double lo = abut_u ? std::max(fa.v0, fb.v0) : std::max(fa.u0, fb.u0);
    double hi = abut_u ? std::min(fa.v1, fb.v1) : std::min(fa.u1, fb.u1);
    auto sample = [&](double across, double along, double& out) {
        Vec2 uv = abut_u ? Vec2{seam + across, along} : Vec2{along, seam + across};
        return smoothed(a.from_frame(uv), out);
    };
    for (double t = lo + cell; t <= hi - cell + 1e-9; t += cell) {
        double za2, za1, zb1, zb2;
        if (!sample(-4 * cell, t, za2) || !sample(-2 * cell, t, za1) ||
            !sample(2 * cell, t, zb1) || !sample(4 * cell, t, zb2))
            continue;
        // a continuous roof may slope across the seam or break slope exactly at
        // it; a real step trips the direct difference and both linear
        // extrapolations, so test the smallest of the three
        double direct = std::fabs(za1 - zb1);
        double from_a = std::fabs(zb1 - (2 * za1 - za2));
        double from_b = std::fabs(za1 - (2 * zb1 - zb2));
        double gap = std::min({direct, from_a, from_b});
        if (!(gap < cfg.gap_threshold)) return MergeDecision::Keep;
    }

    if (require_rect_closure) {
        double gap = abut_u ? gap_u : gap_v;
        double mis0 = abut_u ? std::fabs(fa.v0 - fb.v0) : std::fabs(fa.u0 - fb.u0);
        double mis1 = abut_u ? std::fabs(fa.v1 - fb.v1) : std::fabs(fa.u1 - fb.u1);
        if (gap > cell || mis0 > cell || mis1 > cell) return MergeDecision::Keep;
    }
    return MergeDecision::Merge;
}

std::vector<BuildingRectangle> merge_pass(std::vector<BuildingRectangle> rects,
                                          const GeoRaster& dsm, const GeoRaster& ortho,
                                          const DecomposeConfig& cfg) {
    auto pair_distance = [](const BuildingRectangle& a, const BuildingRectangle& b) {
        double color = 0;
        for (int band = 0; band < 3; ++band)
            color += std::fabs(a.mean_color[band] - b.mean_color[band]);
        return color / 3.0 + std::fabs(a.mean_height - b.mean_height);
    };

    while (rects.size() > 1) {
        double best_d = std::numeric_limits<double>::infinity();
        size_t bi = 0, bj = 0;
        for (size_t i = 0; i < rects.size(); ++i)
            for (size_t j = i + 1; j < rects.size(); ++j) {
                if (should_merge(rects[i], rects[j], dsm, ortho, cfg) !=
                    MergeDecision::Merge)
                    continue;
                double dd = pair_distance(rects[i], rects[j]);
                if (dd < best_d) {
                    best_d = dd;
                    bi = i;
                    bj = j;
                }
            }
        if (!std::isfinite(best_d)) break;

        const BuildingRectangle& a = rects[bi];
        FrameBox fb = box_in_frame(a, rects[bj]);
        double u0 = std::min(-a.length / 2, fb.u0), u1 = std::max(a.length / 2, fb.u1);
        double v0 = std::min(-a.width / 2, fb.v0), v1 = std::max(a.width / 2, fb.v1);
        BuildingRectangle merged;
        merged.id = std::min(rects[bi].id, rects[bj].id);
        merged.parent_polygon = a.parent_polygon;
        merged.center = a.from_frame({(u0 + u1) / 2, (v0 + v1) / 2});
        double ext_u = u1 - u0, ext_v = v1 - v0;
        if (ext_u >= ext_v) {
            merged.length = ext_u;
            merged.width = ext_v;
            merged.orientation = a.orientation;
        } else {
            merged.length = ext_v;
            merged.width = ext_u;
            merged.orientation = normalize_angle_180(a.orientation + 90.0);
        }
        populate_rectangle_stats(merged, dsm, ortho);
        rects.erase(rects.begin() + static_cast<long>(bj));
        rects[bi] = merged;
    }
    return rects;
}

void write_rectangles_json(const std::vector<BuildingRectangle>& rects,
                           const std::string& path) {
    nlohmann::json doc = nlohmann::json::array();
    for (const auto& r : rects)
        doc.push_back({{"id", r.id},
                       {"parent", r.parent_polygon},
                       {"x0", r.center.x},
                       {"y0", r.center.y},
                       {"length", r.length},
                       {"width", r.width},
                       {"orientation_deg", r.orientation},
                       {"mean_height", r.mean_height},
                       {"mean_color", {r.mean_color[0], r.mean_color[1], r.mean_color[2]}},
                       {"color_std", {r.color_std[0], r.color_std[1], r.color_std[2]}}});
    std::ofstream out(path);
    out << doc.dump(2) << "\n";
}

std::vector<BuildingRectangle> read_rectangles_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidInputError("cannot open " + path);
    nlohmann::json doc = nlohmann::json::parse(in);
    std::vector<BuildingRectangle> out;
    for (const auto& item : doc) {
        BuildingRectangle r;
        r.id = item.at("id");
        r.parent_polygon = item.at("parent");
        r.center = {item.at("x0"), item.at("y0")};
        r.length = item.at("length");
        r.width = item.at("width");
        r.orientation = item.at("orientation_deg");
        r.mean_height = item.at("mean_height");
        for (int b = 0; b < 3; ++b) {
            r.mean_color[b] = item.at("mean_color").at(b);
            r.color_std[b] = item.at("color_std").at(b);
        }
        out.push_back(r);
    }
    return out;
}

}  // namespace lod2
