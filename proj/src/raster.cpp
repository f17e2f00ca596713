#include "lod2/raster.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <queue>

namespace lod2 {

GeoRaster::GeoRaster(int width, int height, BandKind kind, double cell_size,
                     double origin_x, double origin_y, double fill)
    : width_(width), height_(height), kind_(kind), cell_size_(cell_size),
      origin_x_(origin_x), origin_y_(origin_y) {
    if (width < 1 || height < 1) throw InvalidInputError("raster dimensions must be >= 1");
    if (cell_size <= 0) throw InvalidInputError("cell_size must be positive");
    data_.assign(static_cast<size_t>(width) * height * bands(), fill);
}

std::optional<double> GeoRaster::sample_bilinear(const Vec2& p, int band) const {
    double rf, cf;
    world_to_fractional(p, rf, cf);
    // shift so integer coordinates are cell centers
    rf -= 0.5;
    cf -= 0.5;
    int r0 = static_cast<int>(std::floor(rf));
    int c0 = static_cast<int>(std::floor(cf));
    double fr = rf - r0, fc = cf - c0;
    int r1 = r0 + 1, c1 = c0 + 1;
    // clamp to edge so points within the outer half-cell still sample
    auto cr = [&](int r) { return std::clamp(r, 0, height_ - 1); };
    auto cc = [&](int c) { return std::clamp(c, 0, width_ - 1); };
    if (rf < -0.5 || cf < -0.5 || rf > height_ - 0.5 || cf > width_ - 0.5) return std::nullopt;
    int rr0 = cr(r0), rr1 = cr(r1), cc0 = cc(c0), cc1 = cc(c1);
    if (kind_ == BandKind::Elevation) {
        if (at(rr0, cc0) == nodata_ || at(rr0, cc1) == nodata_ ||
            at(rr1, cc0) == nodata_ || at(rr1, cc1) == nodata_)
            return std::nullopt;
    }
    double v00 = at(rr0, cc0, band), v01 = at(rr0, cc1, band);
    double v10 = at(rr1, cc0, band), v11 = at(rr1, cc1, band);
    return v00 * (1 - fr) * (1 - fc) + v01 * (1 - fr) * fc +
           v10 * fr * (1 - fc) + v11 * fr * fc;
}

std::optional<double> GeoRaster::sample_nearest(const Vec2& p, int band) const {
    int r, c;
    world_to_cell(p, r, c);
    if (!in_bounds(r, c)) return std::nullopt;
    return at(r, c, band);
}

bool PixelRegion::contains(int row, int col) const {
    auto it = std::lower_bound(runs.begin(), runs.end(), row,
                               [](const Run& r, int v) { return r.row < v; });
    for (; it != runs.end() && it->row == row; ++it)
        if (col >= it->col_begin && col < it->col_end) return true;
    return false;
}

PixelRegion PixelRegion::from_cells(std::vector<std::pair<int, int>> cells, int instance_id) {
    PixelRegion region;
    region.instance_id = instance_id;
    if (cells.empty()) return region;
    std::sort(cells.begin(), cells.end());
    cells.erase(std::unique(cells.begin(), cells.end()), cells.end());
    region.row_min = cells.front().first;
    region.row_max = cells.back().first;
    region.col_min = region.col_max = cells.front().second;
    Run cur{cells[0].first, cells[0].second, cells[0].second + 1};
    for (size_t i = 1; i < cells.size(); ++i) {
        auto [r, c] = cells[i];
        region.col_min = std::min(region.col_min, c);
        region.col_max = std::max(region.col_max, c);
        if (r == cur.row && c == cur.col_end) {
            ++cur.col_end;
        } else {
            region.runs.push_back(cur);
            cur = Run{r, c, c + 1};
        }
    }
    region.runs.push_back(cur);
    return region;
}

GeoRaster PixelRegion::to_mask(const GeoRaster& frame) const {
    GeoRaster mask(frame.width(), frame.height(), BandKind::Label, frame.cell_size(),
                   frame.origin_x(), frame.origin_y(), 0.0);
    for_each_cell([&](int r, int c) {
        if (mask.in_bounds(r, c)) mask.at(r, c) = 1.0;
    });
    return mask;
}

GeoRaster gradient_magnitude(const GeoRaster& dsm, GradientAxis axis) {
    if (dsm.kind() != BandKind::Elevation)
        throw InvalidInputError("gradient_magnitude expects a single-band elevation raster");
    GeoRaster out(dsm.width(), dsm.height(), BandKind::Elevation, dsm.cell_size(),
                  dsm.origin_x(), dsm.origin_y(), dsm.nodata());
    out.set_nodata(dsm.nodata());
    int h = dsm.height(), w = dsm.width();
    for (int r = 0; r < h; ++r) {
        for (int c = 0; c < w; ++c) {
            if (dsm.is_nodata(r, c)) continue;
            int ra = r, rb = r, ca = c, cb = c;
            if (axis == GradientAxis::Horizontal) {
                ca = std::max(0, c - 1);
                cb = std::min(w - 1, c + 1);
            } else {
                ra = std::max(0, r - 1);
                rb = std::min(h - 1, r + 1);
            }
            if (dsm.is_nodata(ra, ca) || dsm.is_nodata(rb, cb)) continue;
            int span = (axis == GradientAxis::Horizontal) ? (cb - ca) : (rb - ra);
            if (span == 0) {
                out.at(r, c) = 0.0;
                continue;
            }
            out.at(r, c) = std::fabs(dsm.at(rb, cb) - dsm.at(ra, ca)) / span;
        }
    }
    return out;
}

std::vector<GeoRaster> build_pyramid(const GeoRaster& raster, int levels) {
    if (levels < 1) throw InvalidInputError("pyramid needs at least one level");
    std::vector<GeoRaster> pyramid;
    pyramid.push_back(raster);
    for (int lv = 1; lv < levels; ++lv) {
        const GeoRaster& prev = pyramid.back();
        int w = (prev.width() + 1) / 2;
        int h = (prev.height() + 1) / 2;
        GeoRaster next(w, h, prev.kind(), prev.cell_size() * 2.0,
                       prev.origin_x(), prev.origin_y());
        next.set_nodata(prev.nodata());
        for (int r = 0; r < h; ++r) {
            for (int c = 0; c < w; ++c) {
                if (prev.kind() == BandKind::Label) {
                    std::map<long long, int> votes;
                    for (int dr = 0; dr < 2; ++dr)
                        for (int dc = 0; dc < 2; ++dc) {
                            int pr = 2 * r + dr, pc = 2 * c + dc;
                            if (prev.in_bounds(pr, pc))
                                ++votes[static_cast<long long>(prev.at(pr, pc))];
                        }
                    long long best = 0;
                    int best_n = -1;
                    for (auto& [v, n] : votes)
                        if (n > best_n) { best_n = n; best = v; }
                    next.at(r, c) = static_cast<double>(best);
                } else {
                    for (int b = 0; b < prev.bands(); ++b) {
                        double sum = 0.0;
                        int n = 0;
                        for (int dr = 0; dr < 2; ++dr)
                            for (int dc = 0; dc < 2; ++dc) {
                                int pr = 2 * r + dr, pc = 2 * c + dc;
                                if (!prev.in_bounds(pr, pc)) continue;
                                if (prev.kind() == BandKind::Elevation && prev.is_nodata(pr, pc))
                                    continue;
                                sum += prev.at(pr, pc, b);
                                ++n;
                            }
                        next.at(r, c, b) = (n > 0) ? sum / n : prev.nodata();
                    }
                }
            }
        }
        pyramid.push_back(std::move(next));
    }
    return pyramid;
}

GeoRaster rotate_resample(const GeoRaster& raster, const Vec2& pivot, double angle) {
    angle = std::fmod(angle, 360.0);
    // Extent corners of the input, mapped into the output frame.
    double w = raster.width() * raster.cell_size();
    double h = raster.height() * raster.cell_size();
    std::array<Vec2, 4> corners = {
        Vec2{raster.origin_x(), raster.origin_y()},
        Vec2{raster.origin_x() + w, raster.origin_y()},
        Vec2{raster.origin_x(), raster.origin_y() - h},
        Vec2{raster.origin_x() + w, raster.origin_y() - h},
    };
    double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
    for (const auto& q : corners) {
        Vec2 p = pivot + rotate_cw(q - pivot, -angle);  // inverse of the sampling map
        xmin = std::min(xmin, p.x);
        xmax = std::max(xmax, p.x);
        ymin = std::min(ymin, p.y);
        ymax = std::max(ymax, p.y);
    }
    double cs = raster.cell_size();
    // Snap the output origin onto the input grid so that angle = 0 is exact identity.
    double ox = raster.origin_x() + std::floor((xmin - raster.origin_x()) / cs) * cs;
    double oy = raster.origin_y() - std::floor((raster.origin_y() - ymax) / cs) * cs;
    int out_w = std::max(1, static_cast<int>(std::ceil((xmax - ox) / cs - 1e-9)));
    int out_h = std::max(1, static_cast<int>(std::ceil((oy - ymin) / cs - 1e-9)));
    GeoRaster out(out_w, out_h, raster.kind(), cs, ox, oy,
                  raster.kind() == BandKind::Elevation ? raster.nodata() : 0.0);
    out.set_nodata(raster.nodata());
    for (int r = 0; r < out_h; ++r) {
        for (int c = 0; c < out_w; ++c) {
            Vec2 p = out.cell_center(r, c);
            Vec2 src = pivot + rotate_cw(p - pivot, angle);
            if (raster.kind() == BandKind::Label) {
                auto v = raster.sample_nearest(src);
                out.at(r, c) = v.value_or(0.0);
            } else {
                for (int b = 0; b < raster.bands(); ++b) {
                    auto v = raster.sample_bilinear(src, b);
                    if (v) {
                        out.at(r, c, b) = *v;
                    } else {
                        out.at(r, c, b) =
                            raster.kind() == BandKind::Elevation ? raster.nodata() : 0.0;
                    }
                }
            }
        }
    }
    return out;
}

std::vector<PixelRegion> connected_components(const GeoRaster& raster, int min_area) {
    if (raster.bands() != 1)
        throw InvalidInputError("connected_components expects a single-band raster");
    int h = raster.height(), w = raster.width();
    std::vector<int> comp(static_cast<size_t>(h) * w, -1);
    struct Found {
        int row_min, col_min;
        std::vector<std::pair<int, int>> cells;
    };
    std::vector<Found> found;
    for (int r = 0; r < h; ++r) {
        for (int c = 0; c < w; ++c) {
            if (raster.at(r, c) == 0.0 || comp[static_cast<size_t>(r) * w + c] >= 0) continue;
            double label = raster.at(r, c);
            Found f{r, c, {}};
            std::queue<std::pair<int, int>> q;
            q.push({r, c});
            comp[static_cast<size_t>(r) * w + c] = static_cast<int>(found.size());
            while (!q.empty()) {
                auto [cr, cc] = q.front();
                q.pop();
                f.cells.push_back({cr, cc});
                f.row_min = std::min(f.row_min, cr);
                if (cr == f.row_min) f.col_min = std::min(f.col_min, cc);
                for (int dr = -1; dr <= 1; ++dr)
                    for (int dc = -1; dc <= 1; ++dc) {
                        if (dr == 0 && dc == 0) continue;
                        int nr = cr + dr, nc = cc + dc;
                        if (!raster.in_bounds(nr, nc)) continue;
                        size_t idx = static_cast<size_t>(nr) * w + nc;
                        if (comp[idx] >= 0 || raster.at(nr, nc) != label) continue;
                        comp[idx] = static_cast<int>(found.size());
                        q.push({nr, nc});
                    }
            }
            // recompute col_min at row_min exactly
            int cm = w;
            for (auto& [rr, cc2] : f.cells)
                if (rr == f.row_min) cm = std::min(cm, cc2);
            f.col_min = cm;
            found.push_back(std::move(f));
        }
    }
    std::vector<size_t> order(found.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
        if (found[a].row_min != found[b].row_min) return found[a].row_min < found[b].row_min;
        return found[a].col_min < found[b].col_min;
    });
    std::vector<PixelRegion> regions;
    int next_id = 1;
    for (size_t i : order) {
        if (static_cast<int>(found[i].cells.size()) < min_area) continue;
        regions.push_back(PixelRegion::from_cells(std::move(found[i].cells), next_id++));
    }
    return regions;
}

}  // namespace lod2
