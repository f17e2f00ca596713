#include "lod2/polygon.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <queue>
#include <set>

#include <json.hpp>

namespace lod2 {

std::vector<Segment> ring_segments(const std::vector<Vec2>& ring) {
    std::vector<Segment> segs;
    size_t n = ring.size();
    for (size_t i = 0; i < n; ++i) segs.push_back({ring[i], ring[(i + 1) % n]});
    return segs;
}

namespace {

using Corner = std::pair<int, int>;  // (row, col) lattice point

Vec2 corner_world(const Corner& c, const GeoRaster& frame) {
    return {frame.origin_x() + c.second * frame.cell_size(),
            frame.origin_y() - c.first * frame.cell_size()};
}

}  // namespace

std::vector<Vec2> trace_boundary(const PixelRegion& region, const GeoRaster& frame) {
    if (region.empty()) throw InvalidInputError("trace_boundary: empty region");

    std::set<std::pair<int, int>> cells;
    region.for_each_cell([&](int r, int c) { cells.insert({r, c}); });
    auto is_set = [&](int r, int c) { return cells.count({r, c}) > 0; };

    // Directed boundary edges with the region interior on the left
    // (counterclockwise outer ring in world coordinates, y north).
    std::map<Corner, std::vector<Corner>> out_edges;
    for (const auto& [r, c] : cells) {
        if (!is_set(r - 1, c)) out_edges[{r, c + 1}].push_back({r, c});          // north side
        if (!is_set(r + 1, c)) out_edges[{r + 1, c}].push_back({r + 1, c + 1});  // south side
        if (!is_set(r, c - 1)) out_edges[{r, c}].push_back({r + 1, c});          // west side
        if (!is_set(r, c + 1)) out_edges[{r + 1, c + 1}].push_back({r, c + 1});  // east side
    }

    std::map<std::pair<Corner, Corner>, bool> used;
    for (const auto& [from, tos] : out_edges)
        for (const auto& to : tos) used[{from, to}] = false;

    auto take_next = [&](const Corner& at, int dr, int dc) -> Corner {
        // prefer the rightmost turn so 8-connected pinch points stay on one ring
        const Corner prefs[4] = {
            {at.first + dc, at.second - dr},   // right
            {at.first + dr, at.second + dc},   // straight
            {at.first - dc, at.second + dr},   // left
            {at.first - dr, at.second - dc},   // back
        };
        for (const auto& to : prefs) {
            auto it = used.find({at, to});
            if (it != used.end() && !it->second) {
                it->second = true;
                return to;
            }
        }
        throw DegenerateGeometryError("trace_boundary: broken boundary chain");
    };

    std::vector<std::vector<Corner>> rings;
    for (auto& [key, flag] : used) {
        if (flag) continue;
        flag = true;
        std::vector<Corner> ring{key.first, key.second};
        Corner cur = key.second;
        int dr = cur.first - key.first.first, dc = cur.second - key.first.second;
        while (true) {
            Corner next = take_next(cur, dr, dc);
            if (next == ring.front()) break;
            ring.push_back(next);
            dr = next.first - cur.first;
            dc = next.second - cur.second;
            cur = next;
        }
        rings.push_back(std::move(ring));
    }

    // outer ring = largest positive area; holes are clockwise and discarded
    std::vector<Vec2> best;
    double best_area = 0.0;
    for (const auto& ring : rings) {
        std::vector<Vec2> pts;
        pts.reserve(ring.size());
        for (const auto& c : ring) pts.push_back(corner_world(c, frame));
        double a = ring_area(pts);
        if (a > best_area) {
            best_area = a;
            best = std::move(pts);
        }
    }
    if (best.empty()) throw DegenerateGeometryError("trace_boundary: no outer ring");

    // collapse collinear runs
    std::vector<Vec2> collapsed;
    size_t n = best.size();
    for (size_t i = 0; i < n; ++i) {
        const Vec2& prev = best[(i + n - 1) % n];
        const Vec2& cur = best[i];
        const Vec2& next = best[(i + 1) % n];
        if (std::fabs((cur - prev).cross(next - cur)) > 1e-9) collapsed.push_back(cur);
    }
    return collapsed;
}

namespace {

void dp_recurse(const std::vector<Vec2>& pts, size_t lo, size_t hi, double tol,
                std::vector<char>& keep) {
    if (hi <= lo + 1) return;
    double worst = -1.0;
    size_t worst_i = lo;
    for (size_t i = lo + 1; i < hi; ++i) {
        double d = point_segment_distance(pts[i], pts[lo], pts[hi]);
        if (d > worst) {
            worst = d;
            worst_i = i;
        }
    }
    if (worst > tol) {
        keep[worst_i] = 1;
        dp_recurse(pts, lo, worst_i, tol, keep);
        dp_recurse(pts, worst_i, hi, tol, keep);
    }
}

std::vector<Vec2> dp_chain(const std::vector<Vec2>& pts, double tol) {
    std::vector<char> keep(pts.size(), 0);
    keep.front() = keep.back() = 1;
    dp_recurse(pts, 0, pts.size() - 1, tol, keep);
    std::vector<Vec2> out;
    for (size_t i = 0; i < pts.size(); ++i)
        if (keep[i]) out.push_back(pts[i]);
    return out;
}

}  // namespace

std::vector<Vec2> simplify_chain(const std::vector<Vec2>& chain, double tolerance) {
    if (chain.size() < 2) return chain;
    return dp_chain(chain, tolerance);
}

std::vector<Vec2> simplify_ring(const std::vector<Vec2>& ring, double tolerance) {
    if (ring.size() < 3) throw InvalidInputError("simplify_ring: need at least 3 points");
    if (tolerance <= 0) throw InvalidInputError("simplify_ring: tolerance must be positive");
    if (std::fabs(ring_area(ring)) < 1e-12)
        throw DegenerateGeometryError("simplify_ring: zero-area ring");

    size_t n = ring.size();
    size_t ai = 0, bi = 1;
    double best = -1.0;
    for (size_t i = 0; i < n; ++i)
        for (size_t j = i + 1; j < n; ++j) {
            double d = (ring[i] - ring[j]).norm2();
            if (d > best) {
                best = d;
                ai = i;
                bi = j;
            }
        }

    std::vector<Vec2> half1, half2;
    for (size_t i = ai;; i = (i + 1) % n) {
        half1.push_back(ring[i]);
        if (i == bi) break;
    }
    for (size_t i = bi;; i = (i + 1) % n) {
        half2.push_back(ring[i]);
        if (i == ai) break;
    }

    std::vector<Vec2> s1 = dp_chain(half1, tolerance);
    std::vector<Vec2> s2 = dp_chain(half2, tolerance);
    std::vector<Vec2> out(s1.begin(), s1.end() - 1);
    out.insert(out.end(), s2.begin(), s2.end() - 1);
    return out;
}

std::vector<double> main_orientations(const std::vector<Segment>& segments,
                                      double threshold_len) {
    if (segments.empty()) throw InvalidInputError("main_orientations: no segments");

    constexpr int kBins = 9;
    double bin_len[kBins] = {0};
    double bin_weighted[kBins] = {0};
    const Segment* longest = &segments[0];
    for (const auto& seg : segments) {
        double len = seg.length();
        if (len <= 0) continue;
        if (len > longest->length()) longest = &seg;
        double o = std::fmod(seg.orientation(), 90.0);
        if (o < 0) o += 90.0;
        // a value exactly on a bin edge goes to the lower bin
        int idx = static_cast<int>(std::ceil(o / 10.0)) - 1;
        idx = std::clamp(idx, 0, kBins - 1);
        bin_len[idx] += len;
        bin_weighted[idx] += len * o;
    }

    std::vector<double> out;
    for (int i = 0; i < kBins; ++i)
        if (bin_len[i] > threshold_len) out.push_back(bin_weighted[i] / bin_len[i]);
    if (out.empty()) {
        double o = std::fmod(longest->orientation(), 90.0);
        if (o < 0) o += 90.0;
        out.push_back(o);
    }
    return out;
}

namespace {

struct SnappedLine {
    OrientedLine line;
    double weight;   // source edge length
    Vec2 joint;      // original ring vertex after this edge
};

double nearest_family_orientation(double edge_orient, const std::vector<double>& orients) {
    double best = orients[0];
    double best_d = 1e9;
    for (double o : orients) {
        for (double cand : {o, o + 90.0}) {
            double d = angle_diff_180(edge_orient, cand);
            if (d < best_d - 1e-12) {
                best_d = d;
                best = normalize_angle_180(cand);
            }
        }
    }
    return best;
}

}  // namespace

BuildingPolygon adjust_lines(const std::vector<Vec2>& ring,
                             const std::vector<double>& orientations,
                             double merge_distance) {
    if (orientations.empty()) throw InvalidInputError("adjust_lines: need an orientation");
    BuildingPolygon fallback;
    fallback.vertices = ring;
    fallback.main_orientations = orientations;
    fallback.irregular = true;
    if (ring.size() < 3) return fallback;

    std::vector<SnappedLine> lines;
    size_t n = ring.size();
    for (size_t i = 0; i < n; ++i) {
        Segment seg{ring[i], ring[(i + 1) % n]};
        if (seg.length() <= 0) continue;
        double snapped = nearest_family_orientation(seg.orientation(), orientations);
        lines.push_back({{seg.midpoint(), snapped}, seg.length(), ring[(i + 1) % n]});
    }
    if (lines.size() < 3) return fallback;

    // merge consecutive parallel lines closer than merge_distance
    bool merged = true;
    while (merged && lines.size() > 3) {
        merged = false;
        for (size_t i = 0; i < lines.size(); ++i) {
            size_t j = (i + 1) % lines.size();
            const auto& a = lines[i];
            const auto& b = lines[j];
            if (angle_diff_180(a.line.orientation_deg, b.line.orientation_deg) > 1e-9) continue;
            if (std::fabs(a.line.offset(b.line.point)) >= merge_distance) continue;
            double w = a.weight + b.weight;
            Vec2 p = (a.line.point * a.weight + b.line.point * b.weight) * (1.0 / w);
            lines[i] = {{p, a.line.orientation_deg}, w, b.joint};
            lines.erase(lines.begin() + static_cast<long>(j));
            merged = true;
            break;
        }
    }
    if (lines.size() < 3) return fallback;

    // parallel but distant neighbours get a perpendicular connector at the joint
    std::vector<SnappedLine> chain;
    for (size_t i = 0; i < lines.size(); ++i) {
        size_t j = (i + 1) % lines.size();
        chain.push_back(lines[i]);
        if (angle_diff_180(lines[i].line.orientation_deg, lines[j].line.orientation_deg) <
            1e-9) {
            double perp = normalize_angle_180(lines[i].line.orientation_deg + 90.0);
            chain.push_back({{lines[i].joint, perp}, 0.0, lines[i].joint});
        }
    }

    std::vector<Vec2> verts;
    for (size_t i = 0; i < chain.size(); ++i) {
        size_t j = (i + 1) % chain.size();
        Vec2 p;
        if (!line_intersection(chain[i].line, chain[j].line, p)) return fallback;
        verts.push_back(p);
    }
    // drop repeated vertices
    std::vector<Vec2> cleaned;
    for (size_t i = 0; i < verts.size(); ++i) {
        size_t j = (i + 1) % verts.size();
        if ((verts[i] - verts[j]).norm() > 1e-9) cleaned.push_back(verts[j]);
    }
    if (cleaned.size() < 4 || ring_self_intersects(cleaned) || ring_area(cleaned) <= 0)
        return fallback;

    BuildingPolygon poly;
    poly.vertices = cleaned;
    poly.main_orientations = orientations;
    poly.irregular = false;
    return poly;
}

std::vector<EdgeLine> detect_edge_lines(const GeoRaster& ortho, const PixelRegion& region,
                                        int dilate_cells, double align_tol_deg,
                                        int min_len_cells) {
    if (ortho.kind() != BandKind::Color)
        throw InvalidInputError("detect_edge_lines expects a 3-band ortho");

    int r0 = std::max(0, region.row_min - dilate_cells);
    int r1 = std::min(ortho.height() - 1, region.row_max + dilate_cells);
    int c0 = std::max(0, region.col_min - dilate_cells);
    int c1 = std::min(ortho.width() - 1, region.col_max + dilate_cells);
    int h = r1 - r0 + 1, w = c1 - c0 + 1;
    if (h < 3 || w < 3) return {};

    auto lum = [&](int r, int c) {
        r = std::clamp(r, r0, r1);
        c = std::clamp(c, c0, c1);
        return (ortho.at(r, c, 0) + ortho.at(r, c, 1) + ortho.at(r, c, 2)) / 3.0;
    };

    std::vector<double> mag(static_cast<size_t>(h) * w, 0.0);
    std::vector<double> orient(static_cast<size_t>(h) * w, 0.0);
    std::vector<double> sorted;
    for (int r = r0; r <= r1; ++r) {
        for (int c = c0; c <= c1; ++c) {
            double gx = (lum(r, c + 1) - lum(r, c - 1)) / 2.0;
            double gr = (lum(r + 1, c) - lum(r - 1, c)) / 2.0;
            size_t idx = static_cast<size_t>(r - r0) * w + (c - c0);
            double m = std::hypot(gx, gr);
            mag[idx] = m;
            // edge line direction is perpendicular to the gradient (world frame)
            Vec2 grad{gx, -gr};
            Vec2 dir{-grad.y, grad.x};
            orient[idx] = m > 1e-12 ? direction_orientation(dir) : 0.0;
            if (m > 1e-12) sorted.push_back(m);
        }
    }
    if (sorted.empty()) return {};
    std::sort(sorted.begin(), sorted.end());
    double thresh = sorted[static_cast<size_t>(0.8 * (sorted.size() - 1))];

    std::vector<char> candidate(mag.size(), 0);
    for (size_t i = 0; i < mag.size(); ++i) candidate[i] = mag[i] > thresh && mag[i] > 1e-12;

    std::vector<int> group(mag.size(), -1);
    std::vector<EdgeLine> out;
    for (int r = 0; r < h; ++r) {
        for (int c = 0; c < w; ++c) {
            size_t seed = static_cast<size_t>(r) * w + c;
            if (!candidate[seed] || group[seed] >= 0) continue;
            double seed_orient = orient[seed];
            std::vector<std::pair<int, int>> members;
            std::queue<std::pair<int, int>> q;
            q.push({r, c});
            group[seed] = 1;
            while (!q.empty()) {
                auto [cr, cc] = q.front();
                q.pop();
                members.push_back({cr, cc});
                for (int dr = -1; dr <= 1; ++dr)
                    for (int dc = -1; dc <= 1; ++dc) {
                        int nr = cr + dr, nc = cc + dc;
                        if (nr < 0 || nr >= h || nc < 0 || nc >= w) continue;
                        size_t ni = static_cast<size_t>(nr) * w + nc;
                        if (!candidate[ni] || group[ni] >= 0) continue;
                        if (angle_diff_180(orient[ni], seed_orient) > align_tol_deg) continue;
                        group[ni] = 1;
                        q.push({nr, nc});
                    }
            }
            // least-squares (principal axis) line fit through member cell centers
            Vec2 mean{0, 0};
            for (auto& [mr, mc] : members) {
                Vec2 p = ortho.cell_center(mr + r0, mc + c0);
                mean = mean + p;
            }
            mean = mean * (1.0 / members.size());
            double sxx = 0, sxy = 0, syy = 0, strength = 0;
            for (auto& [mr, mc] : members) {
                Vec2 d = ortho.cell_center(mr + r0, mc + c0) - mean;
                sxx += d.x * d.x;
                sxy += d.x * d.y;
                syy += d.y * d.y;
                strength += mag[static_cast<size_t>(mr) * w + mc];
            }
            double theta = 0.5 * std::atan2(2 * sxy, sxx - syy);
            Vec2 dir{std::cos(theta), std::sin(theta)};
            double tmin = 1e300, tmax = -1e300;
            for (auto& [mr, mc] : members) {
                double t = (ortho.cell_center(mr + r0, mc + c0) - mean).dot(dir);
                tmin = std::min(tmin, t);
                tmax = std::max(tmax, t);
            }
            if (tmax - tmin < min_len_cells * ortho.cell_size()) continue;
            out.push_back({mean + dir * tmin, mean + dir * tmax, strength});
        }
    }
    std::sort(out.begin(), out.end(),
              [](const EdgeLine& a, const EdgeLine& b) { return a.strength > b.strength; });
    return out;
}

BuildingPolygon regularize_with_edges(const BuildingPolygon& polygon,
                                      const std::vector<EdgeLine>& lines,
                                      double cell_size, double max_dist_cells,
                                      double gate_deg) {
    if (lines.empty() || polygon.irregular || polygon.main_orientations.empty())
        return polygon;

    double max_dist = max_dist_cells * cell_size;
    // one vote per orientation family: the strongest line matching any edge of
    // that family wins and overrides the family orientation
    std::vector<double> new_orients = polygon.main_orientations;
    std::vector<double> best_strength(new_orients.size(), -1.0);

    auto family_of = [&](double edge_orient) {
        size_t best = 0;
        double best_d = 1e9;
        for (size_t f = 0; f < polygon.main_orientations.size(); ++f) {
            double d = angle_diff_90(edge_orient, polygon.main_orientations[f]);
            if (d < best_d) {
                best_d = d;
                best = f;
            }
        }
        return best;
    };

    for (const auto& seg : ring_segments(polygon.vertices)) {
        size_t fam = family_of(seg.orientation());
        for (const auto& line : lines) {
            Vec2 mid = Segment{line.a, line.b}.midpoint();
            if (point_segment_distance(mid, seg.a, seg.b) > max_dist) continue;
            if (angle_diff_180(line.orientation(), seg.orientation()) >= gate_deg) continue;
            if (line.strength > best_strength[fam]) {
                best_strength[fam] = line.strength;
                double o = std::fmod(line.orientation(), 90.0);
                if (o < 0) o += 90.0;
                new_orients[fam] = o;
            }
        }
    }

    bool changed = false;
    for (size_t f = 0; f < new_orients.size(); ++f)
        if (best_strength[f] >= 0 &&
            std::fabs(new_orients[f] - polygon.main_orientations[f]) > 1e-12)
            changed = true;
    if (!changed) return polygon;

    BuildingPolygon snapped = adjust_lines(polygon.vertices, new_orients, cell_size);
    snapped.instance_id = polygon.instance_id;
    if (snapped.irregular) return polygon;  // keep the previous regular result
    return snapped;
}

BuildingPolygon extract_polygon(const PixelRegion& region, const GeoRaster& frame,
                                const GeoRaster* ortho, const std::vector<EdgeLine>* ext_lines,
                                const PolygonConfig& cfg) {
    std::vector<Vec2> boundary = trace_boundary(region, frame);
    std::vector<Vec2> simplified = simplify_ring(boundary, cfg.simplify_tolerance);
    std::vector<double> orients = main_orientations(
        ring_segments(simplified), cfg.orientation_threshold * frame.cell_size());
    BuildingPolygon poly =
        adjust_lines(simplified, orients, cfg.merge_distance_cells * frame.cell_size());
    poly.instance_id = region.instance_id;

    if (ext_lines != nullptr)
        poly = regularize_with_edges(poly, *ext_lines, frame.cell_size());
    else if (ortho != nullptr)
        poly = regularize_with_edges(poly, detect_edge_lines(*ortho, region),
                                     frame.cell_size());
    poly.instance_id = region.instance_id;
    return poly;
}

std::vector<EdgeLine> read_edge_lines_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidInputError("cannot open " + path);
    nlohmann::json doc = nlohmann::json::parse(in);
    std::vector<EdgeLine> out;
    for (const auto& item : doc)
        out.push_back({{item.at("x1"), item.at("y1")},
                       {item.at("x2"), item.at("y2")},
                       item.value("strength", 1.0)});
    return out;
}

}  // namespace lod2
