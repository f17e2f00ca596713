#include "lod2/merge.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <map>
#include <set>

#include "lod2/errors.hpp"

namespace lod2 {

std::optional<RoofType> merged_type(RoofType a, RoofType b) {
    // decision matrix; -1 = never merge
    static const int table[5][5] = {
        /* flat    */ {0, 1, 2, 0, 4},
        /* gable   */ {1, 1, 2, 1, 4},
        /* hip     */ {2, 2, 2, 2, 4},
        /* pyramid */ {0, 1, 2, -1, 4},
        /* mansard */ {4, 4, 4, 4, 4},
    };
    int v = table[static_cast<int>(a)][static_cast<int>(b)];
    if (v < 0) return std::nullopt;
    return static_cast<RoofType>(v);
}

std::vector<RoofModel> refine_types(const std::vector<RoofModel>& models,
                                    const GeoRaster& dsm, const AffinityConfig& cfg,
                                    const FitConfig& fit_cfg) {
    if (models.empty()) return {};
    std::vector<BuildingRectangle> rects;
    rects.reserve(models.size());
    for (const auto& m : models) rects.push_back(m.rect);
    auto feats = normalize_features(rects);

    const double wrong_cost = 1.0 - std::exp(-1.0);
    LabelingProblem prob;
    prob.node_count = static_cast<int>(models.size());
    prob.label_count = 5;
    prob.lambda = cfg.lambda;
    prob.data_cost.assign(prob.node_count, std::vector<double>(5, wrong_cost));
    prob.initial_labels.resize(prob.node_count);
    for (int i = 0; i < prob.node_count; ++i) {
        int t = static_cast<int>(models[i].roof_type);
        prob.data_cost[i][t] = 0.0;
        prob.initial_labels[i] = t;
    }
    for (auto [i, j] : neighbor_pairs(rects, cfg))
        prob.edges.push_back({i, j, affinity(feats[i], feats[j], cfg)});

    LabelingResult res = solve_labeling(prob);
    std::vector<RoofModel> out = models;
    for (int i = 0; i < prob.node_count; ++i) {
        RoofType t = static_cast<RoofType>(res.labels[i]);
        if (t != models[i].roof_type) out[i] = fit_model_typed(t, models[i].rect, dsm, fit_cfg);
    }
    return out;
}

SceneModel scene_model_from(const RoofModel& model) {
    SceneModel sm;
    sm.model = model;
    sm.members = {model.rect.id};
    auto corners = model.rect.corners();
    sm.footprint.assign(corners.begin(), corners.end());
    if (ring_area(sm.footprint) < 0)
        std::reverse(sm.footprint.begin(), sm.footprint.end());
    return sm;
}

namespace {

std::vector<Vec2> union_outline(const std::vector<FrameRect>& boxes) {
    std::vector<double> xs, ys;
    for (const auto& b : boxes) {
        xs.push_back(b.u0);
        xs.push_back(b.u1);
        ys.push_back(b.v0);
        ys.push_back(b.v1);
    }
    // frame transforms leave ~1e-16 jitter on coordinates that should tie;
    // merging them avoids sliver intervals that break the outline walk
    auto near = [](double a, double b) { return std::fabs(a - b) < 1e-9; };
    std::sort(xs.begin(), xs.end());
    xs.erase(std::unique(xs.begin(), xs.end(), near), xs.end());
    std::sort(ys.begin(), ys.end());
    ys.erase(std::unique(ys.begin(), ys.end(), near), ys.end());
    int nx = static_cast<int>(xs.size()) - 1, ny = static_cast<int>(ys.size()) - 1;
    if (nx < 1 || ny < 1) return {};

    auto inside = [&](int i, int j) {
        if (i < 0 || j < 0 || i >= nx || j >= ny) return false;
        double cx = (xs[i] + xs[i + 1]) / 2, cy = (ys[j] + ys[j + 1]) / 2;
        for (const auto& b : boxes)
            if (cx > b.u0 && cx < b.u1 && cy > b.v0 && cy < b.v1) return true;
        return false;
    };

    // union must be edge-connected, otherwise there is no single outline
    std::vector<std::pair<int, int>> stack;
    std::set<std::pair<int, int>> seen;
    int total = 0;
    for (int i = 0; i < nx; ++i)
        for (int j = 0; j < ny; ++j)
            if (inside(i, j)) {
                ++total;
                if (stack.empty()) {
                    stack.push_back({i, j});
                    seen.insert({i, j});
                }
            }
    if (total == 0) return {};
    while (!stack.empty()) {
        auto [i, j] = stack.back();
        stack.pop_back();
        const int di[4] = {1, -1, 0, 0}, dj[4] = {0, 0, 1, -1};
        for (int k = 0; k < 4; ++k) {
            int ii = i + di[k], jj = j + dj[k];
            if (inside(ii, jj) && !seen.count({ii, jj})) {
                seen.insert({ii, jj});
                stack.push_back({ii, jj});
            }
        }
    }
    if (static_cast<int>(seen.size()) != total) return {};

    // boundary edges, counterclockwise in (u, v)
    std::map<std::pair<double, double>, std::pair<double, double>> next;
    for (int i = 0; i < nx; ++i)
        for (int j = 0; j < ny; ++j) {
            if (!inside(i, j)) continue;
            double x0 = xs[i], x1 = xs[i + 1], y0 = ys[j], y1 = ys[j + 1];
            if (!inside(i, j - 1)) next[{x0, y0}] = {x1, y0};
            if (!inside(i + 1, j)) next[{x1, y0}] = {x1, y1};
            if (!inside(i, j + 1)) next[{x1, y1}] = {x0, y1};
            if (!inside(i - 1, j)) next[{x0, y1}] = {x0, y0};
        }
    if (next.empty()) return {};
    std::vector<Vec2> ring;
    auto start = next.begin()->first;
    auto cur = start;
    for (size_t guard = 0; guard <= next.size(); ++guard) {
        ring.push_back({cur.first, cur.second});
        auto it = next.find(cur);
        if (it == next.end()) return {};
        cur = it->second;
        if (cur == start) break;
    }
    if (cur != start || ring.size() != next.size()) return {};  // pinch point

    // collapse collinear runs
    std::vector<Vec2> out;
    size_t n = ring.size();
    for (size_t k = 0; k < n; ++k) {
        Vec2 prev = ring[(k + n - 1) % n], here = ring[k], nxt = ring[(k + 1) % n];
        if (std::fabs((here - prev).cross(nxt - here)) > 1e-12) out.push_back(here);
    }
    return out;
}

}  // namespace

std::vector<Vec2> rectilinear_union_outline(const FrameRect& a, const FrameRect& b) {
    return union_outline({a, b});
}

namespace {

// box of rect `b` in the frame of `frame_rect`; fails when orientations are
// not parallel/orthogonal
bool frame_box(const BuildingRectangle& frame_rect, const BuildingRectangle& b,
               FrameRect& out, double tol_deg = 1.0) {
    Vec2 c = frame_rect.to_frame(b.center);
    double d_par = angle_diff_180(frame_rect.orientation, b.orientation);
    double hu, hv;
    if (d_par <= tol_deg) {
        hu = b.length / 2;
        hv = b.width / 2;
    } else if (std::fabs(90.0 - d_par) <= tol_deg) {
        hu = b.width / 2;
        hv = b.length / 2;
    } else {
        return false;
    }
    out = {c.x - hu, c.x + hu, c.y - hv, c.y + hv};
    return true;
}

struct Cluster {
    RoofModel model;
    std::vector<int> members;
    std::vector<BuildingRectangle> member_rects;
    double terrain_z;
};

double pair_distance(const BuildingRectangle& a, const BuildingRectangle& b) {
    double color = 0;
    for (int band = 0; band < 3; ++band)
        color += std::fabs(a.mean_color[band] - b.mean_color[band]);
    return color / 3.0 + std::fabs(a.mean_height - b.mean_height);
}

}  // namespace

std::vector<SceneModel> merge_models(const std::vector<RoofModel>& models,
                                     const GeoRaster& dsm, const GeoRaster& ortho,
                                     const DecomposeConfig& cfg, const FitConfig& fit_cfg) {
    std::vector<Cluster> clusters;
    for (const auto& m : models)
        clusters.push_back({m, {m.rect.id}, {m.rect}, m.terrain_z});

    std::set<std::pair<int, int>> skipped;  // by smallest member id pair
    auto pair_key = [&](const Cluster& a, const Cluster& b) {
        int ka = *std::min_element(a.members.begin(), a.members.end());
        int kb = *std::min_element(b.members.begin(), b.members.end());
        return std::make_pair(std::min(ka, kb), std::max(ka, kb));
    };

    while (clusters.size() > 1) {
        double best_d = std::numeric_limits<double>::infinity();
        size_t bi = 0, bj = 0;
        for (size_t i = 0; i < clusters.size(); ++i)
            for (size_t j = i + 1; j < clusters.size(); ++j) {
                if (skipped.count(pair_key(clusters[i], clusters[j]))) continue;
                if (!merged_type(clusters[i].model.roof_type, clusters[j].model.roof_type))
                    continue;
                if (should_merge(clusters[i].model.rect, clusters[j].model.rect, dsm, ortho,
                                 cfg, /*require_rect_closure=*/false) != MergeDecision::Merge)
                    continue;
                double d = pair_distance(clusters[i].model.rect, clusters[j].model.rect);
                if (d < best_d) {
                    best_d = d;
                    bi = i;
                    bj = j;
                }
            }
        if (!std::isfinite(best_d)) break;

        Cluster& a = clusters[bi];
        Cluster& b = clusters[bj];
        const Cluster& dom = a.model.rect.area() >= b.model.rect.area() ? a : b;

        std::vector<BuildingRectangle> all_rects = a.member_rects;
        all_rects.insert(all_rects.end(), b.member_rects.begin(), b.member_rects.end());
        std::vector<FrameRect> boxes;
        bool ok = true;
        for (const auto& r : all_rects) {
            FrameRect fr;
            if (!frame_box(dom.model.rect, r, fr)) {
                ok = false;
                break;
            }
            // bridge sub-cell seams so abutting footprints stay connected
            double eps = dsm.cell_size() * 0.51;
            fr.u0 -= eps;
            fr.u1 += eps;
            fr.v0 -= eps;
            fr.v1 += eps;
            boxes.push_back(fr);
        }
        std::vector<Vec2> outline_frame = ok ? union_outline(boxes) : std::vector<Vec2>{};
        if (outline_frame.size() < 4) {
            std::cerr << "warning: merged footprint extraction failed for rectangles "
                      << pair_key(a, b).first << "/" << pair_key(a, b).second
                      << "; pair kept separate\n";
            skipped.insert(pair_key(a, b));
            continue;
        }

        RoofType type = *merged_type(a.model.roof_type, b.model.roof_type);

        // bounding rectangle of the union in the dominant frame
        double u0 = 1e300, u1 = -1e300, v0 = 1e300, v1 = -1e300;
        for (const auto& p : outline_frame) {
            u0 = std::min(u0, p.x);
            u1 = std::max(u1, p.x);
            v0 = std::min(v0, p.y);
            v1 = std::max(v1, p.y);
        }
        BuildingRectangle bound;
        bound.id = std::min(a.model.rect.id, b.model.rect.id);
        bound.parent_polygon = dom.model.rect.parent_polygon;
        bound.center = dom.model.rect.from_frame({(u0 + u1) / 2, (v0 + v1) / 2});
        double ext_u = u1 - u0, ext_v = v1 - v0;
        if (ext_u >= ext_v) {
            bound.length = ext_u;
            bound.width = ext_v;
            bound.orientation = dom.model.rect.orientation;
        } else {
            bound.length = ext_v;
            bound.width = ext_u;
            bound.orientation = normalize_angle_180(dom.model.rect.orientation + 90.0);
        }
        populate_rectangle_stats(bound, dsm, ortho);

        std::vector<Vec2> footprint;
        for (const auto& p : outline_frame) footprint.push_back(dom.model.rect.from_frame(p));
        if (ring_area(footprint) < 0) std::reverse(footprint.begin(), footprint.end());

        // samples over the union footprint, in the bounding-rect frame
        std::vector<HeightSample> samples;
        {
            double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
            for (const auto& p : footprint) {
                xmin = std::min(xmin, p.x);
                xmax = std::max(xmax, p.x);
                ymin = std::min(ymin, p.y);
                ymax = std::max(ymax, p.y);
            }
            int r0, c0, r1, c1;
            dsm.world_to_cell({xmin, ymax}, r0, c0);
            dsm.world_to_cell({xmax, ymin}, r1, c1);
            for (int r = std::max(0, r0); r <= std::min(dsm.height() - 1, r1); ++r)
                for (int c = std::max(0, c0); c <= std::min(dsm.width() - 1, c1); ++c) {
                    if (dsm.is_nodata(r, c)) continue;
                    Vec2 p = dsm.cell_center(r, c);
                    if (!point_in_ring(p, footprint)) continue;
                    samples.push_back({bound.to_frame(p), dsm.at(r, c)});
                }
        }

        auto make_init = [&](RoofType t) {
            RoofModel init = dom.model;
            init.roof_type = t;
            init.rect = bound;
            switch (t) {
                case RoofType::Flat:
                case RoofType::Gable:
                    init.hipl = 0.0;
                    break;
                case RoofType::Hip:
                case RoofType::Mansard:
                    init.hipl = bound.length / 4;
                    break;
                case RoofType::Pyramid:
                    init.hipl = bound.length / 2;
                    break;
            }
            init.hipw = (t == RoofType::Mansard) ? bound.width / 4 : bound.width / 2;
            init.apply_type_constraints();
            return init;
        };

        Cluster merged;
        try {
            RoofModel forced = fit_samples(type, make_init(type), samples, fit_cfg);
            // the decision-matrix type presumes the member types are right; a
            // split building's halves often mistype, so let the union data
            // override when another type fits clearly better
            std::vector<RoofModel> fits;
            double best_rmse = forced.fit_rmse;
            for (RoofType t : {RoofType::Flat, RoofType::Gable, RoofType::Pyramid,
                               RoofType::Hip, RoofType::Mansard}) {
                fits.push_back(fit_samples(t, make_init(t), samples, fit_cfg));
                best_rmse = std::min(best_rmse, fits.back().fit_rmse);
            }
            double margin = std::max(0.005, 0.05 * best_rmse);
            if (forced.fit_rmse <= best_rmse + margin) {
                merged.model = forced;
            } else {
                merged.model = fits.back();
                for (const RoofModel& m : fits)
                    if (m.fit_rmse <= best_rmse + margin) {
                        merged.model = m;
                        break;
                    }
            }
        } catch (const DegenerateGeometryError&) {
            skipped.insert(pair_key(a, b));
            continue;
        }
        merged.model.terrain_z = std::min(a.terrain_z, b.terrain_z);
        merged.terrain_z = merged.model.terrain_z;
        merged.members = a.members;
        merged.members.insert(merged.members.end(), b.members.begin(), b.members.end());
        std::sort(merged.members.begin(), merged.members.end());
        merged.member_rects = std::move(all_rects);

        clusters.erase(clusters.begin() + static_cast<long>(bj));
        clusters[bi] = std::move(merged);
    }

    std::vector<SceneModel> out;
    for (const auto& cl : clusters) {
        SceneModel sm = scene_model_from(cl.model);
        sm.members = cl.members;
        if (cl.members.size() > 1) {
            sm.merged = true;
            std::vector<FrameRect> boxes;
            bool ok = true;
            for (const auto& r : cl.member_rects) {
                FrameRect fr;
                if (!frame_box(cl.model.rect, r, fr)) {
                    ok = false;
                    break;
                }
                double eps = dsm.cell_size() * 0.51;
                fr.u0 -= eps;
                fr.u1 += eps;
                fr.v0 -= eps;
                fr.v1 += eps;
                boxes.push_back(fr);
            }
            auto outline_frame = ok ? union_outline(boxes) : std::vector<Vec2>{};
            if (outline_frame.size() >= 4) {
                sm.footprint.clear();
                for (const auto& p : outline_frame)
                    sm.footprint.push_back(cl.model.rect.from_frame(p));
                if (ring_area(sm.footprint) < 0)
                    std::reverse(sm.footprint.begin(), sm.footprint.end());
            }
        }
        out.push_back(std::move(sm));
    }
    return out;
}

}  // namespace lod2
