#include "lod2/refine.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include <json.hpp>

#include "lod2/errors.hpp"

namespace lod2 {

void AffinityConfig::validate() const {
    if (sigma <= 0 || lambda < 0 || k_neighbors < 1 || angle_scale <= 0)
        throw InvalidInputError("affinity config out of range");
}

namespace {

struct MinMax {
    double lo = 1e300, hi = -1e300;
    void add(double v) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    double norm(double v) const { return hi > lo ? (v - lo) / (hi - lo) : 0.0; }
};

}  // namespace

std::vector<RectangleFeatures> normalize_features(
    const std::vector<BuildingRectangle>& rects) {
    MinMax mx, my, mth, ml1, ml2, mc[3], ms[3];
    for (const auto& r : rects) {
        mx.add(r.center.x);
        my.add(r.center.y);
        mth.add(r.orientation);
        ml1.add(r.length);
        ml2.add(r.width);
        for (int b = 0; b < 3; ++b) {
            mc[b].add(r.mean_color[b]);
            ms[b].add(r.color_std[b]);
        }
    }
    std::vector<RectangleFeatures> out;
    out.reserve(rects.size());
    for (const auto& r : rects) {
        RectangleFeatures f;
        f.nx = mx.norm(r.center.x);
        f.ny = my.norm(r.center.y);
        f.ntheta = mth.norm(r.orientation);
        f.nl1 = ml1.norm(r.length);
        f.nl2 = ml2.norm(r.width);
        for (int b = 0; b < 3; ++b) {
            f.nc[b] = mc[b].norm(r.mean_color[b]);
            f.nsigma[b] = ms[b].norm(r.color_std[b]);
        }
        out.push_back(f);
    }
    return out;
}

double orientation_data_cost(const BuildingRectangle& rect, int label,
                             double angle_scale) {
    if (label < 0 || label >= 90) throw InvalidInputError("orientation label out of range");
    double d = angle_diff_180(rect.orientation, 2.0 * label);
    return 1.0 - std::exp(-d / angle_scale);
}

double affinity(const RectangleFeatures& a, const RectangleFeatures& b,
                const AffinityConfig& cfg) {
    cfg.validate();
    auto sq = [](double v) { return v * v; };
    double dist2 = 3.0 * (sq(a.nx - b.nx) + sq(a.ny - b.ny)) + 1.0 * sq(a.ntheta - b.ntheta) +
                   1.0 * (sq(a.nl1 - b.nl1) + sq(a.nl2 - b.nl2));
    for (int c = 0; c < 3; ++c)
        dist2 += 0.3 * sq(a.nc[c] - b.nc[c]) + 0.3 * sq(a.nsigma[c] - b.nsigma[c]);
    double dist = std::sqrt(dist2);
    return std::exp(-dist / (2.0 * cfg.sigma * cfg.sigma));
}

std::vector<std::pair<int, int>> neighbor_pairs(
    const std::vector<BuildingRectangle>& rects, const AffinityConfig& cfg) {
    cfg.validate();
    int n = static_cast<int>(rects.size());
    std::set<std::pair<int, int>> pairs;
    for (int i = 0; i < n; ++i) {
        std::vector<std::pair<double, int>> dists;
        for (int j = 0; j < n; ++j) {
            if (j == i) continue;
            double d = (rects[i].center - rects[j].center).norm();
            if (d < cfg.max_neighbor_dist) dists.push_back({d, j});
        }
        std::sort(dists.begin(), dists.end());
        int take = std::min<int>(cfg.k_neighbors, static_cast<int>(dists.size()));
        for (int t = 0; t < take; ++t) {
            int j = dists[t].second;
            pairs.insert({std::min(i, j), std::max(i, j)});
        }
    }
    return {pairs.begin(), pairs.end()};
}

namespace {

LabelingProblem build_problem(const std::vector<BuildingRectangle>& rects,
                              const std::vector<RectangleFeatures>& feats,
                              const AffinityConfig& cfg, int label_count) {
    LabelingProblem prob;
    prob.node_count = static_cast<int>(rects.size());
    prob.label_count = label_count;
    prob.lambda = cfg.lambda;
    for (auto [i, j] : neighbor_pairs(rects, cfg))
        prob.edges.push_back({i, j, affinity(feats[i], feats[j], cfg)});
    return prob;
}

}  // namespace

std::vector<BuildingRectangle> refine_orientations(
    const std::vector<BuildingRectangle>& rects, const AffinityConfig& cfg) {
    if (rects.empty()) throw InvalidInputError("refine_orientations: no rectangles");
    auto feats = normalize_features(rects);
    LabelingProblem prob = build_problem(rects, feats, cfg, 90);
    int n = prob.node_count;
    prob.data_cost.assign(n, std::vector<double>(90, 0.0));
    prob.initial_labels.resize(n);
    for (int i = 0; i < n; ++i) {
        int best = 0;
        double best_cost = 1e300;
        for (int l = 0; l < 90; ++l) {
            double c = orientation_data_cost(rects[i], l, cfg.angle_scale);
            prob.data_cost[i][l] = c;
            if (c < best_cost) {
                best_cost = c;
                best = l;
            }
        }
        prob.initial_labels[i] = best;
    }
    LabelingResult res = solve_labeling(prob);
    std::vector<BuildingRectangle> out = rects;
    for (int i = 0; i < n; ++i) out[i].orientation = 2.0 * res.labels[i];
    return out;
}

std::vector<BuildingPolygon> snap_polygon_orientations(
    const std::vector<BuildingPolygon>& polygons, const std::vector<RoadVector>& roads) {
    std::vector<BuildingPolygon> out = polygons;
    if (roads.empty()) return out;
    for (auto& poly : out) {
        if (poly.main_orientations.empty() || poly.vertices.empty()) continue;
        Vec2 center = ring_centroid(poly.vertices);
        double best_d = 1e300;
        double road_theta = 0.0;
        for (const auto& road : roads)
            for (size_t i = 0; i + 1 < road.points.size(); ++i) {
                double d = point_segment_distance(center, road.points[i], road.points[i + 1]);
                if (d < best_d) {
                    best_d = d;
                    road_theta = direction_orientation(road.points[i + 1] - road.points[i]);
                }
            }
        if (best_d >= 1e300) continue;
        if (angle_diff_90(poly.main_orientations.front(), road_theta) >= 30.0) continue;
        double cand_a = normalize_angle_180(road_theta);
        double cand_b = normalize_angle_180(road_theta + 90.0);
        for (double& theta : poly.main_orientations)
            theta = angle_diff_180(theta, cand_a) <= angle_diff_180(theta, cand_b) ? cand_a
                                                                                   : cand_b;
        // snapping can collapse distinct orientations onto one family member
        std::vector<double> uniq;
        for (double theta : poly.main_orientations)
            if (std::find(uniq.begin(), uniq.end(), theta) == uniq.end())
                uniq.push_back(theta);
        poly.main_orientations = std::move(uniq);
    }
    return out;
}

std::vector<BuildingRectangle> refine_with_osm(
    const std::vector<BuildingRectangle>& rects,
    const std::vector<BuildingPolygon>& polygons,
    const std::vector<RoadVector>& roads) {
    std::vector<BuildingRectangle> out = rects;
    if (roads.empty()) return out;

    for (auto& rect : out) {
        double best_d = 1e300;
        double road_theta = 0.0;
        for (const auto& road : roads) {
            for (size_t i = 0; i + 1 < road.points.size(); ++i) {
                double d = point_segment_distance(rect.center, road.points[i],
                                                  road.points[i + 1]);
                if (d < best_d) {
                    best_d = d;
                    road_theta = direction_orientation(road.points[i + 1] - road.points[i]);
                }
            }
        }
        if (best_d >= 1e300) continue;

        double poly_theta = rect.orientation;
        for (const auto& poly : polygons)
            if (poly.instance_id == rect.parent_polygon && !poly.main_orientations.empty()) {
                poly_theta = poly.main_orientations.front();
                break;
            }

        // angle to the road-orientation family {road, road+90}
        if (angle_diff_90(poly_theta, road_theta) >= 30.0) continue;
        double cand_a = normalize_angle_180(road_theta);
        double cand_b = normalize_angle_180(road_theta + 90.0);
        rect.orientation = angle_diff_180(rect.orientation, cand_a) <=
                                   angle_diff_180(rect.orientation, cand_b)
                               ? cand_a
                               : cand_b;
    }
    return out;
}

std::vector<RoadVector> read_roads_geojson(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidInputError("cannot open " + path);
    nlohmann::json doc = nlohmann::json::parse(in);
    std::vector<RoadVector> out;
    for (const auto& feature : doc.at("features")) {
        const auto& geom = feature.at("geometry");
        if (geom.at("type") != "LineString") continue;
        RoadVector road;
        for (const auto& pt : geom.at("coordinates"))
            road.points.push_back({pt.at(0), pt.at(1)});
        if (road.points.size() < 2)
            throw InvalidInputError("road LineString needs at least 2 points");
        out.push_back(std::move(road));
    }
    return out;
}

void write_roads_geojson(const std::vector<RoadVector>& roads, const std::string& path) {
    nlohmann::json features = nlohmann::json::array();
    for (const auto& road : roads) {
        nlohmann::json coords = nlohmann::json::array();
        for (const auto& p : road.points) coords.push_back({p.x, p.y});
        features.push_back({{"type", "Feature"},
                            {"properties", nlohmann::json::object()},
                            {"geometry", {{"type", "LineString"}, {"coordinates", coords}}}});
    }
    nlohmann::json doc = {{"type", "FeatureCollection"}, {"features", features}};
    std::ofstream out(path);
    out << doc.dump(2) << "\n";
}

}  // namespace lod2
