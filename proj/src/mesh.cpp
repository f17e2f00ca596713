#include "lod2/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>

#include "lod2/errors.hpp"
#include "lod2/roof.hpp"

namespace lod2 {

namespace {

constexpr double kEps = 1e-9;

double frame_z(const RoofModel& m, const Vec2& uv) {
    double a = m.rect.length / 2 - m.hipl;
    double b = m.rect.width / 2 - m.hipw;
    double du = 0.0, dv = 0.0;
    if (std::fabs(uv.x) > a && m.hipl > 0) du = (std::fabs(uv.x) - a) / m.hipl;
    if (std::fabs(uv.y) > b && m.hipw > 0) dv = (std::fabs(uv.y) - b) / m.hipw;
    double s = std::min(1.0, std::max(du, dv));
    return m.z_ridge - (m.z_ridge - m.z_eave) * s;
}

// convex facet polygons partitioning the rectangle footprint in frame coords
std::vector<std::vector<Vec2>> facet_polys(const RoofModel& m) {
    double L = m.rect.length / 2, W = m.rect.width / 2;
    double a = L - m.hipl, b = W - m.hipw;
    std::vector<std::vector<Vec2>> out;
    auto push = [&](std::vector<Vec2> poly) {
        // drop consecutive duplicates, require real area
        std::vector<Vec2> clean;
        for (const auto& p : poly) {
            if (clean.empty() || (p - clean.back()).norm() > kEps) clean.push_back(p);
        }
        while (clean.size() > 1 && (clean.front() - clean.back()).norm() <= kEps)
            clean.pop_back();
        if (clean.size() >= 3 && std::fabs(ring_area(clean)) > 1e-9) out.push_back(clean);
    };
    push({{-a, -b}, {a, -b}, {a, b}, {-a, b}});           // plateau
    push({{a, -b}, {L, -W}, {L, W}, {a, b}});             // +u slope
    push({{-a, b}, {-L, W}, {-L, -W}, {-a, -b}});         // -u slope
    push({{a, b}, {L, W}, {-L, W}, {-a, b}});             // +v slope
    push({{-a, -b}, {-L, -W}, {L, -W}, {a, -b}});         // -v slope
    return out;
}

// Sutherland-Hodgman: subject (any simple polygon) clipped by a convex CCW
// clipper; boundary-inclusive.
std::vector<Vec2> clip_convex(const std::vector<Vec2>& subject,
                              const std::vector<Vec2>& clipper) {
    std::vector<Vec2> poly = subject;
    size_t n = clipper.size();
    for (size_t e = 0; e < n && !poly.empty(); ++e) {
        Vec2 c0 = clipper[e], c1 = clipper[(e + 1) % n];
        Vec2 d = c1 - c0;
        auto side = [&](const Vec2& p) { return d.cross(p - c0); };
        std::vector<Vec2> next;
        size_t m = poly.size();
        for (size_t i = 0; i < m; ++i) {
            Vec2 p = poly[i], q = poly[(i + 1) % m];
            double sp = side(p), sq = side(q);
            bool pin = sp >= -kEps, qin = sq >= -kEps;
            if (pin) next.push_back(p);
            if (pin != qin) {
                double t = sp / (sp - sq);
                next.push_back(p + (q - p) * t);
            }
        }
        poly = std::move(next);
    }
    std::vector<Vec2> clean;
    for (const auto& p : poly)
        if (clean.empty() || (p - clean.back()).norm() > kEps) clean.push_back(p);
    while (clean.size() > 1 && (clean.front() - clean.back()).norm() <= kEps)
        clean.pop_back();
    return clean;
}

// insert extra ring vertices wherever an edge crosses a slope-break line
std::vector<Vec2> subdivide_ring(const std::vector<Vec2>& ring_frame,
                                 const RoofModel& m) {
    double L = m.rect.length / 2, W = m.rect.width / 2;
    double a = L - m.hipl, b = W - m.hipw;
    // break segments: plateau boundary and the four corner seams
    std::vector<Segment> breaks;
    if (m.hipl > kEps) {
        breaks.push_back({{a, -b}, {a, b}});
        breaks.push_back({{-a, -b}, {-a, b}});
    }
    if (m.hipw > kEps) {
        breaks.push_back({{-a, b}, {a, b}});
        breaks.push_back({{-a, -b}, {a, -b}});
    }
    breaks.push_back({{a, b}, {L, W}});
    breaks.push_back({{a, -b}, {L, -W}});
    breaks.push_back({{-a, b}, {-L, W}});
    breaks.push_back({{-a, -b}, {-L, -W}});

    std::vector<Vec2> out;
    size_t n = ring_frame.size();
    for (size_t i = 0; i < n; ++i) {
        Vec2 p = ring_frame[i], q = ring_frame[(i + 1) % n];
        out.push_back(p);
        std::vector<std::pair<double, Vec2>> cuts;
        for (const auto& br : breaks) {
            Vec2 d1 = q - p, d2 = br.b - br.a;
            double denom = d1.cross(d2);
            if (std::fabs(denom) < 1e-12) continue;
            double t = (br.a - p).cross(d2) / denom;
            double s = (br.a - p).cross(d1) / denom;
            if (t <= kEps || t >= 1 - kEps || s < -kEps || s > 1 + kEps) continue;
            cuts.push_back({t, p + d1 * t});
        }
        std::sort(cuts.begin(), cuts.end(),
                  [](const auto& x, const auto& y) { return x.first < y.first; });
        for (const auto& [t, pt] : cuts)
            if ((pt - out.back()).norm() > kEps) out.push_back(pt);
    }
    return out;
}

}  // namespace

std::vector<std::array<int, 3>> ear_clip(const std::vector<Vec2>& ring) {
    std::vector<int> idx(ring.size());
    for (size_t i = 0; i < ring.size(); ++i) idx[i] = static_cast<int>(i);
    std::vector<std::array<int, 3>> tris;

    auto cross_at = [&](int ia, int ib, int ic) {
        return (ring[ib] - ring[ia]).cross(ring[ic] - ring[ib]);
    };
    auto point_in_tri = [&](const Vec2& p, const Vec2& a, const Vec2& b, const Vec2& c) {
        double d1 = (b - a).cross(p - a);
        double d2 = (c - b).cross(p - b);
        double d3 = (a - c).cross(p - c);
        return d1 > kEps && d2 > kEps && d3 > kEps;
    };

    while (idx.size() > 3) {
        bool clipped = false;
        for (size_t i = 0; i < idx.size(); ++i) {
            int ia = idx[(i + idx.size() - 1) % idx.size()];
            int ib = idx[i];
            int ic = idx[(i + 1) % idx.size()];
            if (cross_at(ia, ib, ic) < -kEps) continue;  // reflex
            bool blocked = false;
            for (int other : idx) {
                if (other == ia || other == ib || other == ic) continue;
                if (point_in_tri(ring[other], ring[ia], ring[ib], ring[ic])) {
                    blocked = true;
                    break;
                }
            }
            if (blocked) continue;
            tris.push_back({ia, ib, ic});
            idx.erase(idx.begin() + static_cast<long>(i));
            clipped = true;
            break;
        }
        if (!clipped) {  // numerical fallback: fan
            for (size_t i = 1; i + 1 < idx.size(); ++i)
                tris.push_back({idx[0], idx[i], idx[i + 1]});
            return tris;
        }
    }
    if (idx.size() == 3) tris.push_back({idx[0], idx[1], idx[2]});
    return tris;
}

namespace {

struct MeshBuilder {
    TriMesh mesh;
    std::map<std::tuple<long long, long long, long long>, int> index;

    int vertex(const Vec3& v) {
        auto key = std::make_tuple(std::llround(v.x * 1e6), std::llround(v.y * 1e6),
                                   std::llround(v.z * 1e6));
        auto it = index.find(key);
        if (it != index.end()) return it->second;
        int id = static_cast<int>(mesh.vertices.size());
        mesh.vertices.push_back(
            {std::get<0>(key) * 1e-6, std::get<1>(key) * 1e-6, std::get<2>(key) * 1e-6});
        index[key] = id;
        return id;
    }
    void tri(const Vec3& a, const Vec3& b, const Vec3& c) {
        int ia = vertex(a), ib = vertex(b), ic = vertex(c);
        if (ia == ib || ib == ic || ia == ic) return;
        mesh.triangles.push_back({ia, ib, ic});
    }
};

}  // namespace

TriMesh building_mesh(const SceneModel& sm) {
    const RoofModel& m = sm.model;
    if (sm.footprint.size() < 3) throw DegenerateGeometryError("mesh: empty footprint");

    std::vector<Vec2> ring_frame;
    for (const auto& p : sm.footprint) ring_frame.push_back(m.rect.to_frame(p));
    // the frame transform mirrors orientation; keep CCW in frame coordinates
    if (ring_area(ring_frame) < 0) std::reverse(ring_frame.begin(), ring_frame.end());
    ring_frame = subdivide_ring(ring_frame, m);

    MeshBuilder mb;
    auto world3 = [&](const Vec2& uv, double z) {
        Vec2 w = m.rect.from_frame(uv);
        return Vec3{w.x, w.y, z};
    };

    // roof facets clipped by the footprint; frame CCW maps to world CW, so
    // emit frame-CW triangles to get world-CCW (seen from above)
    for (const auto& facet : facet_polys(m)) {
        std::vector<Vec2> clipper = facet;
        if (ring_area(clipper) < 0) std::reverse(clipper.begin(), clipper.end());
        std::vector<Vec2> piece = clip_convex(ring_frame, clipper);
        if (piece.size() < 3) continue;
        if (ring_area(piece) < 0) std::reverse(piece.begin(), piece.end());
        for (const auto& t : ear_clip(piece))
            mb.tri(world3(piece[t[0]], frame_z(m, piece[t[0]])),
                   world3(piece[t[2]], frame_z(m, piece[t[2]])),
                   world3(piece[t[1]], frame_z(m, piece[t[1]])));
    }

    // walls: frame-CCW ring is world-CW, i.e. interior on the right in world;
    // walls and floor take the complementary winding of the roof edges
    size_t n = ring_frame.size();
    for (size_t i = 0; i < n; ++i) {
        Vec2 p = ring_frame[i], q = ring_frame[(i + 1) % n];
        if ((q - p).norm() <= kEps) continue;
        Vec3 pt = world3(p, frame_z(m, p));
        Vec3 qt = world3(q, frame_z(m, q));
        Vec3 pb = world3(p, m.terrain_z);
        Vec3 qb = world3(q, m.terrain_z);
        mb.tri(pt, qt, qb);
        mb.tri(pt, qb, pb);
    }

    // floor
    for (const auto& t : ear_clip(ring_frame))
        mb.tri(world3(ring_frame[t[0]], m.terrain_z), world3(ring_frame[t[1]], m.terrain_z),
               world3(ring_frame[t[2]], m.terrain_z));

    return mb.mesh;
}

bool mesh_is_watertight(const TriMesh& mesh) {
    std::map<std::pair<int, int>, int> directed;
    for (const auto& t : mesh.triangles)
        for (int e = 0; e < 3; ++e) {
            int a = t[e], b = t[(e + 1) % 3];
            if (a == b) return false;
            if (++directed[{a, b}] > 1) return false;
        }
    for (const auto& [edge, count] : directed) {
        auto rev = directed.find({edge.second, edge.first});
        if (rev == directed.end() || rev->second != count) return false;
    }
    return true;
}

int mesh_euler_characteristic(const TriMesh& mesh) {
    std::set<int> verts;
    std::set<std::pair<int, int>> edges;
    for (const auto& t : mesh.triangles)
        for (int e = 0; e < 3; ++e) {
            int a = t[e], b = t[(e + 1) % 3];
            verts.insert(a);
            edges.insert({std::min(a, b), std::max(a, b)});
        }
    return static_cast<int>(verts.size()) - static_cast<int>(edges.size()) +
           static_cast<int>(mesh.triangles.size());
}

void export_obj(const ModelManifest& manifest, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw InvalidInputError("cannot write " + path);
    out.precision(9);
    int base = 1;  // OBJ indices are 1-based
    for (const auto& sm : manifest.buildings) {
        TriMesh mesh = building_mesh(sm);
        out << "o building_" << sm.model.rect.id << "\n";
        for (const auto& v : mesh.vertices)
            out << "v " << v.x << " " << v.y << " " << v.z << "\n";
        for (const auto& t : mesh.triangles)
            out << "f " << base + t[0] << " " << base + t[1] << " " << base + t[2] << "\n";
        base += static_cast<int>(mesh.vertices.size());
    }
}

}  // namespace lod2
