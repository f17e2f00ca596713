#pragma once

#include <array>
#include <string>
#include <vector>

#include "lod2/manifest.hpp"

namespace lod2 {

struct Vec3 {
    double x = 0, y = 0, z = 0;
};

struct TriMesh {
    std::vector<Vec3> vertices;
    std::vector<std::array<int, 3>> triangles;  // CCW from outside
};

// Closed solid for one building: roof facets, vertical walls down to
// terrain_z, flat floor. Footprint edges are subdivided wherever the roof
// surface has a slope break so walls and roof share vertices exactly.
TriMesh building_mesh(const SceneModel& model);

// Every directed edge appears exactly once in each direction (vertices
// deduplicated on a 1e-6 grid).
bool mesh_is_watertight(const TriMesh& mesh);

// Euler characteristic V - E + F over the deduplicated mesh.
int mesh_euler_characteristic(const TriMesh& mesh);

void export_obj(const ModelManifest& manifest, const std::string& path);

// Simple ear-clipping triangulation of a CCW simple polygon; collinear
// vertices yield degenerate triangles on purpose to keep meshes closed.
std::vector<std::array<int, 3>> ear_clip(const std::vector<Vec2>& ring);

}  // namespace lod2
