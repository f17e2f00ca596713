#include "lod2/synth.hpp"

#include <algorithm>
#include <cmath>

#include "lod2/errors.hpp"

namespace lod2 {

namespace {

// explicit generator arithmetic so output bytes depend only on the seed
struct Rng {
    std::uint64_t state;
    explicit Rng(std::uint32_t seed) : state(seed * 6364136223846793005ULL + 1442695040888963407ULL) {}

    std::uint32_t next() {
        state = state * 6364136223846793005ULL + 1442695040888963407ULL;
        return static_cast<std::uint32_t>(state >> 32);
    }
    double uniform(double lo, double hi) {
        return lo + (next() + 0.5) * (1.0 / 4294967296.0) * (hi - lo);
    }
    double normal() {
        double u1 = uniform(1e-12, 1.0), u2 = uniform(0.0, 1.0);
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
    }
    int uniform_int(int lo, int hi) {  // inclusive
        return lo + static_cast<int>(next() % static_cast<std::uint32_t>(hi - lo + 1));
    }
    bool coin() { return (next() & 1u) != 0; }
};

}  // namespace

void SynthSpec::validate() const {
    double total = 0;
    for (double p : type_mix) {
        if (p < 0) throw InvalidInputError("type mix probabilities must be >= 0");
        total += p;
    }
    if (std::fabs(total - 1.0) > 1e-9)
        throw InvalidInputError("type mix probabilities must sum to 1");
    if (scene_size <= 0 || cell_size <= 0 || min_buildings < 0 ||
        max_buildings < min_buildings || min_length <= 0 || max_length < min_length ||
        min_width <= 0 || max_width < min_width || dsm_noise_sigma < 0 ||
        mask_perturb_cells < 0 || split_probability < 0 || split_probability > 1)
        throw InvalidInputError("synth spec out of range");
}

SynthScene generate(const SynthSpec& spec) {
    spec.validate();
    Rng rng(spec.seed);

    SynthScene scene;
    scene.terrain_base = rng.uniform(50.0, 80.0);
    scene.terrain_gx = rng.uniform(-0.014, 0.014);
    scene.terrain_gy = rng.uniform(-0.014, 0.014);

    int count = rng.uniform_int(spec.min_buildings, spec.max_buildings);
    int attempts = 0;
    std::vector<RoofModel> models;
    while (static_cast<int>(models.size()) < count) {
        if (++attempts > 10000)
            throw StageError("synth", "cannot place requested building count");
        RoofModel m;
        m.rect.length = rng.uniform(spec.min_length, spec.max_length);
        m.rect.width = std::min(rng.uniform(spec.min_width, spec.max_width), m.rect.length);
        m.rect.orientation = spec.orientation_policy == OrientationPolicy::SharedPerBlock
                                 ? spec.block_orientation
                                 : 2.0 * rng.uniform_int(0, 89);
        double half_diag =
            0.5 * std::hypot(m.rect.length, m.rect.width) + spec.gap;
        if (2 * half_diag >= spec.scene_size) {
            continue;
        }
        m.rect.center = {rng.uniform(half_diag, spec.scene_size - half_diag),
                         rng.uniform(half_diag, spec.scene_size - half_diag)};
        bool clash = false;
        for (const auto& other : models) {
            double od = 0.5 * std::hypot(other.rect.length, other.rect.width) + spec.gap;
            if ((other.rect.center - m.rect.center).norm() < half_diag + od) {
                clash = true;
                break;
            }
        }
        if (clash) continue;

        double pick = rng.uniform(0.0, 1.0), acc = 0.0;
        m.roof_type = RoofType::Mansard;
        for (int t = 0; t < 5; ++t) {
            acc += spec.type_mix[t];
            if (pick < acc) {
                m.roof_type = static_cast<RoofType>(t);
                break;
            }
        }
        m.terrain_z = scene.terrain_at(m.rect.center);
        m.z_eave = m.terrain_z + rng.uniform(3.0, 6.0);
        m.z_ridge = m.roof_type == RoofType::Flat ? m.z_eave
                                                  : m.z_eave + rng.uniform(1.0, 3.0);
        m.hipl = rng.uniform(m.rect.length / 8, 3 * m.rect.length / 8);
        m.hipw = rng.uniform(m.rect.width / 8, 3 * m.rect.width / 8);
        m.apply_type_constraints();
        m.rect.id = static_cast<int>(models.size()) + 1;
        models.push_back(m);
    }

    int n = static_cast<int>(std::lround(spec.scene_size / spec.cell_size));
    scene.dsm = GeoRaster(n, n, BandKind::Elevation, spec.cell_size, 0.0, spec.scene_size);
    scene.ortho = GeoRaster(n, n, BandKind::Color, spec.cell_size, 0.0, spec.scene_size);
    scene.mask = GeoRaster(n, n, BandKind::Label, spec.cell_size, 0.0, spec.scene_size);

    for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c) {
            Vec2 p = scene.dsm.cell_center(r, c);
            scene.dsm.at(r, c) = scene.terrain_at(p);
            double g = 90.0 + 12.0 * rng.uniform(-1.0, 1.0);  // ground texture
            scene.ortho.at(r, c, 0) = std::round(0.7 * g);
            scene.ortho.at(r, c, 1) = std::round(g);
            scene.ortho.at(r, c, 2) = std::round(0.65 * g);
        }

    auto bbox_cells = [&](const BuildingRectangle& rect, int& r0, int& c0, int& r1,
                          int& c1) {
        double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
        for (const auto& p : rect.corners()) {
            xmin = std::min(xmin, p.x);
            xmax = std::max(xmax, p.x);
            ymin = std::min(ymin, p.y);
            ymax = std::max(ymax, p.y);
        }
        scene.dsm.world_to_cell({xmin, ymax}, r0, c0);
        scene.dsm.world_to_cell({xmax, ymin}, r1, c1);
        r0 = std::max(0, r0);
        c0 = std::max(0, c0);
        r1 = std::min(n - 1, r1);
        c1 = std::min(n - 1, c1);
    };

    int next_instance = 1;
    Vec2 light{0.32, 0.32};  // light direction xy; z = 0.89
    for (const auto& m : models) {
        std::array<double, 3> base = {rng.uniform(90, 220), rng.uniform(90, 220),
                                      rng.uniform(90, 220)};
        bool split = rng.uniform(0.0, 1.0) < spec.split_probability;
        double cut = split ? rng.uniform(-m.rect.length / 6, m.rect.length / 6) : 0.0;
        int id_a = next_instance++;
        int id_b = split ? next_instance++ : id_a;

        int r0, c0, r1, c1;
        bbox_cells(m.rect, r0, c0, r1, c1);
        for (int r = r0; r <= r1; ++r)
            for (int c = c0; c <= c1; ++c) {
                Vec2 p = scene.dsm.cell_center(r, c);
                auto h = roof_height(m, p);
                if (!h) continue;
                scene.dsm.at(r, c) = std::max(scene.dsm.at(r, c), *h);
                Vec2 uv = m.rect.to_frame(p);
                scene.mask.at(r, c) = uv.x < cut ? id_a : id_b;

                // flat facet shading from the numerical surface normal
                double eps = spec.cell_size;
                double hx = roof_height_clamped(m, {p.x + eps, p.y});
                double hy = roof_height_clamped(m, {p.x, p.y + eps});
                double nx = -(hx - *h) / eps, ny = -(hy - *h) / eps, nz = 1.0;
                double inv = 1.0 / std::sqrt(nx * nx + ny * ny + nz * nz);
                double lambert = std::max(0.0, (nx * light.x + ny * light.y + nz * 0.89) * inv);
                double shade = 0.55 + 0.45 * lambert;
                for (int b = 0; b < 3; ++b)
                    scene.ortho.at(r, c, b) =
                        std::clamp(std::round(base[b] * shade), 0.0, 255.0);
            }
    }

    if (spec.dsm_noise_sigma > 0)
        for (int r = 0; r < n; ++r)
            for (int c = 0; c < n; ++c)
                scene.dsm.at(r, c) += spec.dsm_noise_sigma * rng.normal();

    // boundary jitter: flip membership in a band around each instance edge
    if (spec.mask_perturb_cells > 0) {
        GeoRaster clean = scene.mask;
        int rad = spec.mask_perturb_cells;
        for (int r = 0; r < n; ++r)
            for (int c = 0; c < n; ++c) {
                double v = clean.at(r, c);
                bool near_edge = false;
                double neighbor_id = 0.0;
                for (int dr = -rad; dr <= rad && !near_edge; ++dr)
                    for (int dc = -rad; dc <= rad; ++dc) {
                        int rr = r + dr, cc = c + dc;
                        if (rr < 0 || cc < 0 || rr >= n || cc >= n) continue;
                        double w = clean.at(rr, cc);
                        if (w != v) {
                            near_edge = true;
                            neighbor_id = w;
                            break;
                        }
                    }
                if (!near_edge) continue;
                if (rng.uniform(0.0, 1.0) < 0.25)
                    scene.mask.at(r, c) = v != 0.0 ? 0.0 : neighbor_id;
            }
    }

    for (const auto& m : models) scene.truth.push_back(scene_model_from(m));

    if (spec.with_road) {
        double theta = spec.orientation_policy == OrientationPolicy::SharedPerBlock
                           ? spec.block_orientation
                           : 90.0;
        Vec2 dir = orientation_dir(theta);
        Vec2 mid{spec.scene_size / 2, spec.scene_size / 2};
        RoadVector road;
        road.points = {mid - dir * (spec.scene_size / 2), mid + dir * (spec.scene_size / 2)};
        scene.roads.push_back(road);
    }
    return scene;
}

}  // namespace lod2
