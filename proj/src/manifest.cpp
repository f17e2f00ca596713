#include "lod2/manifest.hpp"

#include <fstream>

#include <json.hpp>

#include "lod2/errors.hpp"

namespace lod2 {

SceneGeoref georef_of(const GeoRaster& raster) {
    return {raster.width(), raster.height(), raster.cell_size(), raster.origin_x(),
            raster.origin_y()};
}

void write_manifest(const ModelManifest& manifest, const std::string& path) {
    nlohmann::json buildings = nlohmann::json::array();
    for (const auto& sm : manifest.buildings) {
        const RoofModel& m = sm.model;
        nlohmann::json rec = {{"id", m.rect.id},
                              {"type", roof_type_name(m.roof_type)},
                              {"x0", m.rect.center.x},
                              {"y0", m.rect.center.y},
                              {"orientation_deg", m.rect.orientation},
                              {"length", m.rect.length},
                              {"width", m.rect.width},
                              {"z_eave", m.z_eave},
                              {"z_ridge", m.z_ridge},
                              {"hipl", m.hipl},
                              {"hipw", m.hipw},
                              {"terrain_z", m.terrain_z},
                              {"rmse", m.fit_rmse}};
        if (sm.merged) {
            nlohmann::json ring = nlohmann::json::array();
            for (const auto& p : sm.footprint) ring.push_back({p.x, p.y});
            rec["footprint"] = ring;
            rec["members"] = sm.members;
        }
        buildings.push_back(std::move(rec));
    }
    nlohmann::json doc = {{"version", manifest.version},
                          {"georef",
                           {{"width", manifest.georef.width},
                            {"height", manifest.georef.height},
                            {"cell_size", manifest.georef.cell_size},
                            {"origin_x", manifest.georef.origin_x},
                            {"origin_y", manifest.georef.origin_y}}},
                          {"buildings", buildings}};
    std::ofstream out(path);
    if (!out) throw InvalidInputError("cannot write " + path);
    out << doc.dump(2) << "\n";
}

ModelManifest read_manifest(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidInputError("cannot open " + path);
    nlohmann::json doc = nlohmann::json::parse(in);
    ModelManifest manifest;
    manifest.version = doc.at("version");
    const auto& g = doc.at("georef");
    manifest.georef = {g.at("width"), g.at("height"), g.at("cell_size"), g.at("origin_x"),
                       g.at("origin_y")};
    for (const auto& rec : doc.at("buildings")) {
        RoofModel m;
        m.rect.id = rec.at("id");
        m.roof_type = roof_type_from_name(rec.at("type"));
        m.rect.center = {rec.at("x0"), rec.at("y0")};
        m.rect.orientation = rec.at("orientation_deg");
        m.rect.length = rec.at("length");
        m.rect.width = rec.at("width");
        m.z_eave = rec.at("z_eave");
        m.z_ridge = rec.at("z_ridge");
        m.hipl = rec.at("hipl");
        m.hipw = rec.at("hipw");
        m.terrain_z = rec.at("terrain_z");
        m.fit_rmse = rec.at("rmse");
        if (!m.satisfies_invariants())
            throw InvalidInputError("manifest record violates model invariants");
        SceneModel sm = scene_model_from(m);
        if (rec.contains("footprint")) {
            sm.merged = true;
            sm.footprint.clear();
            for (const auto& p : rec.at("footprint"))
                sm.footprint.push_back({p.at(0), p.at(1)});
            sm.members.clear();
            for (const auto& id : rec.at("members")) sm.members.push_back(id);
        }
        manifest.buildings.push_back(std::move(sm));
    }
    return manifest;
}

}  // namespace lod2
