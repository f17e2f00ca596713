#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "lod2/mesh.hpp"
#include "lod2/pipeline.hpp"
#include "lod2/raster_io.hpp"

namespace py = pybind11;
using namespace lod2;

namespace {

BandKind kind_from_name(const std::string& name) {
    if (name == "elevation") return BandKind::Elevation;
    if (name == "color") return BandKind::Color;
    if (name == "label") return BandKind::Label;
    throw InvalidInputError("unknown band kind: " + name);
}

std::string kind_name(BandKind kind) {
    switch (kind) {
        case BandKind::Elevation: return "elevation";
        case BandKind::Color: return "color";
        default: return "label";
    }
}

GeoRaster raster_from_numpy(py::array_t<double, py::array::c_style | py::array::forcecast> arr,
                            const std::string& kind, double cell_size, double origin_x,
                            double origin_y) {
    BandKind bk = kind_from_name(kind);
    int bands = bk == BandKind::Color ? 3 : 1;
    if (bands == 1 && arr.ndim() != 2)
        throw InvalidInputError("expected a 2-d array for " + kind);
    if (bands == 3 && (arr.ndim() != 3 || arr.shape(2) != 3))
        throw InvalidInputError("expected an (h, w, 3) array for color");
    int h = static_cast<int>(arr.shape(0));
    int w = static_cast<int>(arr.shape(1));
    GeoRaster out(w, h, bk, cell_size, origin_x, origin_y);
    auto view = arr.unchecked();
    for (int r = 0; r < h; ++r)
        for (int c = 0; c < w; ++c)
            for (int b = 0; b < bands; ++b)
                out.at(r, c, b) = bands == 1 ? view(r, c) : view(r, c, b);
    return out;
}

py::array raster_to_numpy(const GeoRaster& raster) {
    int bands = raster.bands();
    std::vector<py::ssize_t> shape{raster.height(), raster.width()};
    if (bands == 3) shape.push_back(3);
    py::array_t<double> arr(shape);
    auto view = arr.mutable_unchecked();
    for (int r = 0; r < raster.height(); ++r)
        for (int c = 0; c < raster.width(); ++c)
            for (int b = 0; b < bands; ++b) {
                if (bands == 1)
                    view(r, c) = raster.at(r, c);
                else
                    view(r, c, b) = raster.at(r, c, b);
            }
    return arr;
}

py::dict building_dict(const SceneModel& sm) {
    const RoofModel& m = sm.model;
    py::dict d;
    d["id"] = m.rect.id;
    d["type"] = roof_type_name(m.roof_type);
    d["x0"] = m.rect.center.x;
    d["y0"] = m.rect.center.y;
    d["orientation_deg"] = m.rect.orientation;
    d["length"] = m.rect.length;
    d["width"] = m.rect.width;
    d["z_eave"] = m.z_eave;
    d["z_ridge"] = m.z_ridge;
    d["hipl"] = m.hipl;
    d["hipw"] = m.hipw;
    d["terrain_z"] = m.terrain_z;
    d["rmse"] = m.fit_rmse;
    d["merged"] = sm.merged;
    py::list ring;
    for (const auto& p : sm.footprint) ring.append(py::make_tuple(p.x, p.y));
    d["footprint"] = ring;
    d["members"] = sm.members;
    return d;
}

py::dict report_dict(const EvalReport& rep) {
    py::dict d;
    d["variant"] = rep.variant;
    d["tp"] = rep.tp;
    d["fp"] = rep.fp;
    d["fn"] = rep.fn;
    d["tp3d"] = rep.tp3d;
    d["iou2"] = rep.iou2;
    d["iou3"] = rep.iou3;
    d["degenerate"] = rep.degenerate;
    return d;
}

std::vector<RoadVector> roads_from_python(const py::object& roads) {
    std::vector<RoadVector> out;
    if (roads.is_none()) return out;
    for (const auto& line : roads) {
        RoadVector road;
        for (const auto& pt : line) {
            auto t = pt.cast<std::pair<double, double>>();
            road.points.push_back({t.first, t.second});
        }
        out.push_back(std::move(road));
    }
    return out;
}

}  // namespace

PYBIND11_MODULE(_lod2, m) {
    m.doc() = "LoD-2 building reconstruction from DSM, orthophoto and instance masks";

    py::register_exception<InvalidInputError>(m, "InvalidInputError", PyExc_ValueError);
    py::register_exception<DegenerateGeometryError>(m, "DegenerateGeometryError",
                                                    PyExc_ValueError);

    py::class_<GeoRaster>(m, "GeoRaster")
        .def(py::init(&raster_from_numpy), py::arg("array"), py::arg("kind"),
             py::arg("cell_size") = 0.5, py::arg("origin_x") = 0.0,
             py::arg("origin_y") = 0.0)
        .def_property_readonly("width", &GeoRaster::width)
        .def_property_readonly("height", &GeoRaster::height)
        .def_property_readonly("cell_size", &GeoRaster::cell_size)
        .def_property_readonly("origin_x", &GeoRaster::origin_x)
        .def_property_readonly("origin_y", &GeoRaster::origin_y)
        .def_property_readonly("kind", [](const GeoRaster& r) { return kind_name(r.kind()); })
        .def("to_numpy", &raster_to_numpy)
        .def_static("read", &read_raster, py::arg("path"))
        .def("write", [](const GeoRaster& r, const std::string& path) {
            write_raster(r, path);
        }, py::arg("path"));

    m.def(
        "generate_scene",
        [](std::uint32_t seed, double scene_size, double cell_size, int min_buildings,
           int max_buildings, double dsm_noise_sigma, int mask_perturb_cells,
           double split_probability, bool with_road) {
            SynthSpec spec;
            spec.seed = seed;
            spec.scene_size = scene_size;
            spec.cell_size = cell_size;
            spec.min_buildings = min_buildings;
            spec.max_buildings = max_buildings;
            spec.dsm_noise_sigma = dsm_noise_sigma;
            spec.mask_perturb_cells = mask_perturb_cells;
            spec.split_probability = split_probability;
            spec.with_road = with_road;
            SynthScene scene = generate(spec);
            py::dict out;
            out["dsm"] = scene.dsm;
            out["ortho"] = scene.ortho;
            out["mask"] = scene.mask;
            py::list roads;
            for (const auto& road : scene.roads) {
                py::list pts;
                for (const auto& p : road.points) pts.append(py::make_tuple(p.x, p.y));
                roads.append(pts);
            }
            out["roads"] = roads;
            py::list truth;
            for (const auto& sm : scene.truth) truth.append(building_dict(sm));
            out["truth"] = truth;
            return out;
        },
        py::arg("seed") = 1, py::arg("scene_size") = 256.0, py::arg("cell_size") = 0.5,
        py::arg("min_buildings") = 5, py::arg("max_buildings") = 10,
        py::arg("dsm_noise_sigma") = 0.0, py::arg("mask_perturb_cells") = 0,
        py::arg("split_probability") = 0.0, py::arg("with_road") = true);

    m.def(
        "run_pipeline",
        [](const GeoRaster& dsm, const GeoRaster& ortho, const GeoRaster& mask,
           py::object roads, const std::string& config_path, py::object gt_mask,
           py::object gt_height, const std::string& manifest_path,
           const std::string& obj_path) {
            PipelineConfig cfg;
            if (!config_path.empty()) cfg = load_config(config_path);
            std::vector<RoadVector> road_vecs = roads_from_python(roads);
            const GeoRaster* gm =
                gt_mask.is_none() ? nullptr : &gt_mask.cast<const GeoRaster&>();
            const GeoRaster* gh =
                gt_height.is_none() ? nullptr : &gt_height.cast<const GeoRaster&>();
            PipelineResult res =
                run_pipeline(dsm, ortho, mask, nullptr,
                             road_vecs.empty() ? nullptr : &road_vecs, cfg, gm, gh);
            if (!manifest_path.empty()) write_manifest(res.manifest, manifest_path);
            if (!obj_path.empty()) export_obj(res.manifest, obj_path);
            py::dict out;
            py::list buildings;
            for (const auto& sm : res.manifest.buildings) buildings.append(building_dict(sm));
            out["buildings"] = buildings;
            out["report"] = res.report ? py::object(report_dict(*res.report)) : py::none();
            return out;
        },
        py::arg("dsm"), py::arg("ortho"), py::arg("mask"), py::arg("roads") = py::none(),
        py::arg("config_path") = "", py::arg("gt_mask") = py::none(),
        py::arg("gt_height") = py::none(), py::arg("manifest_path") = "",
        py::arg("obj_path") = "");

    m.def(
        "fit_roof",
        [](const GeoRaster& dsm, double cx, double cy, double length, double width,
           double orientation) {
            BuildingRectangle rect;
            rect.center = {cx, cy};
            rect.length = length;
            rect.width = width;
            rect.orientation = orientation;
            RoofModel model = fit_model(rect, dsm);
            return building_dict(scene_model_from(model));
        },
        py::arg("dsm"), py::arg("cx"), py::arg("cy"), py::arg("length"), py::arg("width"),
        py::arg("orientation"));

    m.def(
        "evaluate",
        [](const GeoRaster& pred_mask, const GeoRaster& pred_height,
           const GeoRaster& gt_mask, const GeoRaster& gt_height, double tol) {
            return report_dict(evaluate(pred_mask, pred_height, gt_mask, gt_height, tol));
        },
        py::arg("pred_mask"), py::arg("pred_height"), py::arg("gt_mask"),
        py::arg("gt_height"), py::arg("tol") = 2.0);
}
