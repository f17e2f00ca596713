#include "lod2/fusion.hpp"

#include <algorithm>
#include <fstream>

#include <json.hpp>

namespace lod2 {

double decision_weight(const FusionCandidate& candidate) {
    long long bbox = candidate.area_bbox();
    if (bbox <= 0) throw InvalidInputError("candidate bbox has zero area");
    return static_cast<double>(candidate.area_class()) /
           (static_cast<double>(bbox) * static_cast<double>(bbox));
}

GeoRaster fuse_masks(const GeoRaster& semantic, std::vector<FusionCandidate> candidates,
                     double threshold, int min_component_area) {
    if (semantic.bands() != 1)
        throw InvalidInputError("fuse_masks expects a single-band semantic mask");
    if (!(threshold > 0.0 && threshold <= 1.0))
        throw InvalidInputError("fusion threshold must lie in (0, 1]");

    GeoRaster provisional(semantic.width(), semantic.height(), BandKind::Label,
                          semantic.cell_size(), semantic.origin_x(), semantic.origin_y());
    for (int r = 0; r < semantic.height(); ++r)
        for (int c = 0; c < semantic.width(); ++c)
            provisional.at(r, c) = semantic.at(r, c);  // keep label values so
                                                       // touching instances stay apart

    std::stable_sort(candidates.begin(), candidates.end(),
                     [](const FusionCandidate& a, const FusionCandidate& b) {
                         double wa = decision_weight(a), wb = decision_weight(b);
                         if (wa != wb) return wa > wb;
                         if (a.row_min != b.row_min) return a.row_min < b.row_min;
                         return a.col_min < b.col_min;
                     });

    GeoRaster out(semantic.width(), semantic.height(), BandKind::Label,
                  semantic.cell_size(), semantic.origin_x(), semantic.origin_y());
    int next_id = 1;
    for (const auto& cand : candidates) {
        if (decision_weight(cand) < threshold) continue;
        for (int r = cand.row_min; r <= cand.row_max; ++r)
            for (int c = cand.col_min; c <= cand.col_max; ++c)
                if (provisional.in_bounds(r, c)) provisional.at(r, c) = 0.0;
        int id = next_id++;
        cand.cells.for_each_cell([&](int r, int c) {
            // earlier (heavier) stamps keep contested cells
            if (out.in_bounds(r, c) && out.at(r, c) == 0.0) out.at(r, c) = id;
        });
    }

    // Candidate stamps win over remaining semantic cells.
    for (int r = 0; r < out.height(); ++r)
        for (int c = 0; c < out.width(); ++c)
            if (out.at(r, c) != 0.0) provisional.at(r, c) = 0.0;

    for (const auto& region : connected_components(provisional, min_component_area)) {
        int id = next_id++;
        region.for_each_cell([&](int r, int c) {
            if (out.at(r, c) == 0.0) out.at(r, c) = id;
        });
    }
    return out;
}

std::vector<FusionCandidate> read_candidates_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidInputError("cannot open " + path);
    nlohmann::json doc = nlohmann::json::parse(in);
    std::vector<FusionCandidate> out;
    for (const auto& item : doc) {
        FusionCandidate cand;
        const auto& bbox = item.at("bbox");
        cand.row_min = bbox.at(0);
        cand.col_min = bbox.at(1);
        cand.row_max = bbox.at(2);
        cand.col_max = bbox.at(3);
        if (cand.row_max < cand.row_min || cand.col_max < cand.col_min)
            throw InvalidInputError("candidate bbox is inverted");
        int bw = cand.col_max - cand.col_min + 1;
        std::vector<std::pair<int, int>> cells;
        long long pos = 0;
        bool fill = false;  // rle alternates skip, fill, skip, ...
        for (const auto& count : item.at("rle")) {
            long long n = count.get<long long>();
            if (fill) {
                for (long long k = 0; k < n; ++k) {
                    long long idx = pos + k;
                    cells.push_back({cand.row_min + static_cast<int>(idx / bw),
                                     cand.col_min + static_cast<int>(idx % bw)});
                }
            }
            pos += n;
            fill = !fill;
        }
        cand.cells = PixelRegion::from_cells(std::move(cells));
        out.push_back(std::move(cand));
    }
    return out;
}

void write_candidates_json(const std::vector<FusionCandidate>& candidates,
                           const std::string& path) {
    nlohmann::json doc = nlohmann::json::array();
    for (const auto& cand : candidates) {
        int bw = cand.col_max - cand.col_min + 1;
        std::vector<long long> flat;
        cand.cells.for_each_cell([&](int r, int c) {
            flat.push_back(static_cast<long long>(r - cand.row_min) * bw + (c - cand.col_min));
        });
        std::sort(flat.begin(), flat.end());
        std::vector<long long> rle;
        long long pos = 0;
        size_t i = 0;
        while (i < flat.size()) {
            long long start = flat[i];
            size_t j = i;
            while (j + 1 < flat.size() && flat[j + 1] == flat[j] + 1) ++j;
            rle.push_back(start - pos);          // skip
            rle.push_back(flat[j] - start + 1);  // fill
            pos = flat[j] + 1;
            i = j + 1;
        }
        doc.push_back({{"bbox", {cand.row_min, cand.col_min, cand.row_max, cand.col_max}},
                       {"rle", rle}});
    }
    std::ofstream out(path);
    out << doc.dump(2) << "\n";
}

}  // namespace lod2
