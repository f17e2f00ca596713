#include "lod2/raster_io.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

namespace lod2 {

namespace {

struct GridHeader {
    int ncols = 0, nrows = 0;
    double xllcorner = 0, yllcorner = 0, cellsize = 0.5;
    double nodata = GeoRaster::kDefaultNoData;
};

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    return s;
}

GridHeader parse_header(std::istream& in, bool expect_nodata) {
    GridHeader hdr;
    int seen = 0;
    while (seen < (expect_nodata ? 6 : 5)) {
        std::string key;
        if (!(in >> key)) throw InvalidInputError("truncated grid header");
        key = lower(key);
        double value;
        if (!(in >> value)) throw InvalidInputError("bad grid header value for " + key);
        if (key == "ncols") hdr.ncols = static_cast<int>(value);
        else if (key == "nrows") hdr.nrows = static_cast<int>(value);
        else if (key == "xllcorner") hdr.xllcorner = value;
        else if (key == "yllcorner") hdr.yllcorner = value;
        else if (key == "cellsize") hdr.cellsize = value;
        else if (key == "nodata_value") hdr.nodata = value;
        else throw InvalidInputError("unknown grid header key: " + key);
        ++seen;
    }
    if (hdr.ncols < 1 || hdr.nrows < 1 || hdr.cellsize <= 0)
        throw InvalidInputError("invalid grid header dimensions");
    return hdr;
}

void write_header(std::ostream& out, const GeoRaster& r) {
    out << "ncols " << r.width() << "\n";
    out << "nrows " << r.height() << "\n";
    out << "xllcorner " << r.origin_x() << "\n";
    out << "yllcorner " << (r.origin_y() - r.height() * r.cell_size()) << "\n";
    out << "cellsize " << r.cell_size() << "\n";
    out << "NODATA_value " << r.nodata() << "\n";
}

GridHeader read_sidecar(const std::string& path) {
    std::ifstream in(path + ".hdr");
    if (!in) {
        GridHeader hdr;  // no sidecar: local frame at (0, 0)
        hdr.nodata = 0;
        return hdr;
    }
    return parse_header(in, true);
}

void apply_sidecar(GeoRaster& raster, const GridHeader& hdr) {
    if (hdr.ncols > 0 && (hdr.ncols != raster.width() || hdr.nrows != raster.height()))
        throw InvalidInputError("sidecar header dimensions disagree with image");
    if (hdr.cellsize > 0 && hdr.ncols > 0) {
        GeoRaster fixed(raster.width(), raster.height(), raster.kind(), hdr.cellsize,
                        hdr.xllcorner, hdr.yllcorner + hdr.nrows * hdr.cellsize);
        fixed.data() = raster.data();
        raster = std::move(fixed);
    }
}

int read_pnm_token(std::istream& in) {
    // skips whitespace and '#' comments
    while (true) {
        int c = in.peek();
        if (c == '#') {
            std::string line;
            std::getline(in, line);
        } else if (std::isspace(c)) {
            in.get();
        } else {
            break;
        }
    }
    int v;
    if (!(in >> v)) throw InvalidInputError("truncated PNM header");
    return v;
}

}  // namespace

GeoRaster read_ascii_grid(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidInputError("cannot open " + path);
    GridHeader hdr = parse_header(in, true);
    GeoRaster raster(hdr.ncols, hdr.nrows, BandKind::Elevation, hdr.cellsize,
                     hdr.xllcorner, hdr.yllcorner + hdr.nrows * hdr.cellsize);
    raster.set_nodata(hdr.nodata);
    for (int r = 0; r < hdr.nrows; ++r)
        for (int c = 0; c < hdr.ncols; ++c)
            if (!(in >> raster.at(r, c)))
                throw InvalidInputError("truncated grid body in " + path);
    return raster;
}

void write_ascii_grid(const GeoRaster& raster, const std::string& path) {
    if (raster.bands() != 1)
        throw InvalidInputError("ASCII grid holds single-band rasters only");
    std::ofstream out(path);
    if (!out) throw InvalidInputError("cannot write " + path);
    out.precision(10);
    write_header(out, raster);
    for (int r = 0; r < raster.height(); ++r) {
        for (int c = 0; c < raster.width(); ++c) {
            if (c) out << ' ';
            out << raster.at(r, c);
        }
        out << '\n';
    }
}

GeoRaster read_ppm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InvalidInputError("cannot open " + path);
    char magic[2];
    in.read(magic, 2);
    if (magic[0] != 'P' || magic[1] != '6') throw InvalidInputError("not a P6 PPM: " + path);
    int w = read_pnm_token(in);
    int h = read_pnm_token(in);
    int maxval = read_pnm_token(in);
    if (maxval != 255) throw InvalidInputError("PPM maxval must be 255");
    in.get();  // single whitespace after maxval
    GeoRaster raster(w, h, BandKind::Color);
    std::vector<unsigned char> buf(static_cast<size_t>(w) * h * 3);
    in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
    if (!in) throw InvalidInputError("truncated PPM body in " + path);
    for (size_t i = 0; i < buf.size(); ++i) raster.data()[i] = buf[i];
    apply_sidecar(raster, read_sidecar(path));
    return raster;
}

void write_ppm(const GeoRaster& raster, const std::string& path) {
    if (raster.kind() != BandKind::Color)
        throw InvalidInputError("PPM output requires a 3-band color raster");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InvalidInputError("cannot write " + path);
    out << "P6\n" << raster.width() << " " << raster.height() << "\n255\n";
    std::vector<unsigned char> buf(raster.data().size());
    for (size_t i = 0; i < buf.size(); ++i)
        buf[i] = static_cast<unsigned char>(std::clamp(raster.data()[i], 0.0, 255.0));
    out.write(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
    std::ofstream hdr(path + ".hdr");
    write_header(hdr, raster);
}

GeoRaster read_pgm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InvalidInputError("cannot open " + path);
    char magic[2];
    in.read(magic, 2);
    if (magic[0] != 'P' || magic[1] != '5') throw InvalidInputError("not a P5 PGM: " + path);
    int w = read_pnm_token(in);
    int h = read_pnm_token(in);
    int maxval = read_pnm_token(in);
    if (maxval != 65535) throw InvalidInputError("PGM maxval must be 65535");
    in.get();
    GeoRaster raster(w, h, BandKind::Label);
    std::vector<unsigned char> buf(static_cast<size_t>(w) * h * 2);
    in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
    if (!in) throw InvalidInputError("truncated PGM body in " + path);
    for (size_t i = 0; i < raster.data().size(); ++i)
        raster.data()[i] = buf[2 * i] * 256.0 + buf[2 * i + 1];  // big-endian
    apply_sidecar(raster, read_sidecar(path));
    return raster;
}

void write_pgm(const GeoRaster& raster, const std::string& path) {
    if (raster.kind() != BandKind::Label)
        throw InvalidInputError("PGM output requires a label raster");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InvalidInputError("cannot write " + path);
    out << "P5\n" << raster.width() << " " << raster.height() << "\n65535\n";
    std::vector<unsigned char> buf(raster.data().size() * 2);
    for (size_t i = 0; i < raster.data().size(); ++i) {
        auto v = static_cast<unsigned>(std::clamp(raster.data()[i], 0.0, 65535.0));
        buf[2 * i] = static_cast<unsigned char>(v >> 8);
        buf[2 * i + 1] = static_cast<unsigned char>(v & 0xff);
    }
    out.write(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
    std::ofstream hdr(path + ".hdr");
    write_header(hdr, raster);
}

GeoRaster read_raster(const std::string& path) {
    auto dot = path.find_last_of('.');
    std::string ext = dot == std::string::npos ? "" : lower(path.substr(dot + 1));
    if (ext == "asc") return read_ascii_grid(path);
    if (ext == "ppm") return read_ppm(path);
    if (ext == "pgm") return read_pgm(path);
    throw InvalidInputError("unsupported raster extension: " + path);
}

void write_raster(const GeoRaster& raster, const std::string& path) {
    auto dot = path.find_last_of('.');
    std::string ext = dot == std::string::npos ? "" : lower(path.substr(dot + 1));
    if (ext == "asc") return write_ascii_grid(raster, path);
    if (ext == "ppm") return write_ppm(raster, path);
    if (ext == "pgm") return write_pgm(raster, path);
    throw InvalidInputError("unsupported raster extension: " + path);
}

}  // namespace lod2
