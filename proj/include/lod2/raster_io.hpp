#pragma once

#include <string>

#include "lod2/raster.hpp"

namespace lod2 {

// ESRI ASCII grid: ncols, nrows, xllcorner, yllcorner, cellsize, NODATA_value,
// then row-major values, top row first.
GeoRaster read_ascii_grid(const std::string& path);
void write_ascii_grid(const GeoRaster& raster, const std::string& path);

// Binary PPM (P6, maxval 255) for 3-band color. Georeferencing comes from a
// sidecar "<path>.hdr" file carrying the same six ASCII-grid keys.
GeoRaster read_ppm(const std::string& path);
void write_ppm(const GeoRaster& raster, const std::string& path);

// Binary PGM (P5, maxval 65535, big-endian samples) for label/mask rasters.
GeoRaster read_pgm(const std::string& path);
void write_pgm(const GeoRaster& raster, const std::string& path);

// Dispatch on extension: .asc -> ascii grid, .ppm, .pgm.
GeoRaster read_raster(const std::string& path);
void write_raster(const GeoRaster& raster, const std::string& path);

}  // namespace lod2
