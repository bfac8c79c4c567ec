#pragma once

#include <string>

#include "fnl/grid.hpp"

namespace fnl {

// Raster files carry a fixed little-endian preamble:
//   magic "FNLR", version u32, dim u32, extents u32 x2,
//   origin f64 x2, spacing f64
// followed by the row-major payload: u8 per cell for masks, f64 per cell for
// value rasters.  Readers tell the two apart by payload size.

void save_mask(const GridSet& a, const std::string& path);
void save_values(const Raster& r, const std::string& path);

struct LoadedRaster {
  Grid grid;
  bool is_mask = false;
  std::vector<std::uint8_t> mask;  // filled when is_mask
  std::vector<double> values;      // filled otherwise
};

LoadedRaster load_raster(const std::string& path);
GridSet load_mask(const std::string& path);
Raster load_values(const std::string& path);

}  // namespace fnl
