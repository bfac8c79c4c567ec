#include "fnl/raster_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>

namespace fnl {

static_assert(std::endian::native == std::endian::little,
              "raster files are little-endian; byte-swapping writer not implemented");

namespace {

constexpr char kMagic[4] = {'F', 'N', 'L', 'R'};
constexpr std::uint32_t kVersion = 1;

void put_u32(std::ostream& os, std::uint32_t v) {
  os.write(reinterpret_cast<const char*>(&v), 4);
}
void put_f64(std::ostream& os, double v) { os.write(reinterpret_cast<const char*>(&v), 8); }

std::uint32_t get_u32(std::istream& is) {
  std::uint32_t v = 0;
  is.read(reinterpret_cast<char*>(&v), 4);
  return v;
}
double get_f64(std::istream& is) {
  double v = 0;
  is.read(reinterpret_cast<char*>(&v), 8);
  return v;
}

void write_preamble(std::ostream& os, const Grid& g) {
  os.write(kMagic, 4);
  put_u32(os, kVersion);
  put_u32(os, static_cast<std::uint32_t>(g.dim));
  put_u32(os, static_cast<std::uint32_t>(g.extents[0]));
  put_u32(os, static_cast<std::uint32_t>(g.extents[1]));
  put_f64(os, g.origin[0]);
  put_f64(os, g.origin[1]);
  put_f64(os, g.spacing);
}

Grid read_preamble(std::istream& is, const std::string& path) {
  char magic[4] = {};
  is.read(magic, 4);
  if (!is || std::memcmp(magic, kMagic, 4) != 0)
    throw PreconditionError("raster file: bad magic in " + path);
  const std::uint32_t version = get_u32(is);
  if (version != kVersion)
    throw PreconditionError("raster file: unsupported version in " + path);
  Grid g;
  g.dim = static_cast<int>(get_u32(is));
  g.extents[0] = static_cast<int>(get_u32(is));
  g.extents[1] = static_cast<int>(get_u32(is));
  g.origin[0] = get_f64(is);
  g.origin[1] = get_f64(is);
  g.spacing = get_f64(is);
  if (!is || (g.dim != 1 && g.dim != 2) || g.extents[0] < 1 || g.extents[1] < 1 ||
      !(g.spacing > 0))
    throw PreconditionError("raster file: corrupt header in " + path);
  return g;
}

}  // namespace

void save_mask(const GridSet& a, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + path);
  write_preamble(os, a.grid);
  os.write(reinterpret_cast<const char*>(a.mask.data()),
           static_cast<std::streamsize>(a.mask.size()));
  if (!os) throw std::runtime_error("write failed: " + path);
}

void save_values(const Raster& r, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + path);
  write_preamble(os, r.grid);
  os.write(reinterpret_cast<const char*>(r.values.data()),
           static_cast<std::streamsize>(r.values.size() * sizeof(double)));
  if (!os) throw std::runtime_error("write failed: " + path);
}

LoadedRaster load_raster(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot read " + path);
  LoadedRaster out;
  out.grid = read_preamble(is, path);
  const auto cells = static_cast<std::size_t>(out.grid.cell_count());

  const auto payload_start = is.tellg();
  is.seekg(0, std::ios::end);
  const std::size_t payload = static_cast<std::size_t>(is.tellg() - payload_start);
  is.seekg(payload_start);

  if (payload == cells) {
    out.is_mask = true;
    out.mask.resize(cells);
    is.read(reinterpret_cast<char*>(out.mask.data()), static_cast<std::streamsize>(cells));
  } else if (payload == cells * sizeof(double)) {
    out.is_mask = false;
    out.values.resize(cells);
    is.read(reinterpret_cast<char*>(out.values.data()),
            static_cast<std::streamsize>(payload));
  } else {
    throw PreconditionError("raster file: payload size matches neither mask nor values in " +
                            path);
  }
  if (!is) throw std::runtime_error("read failed: " + path);
  return out;
}

GridSet load_mask(const std::string& path) {
  LoadedRaster lr = load_raster(path);
  if (!lr.is_mask) throw PreconditionError("expected mask payload in " + path);
  GridSet s(lr.grid);
  s.mask = std::move(lr.mask);
  return s;
}

Raster load_values(const std::string& path) {
  LoadedRaster lr = load_raster(path);
  if (lr.is_mask) throw PreconditionError("expected value payload in " + path);
  Raster r(lr.grid);
  r.values = std::move(lr.values);
  return r;
}

}  // namespace fnl
