#include "mhdlag/snapshot.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>

namespace mhdlag {

namespace {

static_assert(std::endian::native == std::endian::little,
              "snapshot I/O assumes a little-endian host");

constexpr char kMagic[4] = {'M', 'H', 'D', 'F'};
constexpr std::uint32_t kVersion = 1;

struct Header {
  std::uint32_t nx, ny, nz;
  double lx, ly, depth;
};

template <typename T>
void put(std::ofstream& out, T value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T get(std::ifstream& in, const std::string& path) {
  T value;
  if (!in.read(reinterpret_cast<char*>(&value), sizeof(T)))
    throw SnapshotError(path + ": truncated header");
  return value;
}

void write_raw(const std::string& path, const Header& h, const Eigen::ArrayXd& values) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw SnapshotError("cannot open " + path + " for writing");
  out.write(kMagic, 4);
  put(out, kVersion);
  put(out, h.nx);
  put(out, h.ny);
  put(out, h.nz);
  put(out, h.lx);
  put(out, h.ly);
  put(out, h.depth);
  out.write(reinterpret_cast<const char*>(values.data()),
            static_cast<std::streamsize>(values.size() * sizeof(double)));
  if (!out) throw SnapshotError("write failed for " + path);
}

Eigen::ArrayXd read_raw(const std::string& path, Header& h) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SnapshotError("cannot open " + path);
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0)
    throw SnapshotError(path + ": bad magic");
  const auto version = get<std::uint32_t>(in, path);
  if (version != kVersion) throw SnapshotError(path + ": unsupported version " + std::to_string(version));
  h.nx = get<std::uint32_t>(in, path);
  h.ny = get<std::uint32_t>(in, path);
  h.nz = get<std::uint32_t>(in, path);
  h.lx = get<double>(in, path);
  h.ly = get<double>(in, path);
  h.depth = get<double>(in, path);
  Eigen::ArrayXd values(Eigen::Index(h.nx) * h.ny * h.nz);
  if (!in.read(reinterpret_cast<char*>(values.data()),
               static_cast<std::streamsize>(values.size() * sizeof(double))))
    throw SnapshotError(path + ": truncated payload");
  return values;
}

}  // namespace

void write_snapshot(const std::string& path, const ScalarField& f) {
  const Grid& g = f.grid();
  write_raw(path, {std::uint32_t(g.nx), std::uint32_t(g.ny), std::uint32_t(g.nz), g.lx, g.ly, g.depth},
            f.values());
}

void write_snapshot(const std::string& path, const SurfaceField& s) {
  const Grid& g = s.grid();
  write_raw(path, {std::uint32_t(g.nx), std::uint32_t(g.ny), 1u, g.lx, g.ly, g.depth}, s.values());
}

ScalarField read_snapshot(const std::string& path, const Grid* time_grid) {
  Header h{};
  Eigen::ArrayXd values = read_raw(path, h);
  Grid g;
  if (time_grid) g = *time_grid;
  g.nx = int(h.nx);
  g.ny = int(h.ny);
  g.nz = int(h.nz);
  g.lx = h.lx;
  g.ly = h.ly;
  g.depth = h.depth;
  g.validate();
  return ScalarField(g, std::move(values));
}

SurfaceField read_surface_snapshot(const std::string& path, const Grid& grid) {
  Header h{};
  Eigen::ArrayXd values = read_raw(path, h);
  if (int(h.nx) != grid.nx || int(h.ny) != grid.ny || h.nz != 1u || h.lx != grid.lx || h.ly != grid.ly)
    throw SnapshotError(path + ": surface snapshot does not match grid");
  return SurfaceField(grid, std::move(values));
}

}  // namespace mhdlag
