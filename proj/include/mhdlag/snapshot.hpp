#pragma once

// Binary field snapshots.
//
// Layout (little-endian):
//   char[4]  magic "MHDF"
//   u32      version (1)
//   u32      nx, ny, nz
//   f64      lx, ly, depth
//   f64[]    payload, nx * ny * nz values in (i, j, k) order, k fastest
//
// One scalar field per file. Surface fields are written with nz = 1.

#include "mhdlag/fields.hpp"

#include <string>

namespace mhdlag {

class SnapshotError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

void write_snapshot(const std::string& path, const ScalarField& f);
void write_snapshot(const std::string& path, const SurfaceField& s);

/// Reads a volume snapshot. Time stepping fields of the returned grid
/// (dt, nt) are copied from `time_grid` when given.
ScalarField read_snapshot(const std::string& path, const Grid* time_grid = nullptr);
SurfaceField read_surface_snapshot(const std::string& path, const Grid& grid);

}  // namespace mhdlag
