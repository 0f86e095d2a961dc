#pragma once

// Binary field snapshots.
//
// Layout (all little-endian):
//   char[4]  magic "DNLS"
//   u32      version (kSnapshotVersion)
//   u32      n_points
//   f64      half_width
//   f64      time
//   n_points x (f64 re, f64 im)

#include <cstdint>
#include <filesystem>
#include <iosfwd>

#include "dnls/spectral_grid.hpp"

namespace dnls {

inline constexpr std::uint32_t kSnapshotVersion = 1;

void write_snapshot(std::ostream& os, const ComplexField& field);
ComplexField read_snapshot(std::istream& is);

void write_snapshot(const std::filesystem::path& path, const ComplexField& field);
ComplexField read_snapshot(const std::filesystem::path& path);

}  // namespace dnls
