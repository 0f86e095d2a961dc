#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "dnls/errors.hpp"
#include "dnls/field_io.hpp"

using namespace dnls;

TEST_CASE("snapshot round trip is bit exact") {
  const GridSpec g(7.25, 32);
  ComplexVector v(g.size());
  for (std::size_t j = 0; j < g.size(); ++j) v[j] = {std::sin(0.1 * j), 1.0 / (1.0 + j)};
  const ComplexField u(g, 3.5, v);
  std::stringstream ss;
  write_snapshot(ss, u);
  const ComplexField w = read_snapshot(ss);
  CHECK(w.grid() == g);
  CHECK(w.time() == 3.5);
  for (std::size_t j = 0; j < g.size(); ++j) CHECK(w[j] == u[j]);
}

TEST_CASE("snapshot layout") {
  const GridSpec g(1.0, 8);
  const ComplexField u(g, 0.0, ComplexVector(8, Complex{1.0, -2.0}));
  std::stringstream ss;
  write_snapshot(ss, u);
  const std::string bytes = ss.str();
  CHECK(bytes.size() == 4 + 4 + 4 + 8 + 8 + 8 * 16);
  CHECK(bytes.substr(0, 4) == "DNLS");
  CHECK(static_cast<unsigned char>(bytes[4]) == kSnapshotVersion);
  CHECK(static_cast<unsigned char>(bytes[8]) == 8);
}

TEST_CASE("corrupt snapshots are rejected") {
  std::stringstream bad("XXXX");
  CHECK_THROWS_AS(read_snapshot(bad), Error);
  const GridSpec g(1.0, 8);
  std::stringstream ss;
  write_snapshot(ss, ComplexField::zeros(g));
  std::string truncated = ss.str().substr(0, 60);
  std::stringstream t(truncated);
  CHECK_THROWS_AS(read_snapshot(t), Error);
}

TEST_CASE("file variant") {
  const auto path = std::filesystem::temp_directory_path() / "dnls_snapshot_test.bin";
  const GridSpec g(2.0, 16);
  const ComplexField u(g, 1.0, ComplexVector(16, Complex{0.25, 0.5}));
  write_snapshot(path, u);
  const ComplexField w = read_snapshot(path);
  CHECK(w[5] == u[5]);
  std::filesystem::remove(path);
  CHECK_THROWS_AS(read_snapshot(path), Error);
}
