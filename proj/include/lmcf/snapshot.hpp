#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include "lmcf/grid.hpp"

namespace lmcf {

/// Snapshot file: one JSON header line
///   {"n", "N", "lengths", "background" (row-major), "time", "offset"}
/// followed by CSV rows of the periodic part in row-major order, one row per
/// line along the last axis, 17 significant digits. Vector fields add
/// "kind": "vector" to the header and write one block of rows per component.
struct Snapshot {
  std::optional<ScalarField> scalar;
  std::optional<VectorField> vector;
  double time = 0.0;
  double offset = 0.0;

  const Grid& grid() const { return scalar ? scalar->grid() : vector->grid(); }
};

void write_snapshot(std::ostream& out, const ScalarField& field, double time, double offset);
void write_snapshot(std::ostream& out, const VectorField& field, double time);
void write_snapshot(const std::filesystem::path& path, const ScalarField& field, double time,
                    double offset);
void write_snapshot(const std::filesystem::path& path, const VectorField& field, double time);

/// Throws std::runtime_error on malformed input.
Snapshot read_snapshot(std::istream& in);
Snapshot read_snapshot(const std::filesystem::path& path);

/// printf("%.17g").
std::string format_real(double v);

}  // namespace lmcf
