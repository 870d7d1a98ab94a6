#include "lmcf/snapshot.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace lmcf {

namespace {

using nlohmann::json;

json header_for(const Grid& grid, const SymMat& background, double time, double offset) {
  json h;
  h["n"] = grid.dim();
  json points = json::array();
  json lengths = json::array();
  for (int a = 0; a < grid.dim(); ++a) {
    points.push_back(grid.points(a));
    lengths.push_back(grid.length(a));
  }
  h["N"] = points;
  h["lengths"] = lengths;
  h["background"] = background.row_major();
  h["time"] = time;
  h["offset"] = offset;
  return h;
}

void write_rows(std::ostream& out, const Grid& grid, std::span<const double> values) {
  const std::size_t row = grid.points(grid.dim() - 1);
  std::string line;
  for (std::size_t start = 0; start < values.size(); start += row) {
    line.clear();
    for (std::size_t k = 0; k < row; ++k) {
      if (k) line += ',';
      line += format_real(values[start + k]);
    }
    out << line << '\n';
  }
}

std::vector<double> read_values(std::istream& in, std::size_t count) {
  std::vector<double> values;
  values.reserve(count);
  std::string line;
  while (values.size() < count && std::getline(in, line)) {
    std::size_t pos = 0;
    while (pos < line.size()) {
      std::size_t next = line.find(',', pos);
      if (next == std::string::npos) next = line.size();
      const std::string token = line.substr(pos, next - pos);
      if (token.find_first_not_of(" \t\r") != std::string::npos) {
        try {
          values.push_back(std::stod(token));
        } catch (const std::exception&) {
          throw std::runtime_error("snapshot: bad value '" + token + "'");
        }
      }
      pos = next + 1;
    }
  }
  if (values.size() != count) {
    throw std::runtime_error("snapshot: expected " + std::to_string(count) + " values, found " +
                             std::to_string(values.size()));
  }
  return values;
}

}  // namespace

std::string format_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_snapshot(std::ostream& out, const ScalarField& field, double time, double offset) {
  out << header_for(field.grid(), field.background(), time, offset).dump() << '\n';
  write_rows(out, field.grid(), field.values());
}

void write_snapshot(std::ostream& out, const VectorField& field, double time) {
  json h = header_for(field.grid(), field.background(), time, 0.0);
  h["kind"] = "vector";
  out << h.dump() << '\n';
  for (int a = 0; a < field.components(); ++a) write_rows(out, field.grid(), field.component(a));
}

void write_snapshot(const std::filesystem::path& path, const ScalarField& field, double time,
                    double offset) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write snapshot " + path.string());
  write_snapshot(out, field, time, offset);
}

void write_snapshot(const std::filesystem::path& path, const VectorField& field, double time) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write snapshot " + path.string());
  write_snapshot(out, field, time);
}

Snapshot read_snapshot(std::istream& in) {
  std::string first;
  if (!std::getline(in, first)) throw std::runtime_error("snapshot: missing header");
  json h;
  try {
    h = json::parse(first);
  } catch (const json::exception& e) {
    throw std::runtime_error(std::string("snapshot: bad header: ") + e.what());
  }
  try {
    const int n = h.at("n").get<int>();
    const auto points = h.at("N").get<std::vector<std::size_t>>();
    const auto lengths = h.at("lengths").get<std::vector<double>>();
    const auto bg = h.at("background").get<std::vector<double>>();
    Grid grid(n, points, lengths);
    const SymMat background = SymMat::from_row_major(n, bg);
    Snapshot snap;
    snap.time = h.at("time").get<double>();
    snap.offset = h.at("offset").get<double>();
    if (h.value("kind", std::string("scalar")) == "vector") {
      std::vector<std::vector<double>> comps;
      for (int a = 0; a < n; ++a) comps.push_back(read_values(in, grid.size()));
      snap.vector.emplace(grid, background, std::move(comps));
    } else {
      // Stored values are already zero-mean; re-centring would perturb the last bits.
      snap.scalar.emplace(grid, background);
      snap.scalar->mutable_values() = read_values(in, grid.size());
    }
    return snap;
  } catch (const json::exception& e) {
    throw std::runtime_error(std::string("snapshot: bad header field: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw std::runtime_error(std::string("snapshot: ") + e.what());
  }
}

Snapshot read_snapshot(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open snapshot " + path.string());
  return read_snapshot(in);
}

}  // namespace lmcf
