#include "necklab/field_io.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>

#include "necklab/error.hpp"

namespace necklab {

namespace {

constexpr const char* kMagic = "necklab-field";
constexpr int kVersion = 1;

void expect_word(std::istream& is, const std::string& word) {
  std::string got;
  if (!(is >> got) || got != word) {
    throw Error(ErrorCode::IoError, "expected '" + word + "' in field file, got '" + got + "'");
  }
}

}  // namespace

void write_field(std::ostream& os, const MapField& f) {
  const auto& g = f.grid();
  os << std::setprecision(17);
  os << kMagic << ' ' << kVersion << '\n';
  os << "grid " << g.t_min << ' ' << g.t_max << ' ' << g.n_t << ' ' << g.n_th << '\n';
  os << "target " << f.target().descriptor().dump() << '\n';
  os << "dim " << f.dim() << '\n';
  for (int i = 0; i < g.n_t; ++i) {
    for (int j = 0; j < g.n_th; ++j) {
      const auto p = f.at(i, j);
      for (std::size_t k = 0; k < p.size(); ++k) os << (k ? " " : "") << p[k];
      os << '\n';
    }
  }
  if (!os) throw Error(ErrorCode::IoError, "failed to write field");
}

MapField read_field(std::istream& is) {
  expect_word(is, kMagic);
  int version = 0;
  if (!(is >> version) || version != kVersion) {
    throw Error(ErrorCode::IoError, "unsupported field file version");
  }
  expect_word(is, "grid");
  double t_min = 0, t_max = 0;
  int n_t = 0, n_th = 0;
  if (!(is >> t_min >> t_max >> n_t >> n_th)) throw Error(ErrorCode::IoError, "bad grid line");
  expect_word(is, "target");
  std::string line;
  std::getline(is, line);
  TargetManifold target = TargetManifold::unit_sphere(3);
  try {
    target = TargetManifold::from_descriptor(nlohmann::json::parse(line));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::IoError, std::string("bad target descriptor: ") + e.what());
  }
  expect_word(is, "dim");
  int dim = 0;
  if (!(is >> dim) || dim != target.ambient_dim()) {
    throw Error(ErrorCode::IoError, "dimension does not match target");
  }
  const auto grid = CylinderGrid::make(t_min, t_max, n_t, n_th);
  std::vector<double> values(grid.nodes() * dim);
  for (double& x : values) {
    if (!(is >> x)) throw Error(ErrorCode::IoError, "truncated field values");
  }
  return MapField(grid, target, std::move(values));
}

void save_field(const std::filesystem::path& path, const MapField& f) {
  std::ofstream os(path);
  if (!os) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  write_field(os, f);
}

MapField load_field(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  return read_field(is);
}

}  // namespace necklab
