#pragma once

#include <filesystem>
#include <iosfwd>

#include "necklab/grid.hpp"

namespace necklab {

// Text format, version 1:
//
//   necklab-field 1
//   grid <t_min> <t_max> <n_t> <n_th>
//   target <target descriptor as one-line JSON>
//   dim <K>
//   <n_t·n_th lines of K values, row-major: t outer, θ inner>
//
// Reals are written with 17 significant digits so a round trip is exact.

void write_field(std::ostream& os, const MapField& f);
MapField read_field(std::istream& is);

void save_field(const std::filesystem::path& path, const MapField& f);
MapField load_field(const std::filesystem::path& path);

}  // namespace necklab
