#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "pabf/diagnostics.hpp"
#include "pabf/grid.hpp"

// Grid field dump format: CSV with header `i,j,z1,z2,value` (scalar) or
// `i,j,z1,z2,v1,v2` (vector), one row per node in storage order (axis-1
// fastest), 17 significant digits.

namespace pabf {

void write_field(std::ostream& os, const ScalarFieldd& f);
void write_field(std::ostream& os, const VectorFieldd& v);
void write_field(const std::filesystem::path& path, const ScalarFieldd& f);
void write_field(const std::filesystem::path& path, const VectorFieldd& v);

// Readers reconstruct the grid from the index/coordinate columns and
// validate the row order.
ScalarFieldd read_scalar_field(std::istream& is);
VectorFieldd read_vector_field(std::istream& is);
ScalarFieldd read_scalar_field(const std::filesystem::path& path);
VectorFieldd read_vector_field(const std::filesystem::path& path);

// Marginal CSV `axis,index,z,value` with both axes stacked.
void write_marginals(std::ostream& os, const RCGrid& g, const Marginals& m);
void write_marginals(const std::filesystem::path& path, const RCGrid& g, const Marginals& m);

// 17-significant-digit formatting used by every CSV writer (round-trips
// doubles exactly).
std::string format_double(double x);

}  // namespace pabf
