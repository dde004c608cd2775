#include "pabf/field_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace pabf {

std::string format_double(double x)
{
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

namespace {

std::ofstream open_out(const std::filesystem::path& path)
{
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open for writing: " + path.string());
  return os;
}

std::ifstream open_in(const std::filesystem::path& path)
{
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open for reading: " + path.string());
  return is;
}

struct ParsedRows {
  int n1 = 0, n2 = 0;
  double L1 = 0.0, L2 = 0.0;
  std::vector<std::vector<double>> cols;  // value columns in row order
};

// Shared reader: validates header, storage order and grid geometry.
ParsedRows read_rows(std::istream& is, const std::string& expected_header, int n_values)
{
  std::string line;
  if (!std::getline(is, line)) throw std::runtime_error("field CSV: empty input");
  if (line != expected_header)
    throw std::runtime_error("field CSV: expected header '" + expected_header + "', got '" +
                             line + "'");

  struct Row {
    int i, j;
    double z1, z2;
    double v[2];
  };
  std::vector<Row> rows;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    Row r{};
    int got = 0;
    if (n_values == 1)
      got = std::sscanf(line.c_str(), "%d,%d,%lg,%lg,%lg", &r.i, &r.j, &r.z1, &r.z2, &r.v[0]);
    else
      got = std::sscanf(line.c_str(), "%d,%d,%lg,%lg,%lg,%lg", &r.i, &r.j, &r.z1, &r.z2, &r.v[0],
                        &r.v[1]);
    if (got != 4 + n_values) throw std::runtime_error("field CSV: malformed row: " + line);
    rows.push_back(r);
  }
  if (rows.empty()) throw std::runtime_error("field CSV: no data rows");

  ParsedRows out;
  for (const auto& r : rows) {
    out.n1 = std::max(out.n1, r.i + 1);
    out.n2 = std::max(out.n2, r.j + 1);
  }
  if (static_cast<std::size_t>(out.n1) * out.n2 != rows.size())
    throw std::runtime_error("field CSV: row count does not match grid shape");

  // infer axis lengths from the node coordinates of the second row on
  // each axis (node k sits at k*h)
  std::size_t k = 0;
  for (int j = 0; j < out.n2; ++j) {
    for (int i = 0; i < out.n1; ++i, ++k) {
      const Row& r = rows[k];
      if (r.i != i || r.j != j)
        throw std::runtime_error("field CSV: rows out of storage order (axis-1 fastest)");
      if (i == 1 && j == 0) out.L1 = r.z1 * out.n1;
      if (i == 0 && j == 1) out.L2 = r.z2 * out.n2;
    }
  }
  if (!(out.L1 > 0.0) || !(out.L2 > 0.0))
    throw std::runtime_error("field CSV: could not infer axis lengths from coordinates");

  out.cols.assign(n_values, std::vector<double>(rows.size()));
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (int v = 0; v < n_values; ++v) out.cols[v][r] = rows[r].v[v];
  return out;
}

}  // namespace

void write_field(std::ostream& os, const ScalarFieldd& f)
{
  const RCGrid& g = f.grid;
  os << "i,j,z1,z2,value\n";
  for (int j = 0; j < g.n2(); ++j)
    for (int i = 0; i < g.n1(); ++i)
      os << i << ',' << j << ',' << format_double(g.node1(i)) << ',' << format_double(g.node2(j))
         << ',' << format_double(f.values(i, j)) << '\n';
}

void write_field(std::ostream& os, const VectorFieldd& v)
{
  const RCGrid& g = v.grid;
  os << "i,j,z1,z2,v1,v2\n";
  for (int j = 0; j < g.n2(); ++j)
    for (int i = 0; i < g.n1(); ++i)
      os << i << ',' << j << ',' << format_double(g.node1(i)) << ',' << format_double(g.node2(j))
         << ',' << format_double(v.comp1(i, j)) << ',' << format_double(v.comp2(i, j)) << '\n';
}

void write_field(const std::filesystem::path& path, const ScalarFieldd& f)
{
  auto os = open_out(path);
  write_field(os, f);
}

void write_field(const std::filesystem::path& path, const VectorFieldd& v)
{
  auto os = open_out(path);
  write_field(os, v);
}

ScalarFieldd read_scalar_field(std::istream& is)
{
  ParsedRows p = read_rows(is, "i,j,z1,z2,value", 1);
  ScalarFieldd f(RCGrid(p.n1, p.n2, p.L1, p.L2));
  std::size_t k = 0;
  for (int j = 0; j < p.n2; ++j)
    for (int i = 0; i < p.n1; ++i, ++k) f.values(i, j) = p.cols[0][k];
  return f;
}

VectorFieldd read_vector_field(std::istream& is)
{
  ParsedRows p = read_rows(is, "i,j,z1,z2,v1,v2", 2);
  VectorFieldd v(RCGrid(p.n1, p.n2, p.L1, p.L2));
  std::size_t k = 0;
  for (int j = 0; j < p.n2; ++j)
    for (int i = 0; i < p.n1; ++i, ++k) {
      v.comp1(i, j) = p.cols[0][k];
      v.comp2(i, j) = p.cols[1][k];
    }
  return v;
}

ScalarFieldd read_scalar_field(const std::filesystem::path& path)
{
  auto is = open_in(path);
  return read_scalar_field(is);
}

VectorFieldd read_vector_field(const std::filesystem::path& path)
{
  auto is = open_in(path);
  return read_vector_field(is);
}

void write_marginals(std::ostream& os, const RCGrid& g, const Marginals& m)
{
  os << "axis,index,z,value\n";
  for (int i = 0; i < g.n1(); ++i)
    os << "1," << i << ',' << format_double(g.node1(i)) << ',' << format_double(m.m1[i]) << '\n';
  for (int j = 0; j < g.n2(); ++j)
    os << "2," << j << ',' << format_double(g.node2(j)) << ',' << format_double(m.m2[j]) << '\n';
}

void write_marginals(const std::filesystem::path& path, const RCGrid& g, const Marginals& m)
{
  auto os = open_out(path);
  write_marginals(os, g, m);
}

}  // namespace pabf
