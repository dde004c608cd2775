#include "pabf/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace pabf {

void deposit(BiasState& b, const std::array<double, 2>& z, const std::array<double, 2>& f)
{
  const auto [i, j] = bin_index(b.grid, z[0], z[1]);
  b.count(i, j) += 1;
  b.sum1(i, j) += f[0];
  b.sum2(i, j) += f[1];
}

VectorFieldd force_field(const BiasState& b)
{
  VectorFieldd out(b.grid);
  const int n1 = b.grid.n1(), n2 = b.grid.n2();
  for (int j = 0; j < n2; ++j) {
    for (int i = 0; i < n1; ++i) {
      const auto c = b.count(i, j);
      if (c == 0) continue;
      const double ramp = std::min(static_cast<double>(c) / b.n_min, 1.0);
      out.comp1(i, j) = ramp * b.sum1(i, j) / static_cast<double>(c);
      out.comp2(i, j) = ramp * b.sum2(i, j) / static_cast<double>(c);
    }
  }
  return out;
}

ScalarFieldd density_field(const BiasState& b, bool floored)
{
  ScalarFieldd out(b.grid);
  const std::int64_t total = b.total_count();
  if (total == 0) {
    out.values.setConstant(1.0 / (b.grid.L1() * b.grid.L2()));
    return out;
  }
  const double norm = 1.0 / (static_cast<double>(total) * b.grid.cell_area());
  out.values = b.count.cast<double>() * norm;
  if (floored) out.values = out.values.max(b.eps_density);
  return out;
}

void save_bias_state(std::ostream& os, const BiasState& b)
{
  os << "i,j,count,sum1,sum2\n";
  char buf[96];
  for (int j = 0; j < b.grid.n2(); ++j) {
    for (int i = 0; i < b.grid.n1(); ++i) {
      std::snprintf(buf, sizeof buf, "%d,%d,%lld,%.17g,%.17g\n", i, j,
                    static_cast<long long>(b.count(i, j)), b.sum1(i, j), b.sum2(i, j));
      os << buf;
    }
  }
}

BiasState load_bias_state(std::istream& is, int n_min, double eps_density)
{
  std::string line;
  if (!std::getline(is, line) || line != "i,j,count,sum1,sum2")
    throw std::runtime_error("bias state: bad or missing CSV header");

  struct Row {
    int i, j;
    long long c;
    double s1, s2;
  };
  std::vector<Row> rows;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    Row r{};
    if (std::sscanf(line.c_str(), "%d,%d,%lld,%lg,%lg", &r.i, &r.j, &r.c, &r.s1, &r.s2) != 5)
      throw std::runtime_error("bias state: malformed row: " + line);
    rows.push_back(r);
  }
  int n1 = 0, n2 = 0;
  for (const auto& r : rows) {
    n1 = std::max(n1, r.i + 1);
    n2 = std::max(n2, r.j + 1);
  }
  if (static_cast<std::size_t>(n1) * n2 != rows.size())
    throw std::runtime_error("bias state: row count does not match grid shape");

  BiasState b(RCGrid(n1, n2), n_min, eps_density);
  for (const auto& r : rows) {
    b.count(r.i, r.j) = r.c;
    b.sum1(r.i, r.j) = r.s1;
    b.sum2(r.i, r.j) = r.s2;
  }
  return b;
}

}  // namespace pabf
