#include "pabf/run_config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <sstream>

#include "pabf/errors.hpp"
#include "pabf/field_io.hpp"

namespace pabf {

namespace {

std::string trim(const std::string& s)
{
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void fail(int line, const std::string& key, const std::string& what)
{
  throw ConfigError("config line " + std::to_string(line) + ": " + what + " for key '" + key +
                    "'");
}

double parse_real(int line, const std::string& key, const std::string& v)
{
  char* end = nullptr;
  const double x = std::strtod(v.c_str(), &end);
  if (end != v.c_str() + v.size() || v.empty() || !std::isfinite(x))
    fail(line, key, "malformed real value '" + v + "'");
  return x;
}

long long parse_int(int line, const std::string& key, const std::string& v)
{
  char* end = nullptr;
  const long long x = std::strtoll(v.c_str(), &end, 10);
  if (end != v.c_str() + v.size() || v.empty())
    fail(line, key, "malformed integer value '" + v + "'");
  return x;
}

std::uint64_t parse_u64(int line, const std::string& key, const std::string& v)
{
  char* end = nullptr;
  const unsigned long long x = std::strtoull(v.c_str(), &end, 10);
  if (end != v.c_str() + v.size() || v.empty() || v.front() == '-')
    fail(line, key, "malformed unsigned integer value '" + v + "'");
  return x;
}

bool parse_bool(int line, const std::string& key, const std::string& v)
{
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  fail(line, key, "malformed boolean value '" + v + "'");
}

std::vector<double> parse_real_list(int line, const std::string& key, const std::string& v)
{
  std::vector<double> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_real(line, key, trim(item)));
  if (out.empty()) fail(line, key, "empty list");
  return out;
}

}  // namespace

std::vector<double> RunSpec::resolved_snapshot_times() const
{
  std::vector<double> times;
  const double end = t_end();
  if (schedule == SnapshotSchedule::List) {
    for (double t : snapshot_times)
      if (t <= end) times.push_back(t);
  } else {
    for (double t = snapshot_t0; t < end; t *= snapshot_growth) {
      times.push_back(t);
      if (times.size() > 10000) break;  // guard against growth ~ 1
    }
  }
  if (end > 0.0 && (times.empty() || times.back() < end)) times.push_back(end);
  return times;
}

void RunSpec::validate() const
{
  auto bad = [](const std::string& key, const std::string& what) {
    throw ConfigError("config: out-of-range value for key '" + key + "': " + what);
  };
  if (n1 < 4) bad("grid.n1", "need at least 4 nodes");
  if (n2 < 4) bad("grid.n2", "need at least 4 nodes");
  if (!(dt > 0.0)) bad("dynamics.dt", "must be positive");
  if (n_sweeps < 0) bad("dynamics.n_sweeps", "must be non-negative");
  if (k_sub < 1) bad("dynamics.k_sub", "must be at least 1");
  if (M < 1) bad("dynamics.M", "must be at least 1");
  if (n_min < 1) bad("estimator.n_min", "must be at least 1");
  if (!(eps_density > 0.0)) bad("estimator.eps_density", "must be positive");
  if (!(tol > 0.0)) bad("solver.tol", "must be positive");
  if (max_iter < 0) bad("solver.max_iter", "must be non-negative (0 = auto)");
  if (!(snapshot_t0 > 0.0)) bad("snapshots.t0", "must be positive");
  if (!(snapshot_growth > 1.0)) bad("snapshots.growth", "must exceed 1");
  if (schedule == SnapshotSchedule::List) {
    double prev = 0.0;
    for (double t : snapshot_times) {
      if (!(t > prev)) bad("snapshots.times", "must be positive and strictly increasing");
      prev = t;
    }
  }
  try {
    system.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
}

RunSpec parse_config(const std::string& text)
{
  struct Entry {
    int line;
    std::string key, value;
  };
  std::vector<Entry> entries;
  {
    std::stringstream ss(text);
    std::string raw;
    int line_no = 0;
    while (std::getline(ss, raw)) {
      ++line_no;
      const std::string line = trim(raw);
      if (line.empty() || line.front() == '#') continue;
      const auto eq = line.find('=');
      if (eq == std::string::npos)
        throw ConfigError("config line " + std::to_string(line_no) +
                          ": expected 'key = value', got '" + line + "'");
      entries.push_back({line_no, trim(line.substr(0, eq)), trim(line.substr(eq + 1))});
    }
  }

  RunSpec spec;
  // kind decides the system defaults; resolve it first
  for (const auto& e : entries) {
    if (e.key == "system.kind") {
      try {
        spec.system = system_kind_from_string(e.value) == SystemKind::Trimer
                          ? SystemSpec::trimer_defaults()
                          : SystemSpec::toy_defaults();
      } catch (const std::invalid_argument&) {
        fail(e.line, e.key, "unknown system kind '" + e.value + "'");
      }
    }
  }

  for (const auto& e : entries) {
    const int ln = e.line;
    const std::string& k = e.key;
    const std::string& v = e.value;
    if (k == "system.kind") {
      // handled above
    } else if (k == "system.N") {
      spec.system.N = static_cast<int>(parse_int(ln, k, v));
      if (spec.system.N < 2) fail(ln, k, "out-of-range value (need N >= 2)");
    } else if (k == "system.d") {
      spec.system.d = static_cast<int>(parse_int(ln, k, v));
      if (spec.system.d < 1 || spec.system.d > 2) fail(ln, k, "out-of-range value (d must be 1 or 2)");
    } else if (k == "system.box_length") {
      spec.system.box_length = parse_real(ln, k, v);
      if (!(spec.system.box_length > 0.0)) fail(ln, k, "out-of-range value (must be positive)");
    } else if (k == "system.beta") {
      spec.system.beta = parse_real(ln, k, v);
      if (!(spec.system.beta > 0.0)) fail(ln, k, "out-of-range value (must be positive)");
    } else if (k == "system.toy_w_amp") {
      spec.system.toy_w_amp = parse_real(ln, k, v);
    } else if (k == "system.toy_b") {
      spec.system.toy_b = parse_real(ln, k, v);
    } else if (k == "system.toy_solvent") {
      spec.system.toy_solvent = parse_bool(ln, k, v);
    } else if (k == "system.lj_epsilon") {
      spec.system.lj_epsilon = parse_real(ln, k, v);
      if (!(spec.system.lj_epsilon > 0.0)) fail(ln, k, "out-of-range value (must be positive)");
    } else if (k == "system.lj_sigma") {
      spec.system.lj_sigma = parse_real(ln, k, v);
      if (!(spec.system.lj_sigma > 0.0)) fail(ln, k, "out-of-range value (must be positive)");
    } else if (k == "system.lj_rcut_factor") {
      spec.system.lj_rcut_factor = parse_real(ln, k, v);
      if (!(spec.system.lj_rcut_factor > 1.0)) fail(ln, k, "out-of-range value (must exceed 1)");
    } else if (k == "system.lj_rmin_factor") {
      spec.system.lj_rmin_factor = parse_real(ln, k, v);
      if (!(spec.system.lj_rmin_factor > 0.0) || spec.system.lj_rmin_factor >= 1.0)
        fail(ln, k, "out-of-range value (must lie in (0,1))");
    } else if (k == "system.dw_height") {
      spec.system.dw_height = parse_real(ln, k, v);
      if (!(spec.system.dw_height > 0.0)) fail(ln, k, "out-of-range value (must be positive)");
    } else if (k == "system.dw_width") {
      spec.system.dw_width = parse_real(ln, k, v);
      if (!(spec.system.dw_width > 0.0)) fail(ln, k, "out-of-range value (must be positive)");
    } else if (k == "system.bond_r0") {
      spec.system.bond_r0 = parse_real(ln, k, v);
      if (spec.system.bond_r0 < 0.0) fail(ln, k, "out-of-range value (must be non-negative)");
    } else if (k == "system.angle_k") {
      spec.system.angle_k = parse_real(ln, k, v);
      if (spec.system.angle_k < 0.0) fail(ln, k, "out-of-range value (must be non-negative)");
    } else if (k == "system.xi_delta") {
      spec.system.xi_delta = parse_real(ln, k, v);
      if (!(spec.system.xi_delta > 0.0) || !(spec.system.xi_delta < 0.5))
        fail(ln, k, "out-of-range value (must lie in (0, 0.5))");
    } else if (k == "system.trimer_indices") {
      const auto list = parse_real_list(ln, k, v);
      if (list.size() != 3) fail(ln, k, "need exactly three indices");
      for (int t = 0; t < 3; ++t) {
        if (list[t] != std::floor(list[t]) || list[t] < 0)
          fail(ln, k, "indices must be non-negative integers");
        spec.system.trimer_indices[t] = static_cast<int>(list[t]);
      }
    } else if (k == "grid.n1") {
      spec.n1 = static_cast<int>(parse_int(ln, k, v));
      if (spec.n1 < 4) fail(ln, k, "out-of-range value (need at least 4 nodes)");
    } else if (k == "grid.n2") {
      spec.n2 = static_cast<int>(parse_int(ln, k, v));
      if (spec.n2 < 4) fail(ln, k, "out-of-range value (need at least 4 nodes)");
    } else if (k == "dynamics.dt") {
      spec.dt = parse_real(ln, k, v);
      if (!(spec.dt > 0.0)) fail(ln, k, "out-of-range value (must be positive)");
    } else if (k == "dynamics.n_sweeps") {
      spec.n_sweeps = parse_int(ln, k, v);
      if (spec.n_sweeps < 0) fail(ln, k, "out-of-range value (must be non-negative)");
    } else if (k == "dynamics.k_sub") {
      spec.k_sub = static_cast<int>(parse_int(ln, k, v));
      if (spec.k_sub < 1) fail(ln, k, "out-of-range value (must be at least 1)");
    } else if (k == "dynamics.M") {
      spec.M = static_cast<int>(parse_int(ln, k, v));
      if (spec.M < 1) fail(ln, k, "out-of-range value (must be at least 1)");
    } else if (k == "estimator.n_min") {
      spec.n_min = static_cast<int>(parse_int(ln, k, v));
      if (spec.n_min < 1) fail(ln, k, "out-of-range value (must be at least 1)");
    } else if (k == "estimator.eps_density") {
      spec.eps_density = parse_real(ln, k, v);
      if (!(spec.eps_density > 0.0)) fail(ln, k, "out-of-range value (must be positive)");
    } else if (k == "solver.tol") {
      spec.tol = parse_real(ln, k, v);
      if (!(spec.tol > 0.0)) fail(ln, k, "out-of-range value (must be positive)");
    } else if (k == "solver.max_iter") {
      spec.max_iter = static_cast<int>(parse_int(ln, k, v));
      if (spec.max_iter < 0) fail(ln, k, "out-of-range value (must be non-negative, 0 = auto)");
    } else if (k == "mode") {
      try {
        spec.mode = bias_mode_from_string(v);
      } catch (const std::invalid_argument&) {
        fail(ln, k, "unknown mode '" + v + "' (expected abf or pabf)");
      }
    } else if (k == "seed") {
      spec.seed = parse_u64(ln, k, v);
    } else if (k == "snapshots.schedule") {
      if (v == "geometric")
        spec.schedule = SnapshotSchedule::Geometric;
      else if (v == "list")
        spec.schedule = SnapshotSchedule::List;
      else
        fail(ln, k, "unknown schedule '" + v + "' (expected geometric or list)");
    } else if (k == "snapshots.t0") {
      spec.snapshot_t0 = parse_real(ln, k, v);
      if (!(spec.snapshot_t0 > 0.0)) fail(ln, k, "out-of-range value (must be positive)");
    } else if (k == "snapshots.growth") {
      spec.snapshot_growth = parse_real(ln, k, v);
      if (!(spec.snapshot_growth > 1.0)) fail(ln, k, "out-of-range value (must exceed 1)");
    } else if (k == "snapshots.times") {
      spec.snapshot_times = parse_real_list(ln, k, v);
    } else if (k == "output_dir") {
      if (v.empty()) fail(ln, k, "empty path");
      spec.output_dir = v;
    } else {
      throw ConfigError("config line " + std::to_string(ln) + ": unknown key '" + k + "'");
    }
  }

  spec.validate();
  return spec;
}

std::string serialize_config(const RunSpec& spec)
{
  std::ostringstream os;
  const SystemSpec& s = spec.system;
  os << "system.kind = " << to_string(s.kind) << '\n';
  os << "system.N = " << s.N << '\n';
  os << "system.d = " << s.d << '\n';
  os << "system.box_length = " << format_double(s.box_length) << '\n';
  os << "system.beta = " << format_double(s.beta) << '\n';
  if (s.kind == SystemKind::ToySeparable) {
    os << "system.toy_w_amp = " << format_double(s.toy_w_amp) << '\n';
    os << "system.toy_b = " << format_double(s.toy_b) << '\n';
    os << "system.toy_solvent = " << (s.toy_solvent ? "true" : "false") << '\n';
  } else {
    os << "system.lj_epsilon = " << format_double(s.lj_epsilon) << '\n';
    os << "system.lj_sigma = " << format_double(s.lj_sigma) << '\n';
    os << "system.lj_rcut_factor = " << format_double(s.lj_rcut_factor) << '\n';
    os << "system.lj_rmin_factor = " << format_double(s.lj_rmin_factor) << '\n';
    os << "system.dw_height = " << format_double(s.dw_height) << '\n';
    os << "system.dw_width = " << format_double(s.dw_width) << '\n';
    os << "system.bond_r0 = " << format_double(s.bond_r0) << '\n';
    os << "system.angle_k = " << format_double(s.angle_k) << '\n';
    os << "system.xi_delta = " << format_double(s.xi_delta) << '\n';
    os << "system.trimer_indices = " << s.trimer_indices[0] << ',' << s.trimer_indices[1] << ','
       << s.trimer_indices[2] << '\n';
  }
  os << "grid.n1 = " << spec.n1 << '\n';
  os << "grid.n2 = " << spec.n2 << '\n';
  os << "dynamics.dt = " << format_double(spec.dt) << '\n';
  os << "dynamics.n_sweeps = " << spec.n_sweeps << '\n';
  os << "dynamics.k_sub = " << spec.k_sub << '\n';
  os << "dynamics.M = " << spec.M << '\n';
  os << "estimator.n_min = " << spec.n_min << '\n';
  os << "estimator.eps_density = " << format_double(spec.eps_density) << '\n';
  os << "solver.tol = " << format_double(spec.tol) << '\n';
  os << "solver.max_iter = " << spec.max_iter << '\n';
  os << "mode = " << to_string(spec.mode) << '\n';
  os << "seed = " << spec.seed << '\n';
  if (spec.schedule == SnapshotSchedule::List) {
    os << "snapshots.schedule = list\n";
    os << "snapshots.times = ";
    for (std::size_t i = 0; i < spec.snapshot_times.size(); ++i)
      os << (i ? "," : "") << format_double(spec.snapshot_times[i]);
    os << '\n';
  } else {
    os << "snapshots.schedule = geometric\n";
    os << "snapshots.t0 = " << format_double(spec.snapshot_t0) << '\n';
    os << "snapshots.growth = " << format_double(spec.snapshot_growth) << '\n';
  }
  os << "output_dir = " << spec.output_dir << '\n';
  return os.str();
}

std::string to_string(BiasMode m) { return m == BiasMode::Abf ? "abf" : "pabf"; }

BiasMode bias_mode_from_string(const std::string& name)
{
  if (name == "abf") return BiasMode::Abf;
  if (name == "pabf") return BiasMode::Pabf;
  throw std::invalid_argument("unknown mode: " + name);
}

}  // namespace pabf
