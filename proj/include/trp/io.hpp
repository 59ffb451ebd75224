#ifndef TRP_IO_HPP
#define TRP_IO_HPP

// Run configuration, point JSON, trajectory and profile CSV.
//
// Doubles are written with 17 significant digits ("%.17g"), so every value
// survives a write/read cycle exactly. Complex numbers are [re, im] pairs.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "trp/actionvars.hpp"
#include "trp/error.hpp"
#include "trp/flow.hpp"
#include "trp/mat3.hpp"
#include "trp/orbits.hpp"

namespace trp::io {

using nlohmann::json;

inline std::string fmt(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

// JSON has no non-finite numbers.
inline std::string fmt_json(double x) { return std::isfinite(x) ? fmt(x) : "null"; }

inline std::string fmt_json(cplx c) { return "[" + fmt_json(c.real()) + ", " + fmt_json(c.imag()) + "]"; }

inline std::string quoted(const std::string& s) { return json(s).dump(); }

// ---------------------------------------------------------------------------
// Run configuration

struct RunConfig {
  Spectrum3 lambda{{1.0, 0.0, -1.0}};
  Spectrum3 mu{{1.0, 0.0, -1.0}};
  Spectrum3 nu{{1.0, 0.0, -1.0}};
  std::uint64_t seed = 0;
  double tol_moment = 1e-10;
  double tol_ode = 1e-10;
  double tol_return = 1e-8;
  int n_samples = 200;
  double t_max_periods = 50.0;

  OrbitSpec spec() const { return {lambda, mu, nu}; }

  LoopSettings loop() const { return {tol_return, tol_ode, t_max_periods}; }

  ProfileSettings profile() const { return {tol_moment, loop()}; }
};

namespace detail {

inline Spectrum3 parse_spectrum(const json& j, const char* name) {
  if (!j.is_array() || j.size() != 3)
    throw Error(ErrorKind::InputError, std::string(name) + " must be an array of 3 numbers");
  Real3 v{};
  for (int k = 0; k < 3; ++k) {
    if (!j[k].is_number()) throw Error(ErrorKind::InputError, std::string(name) + " entries must be numbers");
    v[k] = j[k].get<double>();
  }
  if (!(v[0] >= v[1] && v[1] >= v[2]))
    throw Error(ErrorKind::InputError, std::string(name) + " must be sorted descending");
  if (std::abs(v[0] + v[1] + v[2]) > 1e-12)
    throw Error(ErrorKind::InputError, std::string(name) + " must sum to zero");
  return Spectrum3(v);
}

inline double positive(const json& j, const char* name) {
  if (!j.is_number()) throw Error(ErrorKind::InputError, std::string(name) + " must be a number");
  const double x = j.get<double>();
  if (!(x > 0.0) || !std::isfinite(x)) throw Error(ErrorKind::InputError, std::string(name) + " must be positive");
  return x;
}

inline json parse_json(const std::string& text, const char* what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::InputError, std::string(what) + ": " + e.what());
  }
}

}  // namespace detail

/// Parses a config object. Absent keys keep their defaults; unknown keys are
/// rejected so that misspelt tolerances do not pass silently.
inline RunConfig parse_config(const std::string& text) {
  const json j = detail::parse_json(text, "config");
  if (!j.is_object()) throw Error(ErrorKind::InputError, "config must be a JSON object");
  RunConfig c;
  for (const auto& [key, val] : j.items()) {
    if (key == "lambda") c.lambda = detail::parse_spectrum(val, "lambda");
    else if (key == "mu") c.mu = detail::parse_spectrum(val, "mu");
    else if (key == "nu") c.nu = detail::parse_spectrum(val, "nu");
    else if (key == "seed") {
      if (!val.is_number_unsigned()) throw Error(ErrorKind::InputError, "seed must be an unsigned integer");
      c.seed = val.get<std::uint64_t>();
    } else if (key == "tol_moment") c.tol_moment = detail::positive(val, "tol_moment");
    else if (key == "tol_ode") c.tol_ode = detail::positive(val, "tol_ode");
    else if (key == "tol_return") c.tol_return = detail::positive(val, "tol_return");
    else if (key == "t_max_periods") c.t_max_periods = detail::positive(val, "t_max_periods");
    else if (key == "n_samples") {
      if (!val.is_number_integer() || val.get<long long>() < 0 || val.get<long long>() > 1000000)
        throw Error(ErrorKind::InputError, "n_samples must be a non-negative integer");
      c.n_samples = val.get<int>();
    } else {
      throw Error(ErrorKind::InputError, "unknown config key '" + key + "'");
    }
  }
  return c;
}

// ---------------------------------------------------------------------------
// Point JSON

namespace detail {

inline std::string matrix_json(const Complex3x3& m) {
  std::string s = "[";
  for (int r = 0; r < 3; ++r) {
    s += r ? ", [" : "[";
    for (int c = 0; c < 3; ++c) s += (c ? ", " : "") + fmt_json(m(r, c));
    s += "]";
  }
  return s + "]";
}

inline std::string real3_json(const Real3& v) {
  return "[" + fmt_json(v[0]) + ", " + fmt_json(v[1]) + ", " + fmt_json(v[2]) + "]";
}

inline Complex3x3 parse_matrix(const json& j, const char* name) {
  const std::string err = std::string(name) + " must be a 3x3 array of [re, im] pairs";
  if (!j.is_array() || j.size() != 3) throw Error(ErrorKind::InputError, err);
  Complex3x3 m;
  for (int r = 0; r < 3; ++r) {
    if (!j[r].is_array() || j[r].size() != 3) throw Error(ErrorKind::InputError, err);
    for (int c = 0; c < 3; ++c) {
      const json& e = j[r][c];
      if (!e.is_array() || e.size() != 2 || !e[0].is_number() || !e[1].is_number())
        throw Error(ErrorKind::InputError, err);
      m(r, c) = cplx(e[0].get<double>(), e[1].get<double>());
    }
  }
  return m;
}

}  // namespace detail

inline std::string point_json(const ReducedPoint& p) {
  std::string s = "{\n";
  s += "  \"lambda\": " + detail::real3_json(p.spec.lambda.values()) + ",\n";
  s += "  \"mu\": " + detail::real3_json(p.spec.mu.values()) + ",\n";
  s += "  \"nu\": " + detail::real3_json(p.spec.nu.values()) + ",\n";
  s += "  \"Y\": " + detail::matrix_json(p.Y.mat()) + ",\n";
  s += "  \"Z\": " + detail::matrix_json(p.Z.mat()) + ",\n";
  s += "  \"moment_residual\": " + fmt_json(p.moment_residual) + ",\n";
  s += "  \"seed\": " + std::to_string(p.seed) + "\n}\n";
  return s;
}

/// With validate, Y and Z must lie in su(3) within the structural
/// tolerance; without it a damaged point is loaded as is, for diagnosis.
inline ReducedPoint parse_point(const std::string& text, bool validate = true) {
  const json j = detail::parse_json(text, "point");
  if (!j.is_object()) throw Error(ErrorKind::InputError, "point must be a JSON object");
  for (const char* key : {"lambda", "mu", "nu", "Y", "Z", "moment_residual", "seed"})
    if (!j.contains(key)) throw Error(ErrorKind::InputError, std::string("point is missing '") + key + "'");
  ReducedPoint p;
  p.spec = {detail::parse_spectrum(j["lambda"], "lambda"), detail::parse_spectrum(j["mu"], "mu"),
            detail::parse_spectrum(j["nu"], "nu")};
  const Complex3x3 y = detail::parse_matrix(j["Y"], "Y");
  const Complex3x3 z = detail::parse_matrix(j["Z"], "Z");
  p.Y = validate ? AntiHermitian3(y) : AntiHermitian3::unchecked(y);
  p.Z = validate ? AntiHermitian3(z) : AntiHermitian3::unchecked(z);
  if (!j["moment_residual"].is_number()) throw Error(ErrorKind::InputError, "moment_residual must be a number");
  p.moment_residual = j["moment_residual"].get<double>();
  if (!j["seed"].is_number_unsigned()) throw Error(ErrorKind::InputError, "seed must be an unsigned integer");
  p.seed = j["seed"].get<std::uint64_t>();
  return p;
}

// ---------------------------------------------------------------------------
// CSV

inline const std::vector<std::string>& trajectory_columns() {
  static const std::vector<std::string> c{"t",        "H",        "z0_re",          "z0_im",
                                          "eta0_re",  "eta0_im",  "zeta0_re",       "zeta0_im",
                                          "spectrum_drift", "casimir_drift", "H_drift"};
  return c;
}

inline const std::vector<std::string>& profile_columns() {
  static const std::vector<std::string> c{"sample_id", "H", "T", "F", "imag_residual"};
  return c;
}

inline std::string csv_header(const std::vector<std::string>& cols) {
  std::string s;
  for (std::size_t k = 0; k < cols.size(); ++k) s += (k ? "," : "") + cols[k];
  return s + "\n";
}

/// One row per recorded step; the divisor track must be filled.
inline std::string trajectory_csv(const FlowTrajectory& tr) {
  std::string s = csv_header(trajectory_columns());
  for (std::size_t k = 0; k < tr.times.size(); ++k) {
    const auto& d = tr.divisor_track.at(k);
    const double H = charpoly(tr.points[k]).H;
    const auto& dr = tr.drift[k];
    for (double x : {tr.times[k], H, d.z0.real(), d.z0.imag(), d.eta0.real(), d.eta0.imag(), d.zeta0.real(),
                     d.zeta0.imag(), dr.spectrum_drift, dr.casimir_drift, dr.H_drift})
      s += fmt(x) + ",";
    s.back() = '\n';
  }
  return s;
}

inline std::string profile_csv(const ActionProfile& prof) {
  std::string s = csv_header(profile_columns());
  for (const auto& r : prof.rows)
    s += std::to_string(r.sample_id) + "," + fmt(r.H) + "," + fmt(r.T) + "," + fmt(r.F) + "," +
         fmt(r.imag_residual) + "\n";
  return s;
}

inline std::string profile_sidecar_json(const ActionProfile& prof) {
  std::string s = "{\n";
  s += "  \"H_bound\": " + fmt_json(prof.H_bound) + ",\n";
  s += "  \"c\": " + fmt_json(prof.c) + ",\n";
  s += "  \"kappa\": " + fmt_json(kKappa) + ",\n";
  s += "  \"n_failed\": " + std::to_string(prof.n_failed) + ",\n";
  s += "  \"failure_reasons\": {";
  bool first = true;
  for (const auto& [name, count] : prof.failure_reasons) {
    s += (first ? "" : ", ") + quoted(name) + ": " + std::to_string(count);
    first = false;
  }
  return s + "}\n}\n";
}

/// Strict reader: the header must equal `columns` exactly, every row must
/// have the same number of fields, and every field must parse completely as
/// a number.
inline std::vector<std::vector<double>> read_csv_strict(const std::string& text,
                                                        const std::vector<std::string>& columns) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line + "\n" != csv_header(columns))
    throw Error(ErrorKind::InputError, "CSV header does not match the schema");
  std::vector<std::vector<double>> rows;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    std::vector<double> row;
    std::size_t start = 0;
    while (true) {
      const std::size_t end = line.find(',', start);
      const std::string field = line.substr(start, end == std::string::npos ? std::string::npos : end - start);
      std::size_t used = 0;
      double x = 0.0;
      try {
        x = std::stod(field, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (field.empty() || used != field.size())
        throw Error(ErrorKind::InputError, "CSV line " + std::to_string(line_no) + ": bad field '" + field + "'");
      row.push_back(x);
      if (end == std::string::npos) break;
      start = end + 1;
    }
    if (row.size() != columns.size())
      throw Error(ErrorKind::InputError, "CSV line " + std::to_string(line_no) + ": wrong field count");
    rows.push_back(std::move(row));
  }
  if (!text.empty() && text.back() != '\n') throw Error(ErrorKind::InputError, "CSV must end with a newline");
  return rows;
}

// ---------------------------------------------------------------------------
// Files

inline std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorKind::InputError, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorKind::InputError, "cannot write '" + path + "'");
  f << content;
  if (!f) throw Error(ErrorKind::InputError, "write to '" + path + "' failed");
}

}  // namespace trp::io

#endif  // TRP_IO_HPP
