#include <CLI11.hpp>

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include "trp/actionvars.hpp"
#include "trp/checks.hpp"
#include "trp/divisor.hpp"
#include "trp/error.hpp"
#include "trp/flow.hpp"
#include "trp/io.hpp"
#include "trp/orbits.hpp"

namespace {

enum Exit : int { kOk = 0, kInput = 1, kInfeasible = 2, kNoReturn = 3, kInvariant = 4 };

int exit_code(trp::ErrorKind k) {
  using trp::ErrorKind;
  switch (k) {
    case ErrorKind::InputError:
    case ErrorKind::NotHermitian:
    case ErrorKind::NotUnitary: return kInput;
    case ErrorKind::Infeasible: return kInfeasible;
    case ErrorKind::NoReturn:
    case ErrorKind::DegenerateA:
    case ErrorKind::DivisorUndefined: return kNoReturn;
    default: return kInvariant;
  }
}

struct Args {
  std::string config;
  std::string input;
  std::string output;
  std::optional<std::uint64_t> seed;
};

trp::io::RunConfig load_config(const Args& a) {
  trp::io::RunConfig cfg = a.config.empty() ? trp::io::RunConfig{} : trp::io::parse_config(trp::io::read_file(a.config));
  if (a.seed) cfg.seed = *a.seed;
  return cfg;
}

trp::ReducedPoint load_point(const Args& a, bool validate = true) {
  if (a.input.empty()) throw trp::Error(trp::ErrorKind::InputError, "a point file is required (-i)");
  return trp::io::parse_point(trp::io::read_file(a.input), validate);
}

void emit(const Args& a, const std::string& text) {
  if (a.output.empty()) {
    std::cout << text;
  } else {
    trp::io::write_file(a.output, text);
  }
}

int cmd_sample(const Args& a) {
  const auto cfg = load_config(a);
  emit(a, trp::io::point_json(trp::solve_moment(cfg.spec(), cfg.seed, cfg.tol_moment)));
  return kOk;
}

int cmd_flow(const Args& a) {
  const auto cfg = load_config(a);
  const auto p = load_point(a);
  const double T = trp::detect_period(p, cfg.tol_return, cfg.loop().t_max(p), cfg.tol_ode);
  auto tr = trp::integrate(p, T, cfg.tol_ode);
  trp::attach_divisor_track(tr, p);
  emit(a, trp::io::trajectory_csv(tr));
  if (tr.failed()) {
    std::cerr << "trp: drift monitor above " << tr.alarm_threshold << "; trajectory flagged\n";
    return kInvariant;
  }
  return kOk;
}

int cmd_divisor(const Args& a) {
  const auto p = load_point(a);
  const auto sd = trp::charpoly(p);
  const auto d = trp::divisor_point(p);
  using trp::io::fmt_json;
  std::string s = "{\n";
  s += "  \"H\": " + fmt_json(sd.H) + ",\n";
  s += "  \"z0\": " + fmt_json(d.z0) + ",\n";
  s += "  \"eta0\": " + fmt_json(d.eta0) + ",\n";
  s += "  \"zeta0\": " + fmt_json(d.zeta0) + ",\n";
  s += "  \"column_used\": " + std::to_string(d.column_used) + ",\n";
  s += "  \"rho_residual\": " + fmt_json(d.rho_residual) + ",\n";
  s += "  \"cofactor_residual\": " + fmt_json(d.cofactor_residual) + ",\n";
  s += "  \"velocity\": " + fmt_json(trp::linearizing_velocity(sd, d)) + "\n}\n";
  emit(a, s);
  return kOk;
}

int cmd_profile(const Args& a) {
  if (a.output.empty()) throw trp::Error(trp::ErrorKind::InputError, "profile needs an output path (-o)");
  const auto cfg = load_config(a);
  const auto prof = trp::build_profile(cfg.spec(), cfg.n_samples, cfg.seed, cfg.profile());
  trp::io::write_file(a.output, trp::io::profile_csv(prof));
  trp::io::write_file(a.output + ".json", trp::io::profile_sidecar_json(prof));
  return kOk;
}

int cmd_check(const Args& a) {
  const auto cfg = load_config(a);
  std::optional<trp::ReducedPoint> injected;
  if (!a.input.empty()) injected = load_point(a, false);
  const auto rep = trp::run_checks(cfg, injected);
  emit(a, rep.json());
  for (const auto& [name, r] : rep.results())
    if (!r.pass()) std::cerr << "trp: invariant " << name << " violated (" << r.max_violation << " > " << r.threshold << ")\n";
  return rep.pass() ? kOk : kInvariant;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Triple reduced product of SU(3) orbits: sampling, flow, divisor, action profiles"};
  app.require_subcommand(1);
  Args args;
  auto add = [&](const char* name, const char* help, bool wants_input) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("-c,--config", args.config, "config JSON");
    if (wants_input) sub->add_option("-i,--input", args.input, "point JSON");
    sub->add_option("-o,--output", args.output, "output file (stdout when omitted)");
    sub->add_option("--seed", args.seed, "seed, overrides the config");
    return sub;
  };
  auto* sample = add("sample", "solve the moment map and write a point", false);
  auto* flow = add("flow", "integrate one period and write the trajectory CSV", true);
  auto* divisor = add("divisor", "divisor point and Darboux coordinates of a point", true);
  auto* profile = add("profile", "(H, T, F) profile CSV and JSON sidecar <out>.json", false);
  auto* check = add("check", "run the invariant suite; -i injects a point to be checked", true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kInput;
  }

  try {
    if (*sample) return cmd_sample(args);
    if (*flow) return cmd_flow(args);
    if (*divisor) return cmd_divisor(args);
    if (*profile) return cmd_profile(args);
    if (*check) return cmd_check(args);
  } catch (const trp::Error& e) {
    std::cerr << "trp: " << e.what() << "\n";
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "trp: " << e.what() << "\n";
    return kInput;
  }
  return kInput;
}
