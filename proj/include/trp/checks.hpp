#ifndef TRP_CHECKS_HPP
#define TRP_CHECKS_HPP

// The invariant suite run by `trp check`: every library identity evaluated
// on a handful of random points of the configured orbit triple, reported as
// name -> (max violation, threshold).

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "trp/actionvars.hpp"
#include "trp/divisor.hpp"
#include "trp/fixtures.hpp"
#include "trp/flow.hpp"
#include "trp/io.hpp"
#include "trp/orbits.hpp"
#include "trp/spectral.hpp"

namespace trp {

struct InvariantResult {
  double max_violation = 0.0;
  double threshold = 0.0;
  bool strict = false;  // pass requires max_violation < threshold
  int evaluations = 0;

  bool pass() const {
    if (std::isnan(max_violation)) return false;
    return strict ? max_violation < threshold : max_violation <= threshold;
  }
};

class CheckReport {
 public:
  void declare(const std::string& name, double threshold, bool strict = false) {
    auto& r = results_[name];
    r.threshold = threshold;
    r.strict = strict;
    r.max_violation = strict ? -std::numeric_limits<double>::infinity() : 0.0;
  }

  void record(const std::string& name, double value) {
    auto& r = results_.at(name);
    if (std::isnan(value) || std::isnan(r.max_violation)) {
      r.max_violation = std::numeric_limits<double>::quiet_NaN();
    } else {
      r.max_violation = std::max(r.max_violation, value);
    }
    ++r.evaluations;
  }

  void fail(const std::string& name) { record(name, std::numeric_limits<double>::infinity()); }

  bool pass() const {
    return std::all_of(results_.begin(), results_.end(), [](const auto& kv) { return kv.second.pass(); });
  }

  const std::map<std::string, InvariantResult>& results() const { return results_; }

  std::string json() const {
    std::string s = "{\n  \"pass\": ";
    s += pass() ? "true" : "false";
    s += ",\n  \"invariants\": {";
    bool first = true;
    for (const auto& [name, r] : results_) {
      s += first ? "\n" : ",\n";
      first = false;
      s += "    " + io::quoted(name) + ": {\"max_violation\": " + io::fmt_json(r.max_violation) +
           ", \"threshold\": " + io::fmt_json(r.threshold) + ", \"pass\": " + (r.pass() ? "true" : "false") + "}";
    }
    return s + "\n  }\n}\n";
  }

 private:
  std::map<std::string, InvariantResult> results_;
};

struct CheckSettings {
  int n_points = 12;
  int n_dynamic = 6;  // points that are also integrated
  double fd_step = 1e-5;
};

namespace detail {

inline double rel(cplx a, cplx b) { return std::abs(a - b) / (1.0 + std::abs(b)); }

// A point off su(3) has no real spectrum; its orbit invariants fail outright.
inline void check_point_static(CheckReport& rep, const ReducedPoint& p) {
  const double scale = std::max(1.0, std::max(max_abs(p.Y.mat()), max_abs(p.Z.mat())));
  for (const auto* m : {&p.Y.mat(), &p.Z.mat()})
    rep.record("structure.su3", std::max(antihermitian_residual(*m), std::abs(trace(*m))) / scale);
  try {
    rep.record("orbits.membership", orbit_membership_residual(p));
    rep.record("orbits.moment_residual", moment_residual(p.Y.mat(), p.Z.mat(), p.spec.lambda));
  } catch (const Error&) {
    rep.fail("orbits.membership");
    rep.fail("orbits.moment_residual");
  }
}

}  // namespace detail

/// Runs the suite on cfg's orbit triple. An injected point is checked for
/// membership and structure alongside the sampled ones.
inline CheckReport run_checks(const io::RunConfig& cfg, const std::optional<ReducedPoint>& injected = {},
                              const CheckSettings& set = {}) {
  CheckReport rep;
  const double inf = std::numeric_limits<double>::infinity();
  rep.declare("structure.su3", kTolStructural);
  rep.declare("orbits.membership", std::max(cfg.tol_moment, 1e-10));
  rep.declare("orbits.moment_residual", cfg.tol_moment);
  rep.declare("flow.rhs_forms", 1e-12);
  rep.declare("spectral.reality", 1e-10);
  rep.declare("spectral.H_trace_identity", 1e-10);
  rep.declare("spectral.casimirs_depend_on_orbits_only", 1e-9);
  rep.declare("spectral.H_interval", 1.0, true);
  rep.declare("spectral.real_branches_vs_eigensolver", 1e-10);
  rep.declare("spectral.discriminant_interior", 0.0, true);
  rep.declare("spectral.discriminant_boundary_fixture", 1e-10);
  rep.declare("boundary.H_at_interval_end", 1e-12);
  rep.declare("boundary.reduced_speed", 1e-9);
  rep.declare("divisor.rho_residual", 1e-8);
  rep.declare("divisor.cofactor_column", 1e-8);
  rep.declare("divisor.closed_form", 1e-9);
  rep.declare("gauge.invariance", 1e-7);
  rep.declare("flow.spectrum_drift", 1e-7);
  rep.declare("flow.casimir_drift", 1e-7);
  rep.declare("flow.H_drift", 1e-8);
  rep.declare("flow.drift_alarms", 0.0);
  rep.declare("flow.A_constant", 1e-12);
  rep.declare("flow.lax_consistency", 1e-6);
  rep.declare("flow.period_closure", 10.0 * cfg.tol_return);
  rep.declare("actionvars.kappa_modulus", 1e-6);
  rep.declare("actionvars.velocity_law", 1e-4);
  rep.declare("actionvars.hamilton_equations", 1e-4);
  rep.declare("actionvars.period_routes", 1e-4);
  rep.declare("actionvars.F_imaginary_part", 1e-6);
  rep.declare("harness.point_roundtrip", 0.0);
  rep.declare("errors", 0.0);

  if (injected) detail::check_point_static(rep, *injected);

  std::vector<ReducedPoint> pts;
  for (int i = 0; i < set.n_points; ++i) {
    try {
      pts.push_back(solve_moment(cfg.spec(), derive_seed(cfg.seed, static_cast<std::uint64_t>(i)), cfg.tol_moment));
    } catch (const Error&) {
      rep.fail("errors");
    }
  }

  std::optional<SpectralData> sd_first;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const auto& p = pts[i];
    detail::check_point_static(rep, p);
    const double nrm = 1.0 + frobenius_norm(p.Y.mat()) + frobenius_norm(p.Z.mat());
    rep.record("flow.rhs_forms", flow_form_residual(p.Y.mat(), p.Z.mat()) / (nrm * nrm * nrm));

    const SpectralData sd = charpoly(p);
    rep.record("spectral.reality", std::max(sd.Q1_imag_residual, sd.detL_real_residual));
    const Complex3x3 a = p.Y.mat() - p.Z.mat();
    rep.record("spectral.H_trace_identity", std::abs(-kI * trace(a * a * a) / 3.0 - sd.H) / (1.0 + std::abs(sd.H)));
    if (!sd_first) sd_first = sd;
    double spread = 0.0;
    for (int k = 0; k < 3; ++k) {
      spread = std::max(spread, std::abs(sd.Q0[k] - sd_first->Q0[k]));
      spread = std::max(spread, std::abs(sd.Q1[k] - sd_first->Q1[k]));
    }
    rep.record("spectral.casimirs_depend_on_orbits_only", spread);
    rep.record("spectral.H_interval", sd.c > 0.0 ? 27.0 * sd.H * sd.H / sd.c : inf);
    const LaxMatrix L = lax_matrix(p);
    for (double z : {-2.5, -0.7, 0.3, 1.9}) {
      const Real3 x = real_branches(sd, z);
      const Real3 e = eig_hermitian(-kI * L(z)).values;
      for (int k = 0; k < 3; ++k) rep.record("spectral.real_branches_vs_eigensolver", std::abs(x[k] - e[k]));
    }
    const double w = discriminant_window(sd);
    double dscale = 0.0;
    for (double c : sd.disc) dscale = std::max(dscale, std::abs(c));
    rep.record("spectral.discriminant_interior", -discriminant_min(sd, -w, w, 4001) / dscale);

    try {
      const GaugedLax g = gauge_diagonalize_A(p);
      const DivisorPoint d = divisor_point(p);
      rep.record("divisor.rho_residual", d.rho_residual / d.scale());
      rep.record("divisor.cofactor_column", d.cofactor_residual / d.scale());
      if (d.column_used == 1) rep.record("divisor.closed_form", detail::rel(z0_closed_form(g), d.z0));
      const ReducedPoint q = random_gauge(p, derive_seed(cfg.seed ^ 0x5a5a5a5aULL, i));
      const DivisorPoint dq = divisor_point(q);
      for (auto [u, v] : {std::pair{d.z0, dq.z0}, {d.eta0, dq.eta0}, {d.zeta0, dq.zeta0}})
        rep.record("gauge.invariance", detail::rel(u, v));
      rep.record("gauge.invariance", std::abs(charpoly(q).H - sd.H));
      std::string a_json = io::point_json(p);
      rep.record("harness.point_roundtrip", io::point_json(io::parse_point(a_json)) == a_json ? 0.0 : 1.0);

      if (static_cast<int>(i) >= set.n_dynamic) continue;

      // One period of flow: conservation, Lax consistency, closure.
      const DivisorLoop loop = trace_loop(p, cfg.tol_return, cfg.loop().t_max(p), cfg.tol_ode);
      const FlowTrajectory tr = integrate(p, loop.T, cfg.tol_ode);
      const auto md = tr.max_drift();
      rep.record("flow.spectrum_drift", md.spectrum_drift);
      rep.record("flow.casimir_drift", md.casimir_drift);
      rep.record("flow.H_drift", md.H_drift);
      rep.record("flow.drift_alarms", tr.failed() ? 1.0 : 0.0);
      const double a_norm = frobenius_norm(a);
      const ReducedPoint& last = tr.points.back();
      rep.record("flow.A_constant",
                 max_abs(last.Y.mat() - last.Z.mat() - a) / std::max(1e-300, loop.T * a_norm));
      rep.record("flow.period_closure", loop.return_distance);

      const DivisorTracker tracker(p);
      for (int k = 1; k <= 5; ++k) {
        const auto& s = loop.samples[k * (loop.samples.size() - 1) / 6];
        const FlowState f = detail::doubled_step(s.state, set.fd_step).state;
        const FlowState b = detail::doubled_step(s.state, -set.fd_step).state;
        const Complex3x3 dS = (1.0 / (2.0 * set.fd_step)) * ((f.y + f.z) - (b.y + b.z));
        const Complex3x3 dA = (1.0 / (2.0 * set.fd_step)) * ((f.y - f.z) - (b.y - b.z));
        const auto br = lax_bracket({AntiHermitian3::unchecked(s.state.y - s.state.z),
                                     AntiHermitian3::unchecked(s.state.y + s.state.z)});
        rep.record("flow.lax_consistency", std::max({max_abs(dS - br[0]), max_abs(dA - br[1]), max_abs(br[2])}));

        const auto cd = centered_difference(tracker, s.state, set.fd_step);
        const DivisorPoint dp = tracker.at(s.state);
        const cplx v = linearizing_velocity(loop.sd, dp);
        if (std::abs(v) >= 1e-3 * dp.scale()) rep.record("actionvars.velocity_law", std::abs(cd.rate.z0 - v) / std::abs(v));
        const cplx zf = darboux_zeta(cd.fwd.z0, cd.fwd.eta0), zb = darboux_zeta(cd.bwd.z0, cd.bwd.eta0);
        const cplx dzeta = (zf - zb) / (2.0 * set.fd_step);
        const auto hr = hamilton_residual(loop.sd, dp.z0, dp.eta0, cd.rate.z0, dzeta);
        if (std::abs(v) >= 1e-3 * dp.scale())
          rep.record("actionvars.hamilton_equations", std::max(hr.z_equation, hr.zeta_equation));
      }
      if (i == 0) rep.record("actionvars.kappa_modulus", std::abs(std::abs(calibrate_kappa(p)) - 1.0));
      const auto est = period_from_loop(loop);
      rep.record("actionvars.period_routes", est.relative_gap());
      const auto av = action_from_loop(loop);
      rep.record("actionvars.F_imaginary_part", av.imag_residual / (1.0 + std::abs(av.F)));
      const DivisorLoop loop_q = trace_loop(q, cfg.tol_return, cfg.loop().t_max(q), cfg.tol_ode);
      rep.record("gauge.invariance", std::abs(loop_q.T - loop.T) / loop.T);
      rep.record("gauge.invariance", std::abs(action_from_loop(loop_q).F - av.F) / (1.0 + std::abs(av.F)));
    } catch (const Error&) {
      rep.fail("errors");
    }
  }

  // Interval-end fixtures.
  for (const Real3& diag : {Real3{1.0, 1.0, -2.0}, Real3{2.0, -1.0, -1.0}}) {
    const Complex3x3 a = Complex3x3::i_diag(diag);
    const LaxMatrix L{AntiHermitian3::unchecked(a), AntiHermitian3::unchecked(Complex3x3::zero())};
    const SpectralData sd = charpoly(L);
    const double c = -4.0 * std::pow(std::real(trace(a * a)) / 2.0, 3);
    const double hb = std::sqrt(c / 27.0);
    rep.record("boundary.H_at_interval_end", std::abs(std::abs(sd.H) - hb) / hb);
  }
  for (std::uint64_t k = 0; k < 3; ++k) {
    const LaxMatrix L = boundary_normal_form(0.7 + 0.3 * static_cast<double>(k), derive_seed(cfg.seed, 1000 + k));
    const SpectralData sd = charpoly(L);
    const double w = discriminant_window(sd);
    double dscale = 0.0;
    for (double c : sd.disc) dscale = std::max(dscale, std::abs(c));
    rep.record("spectral.discriminant_boundary_fixture", std::max(0.0, -discriminant_min(sd, -w, w, 4001) / dscale));
    const ReducedPoint bp = point_from_lax(L);
    const double n = 1.0 + frobenius_norm(bp.Y.mat()) + frobenius_norm(bp.Z.mat());
    rep.record("boundary.reduced_speed", reduced_speed(bp) / (n * n * n));
  }
  return rep;
}

}  // namespace trp

#endif  // TRP_CHECKS_HPP
