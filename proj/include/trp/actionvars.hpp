#ifndef TRP_ACTIONVARS_HPP
#define TRP_ACTIONVARS_HPP

// Linearizing velocity of the divisor point, the period T(H) by two routes,
// the action F(H) as the loop integral of zeta dz over the closed divisor
// track, and (H, T, F) profiles over random samples.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "trp/divisor.hpp"
#include "trp/error.hpp"
#include "trp/flow.hpp"
#include "trp/mat3.hpp"
#include "trp/orbits.hpp"
#include "trp/random.hpp"
#include "trp/spectral.hpp"

namespace trp {

/// dz0/dt = kKappa (Q1(z0) - 3 eta0^2). Fitted by calibrate_kappa on a
/// reference point and frozen here.
inline constexpr cplx kKappa{0.0, -1.0};

inline cplx linearizing_velocity(const SpectralData& sd, const DivisorPoint& d) {
  return kKappa * rho_eta(sd, d.z0, d.eta0);
}

// ---------------------------------------------------------------------------
// Closed divisor loop on a uniform time grid

struct LoopSample {
  double t;
  FlowState state;
  CofactorSolution x;   // (z0, eta0)
  CofactorSolution dx;  // time derivatives, from the flow velocity
};

struct DivisorLoop {
  double T = 0.0;
  double return_distance = 0.0;
  std::vector<LoopSample> samples;  // n_intervals + 1 points, t = 0 .. T
  SpectralData sd;
};

inline constexpr int kLoopIntervals = 2048;

/// Detects the period and resamples the trajectory on a uniform grid.
inline DivisorLoop trace_loop(const ReducedPoint& p0, double tol_return, double t_max,
                              double tol_ode = 1e-10, int n_intervals = kLoopIntervals) {
  if (n_intervals < 2 || n_intervals % 2 != 0)
    throw Error(ErrorKind::InputError, "loop grid needs an even number of intervals");
  const auto period = detect_period_full(p0, tol_return, t_max, tol_ode);
  const DivisorTracker tracker(p0);
  DivisorLoop loop;
  loop.T = period.T;
  loop.return_distance = period.return_distance;
  loop.sd = tracker.spectral();
  loop.samples.reserve(n_intervals + 1);
  FlowState s{p0.Y.mat(), p0.Z.mat()};
  double t = 0.0;
  FlowStepper stepper(tol_ode, period.T / n_intervals, period.T);
  for (int k = 0; k <= n_intervals; ++k) {
    const double target = period.T * k / n_intervals;
    stepper.advance(t, s, target);
    const auto m = tracker.motion(s);
    loop.samples.push_back({target, s, m.x, m.dx});
  }
  return loop;
}

namespace detail {

inline cplx simpson(const std::vector<cplx>& f, double h) {
  const std::size_t n = f.size() - 1;
  cplx s = f.front() + f.back();
  for (std::size_t k = 1; k < n; ++k) s += (k % 2 ? 4.0 : 2.0) * f[k];
  return s * h / 3.0;
}

}  // namespace detail

/// The divisor track passes through z = p in {0, 1, -1}. Such a passage is
/// removable when eta0 vanishes there too: (p, 0) is then a point of the
/// curve and zeta0 has the finite limit (d eta / d z) / (3 p^2 - 1).
inline constexpr double kPoleMargin = 1e-6;

namespace detail {

inline double segment_distance(cplx a, cplx b, cplx p) {
  const cplx d = b - a;
  const double len2 = std::norm(d);
  double u = len2 > 0.0 ? std::real(std::conj(d) * (p - a)) / len2 : 0.0;
  u = std::clamp(u, 0.0, 1.0);
  return std::abs(a + u * d - p);
}

}  // namespace detail

struct PeriodEstimate {
  double T_return = 0.0;
  double T_quadrature = 0.0;

  double relative_gap() const { return std::abs(T_return - T_quadrature) / std::abs(T_return); }
};

/// Period from the first return, and from the loop integral of
/// dt = dz0 / (kappa (Q1(z0) - 3 eta0^2)) along the traced (z0, eta0) loop.
/// The second route uses only the positions on the track: dz0/ds on the
/// sample index s comes from 4th-order periodic centered differences, taken
/// in w = 1/z0 where |z0| > 1 so passages through z0 = infinity stay finite,
/// and the closed loop is summed with the trapezoid rule. Near branch points
/// dz0 and Q1 - 3 eta0^2 vanish together.
inline PeriodEstimate period_from_loop(const DivisorLoop& loop) {
  const auto& sm = loop.samples;
  const int n = static_cast<int>(sm.size()) - 1;
  const auto at = [&](int k) { return sm[static_cast<std::size_t>(((k % n) + n) % n)].x.z0; };
  cplx total = 0.0;
  for (int k = 0; k < n; ++k) {
    const cplx z = at(k);
    const bool inverted = std::abs(z) > 1.0;
    const auto chart = [&](cplx x) { return inverted ? 1.0 / x : x; };
    const cplx dc = (-chart(at(k + 2)) + 8.0 * chart(at(k + 1)) - 8.0 * chart(at(k - 1)) + chart(at(k - 2))) / 12.0;
    const cplx dz = inverted ? -dc * z * z : dc;
    total += dz / (kKappa * rho_eta(loop.sd, z, sm[static_cast<std::size_t>(k)].x.eta0));
  }
  return {loop.T, std::real(total)};
}

inline constexpr double kPeriodConsistency = 1e-3;

inline PeriodEstimate period_estimate(const ReducedPoint& p0, double tol_return, double t_max,
                                      double tol_ode = 1e-10) {
  const auto est = period_from_loop(trace_loop(p0, tol_return, t_max, tol_ode));
  if (!(est.relative_gap() <= kPeriodConsistency))
    throw Error(ErrorKind::ConsistencyFailure,
                "first-return and quadrature periods disagree (relative gap " +
                    std::to_string(est.relative_gap()) + ")");
  return est;
}

/// Default tolerances of the single-point entry points.
struct LoopSettings {
  double tol_return = 1e-8;
  double tol_ode = 1e-10;
  double t_max_periods = 50.0;

  double t_max(const ReducedPoint& p) const { return t_max_periods * heuristic_time_unit(p); }
};

inline double period_T(const ReducedPoint& p0, const LoopSettings& cfg = {}) {
  return period_estimate(p0, cfg.tol_return, cfg.t_max(p0), cfg.tol_ode).T_return;
}

struct ActionValue {
  double F = 0.0;
  double imag_residual = 0.0;
};

/// zeta0 at one loop sample, with the removable limit at z0 in {0, 1, -1}.
inline cplx loop_zeta(const SpectralData& sd, const LoopSample& s) {
  const cplx z = s.x.z0, eta = s.x.eta0;
  const cplx w = z * (z * z - 1.0);
  if (std::abs(w) > kPoleMargin) return eta / w;
  const cplx deta_dz = -rho_z(sd, z, eta) / rho_eta(sd, z, eta);
  return deta_dz / (3.0 * z * z - 1.0);
}

/// Loop integral of zeta0 dz0 over one period. The loop is traversed against
/// the direction of the flow, which makes dF/dH = +T (see kKappa).
inline ActionValue action_from_loop(const DivisorLoop& loop) {
  const auto& sm = loop.samples;
  const std::size_t n = sm.size();
  for (const cplx p : {cplx(0.0), cplx(1.0), cplx(-1.0)}) {
    for (std::size_t k = 0; k + 1 < n; ++k) {
      if (detail::segment_distance(sm[k].x.z0, sm[k + 1].x.z0, p) >= kPoleMargin) continue;
      const double eta_scale = 1.0 + std::abs(sm[k].x.eta0) + std::abs(sm[k + 1].x.eta0);
      const bool on_curve = std::abs(eval_rho(loop.sd, p, 0.0)) <= 1e-8 * (1.0 + std::abs(loop.sd.Q0[0]));
      const double near_eta = std::min(std::abs(sm[k].x.eta0), std::abs(sm[k + 1].x.eta0));
      const double near_z = std::min(std::abs(sm[k].x.z0 - p), std::abs(sm[k + 1].x.z0 - p));
      const cplx slope = sm[k].dx.eta0 / sm[k].dx.z0;
      const bool eta_vanishes = near_eta <= 10.0 * (1.0 + std::abs(slope)) * near_z + 1e-8 * eta_scale;
      if (!(on_curve && eta_vanishes))
        throw Error(ErrorKind::LoopThroughPole, "divisor track passes through a pole of zeta");
    }
  }
  std::vector<cplx> f(n);
  for (std::size_t k = 0; k < n; ++k) f[k] = -loop_zeta(loop.sd, sm[k]) * sm[k].dx.z0;
  const cplx F = detail::simpson(f, loop.T / static_cast<double>(n - 1));
  return {std::real(F), std::abs(std::imag(F))};
}

inline ActionValue action_F(const ReducedPoint& p0, const LoopSettings& cfg = {}) {
  return action_from_loop(trace_loop(p0, cfg.tol_return, cfg.t_max(p0), cfg.tol_ode));
}

/// Fills the divisor track of a trajectory starting at p0, using the cofactor
/// column chosen at p0 throughout.
inline void attach_divisor_track(FlowTrajectory& tr, const ReducedPoint& p0) {
  const DivisorTracker tracker(p0);
  tr.divisor_track.clear();
  for (const auto& p : tr.points) tr.divisor_track.push_back(tracker.at({p.Y.mat(), p.Z.mat()}));
}

/// (z0, eta0) at time h and -h from s, one extrapolated RK4 step each way.
struct CenteredDifference {
  CofactorSolution rate;
  CofactorSolution fwd, bwd;
};

inline CenteredDifference centered_difference(const DivisorTracker& tracker, const FlowState& s, double h) {
  const auto f = tracker.motion(detail::doubled_step(s, h).state).x;
  const auto b = tracker.motion(detail::doubled_step(s, -h).state).x;
  return {{(f.z0 - b.z0) / (2.0 * h), (f.eta0 - b.eta0) / (2.0 * h)}, f, b};
}

/// Least-squares kappa from centered finite differences of z0 along the
/// flow (steps h and h/2, extrapolated) at n points of one trajectory
/// starting at p0.
inline cplx calibrate_kappa(const ReducedPoint& p0, int n = 20, double h = 1e-5) {
  const DivisorTracker tracker(p0);
  const double unit = heuristic_time_unit(p0);
  cplx num = 0.0;
  double den = 0.0;
  FlowState s{p0.Y.mat(), p0.Z.mat()};
  double t = 0.0;
  FlowStepper stepper(1e-12, unit / 1000.0, unit);
  for (int k = 0; k < n; ++k) {
    stepper.advance(t, s, unit * (k + 1) / (n + 1));
    const cplx d1 = centered_difference(tracker, s, h).rate.z0;
    const cplx d2 = centered_difference(tracker, s, 0.5 * h).rate.z0;
    const cplx dz = (4.0 * d2 - d1) / 3.0;  // Richardson, O(h^4)
    const auto d = tracker.at(s);
    const cplx r = rho_eta(tracker.spectral(), d.z0, d.eta0);
    num += std::conj(r) * dz;
    den += std::norm(r);
  }
  return num / den;
}

// ---------------------------------------------------------------------------
// Hamilton equations in the Darboux pair (z0, zeta0)

struct HamiltonResidual {
  double z_equation = 0.0;     // |dz0/dt - s dH/dzeta| / |dz0/dt|
  double zeta_equation = 0.0;  // |dzeta0/dt + s dH/dz| / |dzeta0/dt|
};

/// With H(z, zeta) defined by rho(z, z (z^2 - 1) zeta; H) = 0, compares the
/// measured velocities (dz0, dzeta0) with the Hamiltonian vector field
/// s (dH/dzeta, -dH/dz). The orientation s = kappa / i is the same on both
/// equations, so only one sign is free.
inline HamiltonResidual hamilton_residual(const SpectralData& sd, cplx z, cplx eta, cplx dz,
                                          cplx dzeta) {
  const cplx w = z * (z * z - 1.0), dw = 3.0 * z * z - 1.0;
  const cplx zeta = eta / w;
  const cplx r_eta = rho_eta(sd, z, eta);
  const cplx r_z = rho_z(sd, z, eta);
  const cplx r_H = kI * w;
  const cplx dH_dzeta = -(r_eta * w) / r_H;
  const cplx dH_dz = -(r_z + r_eta * zeta * dw) / r_H;
  const cplx s = kKappa / kI;
  return {std::abs(dz - s * dH_dzeta) / std::abs(dz), std::abs(dzeta + s * dH_dz) / std::abs(dzeta)};
}

/// dzeta0/dt from (z0, eta0) and their time derivatives.
inline cplx zeta_rate(cplx z, cplx eta, cplx dz, cplx deta) {
  const cplx w = z * (z * z - 1.0);
  return (deta - eta * (3.0 * z * z - 1.0) * dz / w) / w;
}

// ---------------------------------------------------------------------------
// Profiles

struct ActionProfileRow {
  int sample_id = 0;
  double H = 0.0;
  double T = 0.0;
  double F = 0.0;
  double imag_residual = 0.0;
};

struct ActionProfile {
  std::vector<ActionProfileRow> rows;  // sorted by H, F anchored at the first row
  double H_bound = 0.0;
  double c = 0.0;
  int n_failed = 0;
  std::map<std::string, int> failure_reasons;
};

struct ProfileSettings {
  double tol_moment = 1e-10;
  LoopSettings loop;
};

/// Sample i is solved from derive_seed(rng_seed, i); failures other than
/// infeasibility are skipped and counted by kind.
inline ActionProfile build_profile(const OrbitSpec& spec, int n_samples, std::uint64_t rng_seed,
                                   const ProfileSettings& cfg = {}) {
  ActionProfile prof;
  for (int i = 0; i < n_samples; ++i) {
    const ReducedPoint p = solve_moment(spec, derive_seed(rng_seed, static_cast<std::uint64_t>(i)),
                                        cfg.tol_moment);
    const SpectralData sd = charpoly(p);
    prof.H_bound = sd.H_bound;
    prof.c = sd.c;
    try {
      const DivisorLoop loop = trace_loop(p, cfg.loop.tol_return, cfg.loop.t_max(p), cfg.loop.tol_ode);
      const auto est = period_from_loop(loop);
      if (!(est.relative_gap() <= kPeriodConsistency))
        throw Error(ErrorKind::ConsistencyFailure, "period routes disagree");
      const auto a = action_from_loop(loop);
      prof.rows.push_back({i, sd.H, est.T_return, a.F, a.imag_residual});
    } catch (const Error& e) {
      ++prof.n_failed;
      ++prof.failure_reasons[std::string(to_string(e.kind()))];
    }
  }
  std::stable_sort(prof.rows.begin(), prof.rows.end(),
                   [](const auto& a, const auto& b) { return a.H < b.H; });
  if (!prof.rows.empty()) {
    const double f0 = prof.rows.front().F;
    for (auto& r : prof.rows) r.F -= f0;
  }
  return prof;
}

/// dF/dH at row i from a local quadratic least-squares fit of F against H
/// over the `bandwidth` rows nearest in H (ties broken towards lower index).
/// The quadratic term absorbs the curvature of F, which would otherwise bias
/// the slope when the window is lopsided.
inline double local_slope(const std::vector<ActionProfileRow>& rows, std::size_t i, int bandwidth = 5) {
  std::vector<std::size_t> idx(rows.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  const double h0 = rows[i].H;
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return std::abs(rows[a].H - h0) < std::abs(rows[b].H - h0);
  });
  idx.resize(std::min<std::size_t>(idx.size(), static_cast<std::size_t>(bandwidth)));
  double width = 0.0;
  for (auto k : idx) width = std::max(width, std::abs(rows[k].H - h0));
  if (idx.size() < 3 || !(width > 0.0)) return std::numeric_limits<double>::quiet_NaN();
  linalg::Mat<3> m{};
  linalg::Vec<3> r{};
  for (auto k : idx) {
    const double x = (rows[k].H - h0) / width;
    const linalg::Vec<3> basis{1.0, x, x * x};
    for (int p = 0; p < 3; ++p) {
      r[p] += basis[p] * rows[k].F;
      for (int q = 0; q < 3; ++q) m[p][q] += basis[p] * basis[q];
    }
  }
  const auto c = linalg::solve_spd(m, r);
  return c ? (*c)[1] / width : std::numeric_limits<double>::quiet_NaN();
}

}  // namespace trp

#endif  // TRP_ACTIONVARS_HPP
