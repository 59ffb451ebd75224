#ifndef TRP_FLOW_HPP
#define TRP_FLOW_HPP

// Hamiltonian Lax flow of H = -i det(Y - Z):
//   L' = [dH, L],  dH = i (A^2 z + A B + B A),  A = Y - Z,  B = S = Y + Z,
// which expands coefficientwise to A' = 0 and Y' = Z' = (i/2) [A, S^2].
// Integration is classical RK4 with step doubling and local extrapolation;
// conserved quantities are monitored, never re-projected.

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <numbers>
#include <optional>
#include <type_traits>
#include <vector>

#include "trp/divisor.hpp"
#include "trp/error.hpp"
#include "trp/mat3.hpp"
#include "trp/orbits.hpp"
#include "trp/small_linalg.hpp"
#include "trp/spectral.hpp"

namespace trp {

inline Complex3x3 dH_matrix(const LaxMatrix& L, cplx z) {
  const Complex3x3& a = L.A.mat();
  const Complex3x3& b = L.B.mat();
  return kI * (z * (a * a) + a * b + b * a);
}

/// Velocity of Y (equal to that of Z): (i/2) [Y - Z, (Y + Z)^2].
inline Complex3x3 flow_velocity(const Complex3x3& y, const Complex3x3& z) {
  const Complex3x3 a = y - z, s = y + z;
  return (0.5 * kI) * commutator(a, s * s);
}

struct FlowDerivative {
  Complex3x3 dY;
  Complex3x3 dZ;
};

inline FlowDerivative flow_rhs(const ReducedPoint& p) {
  const Complex3x3 v = flow_velocity(p.Y.mat(), p.Z.mat());
  return {v, v};
}

/// i [Y, YZ + ZY + Z^2], the Y-form of the same right-hand side.
inline Complex3x3 flow_velocity_yform(const Complex3x3& y, const Complex3x3& z) {
  return kI * commutator(y, y * z + z * y + z * z);
}

/// Coefficients (ascending in z) of [dH(z), L(z)]; along the flow these are
/// the time derivatives of the coefficients of L.
inline std::array<Complex3x3, 3> lax_bracket(const LaxMatrix& L) {
  const Complex3x3 d0 = dH_matrix(L, 0.0);
  const Complex3x3 d1 = dH_matrix(L, 1.0) - d0;
  const Complex3x3& a = L.A.mat();
  const Complex3x3& b = L.B.mat();
  return {commutator(d0, b), commutator(d0, a) + commutator(d1, b), commutator(d1, a)};
}

/// Largest disagreement between the three forms of the right-hand side:
/// (i/2)[A, S^2], the Y-form, and the expansion of [dH, L] (whose A part
/// must vanish and whose S part is twice the Y velocity).
inline double flow_form_residual(const Complex3x3& y, const Complex3x3& z) {
  const Complex3x3 v = flow_velocity(y, z);
  const auto br = lax_bracket({AntiHermitian3::unchecked(y - z), AntiHermitian3::unchecked(y + z)});
  return std::max({max_abs(v - flow_velocity_yform(y, z)), max_abs(br[0] - 2.0 * v), max_abs(br[1]),
                   max_abs(br[2])});
}

/// Norm of the flow velocity modulo infinitesimal gauge transformations:
/// the component of (Y', Z') orthogonal to {([xi, Y], [xi, Z]) : xi in u(3)}.
/// Zero exactly at fixed points of the reduced flow.
inline double reduced_speed(const Complex3x3& y, const Complex3x3& z) {
  using V18 = linalg::Vec<18>;
  auto pack = [](const Complex3x3& a, const Complex3x3& b) {
    V18 v{};
    const auto ca = detail::antiherm_coords(a), cb = detail::antiherm_coords(b);
    std::copy(ca.begin(), ca.end(), v.begin());
    std::copy(cb.begin(), cb.end(), v.begin() + 9);
    return v;
  };
  const Complex3x3 vel = flow_velocity(y, z);
  V18 v = pack(vel, vel);

  std::vector<V18> basis;
  double gmax = 0.0;
  std::array<V18, 9> gens;
  for (int g = 0; g < 9; ++g) {
    const auto& xi = detail::u3_basis()[g];
    gens[g] = pack(commutator(xi, y), commutator(xi, z));
    gmax = std::max(gmax, linalg::norm(gens[g]));
  }
  for (auto gv : gens) {
    for (int pass = 0; pass < 2; ++pass)
      for (const auto& b : basis) {
        const double c = linalg::dot(b, gv);
        for (int i = 0; i < 18; ++i) gv[i] -= c * b[i];
      }
    const double n = linalg::norm(gv);
    if (n > 1e-10 * gmax) {
      for (auto& x : gv) x /= n;
      basis.push_back(gv);
    }
  }
  for (int pass = 0; pass < 2; ++pass)
    for (const auto& b : basis) {
      const double c = linalg::dot(b, v);
      for (int i = 0; i < 18; ++i) v[i] -= c * b[i];
    }
  return linalg::norm(v);
}

inline double reduced_speed(const ReducedPoint& p) { return reduced_speed(p.Y.mat(), p.Z.mat()); }

// ---------------------------------------------------------------------------
// Integrator

struct FlowState {
  Complex3x3 y;
  Complex3x3 z;
};

namespace detail {

inline FlowState axpy(const FlowState& s, double h, const Complex3x3& v) {
  return {s.y + h * v, s.z + h * v};
}

inline FlowState rk4_step(const FlowState& s, double h) {
  const Complex3x3 k1 = flow_velocity(s.y, s.z);
  const FlowState s2 = axpy(s, 0.5 * h, k1);
  const Complex3x3 k2 = flow_velocity(s2.y, s2.z);
  const FlowState s3 = axpy(s, 0.5 * h, k2);
  const Complex3x3 k3 = flow_velocity(s3.y, s3.z);
  const FlowState s4 = axpy(s, h, k3);
  const Complex3x3 k4 = flow_velocity(s4.y, s4.z);
  const Complex3x3 inc = (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  return {s.y + inc, s.z + inc};
}

struct DoubledStep {
  FlowState state;
  double error;  // scaled local error estimate
};

// Full step against two half steps; the Richardson combination is returned.
inline DoubledStep doubled_step(const FlowState& s, double h) {
  const FlowState full = rk4_step(s, h);
  const FlowState half = rk4_step(rk4_step(s, 0.5 * h), 0.5 * h);
  const Complex3x3 dy = half.y - full.y;
  const Complex3x3 dz = half.z - full.z;
  const double scale = 1.0 + std::max(max_abs(s.y), max_abs(s.z));
  const double err = std::max(max_abs(dy), max_abs(dz)) / 15.0 / scale;
  return {{half.y + (1.0 / 15.0) * dy, half.z + (1.0 / 15.0) * dz}, err};
}

}  // namespace detail

/// Adaptive RK4 driver. Steps are clipped to land exactly on each target.
class FlowStepper {
 public:
  FlowStepper(double tol, double initial_step, double underflow_scale)
      : tol_(tol), h_(initial_step), min_step_(1e-14 * underflow_scale) {}

  /// Advances (t, s) to t_target; on_accept(t, s, h) fires after every
  /// accepted step. Returning false from it stops the integration early.
  template <typename OnAccept>
  void advance(double& t, FlowState& s, double t_target, OnAccept&& on_accept) {
    while (t < t_target) {
      const double remaining = t_target - t;
      const bool last = h_ >= remaining;
      const double h = last ? remaining : h_;
      const auto step = detail::doubled_step(s, h);
      if (step.error <= tol_) {
        t = last ? t_target : t + h;
        s = step.state;
        if (!last) h_ = h * growth(step.error);
        if constexpr (std::is_same_v<std::invoke_result_t<OnAccept, double, const FlowState&, double>, bool>) {
          if (!on_accept(t, s, h)) return;
        } else {
          on_accept(t, s, h);
        }
      } else {
        h_ = h * growth(step.error);
        if (h_ < min_step_) throw Error(ErrorKind::StepUnderflow, "step size underflow");
      }
    }
  }

  void advance(double& t, FlowState& s, double t_target) {
    advance(t, s, t_target, [](double, const FlowState&, double) {});
  }

  double step_size() const { return h_; }

 private:
  double growth(double err) const {
    if (err == 0.0) return 4.0;
    return std::clamp(0.9 * std::pow(tol_ / err, 0.2), 0.2, 4.0);
  }

  double tol_;
  double h_;
  double min_step_;
};

// ---------------------------------------------------------------------------
// Trajectories and drift monitors

struct DriftRecord {
  double casimir_drift = 0.0;   // max |coefficient change| of Q0, Q1
  double spectrum_drift = 0.0;  // max eigenvalue change of Y, Z, Y + Z
  double H_drift = 0.0;
};

enum class TrajectoryStatus { Ok, DriftAlarm };

struct FlowTrajectory {
  std::vector<double> times;
  std::vector<ReducedPoint> points;
  std::vector<DivisorPoint> divisor_track;  // filled on request
  std::vector<DriftRecord> drift;
  TrajectoryStatus status = TrajectoryStatus::Ok;
  double alarm_threshold = 0.0;

  bool failed() const { return status != TrajectoryStatus::Ok; }

  DriftRecord max_drift() const {
    DriftRecord m;
    for (const auto& d : drift) {
      m.casimir_drift = std::max(m.casimir_drift, d.casimir_drift);
      m.spectrum_drift = std::max(m.spectrum_drift, d.spectrum_drift);
      m.H_drift = std::max(m.H_drift, d.H_drift);
    }
    return m;
  }
};

/// Reference values for the drift monitors, taken at the initial point.
class DriftMonitor {
 public:
  explicit DriftMonitor(const FlowState& s0)
      : spec_y_(spectrum_of(s0.y)), spec_z_(spectrum_of(s0.z)), spec_s_(spectrum_of(s0.y + s0.z)),
        sd0_(charpoly(LaxMatrix{AntiHermitian3::unchecked(s0.y - s0.z),
                                AntiHermitian3::unchecked(s0.y + s0.z)})) {}

  DriftRecord measure(const FlowState& s) const {
    DriftRecord r;
    const std::array<std::pair<Real3, Real3>, 3> pairs{
        std::pair{spectrum_of(s.y), spec_y_}, std::pair{spectrum_of(s.z), spec_z_},
        std::pair{spectrum_of(s.y + s.z), spec_s_}};
    for (const auto& [now, ref] : pairs)
      for (int k = 0; k < 3; ++k) r.spectrum_drift = std::max(r.spectrum_drift, std::abs(now[k] - ref[k]));
    const SpectralData sd = charpoly(
        LaxMatrix{AntiHermitian3::unchecked(s.y - s.z), AntiHermitian3::unchecked(s.y + s.z)});
    for (int k = 0; k < 3; ++k) {
      r.casimir_drift = std::max(r.casimir_drift, std::abs(sd.Q0[k] - sd0_.Q0[k]));
      r.casimir_drift = std::max(r.casimir_drift, std::abs(sd.Q1[k] - sd0_.Q1[k]));
    }
    r.H_drift = std::abs(sd.H - sd0_.H);
    return r;
  }

 private:
  Real3 spec_y_, spec_z_, spec_s_;
  SpectralData sd0_;
};

inline ReducedPoint with_state(const ReducedPoint& p0, const FlowState& s) {
  ReducedPoint p = p0;
  p.Y = AntiHermitian3::unchecked(s.y);
  p.Z = AntiHermitian3::unchecked(s.z);
  p.moment_residual = moment_residual(s.y, s.z, p0.spec.lambda);
  return p;
}

/// Integrates the flow from p0 over [0, t_end], recording every accepted
/// step. A drift monitor above 100 tol_ode flags the trajectory as failed.
inline FlowTrajectory integrate(const ReducedPoint& p0, double t_end, double tol_ode) {
  FlowState s{p0.Y.mat(), p0.Z.mat()};
  const DriftMonitor monitor(s);
  FlowTrajectory traj;
  traj.alarm_threshold = 100.0 * tol_ode;
  auto record = [&](double t, const FlowState& st) {
    traj.times.push_back(t);
    traj.points.push_back(with_state(p0, st));
    const DriftRecord d = monitor.measure(st);
    traj.drift.push_back(d);
    if (d.casimir_drift > traj.alarm_threshold || d.spectrum_drift > traj.alarm_threshold ||
        d.H_drift > traj.alarm_threshold)
      traj.status = TrajectoryStatus::DriftAlarm;
  };
  record(0.0, s);
  if (t_end <= 0.0) return traj;
  double t = 0.0;
  FlowStepper stepper(tol_ode, t_end / 1000.0, t_end);
  stepper.advance(t, s, t_end, [&](double tt, const FlowState& st, double) { record(tt, st); });
  return traj;
}

// ---------------------------------------------------------------------------
// Divisor tracking and period detection

/// Follows the divisor point of one fixed cofactor column along the flow.
/// Y - Z is constant along the flow, so the diagonalizing frame of the
/// initial point serves for the whole trajectory.
class DivisorTracker {
 public:
  explicit DivisorTracker(const ReducedPoint& p0)
      : gauge_(gauge_diagonalize_A(p0)), sd_(charpoly(p0)), column_(choose_column(gauge_.S)) {}

  GaugedLax gauged(const FlowState& s) const {
    GaugedLax g = gauge_;
    g.S = adjoint(gauge_.V) * (s.y + s.z) * gauge_.V;
    return g;
  }

  DivisorPoint at(const FlowState& s) const { return divisor_in_column(gauged(s), sd_, column_); }

  /// (z0, eta0) and their time derivatives along the flow.
  struct Motion {
    CofactorSolution x;
    CofactorSolution dx;
  };

  Motion motion(const FlowState& s) const {
    const GaugedLax g = gauged(s);
    const Complex3x3 ds = adjoint(gauge_.V) * (2.0 * flow_velocity(s.y, s.z)) * gauge_.V;
    const auto x = solve_cofactor_column(gauge_.alpha_hat, g.S, column_);
    return {x, cofactor_column_derivative(gauge_.alpha_hat, g.S, ds, column_, x)};
  }

  const GaugedLax& frame() const { return gauge_; }
  const SpectralData& spectral() const { return sd_; }
  int column() const { return column_; }

 private:
  GaugedLax gauge_;
  SpectralData sd_;
  int column_;
};

/// Distance used for return detection: chordal on z0 plus absolute on eta0.
inline double divisor_return_distance(const CofactorSolution& a, const CofactorSolution& b) {
  return chordal(a.z0, b.z0) + std::abs(a.eta0 - b.eta0);
}

namespace detail {

// Point of (sphere x sphere) carrying (z0, eta0), and its velocity.
inline std::array<double, 6> section_point(const CofactorSolution& x) {
  const auto a = sphere_point(x.z0), b = sphere_point(x.eta0);
  return {a[0], a[1], a[2], b[0], b[1], b[2]};
}

inline std::array<double, 6> section_velocity(const CofactorSolution& x, const CofactorSolution& dx) {
  const auto a = sphere_tangent(x.z0, dx.z0), b = sphere_tangent(x.eta0, dx.eta0);
  return {a[0], a[1], a[2], b[0], b[1], b[2]};
}

}  // namespace detail

/// Fixed-point threshold on reduced_speed, relative to the size of (Y, Z).
inline double fixed_point_speed_tolerance(const ReducedPoint& p) {
  const double n = 1.0 + frobenius_norm(p.Y.mat()) + frobenius_norm(p.Z.mat());
  return 1e-9 * n * n * n;
}

/// Heuristic time unit 2 pi / (||Y - Z|| ||Y + Z||): the inverse rate of the
/// conjugating generator i (A S + S A).
inline double heuristic_time_unit(const ReducedPoint& p) {
  const double a = frobenius_norm(p.Y.mat() - p.Z.mat());
  const double s = frobenius_norm(p.Y.mat() + p.Z.mat());
  return 2.0 * std::numbers::pi / std::max(a * s, 1e-300);
}

struct PeriodResult {
  double T = 0.0;
  double return_distance = 0.0;
  FlowState end_state;
};

/// First return time of (z0, eta0). The return is located as the crossing
/// of the hyperplane through the initial (z0, eta0) orthogonal to its initial
/// velocity (in the sphere embedding), refined by bisection, and accepted
/// when the divisor distance falls within tol_return.
inline PeriodResult detect_period_full(const ReducedPoint& p0, double tol_return, double t_max,
                                       double tol_ode = 1e-10) {
  try {
    (void)gauge_diagonalize_A(p0);
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::DegenerateA)
      throw Error(ErrorKind::NoReturn, "Y - Z has a repeated eigenvalue: fixed point of the flow");
    throw;
  }
  if (reduced_speed(p0) <= fixed_point_speed_tolerance(p0))
    throw Error(ErrorKind::NoReturn, "reduced velocity vanishes: fixed point of the flow");

  const DivisorTracker tracker(p0);
  FlowState s{p0.Y.mat(), p0.Z.mat()};
  const auto m0 = tracker.motion(s);
  const auto p_ref = detail::section_point(m0.x);
  auto v_ref = detail::section_velocity(m0.x, m0.dx);
  double vn = 0.0;
  for (double x : v_ref) vn += x * x;
  vn = std::sqrt(vn);
  if (!(vn > 0.0)) throw Error(ErrorKind::NoReturn, "divisor point does not move");
  for (auto& x : v_ref) x /= vn;

  auto section = [&](const FlowState& st) {
    const auto p = detail::section_point(tracker.motion(st).x);
    double g = 0.0;
    for (int i = 0; i < 6; ++i) g += (p[i] - p_ref[i]) * v_ref[i];
    return g;
  };

  const double unit = heuristic_time_unit(p0);
  FlowStepper stepper(tol_ode, unit / 1000.0, t_max);
  double t = 0.0;
  double g_prev = 0.0;
  FlowState prev = s;
  double t_prev = 0.0;
  std::optional<PeriodResult> found;
  stepper.advance(t, s, t_max, [&](double tt, const FlowState& st, double) {
    const double g_now = section(st);
    if (g_prev < 0.0 && g_now >= 0.0) {
      double lo = 0.0, hi = tt - t_prev;
      FlowState at_lo = prev, at_hi = st;
      double g_lo = g_prev, g_hi = g_now;
      for (int it = 0; it < 200 && hi - lo > 1e-15 * tt; ++it) {
        const double mid = 0.5 * (lo + hi);
        const FlowState sm = detail::doubled_step(prev, mid).state;
        const double gm = section(sm);
        if (gm < 0.0) {
          lo = mid;
          at_lo = sm;
          g_lo = gm;
        } else {
          hi = mid;
          at_hi = sm;
          g_hi = gm;
        }
      }
      // Secant inside the last bracket: the divisor can move fast enough
      // that the bracket width alone is visible in the return distance.
      const double w = g_hi > g_lo ? std::clamp(-g_lo / (g_hi - g_lo), 0.0, 1.0) : 1.0;
      const FlowState at{at_lo.y + w * (at_hi.y - at_lo.y), at_lo.z + w * (at_hi.z - at_lo.z)};
      const double t_cross = t_prev + lo + w * (hi - lo);
      const double dist = divisor_return_distance(tracker.motion(at).x, m0.x);
      if (dist <= tol_return) {
        found = PeriodResult{t_cross, dist, at};
        return false;
      }
    }
    g_prev = g_now;
    prev = st;
    t_prev = tt;
    return true;
  });
  if (!found) throw Error(ErrorKind::NoReturn, "no return of the divisor point before t_max");
  return *found;
}

inline double detect_period(const ReducedPoint& p0, double tol_return, double t_max,
                            double tol_ode = 1e-10) {
  return detect_period_full(p0, tol_return, t_max, tol_ode).T;
}

}  // namespace trp

#endif  // TRP_FLOW_HPP
