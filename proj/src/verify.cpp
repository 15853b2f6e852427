#include "qsp/verify.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <sstream>
#include <stdexcept>

namespace qsp {

namespace {

using cplx = std::complex<double>;

struct Accum {
  double max_w = 0.0, sum_w2 = 0.0, max_r = 0.0, sum_r2 = 0.0;
  long n = 0;
  void add(double raw, double weight) {
    const double w = raw * weight;
    max_w = std::max(max_w, w);
    max_r = std::max(max_r, raw);
    sum_w2 += w * w;
    sum_r2 += raw * raw;
    ++n;
  }
  void finish(ResidualReport& rep) const {
    rep.max_abs = max_w;
    rep.max_abs_raw = max_r;
    rep.rms = n ? std::sqrt(sum_w2 / n) : 0.0;
    rep.rms_raw = n ? std::sqrt(sum_r2 / n) : 0.0;
    rep.passed = rep.max_abs <= rep.tolerance;
  }
};

// default thresholds shrink with the step squared, anchored at 1e-4 for the
// standard 64 steps per delay
double default_tol_fd(const Trajectory& tr) {
  const double r = 64.0 * tr.h / tr.params.tau;
  return 1e-4 * r * r;
}

double default_tol_interp(const Trajectory& tr) {
  const double r = 64.0 * tr.h / tr.params.tau;
  return 1e-6 * r * r;
}

std::string describe_grid(const SpaceGrid& g, double dt, std::size_t nt) {
  std::ostringstream os;
  os << "x in [" << g.x_min << ", " << g.x_max << "] n=" << g.n_points
     << " dx=" << g.spacing() << " dt=" << dt << " slices=" << nt;
  return os.str();
}

double principal(double a) {
  while (a > M_PI) a -= 2.0 * M_PI;
  while (a < -M_PI) a += 2.0 * M_PI;
  return a;
}

void check_slice_times(const Trajectory& tr, const std::vector<double>& t_set,
                       double dt, bool need_delay, const char* who) {
  if (t_set.empty()) throw std::invalid_argument(std::string(who) + ": empty t set");
  const double slack = 1e-9 * tr.h;
  for (double t : t_set) {
    if (need_delay && t - tr.params.tau < -slack)
      throw std::invalid_argument(std::string(who) +
                                  ": every t must satisfy t - tau >= 0");
    if (t - dt < tr.t_begin() - slack || t + dt > tr.t_end() + slack)
      throw std::out_of_range(std::string(who) +
                              ": t +/- dt leaves the trajectory domain");
  }
}

}  // namespace

ResidualReport pde_residual(const PacketField& field, const SpaceGrid& grid,
                            const std::vector<double>& t_set, LogTermRoute route,
                            double tolerance) {
  grid.validate();
  const Trajectory& tr = field.trajectory();
  const SimParams& p = tr.params;
  const double h = tr.h;
  check_slice_times(tr, t_set, h, true, "wave equation residual");

  const int n = grid.n_points;
  const double dx = grid.spacing();

  ResidualReport rep;
  rep.name = route == LogTermRoute::analytic_phase ? "wave_equation" : "wave_equation_log";
  rep.tolerance = tolerance > 0 ? tolerance : default_tol_fd(tr);
  rep.grid_spec = describe_grid(grid, h, t_set.size());

  Accum acc;
  std::vector<cplx> prev(n), cur(n), next(n);
  std::vector<double> delay_term(n), weight(n);
  for (double t : t_set) {
    for (int i = 0; i < n; ++i) {
      const double x = grid.point(i);
      prev[i] = field.psi(x, t - h);
      cur[i] = field.psi(x, t);
      next[i] = field.psi(x, t + h);
      weight[i] = std::sqrt(field.rho(x, t));
    }
    if (route == LogTermRoute::analytic_phase) {
      // 2 hbar alpha (S_d - S) is minus the delay potential
      for (int i = 0; i < n; ++i)
        delay_term[i] = -field.extended_potential(grid.point(i), t);
    } else {
      // theta = unwrapped arg of psi_d psi* / (psi_d* psi) = 2 (S_d - S);
      // anchor at the grid point nearest the packet center and walk outward
      const double q = tr.eval(t).q;
      int c = static_cast<int>(std::lround((q - grid.x_min) / dx));
      c = std::clamp(c, 0, n - 1);
      std::vector<double> half(n);  // arg(psi_d psi*)
      for (int i = 0; i < n; ++i)
        half[i] = std::arg(field.psi_delayed(grid.point(i), t) *
                           std::conj(cur[i]));
      std::vector<double> theta(n);
      theta[c] = principal(2.0 * half[c]);
      for (int i = c + 1; i < n; ++i)
        theta[i] = theta[i - 1] + principal(2.0 * (half[i] - half[i - 1]));
      for (int i = c - 1; i >= 0; --i)
        theta[i] = theta[i + 1] + principal(2.0 * (half[i] - half[i + 1]));
      for (int i = 0; i < n; ++i) delay_term[i] = p.hbar * p.alpha * theta[i];
    }
    const cplx ih(0.0, p.hbar);
    for (int i = 2; i < n - 2; ++i) {
      const cplx psi_t = (next[i] - prev[i]) / (2.0 * h);
      const cplx psi_xx = (-cur[i - 2] + 16.0 * cur[i - 1] - 30.0 * cur[i] +
                           16.0 * cur[i + 1] - cur[i + 2]) /
                          (12.0 * dx * dx);
      const cplx r = ih * psi_t + (p.hbar * p.hbar / (2.0 * p.mass)) * psi_xx +
                     delay_term[i] * cur[i];
      acc.add(std::abs(r), weight[i]);
    }
  }
  acc.finish(rep);
  return rep;
}

ResidualReport continuity_residual(const PacketField& field, const SpaceGrid& grid,
                                   const std::vector<double>& t_set,
                                   double tolerance) {
  grid.validate();
  const Trajectory& tr = field.trajectory();
  const double h = tr.h;
  check_slice_times(tr, t_set, h, false, "continuity residual");

  const int n = grid.n_points;
  const double dx = grid.spacing();

  ResidualReport rep;
  rep.name = "continuity";
  rep.tolerance = tolerance > 0 ? tolerance : default_tol_fd(tr);
  rep.grid_spec = describe_grid(grid, h, t_set.size());

  Accum acc;
  std::vector<double> prev(n), cur(n), next(n), flux(n);
  for (double t : t_set) {
    for (int i = 0; i < n; ++i) {
      const double x = grid.point(i);
      prev[i] = field.rho(x, t - h);
      cur[i] = field.rho(x, t);
      next[i] = field.rho(x, t + h);
      flux[i] = cur[i] * field.v_qu(x, t);
    }
    for (int i = 1; i < n - 1; ++i) {
      const double r = (next[i] - prev[i]) / (2.0 * h) +
                       (flux[i + 1] - flux[i - 1]) / (2.0 * dx);
      acc.add(std::abs(r), std::sqrt(cur[i]));
    }
  }
  acc.finish(rep);
  return rep;
}

ResidualReport phase_equation_residual(const PacketField& field, const SpaceGrid& grid,
                                       const std::vector<double>& t_set,
                                       PhaseDtRoute route, double tolerance) {
  grid.validate();
  const Trajectory& tr = field.trajectory();
  const SimParams& p = tr.params;
  const double h = tr.h;
  const double dt_used = route == PhaseDtRoute::central_diff ? h : 0.0;
  check_slice_times(tr, t_set, dt_used, true, "phase equation residual");

  const int n = grid.n_points;

  ResidualReport rep;
  rep.name = route == PhaseDtRoute::analytic ? "phase_equation" : "phase_equation_fd";
  rep.tolerance = tolerance > 0
                      ? tolerance
                      : (route == PhaseDtRoute::analytic ? default_tol_interp(tr)
                                                         : default_tol_fd(tr));
  rep.grid_spec = describe_grid(grid, h, t_set.size());

  Accum acc;
  for (double t : t_set) {
    for (int i = 0; i < n; ++i) {
      const double x = grid.point(i);
      const double dsdt =
          route == PhaseDtRoute::analytic
              ? field.dphase_dt(x, t)
              : (field.phase(x, t + h) - field.phase(x, t - h)) / (2.0 * h);
      const double v = field.v_qu(x, t);
      const double r = p.hbar * dsdt + 0.5 * p.mass * v * v +
                       field.extended_potential(x, t) + field.quantum_potential(x, t);
      acc.add(std::abs(r), std::sqrt(field.rho(x, t)));
    }
  }
  acc.finish(rep);
  return rep;
}

ResidualReport center_line_residual(const Trajectory& traj, double tolerance) {
  const SimParams& p = traj.params;
  const double h = traj.h;
  const int n_steps = static_cast<int>(traj.samples.size()) - 1 - traj.n_pre;

  ResidualReport rep;
  rep.name = "phase_equation_center";
  rep.tolerance = tolerance > 0 ? tolerance : default_tol_interp(traj);
  {
    std::ostringstream os;
    os << "step midpoints, n=" << n_steps << " dt=" << h;
    rep.grid_spec = os.str();
  }

  Accum acc;
  for (int k = 0; k < n_steps; ++k) {
    const double t = (k + 0.5) * h;
    TrajStateExt s = traj.eval_ext(t);
    const double s0_d = traj.eval(t - p.tau).s0;
    const double r = p.hbar * s.s0d - 0.5 * p.mass * s.qd * s.qd +
                     p.hbar * p.hbar / (4.0 * p.mass * s.a * s.a) +
                     2.0 * p.hbar * p.alpha * (s.s0 - s0_d);
    acc.add(std::abs(r), 1.0);
  }
  acc.finish(rep);
  return rep;
}

void BohmSpan::validate() const {
  if (!(t0 >= 0.0)) throw std::invalid_argument("bohm span: t0 must be >= 0");
  if (!(t1 > t0)) throw std::invalid_argument("bohm span: t1 must be > t0");
  if (n_steps < 4) throw std::invalid_argument("bohm span: n_steps must be >= 4");
}

BohmTrajectory integrate_bohm(const PacketField& field, double x_start,
                              const BohmSpan& span, const SpaceGrid& grid) {
  span.validate();
  grid.validate();
  if (x_start < grid.x_min || x_start > grid.x_max)
    throw std::invalid_argument("bohm path: x_start outside the grid");

  const double dt = (span.t1 - span.t0) / span.n_steps;
  BohmTrajectory path;
  path.t.reserve(span.n_steps + 1);
  path.x.reserve(span.n_steps + 1);
  path.v.reserve(span.n_steps + 1);

  double x = x_start;
  path.t.push_back(span.t0);
  path.x.push_back(x);
  path.v.push_back(field.v_qu(x, span.t0));
  for (int k = 0; k < span.n_steps; ++k) {
    const double t = span.t0 + k * dt;
    const double k1 = field.v_qu(x, t);
    const double k2 = field.v_qu(x + 0.5 * dt * k1, t + 0.5 * dt);
    const double k3 = field.v_qu(x + 0.5 * dt * k2, t + 0.5 * dt);
    const double k4 = field.v_qu(x + dt * k3, t + dt);
    const double xn = x + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (xn < grid.x_min || xn > grid.x_max) {
      path.truncated = true;
      break;
    }
    x = xn;
    path.t.push_back(t + dt);
    path.x.push_back(x);
    path.v.push_back(field.v_qu(x, t + dt));
  }
  return path;
}

ResidualReport bohm_trajectory_residual(const PacketField& field, double x_start,
                                        const BohmSpan& span, const SpaceGrid& grid,
                                        double tolerance) {
  // The quiescent start leaves a jump in the second time derivative of v_qu
  // at t = tau, and a central difference across it is only first order.
  // Restricting the check to t >= tau keeps the breakpoint off the stencils
  // (later breakpoints at 2 tau, 3 tau, ... are one derivative smoother each
  // and harmless).
  if (span.t0 < field.trajectory().params.tau - 1e-12)
    throw std::invalid_argument("bohm residual: span must start at or after the delay");
  BohmTrajectory path = integrate_bohm(field, x_start, span, grid);
  if (path.x.size() < 3)
    throw std::runtime_error("bohm path: too few nodes inside the grid to check");

  const Trajectory& tr = field.trajectory();
  const SimParams& p = tr.params;
  const double dt = (span.t1 - span.t0) / span.n_steps;

  ResidualReport rep;
  rep.name = "bohm_trajectory";
  {
    const double r = 64.0 * dt / p.tau;
    rep.tolerance = tolerance > 0 ? tolerance : 1e-4 * r * r;
  }
  rep.truncated = path.truncated;
  {
    std::ostringstream os;
    os << "path from x=" << x_start << " over [" << span.t0 << ", " << span.t1
       << "] dt=" << dt << " nodes=" << path.x.size();
    if (path.truncated) os << " (truncated at the grid edge)";
    rep.grid_spec = os.str();
  }

  Accum acc;
  for (std::size_t k = 1; k + 1 < path.x.size(); ++k) {
    const double dvdt = (path.v[k + 1] - path.v[k - 1]) / (2.0 * dt);
    const double v_que = field.v_qu_delayed(path.x[k], path.t[k]);
    const double r = p.mass * dvdt -
                     2.0 * p.alpha * p.mass * (v_que - path.v[k]) -
                     field.quantum_force(path.x[k], path.t[k]);
    acc.add(std::abs(r), 1.0);
  }
  acc.finish(rep);
  return rep;
}

}  // namespace qsp
