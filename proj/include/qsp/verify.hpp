#pragma once

#include <string>
#include <vector>

#include "qsp/packet.hpp"

namespace qsp {

// Residual oracle outcome.  max_abs / rms are density-weighted (|r| sqrt(rho))
// where weighting applies; the verdict always uses the weighted numbers since
// relative error in the Gaussian tails is meaningless.  Raw values are kept
// alongside for diagnostics.
struct ResidualReport {
  std::string name;
  double max_abs = 0.0;
  double rms = 0.0;
  double max_abs_raw = 0.0;
  double rms_raw = 0.0;
  std::string grid_spec;
  double tolerance = 0.0;
  bool passed = false;
  bool truncated = false;  // bohm path left the grid early
};

// How the delay term of the wave equation is evaluated: straight from the two
// phase polynomials, or from the branch-unwrapped argument of the ratio
// psi_delayed psi* / (psi_delayed* psi).  Both must agree wherever the density
// is not negligible.
enum class LogTermRoute { analytic_phase, complex_log };

// Source of dS/dt in the phase-equation check
enum class PhaseDtRoute { analytic, central_diff };

// Residual of i hbar dpsi/dt + (hbar^2/2m) d2psi/dx2 + 2 hbar alpha (S_d - S) psi.
// Time derivative: 2nd-order central over slices one DDE step apart.  Space:
// 4th-order central stencil.  Every t must satisfy t - tau >= 0.
// tolerance = 0 picks the default, which scales with the step squared.
ResidualReport pde_residual(const PacketField& field, const SpaceGrid& grid,
                            const std::vector<double>& t_set,
                            LogTermRoute route = LogTermRoute::analytic_phase,
                            double tolerance = 0.0);

// Residual of drho/dt + d(rho v_qu)/dx, central differences in both variables.
ResidualReport continuity_residual(const PacketField& field, const SpaceGrid& grid,
                                   const std::vector<double>& t_set,
                                   double tolerance = 0.0);

// Residual of hbar dS/dt + m v_qu^2 / 2 + V_ee + V_qu.
ResidualReport phase_equation_residual(const PacketField& field, const SpaceGrid& grid,
                                       const std::vector<double>& t_set,
                                       PhaseDtRoute route = PhaseDtRoute::analytic,
                                       double tolerance = 0.0);

// The same balance restricted to the packet center x = q(t):
//   hbar S0dot - m qdot^2 / 2 + hbar^2/(4 m a^2) + 2 hbar alpha [S0(t) - S0(t-tau)].
// Evaluated at step midpoints: at the nodes the stored rates satisfy this by
// construction, so midpoints are where the interpolant can actually fail.
ResidualReport center_line_residual(const Trajectory& traj, double tolerance = 0.0);

struct BohmSpan {
  double t0 = 0.0;
  double t1 = 1.0;
  int n_steps = 256;
  void validate() const;
};

struct BohmTrajectory {
  std::vector<double> t, x, v;  // nodes of the integrated path, v = v_qu there
  bool truncated = false;
};

// Integrates dx/dt = v_qu(x, t) by RK4; stops early (truncated) if the path
// leaves the grid box.
BohmTrajectory integrate_bohm(const PacketField& field, double x_start,
                              const BohmSpan& span, const SpaceGrid& grid);

// Along the integrated path, checks the delayed equation of motion
//   m dv/dt = 2 alpha m [v_que - v_qu] + F_qu
// with dv/dt by central differences at interior path nodes.
ResidualReport bohm_trajectory_residual(const PacketField& field, double x_start,
                                        const BohmSpan& span, const SpaceGrid& grid,
                                        double tolerance = 0.0);

}  // namespace qsp
