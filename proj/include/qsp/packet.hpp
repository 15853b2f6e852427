#pragma once

#include <complex>

#include "qsp/dde.hpp"

namespace qsp {

struct SpaceGrid {
  double x_min = -8.0;
  double x_max = 8.0;
  int n_points = 513;
  void validate() const;  // throws std::invalid_argument
  double spacing() const { return (x_max - x_min) / (n_points - 1); }
  double point(int i) const { return x_min + i * spacing(); }
};

// Deliberate defect injection for the residual checks.  width_scale multiplies
// a(t) wherever the width enters a field (the rate adot stays untouched, which
// is what breaks the continuity identity); v_offset shifts the flow velocity
// only.
struct FieldCorruption {
  double width_scale = 1.0;
  double v_offset = 0.0;
};

// All closed-form fields of the Gaussian packet
//   rho  = [2 pi a^2]^{-1/2} exp(-(x-q)^2 / 2a^2)
//   S    = S0 + (m qdot/hbar)(x-q) + (m/2hbar)(adot/a)(x-q)^2
//   psi  = sqrt(rho) e^{iS}
// plus the delayed phase (delayed S0, qdot, adot, but current a and current
// displacement x - q(t)), flow velocities, quantum potential/force, and the
// delay potential 2 hbar alpha (S - S_delayed).
class PacketField {
 public:
  explicit PacketField(const Trajectory& traj, FieldCorruption corruption = {});
  // the field keeps a reference; a temporary trajectory would dangle
  explicit PacketField(Trajectory&& traj, FieldCorruption corruption = {}) = delete;

  double rho(double x, double t) const;
  double phase(double x, double t) const;
  double phase_delayed(double x, double t) const;
  std::complex<double> psi(double x, double t) const;
  std::complex<double> psi_delayed(double x, double t) const;
  double v_qu(double x, double t) const;
  double v_qu_delayed(double x, double t) const;
  double quantum_potential(double x, double t) const;
  double quantum_force(double x, double t) const;  // -d/dx quantum_potential
  double extended_potential(double x, double t) const;
  // analytic time derivative of the phase, from the interpolant rates
  double dphase_dt(double x, double t) const;
  // S0(0) + I(t)/hbar: the phase constant entering psi
  double action_phase(double t) const;

  const Trajectory& trajectory() const { return *traj_; }
  const FieldCorruption& corruption() const { return corrupt_; }

 private:
  const Trajectory* traj_;
  FieldCorruption corrupt_;
  double s00_;

  TrajState state(double t) const;  // corruption applied
};

}  // namespace qsp
