#include "qsp/packet.hpp"

#include <cmath>
#include <stdexcept>

namespace qsp {

void SpaceGrid::validate() const {
  if (n_points < 3) throw std::invalid_argument("space grid: n_points must be >= 3");
  if (!(x_min < x_max)) throw std::invalid_argument("space grid: x_min must be < x_max");
}

PacketField::PacketField(const Trajectory& traj, FieldCorruption corruption)
    : traj_(&traj), corrupt_(corruption) {
  const SimParams& p = traj.params;
  s00_ = p.mass * traj.ics.v_o * traj.ics.x_o / p.hbar;
}

TrajState PacketField::state(double t) const {
  TrajState s = traj_->eval(t);
  s.a *= corrupt_.width_scale;
  return s;
}

double PacketField::rho(double x, double t) const {
  TrajState s = state(t);
  const double u = x - s.q;
  return std::exp(-u * u / (2.0 * s.a * s.a)) / std::sqrt(2.0 * M_PI * s.a * s.a);
}

double PacketField::phase(double x, double t) const {
  TrajState s = state(t);
  const SimParams& p = traj_->params;
  const double u = x - s.q;
  return s.s0 + (p.mass * s.qd / p.hbar) * u +
         (p.mass / (2.0 * p.hbar)) * (s.ad / s.a) * u * u;
}

double PacketField::phase_delayed(double x, double t) const {
  TrajState s = state(t);
  TrajState d = state(t - traj_->params.tau);
  const SimParams& p = traj_->params;
  const double u = x - s.q;  // displacement from the current center
  return d.s0 + (p.mass * d.qd / p.hbar) * u +
         (p.mass / (2.0 * p.hbar)) * (d.ad / s.a) * u * u;  // current width
}

std::complex<double> PacketField::psi(double x, double t) const {
  TrajState s = state(t);
  const SimParams& p = traj_->params;
  const double u = x - s.q;
  const double amp = std::pow(2.0 * M_PI * s.a * s.a, -0.25) *
                     std::exp(-u * u / (4.0 * s.a * s.a));
  const double ph = action_phase(t) + (p.mass * s.qd / p.hbar) * u +
                    (p.mass / (2.0 * p.hbar)) * (s.ad / s.a) * u * u;
  return std::polar(amp, ph);
}

std::complex<double> PacketField::psi_delayed(double x, double t) const {
  TrajState s = state(t);
  const double u = x - s.q;
  const double amp = std::pow(2.0 * M_PI * s.a * s.a, -0.25) *
                     std::exp(-u * u / (4.0 * s.a * s.a));
  return std::polar(amp, phase_delayed(x, t));
}

double PacketField::v_qu(double x, double t) const {
  TrajState s = state(t);
  return s.qd + (s.ad / s.a) * (x - s.q) + corrupt_.v_offset;
}

double PacketField::v_qu_delayed(double x, double t) const {
  TrajState s = state(t);
  TrajState d = state(t - traj_->params.tau);
  return d.qd + (d.ad / s.a) * (x - s.q);
}

double PacketField::quantum_potential(double x, double t) const {
  TrajState s = state(t);
  const SimParams& p = traj_->params;
  const double u = x - s.q;
  const double a2 = s.a * s.a;
  return p.hbar * p.hbar / (4.0 * p.mass * a2) -
         p.hbar * p.hbar * u * u / (8.0 * p.mass * a2 * a2);
}

double PacketField::quantum_force(double x, double t) const {
  TrajState s = state(t);
  const SimParams& p = traj_->params;
  const double u = x - s.q;
  const double a2 = s.a * s.a;
  return p.hbar * p.hbar * u / (4.0 * p.mass * a2 * a2);
}

double PacketField::extended_potential(double x, double t) const {
  if (t < 0.0) throw std::out_of_range("extended potential needs t >= 0 so the delayed phase exists");
  TrajState s = state(t);
  TrajState d = state(t - traj_->params.tau);
  const SimParams& p = traj_->params;
  const double u = x - s.q;
  // difference of the two phase polynomials, term by term, to avoid cancellation
  const double diff = (s.s0 - d.s0) + (p.mass / p.hbar) * (s.qd - d.qd) * u +
                      (p.mass / (2.0 * p.hbar)) * ((s.ad - d.ad) / s.a) * u * u;
  return 2.0 * p.hbar * p.alpha * diff;
}

double PacketField::dphase_dt(double x, double t) const {
  TrajStateExt s = traj_->eval_ext(t);
  s.a *= corrupt_.width_scale;
  const SimParams& p = traj_->params;
  const double u = x - s.q;
  const double r = s.ad / s.a;
  return s.s0d + (p.mass / p.hbar) * (s.qdd * u - s.qd * s.qd - r * s.qd * u) +
         (p.mass / (2.0 * p.hbar)) * (s.add / s.a - r * r) * u * u;
}

double PacketField::action_phase(double t) const {
  return s00_ + traj_->action_integral(t) / traj_->params.hbar;
}

}  // namespace qsp
