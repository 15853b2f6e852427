#include "qsp/params.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace qsp {

void ElectronConstants::validate() const {
  if (!(e >= 0.0) || !std::isfinite(e)) throw std::invalid_argument("electron constants: e must be >= 0");
  if (!(m > 0.0)) throw std::invalid_argument("electron constants: m must be > 0");
  if (!(c > 0.0)) throw std::invalid_argument("electron constants: c must be > 0");
  if (!(L > 0.0)) throw std::invalid_argument("electron constants: L must be > 0");
  if (L < classical_radius()) {
    std::ostringstream os;
    os << "electron constants violate causality: size L = " << L
       << " must not be smaller than the classical radius e^2/(m c^2) = "
       << classical_radius() << " or the self-force feedback is acausal";
    throw std::invalid_argument(os.str());
  }
}

void SimParams::validate() const {
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw std::invalid_argument("params: alpha must be >= 0");
  if (!(tau > 0.0)) throw std::invalid_argument("params: tau must be > 0");
  if (!(hbar > 0.0)) throw std::invalid_argument("params: hbar must be > 0");
  if (!(mass > 0.0)) throw std::invalid_argument("params: mass must be > 0");
}

SimParams derive_params(const ElectronConstants& consts, double hbar) {
  consts.validate();
  SimParams p;
  p.alpha = consts.e * consts.e / (6.0 * consts.m * consts.L * consts.L * consts.c);
  p.tau = 2.0 * consts.L / consts.c;
  p.hbar = hbar;
  p.mass = consts.m;
  p.provenance = ParamProvenance::derived_from_constants;
  p.validate();
  return p;
}

void InitialConditions::validate() const {
  if (!(a_o > 0.0)) throw std::invalid_argument("initial conditions: a_o must be > 0");
}

SimParams DimensionlessMap::map_back() const {
  SimParams p = params;
  p.alpha = params.alpha / scales.time;
  p.tau = params.tau * scales.time;
  p.hbar = params.hbar * scales.mass * scales.length * scales.length / scales.time;
  p.mass = params.mass * scales.mass;
  return p;
}

InitialConditions DimensionlessMap::ics_internal(const InitialConditions& ics) const {
  InitialConditions r = ics;
  double vel = scales.length / scales.time;
  r.x_o = ics.x_o / scales.length;
  r.v_o = ics.v_o / vel;
  r.a_o = ics.a_o / scales.length;
  r.b_o = ics.b_o / vel;
  // ramp slopes are accelerations
  r.prehistory.ramp.kappa_q = ics.prehistory.ramp.kappa_q / (vel / scales.time);
  r.prehistory.ramp.kappa_a = ics.prehistory.ramp.kappa_a / (vel / scales.time);
  return r;
}

DimensionlessMap dimensionless(const SimParams& p) {
  p.validate();
  DimensionlessMap d;
  d.scales.length = 1.0;
  d.scales.mass = p.mass;
  d.scales.time = p.mass / p.hbar;  // makes hbar' = 1 with mass' = 1
  d.params.alpha = p.alpha * d.scales.time;
  d.params.tau = p.tau / d.scales.time;
  d.params.hbar = 1.0;
  d.params.mass = 1.0;
  d.params.provenance = p.provenance;
  return d;
}

}  // namespace qsp
