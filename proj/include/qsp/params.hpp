#pragma once

namespace qsp {

// Uniformly charged sphere treated as a classical extended charge.  The
// self-force feedback is finite and causal only when the sphere is larger
// than the classical radius e^2/(m c^2).
struct ElectronConstants {
  double e = 1.0;  // surface charge
  double m = 1.0;  // mass
  double c = 1.0;  // light speed
  double L = 1.0;  // sphere radius
  double classical_radius() const { return e * e / (m * c * c); }
  void validate() const;  // throws std::invalid_argument
};

enum class ParamProvenance { direct, derived_from_constants };

struct SimParams {
  double alpha = 0.0;  // self-interaction coupling (inverse time)
  double tau = 0.1;    // feedback delay
  double hbar = 1.0;
  double mass = 1.0;
  ParamProvenance provenance = ParamProvenance::direct;
  void validate() const;
};

// alpha = e^2 / (6 m L^2 c),  tau = 2 L / c
SimParams derive_params(const ElectronConstants& consts, double hbar = 1.0);

struct PrehistoryRamp {
  double kappa_q = 0.0;  // d/dt of qdot on t <= 0
  double kappa_a = 0.0;  // d/dt of adot on t <= 0
};

// The delay terms need qdot, adot, S0 on [-tau, 0); the model itself does not
// fix them.  Default: constant (quiescent) history qdot = v_o, adot = b_o.
// The ramp variant exists to give the delay brackets something nonzero to see
// in tests.  S0 history is always the constant S0(0).
struct Prehistory {
  enum class Kind { constant, linear_ramp };
  Kind kind = Kind::constant;
  PrehistoryRamp ramp;
};

struct InitialConditions {
  double x_o = 0.0;  // initial center
  double v_o = 0.0;  // initial center velocity
  double a_o = 1.0;  // initial width
  double b_o = 0.0;  // initial width rate
  Prehistory prehistory;
  void validate() const;
};

// value_in_input_units = value_internal * factor (per dimension)
struct UnitScales {
  double length = 1.0;
  double time = 1.0;
  double mass = 1.0;
};

// Rescaling onto hbar = mass = 1.  Lengths are kept as given; the time unit
// absorbs hbar/mass.  S0 is a phase and passes through unchanged.
struct DimensionlessMap {
  SimParams params;  // hbar == mass == 1
  UnitScales scales;

  SimParams map_back() const;
  InitialConditions ics_internal(const InitialConditions& ics) const;

  double time_out(double t) const { return t * scales.time; }
  double length_out(double x) const { return x * scales.length; }
  double velocity_out(double v) const { return v * scales.length / scales.time; }
  double time_in(double t) const { return t / scales.time; }
};

DimensionlessMap dimensionless(const SimParams& p);

}  // namespace qsp
