#pragma once

#include <vector>

#include "qsp/params.hpp"

namespace qsp {

struct StepSpec {
  int steps_per_delay = 64;  // N >= 4; step h = tau/N divides the lag exactly
  double t_end = 1.0;
  void validate() const;
};

// Direction of the delay bracket in the S0 equation.  delayed_minus_current is
// the self-consistent choice (the assembled packet then satisfies the field
// equations); current_minus_delayed is kept so comparison runs can show what
// the flipped bracket does.  Config files select these as "eq313" / "eq318".
enum class ActionConvention { delayed_minus_current, current_minus_delayed };

struct TrajSample {
  double q, qd, qdd;
  double a, ad, add;
  double s0, s0d;
  double iacc, iaccd;  // action integral accumulated alongside S0; iacc(0) = 0
};

struct TrajState {
  double q, qd, a, ad, s0;
};

struct TrajStateExt {
  double q, qd, qdd, a, ad, add, s0, s0d;
};

// Dense solution of
//   qddot = 2 alpha [qdot(t-tau) - qdot(t)]
//   addot = 2 alpha [adot(t-tau) - adot(t)] + hbar^2/(4 m^2 a^3)
//   S0dot = (1/hbar)(m qdot^2/2 - hbar^2/(4 m a^2)) + 2 alpha [S0(t-tau) - S0(t)]
// by the method of steps: classical RK4 with h = tau/N, delayed values read
// from the cubic Hermite interpolant of the already-finished history (or from
// the analytic pre-history for arguments <= 0).
class Trajectory {
 public:
  SimParams params;
  InitialConditions ics;
  StepSpec spec;
  ActionConvention convention = ActionConvention::delayed_minus_current;
  double h = 0.0;
  int n_pre = 0;  // nodes before t = 0 (== steps_per_delay)
  std::vector<double> t_grid;        // node j at (j - n_pre) * h
  std::vector<TrajSample> samples;

  double t_begin() const { return t_grid.front(); }
  double t_end() const { return t_grid.back(); }

  // Hermite-interpolated state; exact at grid nodes.  Valid on [-tau, t_end].
  TrajState eval(double t) const;
  // Adds the second derivatives / S0 rate from the interpolant slope.
  TrajStateExt eval_ext(double t) const;
  // Accumulated action integral I(t); 0 for t <= 0.
  double action_integral(double t) const;

  // Pre-history values (analytic), valid for t <= 0.
  TrajStateExt prehistory(double t) const;

 private:
  friend Trajectory solve_system(const SimParams&, const InitialConditions&,
                                 const StepSpec&, ActionConvention);
  int locate(double t) const;  // segment index for t > 0
};

Trajectory solve_system(const SimParams& params, const InitialConditions& ics,
                        const StepSpec& spec,
                        ActionConvention convention = ActionConvention::delayed_minus_current);

// Richardson-style observed order from solves at geometrically refined steps.
// Diffs that fail to shrink monotonically (or sit at roundoff) are flagged
// inconclusive instead of throwing.
struct ConvergenceEstimate {
  double order_q = 0.0;
  double order_a = 0.0;
  bool conclusive_q = false;
  bool conclusive_a = false;
};

ConvergenceEstimate convergence_order(const SimParams& params, const InitialConditions& ics,
                                      const std::vector<StepSpec>& specs,
                                      ActionConvention convention = ActionConvention::delayed_minus_current);

}  // namespace qsp
