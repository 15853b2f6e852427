#include "qsp/dde.hpp"

#include <array>
#include <cmath>
#include <cstddef>
#include <sstream>
#include <stdexcept>

namespace qsp {

namespace {

// cubic Hermite basis on u in [0,1], plus d/du
inline double h00(double u) { return (1.0 + 2.0 * u) * (1.0 - u) * (1.0 - u); }
inline double h10(double u) { return u * (1.0 - u) * (1.0 - u); }
inline double h01(double u) { return u * u * (3.0 - 2.0 * u); }
inline double h11(double u) { return u * u * (u - 1.0); }
inline double g00(double u) { return 6.0 * u * (u - 1.0); }
inline double g10(double u) { return (3.0 * u - 1.0) * (u - 1.0); }
inline double g01(double u) { return -6.0 * u * (u - 1.0); }
inline double g11(double u) { return u * (3.0 * u - 2.0); }

inline double hermite(double p0, double m0, double p1, double m1, double u, double h) {
  return h00(u) * p0 + h10(u) * h * m0 + h01(u) * p1 + h11(u) * h * m1;
}
inline double hermite_d(double p0, double m0, double p1, double m1, double u, double h) {
  return (g00(u) * p0 + g01(u) * p1) / h + g10(u) * m0 + g11(u) * m1;
}

// state / derivative layout: q, qd, a, ad, s0, iacc
using Vec6 = std::array<double, 6>;

struct DelayedVals {
  double qd, ad, s0;
};

struct WidthCollapse {
  double t, a;
};

class Stepper {
 public:
  Stepper(Trajectory& traj, double sgn) : T(traj), sgn_(sgn) {}

  DelayedVals delayed(int seg, double u) const {
    if (seg < T.n_pre) {  // segment lies in the pre-history
      double t = (static_cast<double>(seg - T.n_pre) + u) * T.h;
      if (t > 0.0) t = 0.0;
      TrajStateExt p = T.prehistory(t);
      return {p.qd, p.ad, p.s0};
    }
    const TrajSample& l = T.samples[seg];
    const TrajSample& r = T.samples[seg + 1];
    if (u == 0.0) return {l.qd, l.ad, l.s0};
    if (u == 1.0) return {r.qd, r.ad, r.s0};
    return {hermite(l.qd, l.qdd, r.qd, r.qdd, u, T.h),
            hermite(l.ad, l.add, r.ad, r.add, u, T.h),
            hermite(l.s0, l.s0d, r.s0, r.s0d, u, T.h)};
  }

  Vec6 rhs(const Vec6& y, const DelayedVals& d, double t_diag) const {
    double qd = y[1], a = y[2], ad = y[3], s0 = y[4];
    if (!(a > 0.0)) throw WidthCollapse{t_diag, a};
    const SimParams& P = T.params;
    double hb = P.hbar, m = P.mass, al = P.alpha;
    double s0d = (0.5 * m * qd * qd - hb * hb / (4.0 * m * a * a)) / hb +
                 2.0 * al * sgn_ * (d.s0 - s0);
    return {qd,
            2.0 * al * (d.qd - qd),
            ad,
            2.0 * al * (d.ad - ad) + hb * hb / (4.0 * m * m * a * a * a),
            s0d,
            hb * s0d};
  }

  void store(int node, const Vec6& y) {
    Vec6 d = rhs(y, delayed(node - T.n_pre, 0.0), T.t_grid[node]);
    T.samples[node] = {y[0], y[1], d[1], y[2], y[3], d[3], y[4], d[4], y[5], d[5]};
  }

  void advance(Vec6& y, int seg, double t0) {
    double h = T.h;
    Vec6 w;
    Vec6 k1 = rhs(y, delayed(seg, 0.0), t0);
    for (int c = 0; c < 6; ++c) w[c] = y[c] + 0.5 * h * k1[c];
    Vec6 k2 = rhs(w, delayed(seg, 0.5), t0 + 0.5 * h);
    for (int c = 0; c < 6; ++c) w[c] = y[c] + 0.5 * h * k2[c];
    Vec6 k3 = rhs(w, delayed(seg, 0.5), t0 + 0.5 * h);
    for (int c = 0; c < 6; ++c) w[c] = y[c] + h * k3[c];
    Vec6 k4 = rhs(w, delayed(seg, 1.0), t0 + h);
    for (int c = 0; c < 6; ++c)
      y[c] += h / 6.0 * (k1[c] + 2.0 * k2[c] + 2.0 * k3[c] + k4[c]);
  }

 private:
  Trajectory& T;
  double sgn_;
};

[[noreturn]] void throw_width(double t, double a) {
  std::ostringstream os;
  os << "width became non-positive during integration: a = " << a << " near t = " << t;
  throw std::runtime_error(os.str());
}

}  // namespace

void StepSpec::validate() const {
  if (steps_per_delay < 4) throw std::invalid_argument("step spec: steps_per_delay must be >= 4");
  if (!(t_end > 0.0)) throw std::invalid_argument("step spec: t_end must be > 0");
}

TrajStateExt Trajectory::prehistory(double t) const {
  double s00 = params.mass * ics.v_o * ics.x_o / params.hbar;
  if (ics.prehistory.kind == Prehistory::Kind::constant) {
    return {ics.x_o + ics.v_o * t, ics.v_o, 0.0,
            ics.a_o + ics.b_o * t, ics.b_o, 0.0, s00, 0.0};
  }
  double kq = ics.prehistory.ramp.kappa_q;
  double ka = ics.prehistory.ramp.kappa_a;
  return {ics.x_o + ics.v_o * t + 0.5 * kq * t * t, ics.v_o + kq * t, kq,
          ics.a_o + ics.b_o * t + 0.5 * ka * t * t, ics.b_o + ka * t, ka, s00, 0.0};
}

int Trajectory::locate(double t) const {
  int j = n_pre + static_cast<int>(std::floor(t / h));
  int last = static_cast<int>(t_grid.size()) - 2;
  if (j < 0) j = 0;
  if (j > last) j = last;
  while (j > 0 && t < t_grid[j]) --j;
  while (j < last && t > t_grid[j + 1]) ++j;
  return j;
}

TrajState Trajectory::eval(double t) const {
  double slack = 1e-9 * h;
  if (t < t_begin() - slack || t > t_end() + slack) {
    std::ostringstream os;
    os << "time " << t << " outside trajectory domain [" << t_begin() << ", " << t_end() << "]";
    throw std::out_of_range(os.str());
  }
  if (t <= 0.0) {
    TrajStateExt p = prehistory(t < t_begin() ? t_begin() : t);
    return {p.q, p.qd, p.a, p.ad, p.s0};
  }
  int j = locate(t);
  const TrajSample& l = samples[j];
  const TrajSample& r = samples[j + 1];
  if (t == t_grid[j]) return {l.q, l.qd, l.a, l.ad, l.s0};
  if (t == t_grid[j + 1]) return {r.q, r.qd, r.a, r.ad, r.s0};
  double u = (t - t_grid[j]) / h;
  return {hermite(l.q, l.qd, r.q, r.qd, u, h),
          hermite(l.qd, l.qdd, r.qd, r.qdd, u, h),
          hermite(l.a, l.ad, r.a, r.ad, u, h),
          hermite(l.ad, l.add, r.ad, r.add, u, h),
          hermite(l.s0, l.s0d, r.s0, r.s0d, u, h)};
}

TrajStateExt Trajectory::eval_ext(double t) const {
  double slack = 1e-9 * h;
  if (t < t_begin() - slack || t > t_end() + slack) {
    std::ostringstream os;
    os << "time " << t << " outside trajectory domain [" << t_begin() << ", " << t_end() << "]";
    throw std::out_of_range(os.str());
  }
  if (t <= 0.0) return prehistory(t < t_begin() ? t_begin() : t);
  int j = locate(t);
  const TrajSample& l = samples[j];
  const TrajSample& r = samples[j + 1];
  if (t == t_grid[j]) return {l.q, l.qd, l.qdd, l.a, l.ad, l.add, l.s0, l.s0d};
  if (t == t_grid[j + 1]) return {r.q, r.qd, r.qdd, r.a, r.ad, r.add, r.s0, r.s0d};
  double u = (t - t_grid[j]) / h;
  return {hermite(l.q, l.qd, r.q, r.qd, u, h),
          hermite(l.qd, l.qdd, r.qd, r.qdd, u, h),
          hermite_d(l.qd, l.qdd, r.qd, r.qdd, u, h),
          hermite(l.a, l.ad, r.a, r.ad, u, h),
          hermite(l.ad, l.add, r.ad, r.add, u, h),
          hermite_d(l.ad, l.add, r.ad, r.add, u, h),
          hermite(l.s0, l.s0d, r.s0, r.s0d, u, h),
          hermite_d(l.s0, l.s0d, r.s0, r.s0d, u, h)};
}

double Trajectory::action_integral(double t) const {
  if (t <= 0.0) return 0.0;
  double slack = 1e-9 * h;
  if (t > t_end() + slack) {
    std::ostringstream os;
    os << "time " << t << " outside trajectory domain [" << t_begin() << ", " << t_end() << "]";
    throw std::out_of_range(os.str());
  }
  int j = locate(t);
  const TrajSample& l = samples[j];
  const TrajSample& r = samples[j + 1];
  if (t == t_grid[j]) return l.iacc;
  if (t == t_grid[j + 1]) return r.iacc;
  double u = (t - t_grid[j]) / h;
  return hermite(l.iacc, l.iaccd, r.iacc, r.iaccd, u, h);
}

Trajectory solve_system(const SimParams& params, const InitialConditions& ics,
                        const StepSpec& spec, ActionConvention convention) {
  params.validate();
  ics.validate();
  spec.validate();

  Trajectory T;
  T.params = params;
  T.ics = ics;
  T.spec = spec;
  T.convention = convention;
  int N = spec.steps_per_delay;
  T.n_pre = N;
  double h = params.tau / N;
  T.h = h;
  int n_steps = static_cast<int>(std::ceil(spec.t_end / h - 1e-9));
  if (n_steps < 1) n_steps = 1;
  int n_nodes = N + n_steps + 1;
  T.t_grid.resize(n_nodes);
  T.samples.resize(n_nodes);
  for (int j = 0; j < n_nodes; ++j) T.t_grid[j] = static_cast<double>(j - N) * h;

  // pre-history nodes with their left-limit derivatives; node N is
  // overwritten below with the right-limit rates of the integrated system
  for (int j = 0; j <= N; ++j) {
    TrajStateExt p = T.prehistory(T.t_grid[j] < -params.tau ? -params.tau : T.t_grid[j]);
    if (!(p.a > 0.0)) throw_width(T.t_grid[j], p.a);
    T.samples[j] = {p.q, p.qd, p.qdd, p.a, p.ad, p.add, p.s0, p.s0d, 0.0, 0.0};
  }

  double sgn = convention == ActionConvention::delayed_minus_current ? 1.0 : -1.0;
  Stepper st(T, sgn);
  Vec6 y = {ics.x_o, ics.v_o, ics.a_o, ics.b_o,
            params.mass * ics.v_o * ics.x_o / params.hbar, 0.0};
  try {
    st.store(N, y);
    for (int i = N; i < n_nodes - 1; ++i) {
      st.advance(y, i - N, T.t_grid[i]);
      if (!(y[2] > 0.0)) throw_width(T.t_grid[i + 1], y[2]);
      st.store(i + 1, y);
    }
  } catch (const WidthCollapse& w) {
    throw_width(w.t, w.a);
  }
  return T;
}

ConvergenceEstimate convergence_order(const SimParams& params, const InitialConditions& ics,
                                      const std::vector<StepSpec>& specs,
                                      ActionConvention convention) {
  if (specs.size() < 3) throw std::invalid_argument("convergence_order: need at least 3 step specs");
  double t_end = specs.front().t_end;
  double ratio = 0.0;
  for (std::size_t i = 0; i < specs.size(); ++i) {
    if (specs[i].t_end != t_end)
      throw std::invalid_argument("convergence_order: specs must share t_end");
    if (i > 0) {
      double r = static_cast<double>(specs[i].steps_per_delay) / specs[i - 1].steps_per_delay;
      if (r <= 1.0) throw std::invalid_argument("convergence_order: specs must refine the step");
      if (ratio == 0.0)
        ratio = r;
      else if (std::abs(r - ratio) > 1e-12 * ratio)
        throw std::invalid_argument("convergence_order: refinement must be geometric");
    }
  }

  std::vector<double> qT, aT;
  for (const StepSpec& s : specs) {
    Trajectory tr = solve_system(params, ics, s, convention);
    TrajState v = tr.eval(t_end);
    qT.push_back(v.q);
    aT.push_back(v.a);
  }

  auto estimate = [&](const std::vector<double>& v, double& order, bool& conclusive) {
    std::vector<double> d;
    for (std::size_t i = 0; i + 1 < v.size(); ++i) d.push_back(std::abs(v[i + 1] - v[i]));
    double floor_ = 1e-13 * std::max(1.0, std::abs(v.back()));
    bool ok = true;
    for (std::size_t i = 0; i + 1 < d.size(); ++i)
      if (!(d[i] > d[i + 1]) || d[i + 1] < floor_) ok = false;
    if (d.back() < floor_ || d.front() < floor_) ok = false;
    double acc = 0.0;
    int n = 0;
    for (std::size_t i = 0; i + 1 < d.size(); ++i) {
      if (d[i] > 0.0 && d[i + 1] > 0.0) {
        acc += std::log(d[i] / d[i + 1]) / std::log(ratio);
        ++n;
      }
    }
    order = n ? acc / n : 0.0;
    conclusive = ok && n > 0;
  };

  ConvergenceEstimate e;
  estimate(qT, e.order_q, e.conclusive_q);
  estimate(aT, e.order_a, e.conclusive_a);
  return e;
}

}  // namespace qsp
