#include "qsp/propagator.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>
#include <string>

#include "qsp/gauss_legendre.hpp"

namespace qsp {

namespace {

constexpr int kPanelNodes = 32;

// Re(exponent) is a concave quadratic with peak value 0 (the envelope maximum);
// a panel whose best value sits this far below contributes < 1e-17 of the peak.
constexpr double kDeadPanelDrop = 41.0;

struct ExpCoeffs {
  std::complex<double> c2, c1, c0;
};

// Largest value of the concave quadratic r2 v^2 + r1 v + r0 on [lo, hi].
double concave_max(double r2, double r1, double r0, double lo, double hi) {
  double best = std::max(r2 * lo * lo + r1 * lo + r0, r2 * hi * hi + r1 * hi + r0);
  if (r2 < 0.0) {
    double vtx = -r1 / (2.0 * r2);
    if (vtx > lo && vtx < hi) best = std::max(best, r2 * vtx * vtx + r1 * vtx + r0);
  }
  return best;
}

// Sum_panels Sum_nodes w * exp(c2 v^2 + c1 v + c0) over [-v_max, v_max] with
// `panels` equal panels of 32-node Gauss-Legendre.  Panels whose envelope
// cannot reach within kDeadPanelDrop of the global peak are skipped outright;
// the node loop runs in a fixed order so the sum is bit-reproducible.
std::complex<double> panel_integral(const ExpCoeffs& e, double v_max, int panels) {
  const GaussLegendre& gl = gauss_legendre(kPanelNodes);
  const double r2 = e.c2.real(), r1 = e.c1.real(), r0 = e.c0.real();
  const double global_max = concave_max(r2, r1, r0, -v_max, v_max);
  const double width = 2.0 * v_max / panels;
  std::complex<double> total = 0.0;
  for (int p = 0; p < panels; ++p) {
    const double lo = -v_max + p * width;
    const double hi = (p + 1 == panels) ? v_max : lo + width;
    if (concave_max(r2, r1, r0, lo, hi) < global_max - kDeadPanelDrop) continue;
    const double mid = 0.5 * (lo + hi);
    const double half = 0.5 * (hi - lo);
    std::complex<double> acc = 0.0;
    for (int i = 0; i < kPanelNodes; ++i) {
      const double v = mid + half * gl.nodes[i];
      acc += gl.weights[i] * std::exp((e.c2 * v + e.c1) * v + e.c0);
    }
    total += half * acc;
  }
  return total;
}

bool close_enough(std::complex<double> coarse, std::complex<double> fine) {
  return std::abs(fine - coarse) <= 1e-6 * std::abs(fine) + 1e-12;
}

}  // namespace

void QuadratureSpec::validate() const {
  if (!(v_max > 0.0)) throw std::invalid_argument("quadrature: v_max must be positive");
  if (n_nodes < 16) throw std::invalid_argument("quadrature: need at least 16 nodes");
}

PacketFamily::PacketFamily(const SimParams& params, const InitialConditions& ics,
                           const StepSpec& spec, ActionConvention convention)
    : params_(params), ics_(ics), spec_(spec), conv_(convention) {
  auto base = [&](double x_o, double v_o) {
    InitialConditions b = ics_;
    b.x_o = x_o;
    b.v_o = v_o;
    return solve_system(params_, b, spec_, conv_);
  };
  base_zero_ = base(0.0, 0.0);
  base_plus_ = base(0.0, 1.0);
  base_minus_ = base(0.0, -1.0);
  base_shift_ = base(1.0, 1.0);
}

PacketFamily::Coeffs PacketFamily::coeffs(double t) const {
  const TrajState A = base_zero_.eval(t);
  const TrajState B = base_plus_.eval(t);
  const TrajState D = base_minus_.eval(t);
  const TrajState C = base_shift_.eval(t);
  Coeffs c;
  c.a = A.a;
  c.ad = A.ad;
  c.p = A.q;
  c.pd = A.qd;
  c.g = 0.5 * (B.q - D.q);
  c.gd = 0.5 * (B.qd - D.qd);
  c.d0 = A.s0;
  c.d1 = 0.5 * (B.s0 - D.s0);
  c.d2 = 0.5 * (B.s0 + D.s0) - A.s0;
  c.c1x = (params_.hbar / params_.mass) * (C.s0 - B.s0);
  return c;
}

double PacketFamily::q_fast(double v_o, double t) const {
  const Coeffs c = coeffs(t);
  return ics_.x_o + c.p + v_o * c.g;
}

double PacketFamily::s0_fast(double v_o, double t) const {
  const Coeffs c = coeffs(t);
  return c.d0 + (c.d1 + c.d2 * v_o) * v_o +
         (params_.mass * ics_.x_o * v_o / params_.hbar) * c.c1x;
}

std::complex<double> PacketFamily::phi(double v_o, double x, double t) const {
  const Coeffs c = coeffs(t);
  const double q = ics_.x_o + c.p + v_o * c.g;
  const double qd = c.pd + v_o * c.gd;
  const double s0 = c.d0 + (c.d1 + c.d2 * v_o) * v_o +
                    (params_.mass * ics_.x_o * v_o / params_.hbar) * c.c1x;
  const double d = x - q;
  const double mh = params_.mass / params_.hbar;
  const double amp = std::sqrt(ics_.a_o / c.a) * std::exp(-d * d / (4.0 * c.a * c.a));
  const double ph = 0.5 * mh * (c.ad / c.a) * d * d + mh * qd * d + s0;
  return std::polar(amp, ph);
}

const Trajectory& PacketFamily::member(double v_o) const {
  const std::uint64_t key = std::bit_cast<std::uint64_t>(v_o);
  std::lock_guard<std::mutex> lock(memo_mx_);
  auto it = memo_.find(key);
  if (it == memo_.end()) {
    InitialConditions b = ics_;
    b.v_o = v_o;
    it = memo_.emplace(key, solve_system(params_, b, spec_, conv_)).first;
  }
  return it->second;
}

std::complex<double> PacketFamily::phi_direct(double v_o, double x, double t) const {
  const PacketField field(member(v_o));
  const double norm = std::pow(2.0 * M_PI * ics_.a_o * ics_.a_o, 0.25);
  return norm * field.psi(x, t);
}

namespace {

// exponent of Phi(v, x, t) exp(-i m v x_o / hbar) as a quadratic in v.  The
// x_o phases cancel analytically; the leftover (m x_o / hbar)(c1x - 1) linear
// term is kept so the cancellation is checked numerically rather than assumed.
ExpCoeffs exponent(const PacketFamily::Coeffs& c, double x, double x_o,
                   double hbar, double mass) {
  const double u = x - x_o - c.p;
  const double mh = mass / hbar;
  const double a2 = c.a * c.a;
  const double aa = c.ad / c.a;
  ExpCoeffs e;
  e.c2 = {-c.g * c.g / (4.0 * a2),
          0.5 * mh * aa * c.g * c.g - mh * c.gd * c.g + c.d2};
  e.c1 = {u * c.g / (2.0 * a2),
          -mh * aa * u * c.g + mh * (c.gd * u - c.pd * c.g) + c.d1 +
              mh * x_o * (c.c1x - 1.0)};
  e.c0 = {-u * u / (4.0 * a2), 0.5 * mh * aa * u * u + mh * c.pd * u + c.d0};
  return e;
}

}  // namespace

QuadratureSpec default_quad(const PacketFamily& family, double x, double x_o,
                            double t) {
  if (!(t > 0.0)) throw std::invalid_argument("propagator: t must be positive");
  const SimParams& p = family.params();
  const double sep = std::abs(x - x_o) / t;
  const PacketFamily::Coeffs c = family.coeffs(t);
  QuadratureSpec quad;
  // stationary-phase velocity plus margins, plus the envelope's velocity-space
  // width sqrt(2) a / |g| at the actual t.  The constant 12 hbar / (m a_o) is
  // that width's long-time limit and is not enough on its own: at mid times it
  // cuts into the envelope and the kernel picks up O(1e-3) truncation error
  quad.v_max = 13.0 * sep + 12.0 * p.hbar / (p.mass * family.ics().a_o);
  if (c.g != 0.0) quad.v_max += 12.0 * std::sqrt(2.0) * c.a / std::abs(c.g);

  const ExpCoeffs e = exponent(c, x, x_o, p.hbar, p.mass);
  const double span = 2.0 * (std::abs(e.c2.imag()) * quad.v_max * quad.v_max +
                             std::abs(e.c1.imag()) * quad.v_max);
  int panels = static_cast<int>(std::ceil(span / 20.0));
  if (c.g != 0.0) {
    const double sigma_v = std::sqrt(2.0) * c.a / std::abs(c.g);
    panels = std::max(panels, static_cast<int>(std::ceil(2.0 * quad.v_max / sigma_v)));
  }
  quad.n_nodes = kPanelNodes * std::max(panels, 1);
  return quad;
}

PropagatorSample propagator(const PacketFamily& family, double x, double x_o,
                            double t, const QuadratureSpec& quad) {
  if (!(t > 0.0)) throw std::invalid_argument("propagator: t must be positive");
  quad.validate();
  const SimParams& p = family.params();
  const PacketFamily::Coeffs c = family.coeffs(t);
  const ExpCoeffs e = exponent(c, x, x_o, p.hbar, p.mass);
  const double pref = p.mass / (2.0 * M_PI * p.hbar) * std::sqrt(family.ics().a_o / c.a);

  const int panels = quad.panels();
  const std::complex<double> coarse = pref * panel_integral(e, quad.v_max, panels);
  const std::complex<double> fine = pref * panel_integral(e, quad.v_max, 2 * panels);

  PropagatorSample sample;
  sample.x = x;
  sample.x_o = x_o;
  sample.t = t;
  sample.quad = quad;
  sample.value = fine;
  sample.converged = close_enough(coarse, fine);
  return sample;
}

QuadResult completeness_check(const PacketFamily& family, double x, double x_prime,
                              double t, const QuadratureSpec& quad) {
  if (!(t > 0.0)) throw std::invalid_argument("propagator: t must be positive");
  quad.validate();
  const SimParams& p = family.params();
  const PacketFamily::Coeffs c = family.coeffs(t);
  const ExpCoeffs ex = exponent(c, x, 0.0, p.hbar, p.mass);
  const ExpCoeffs exp_ = exponent(c, x_prime, 0.0, p.hbar, p.mass);
  ExpCoeffs e;
  e.c2 = std::conj(ex.c2) + exp_.c2;
  e.c1 = std::conj(ex.c1) + exp_.c1;
  e.c0 = std::conj(ex.c0) + exp_.c0;
  const double pref = family.ics().a_o / c.a;

  const int panels = quad.panels();
  QuadResult res;
  const std::complex<double> coarse = pref * panel_integral(e, quad.v_max, panels);
  res.value = pref * panel_integral(e, quad.v_max, 2 * panels);
  res.converged = close_enough(coarse, res.value);
  return res;
}

ReproduceResult reproduce_psi(const PacketFamily& family, const SpaceGrid& x_grid,
                              const SpaceGrid& x_o_grid, double t,
                              const std::function<std::complex<double>(double)>& psi0) {
  x_grid.validate();
  x_o_grid.validate();
  if (!(t > 0.0)) throw std::invalid_argument("propagator: t must be positive");
  const double dx = x_grid.spacing();
  if (std::abs(x_o_grid.spacing() - dx) > 1e-12 * dx)
    throw std::invalid_argument(
        "reproduce: x and x_o grids must share their spacing so the kernel can "
        "be sampled per offset");

  ReproduceResult out;
  out.x_o_grid = x_o_grid;

  auto sample_psi0 = [&](const SpaceGrid& g) {
    std::vector<std::complex<double>> v(g.n_points);
    for (int j = 0; j < g.n_points; ++j) v[j] = psi0(g.point(j));
    return v;
  };
  // probability sitting on the outermost two samples per side; nonzero mass
  // there means the window clips the state and the convolution would be wrong
  auto tail_mass = [&](const std::vector<std::complex<double>>& v) {
    const std::size_t m = v.size();
    return (std::norm(v[0]) + std::norm(v[1]) + std::norm(v[m - 2]) +
            std::norm(v[m - 1])) *
           dx;
  };

  std::vector<std::complex<double>> src = sample_psi0(out.x_o_grid);
  bool all_zero = true;
  for (const auto& z : src)
    if (z != std::complex<double>(0.0)) { all_zero = false; break; }
  if (!all_zero && tail_mass(src) > 1e-8) {
    // widen by 25 percent total, in whole grid steps so the spacing is untouched
    const int extra = (out.x_o_grid.n_points + 7) / 8;
    SpaceGrid wider = out.x_o_grid;
    wider.x_min -= extra * dx;
    wider.x_max += extra * dx;
    wider.n_points += 2 * extra;
    out.x_o_grid = wider;
    out.widened = true;
    src = sample_psi0(out.x_o_grid);
    if (tail_mass(src) > 1e-8)
      throw std::runtime_error(
          "reproduce: initial state does not decay inside the x_o window even "
          "after widening; enlarge the source grid");
  }

  const int n = x_grid.n_points;
  const int m = out.x_o_grid.n_points;
  out.psi.assign(n, 0.0);
  if (all_zero) return out;

  // K(x, x_o, t) depends on x - x_o only, so one propagator call per distinct
  // grid offset covers the whole convolution
  const double base = x_grid.x_min - out.x_o_grid.x_min;
  std::vector<std::complex<double>> kern(n + m - 1);
  for (int l = 0; l < n + m - 1; ++l) {
    const double offset = base + (l - (m - 1)) * dx;
    const PropagatorSample s =
        propagator(family, offset, 0.0, t, default_quad(family, offset, 0.0, t));
    kern[l] = s.value;
    out.all_converged = out.all_converged && s.converged;
  }
  for (int i = 0; i < n; ++i) {
    std::complex<double> acc = 0.0;
    for (int j = 0; j < m; ++j) {
      const double w = (j == 0 || j + 1 == m) ? 0.5 : 1.0;
      acc += w * kern[i - j + (m - 1)] * src[j];
    }
    out.psi[i] = acc * dx;
  }
  return out;
}

}  // namespace qsp
