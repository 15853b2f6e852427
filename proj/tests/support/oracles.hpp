#pragma once

#include <complex>
#include <vector>

#include "qsp/dde.hpp"
#include "qsp/params.hpp"

// Independent reference implementations used only by the tests. Nothing in
// here shares numerics with the library: the brute integrator uses linear
// interpolation into a flat history array, the spectral evolver goes through
// FFTW, and the closed forms are typed in from scratch.
namespace oracle {

inline constexpr double INV_SQRT_2PI = 0.3989422804014327;  // (2*pi)^(-1/2)

// width of the freely spreading unit packet at t=1 (a_o=1, b_o=0, hbar=m=1)
inline constexpr double FREE_WIDTH_T1 = 1.118033988749895;  // sqrt(1.25)

// converged a(1) for alpha=0.5, tau=0.1, quiescent history, a_o=1, b_o=0
inline constexpr double DELAYED_WIDTH_T1 = 1.1086435921691236;

double free_width(double t, double a_o, double b_o, double hbar, double mass);

struct BruteResult {
    double q, qd, a, ad, s0;
};

// fixed-step RK4 over the same delay system, but with delayed values taken
// by piecewise-linear lookup into the recorded node history
BruteResult brute_solve(const qsp::SimParams& p, const qsp::InitialConditions& ics,
                        int steps_per_delay, double t_end,
                        double bracket_sign = 1.0);

// one-shot free evolution of a sampled wave function via FFT: exact for the
// quadratic dispersion up to grid truncation
std::vector<std::complex<double>> spectral_free_evolve(
    const std::vector<std::complex<double>>& psi0, double dx, double t,
    double hbar, double mass);

// sqrt(m/(2 pi i hbar t)) * exp(i m (x-x_o)^2 / (2 hbar t))
std::complex<double> free_kernel(double x, double x_o, double t, double hbar,
                                 double mass);

}  // namespace oracle
