#pragma once

#include <optional>
#include <vector>

#include "hproj/hproj_core.hpp"

namespace hproj {

struct GeodesicState {
  VecD x;
  VecD v;
};

struct IntegrateOptions {
  double h = 1e-3;
  double max_drift = 1e-4;      // relative energy drift that rejects the run
  double escape_radius = 1e3;   // |x| beyond this counts as leaving the chart
};

struct Trajectory {
  std::vector<double> s;
  std::vector<GeodesicState> states;
  double energy_drift = 0.0;  // max_s |E(s) - E(0)| / E(0), E = g(v, v)
};

// Fixed-step RK4 for x'' = -Gamma(x', x'). The last step is shortened to land on T.
Trajectory integrate_geodesic(const MetricField& g, const GeodesicState& s0, double T,
                              const IntegrateOptions& opt = {});

GeodesicState geodesic_rhs(const MetricField& g, const GeodesicState& s);

// Coefficients s_0..s_{n-1} of F_t(zeta) = sum_i (zeta_i^2 + zetabar_i^2) prod_{j != i} (mu_j - t).
std::vector<double> integral_coefficients(const MatD& g, const MatD& A, const MatD& J, const VecD& zeta);
std::vector<double> integral_coefficients(const HSolution& hs, const GeodesicState& s);

// m-th t-derivative of sum_k c_k t^k.
double poly_eval(const std::vector<double>& c, double t, int m = 0);
std::vector<double> poly_derivative(const std::vector<double>& c, int m);

double F_t(const HSolution& hs, const GeodesicState& s, double t, int m = 0);

// sqrt(det(A - t)) g((A - t)^{-1} zeta, zeta); NaN where A - t is singular.
double F_t_determinant(const MatD& g, const MatD& A, const VecD& zeta, double t);

struct DriftEntry {
  double t = 0.0;
  int m = 0;
  double initial = 0.0;
  double drift = 0.0;  // max_s |F(s) - F(0)| / sum_k |s_k(0)| |d^m t^k / dt^m|
};

struct ConservationReport {
  std::vector<DriftEntry> entries;
  double max_drift = 0.0;
  double energy_drift = 0.0;
  double coefficient_drift = 0.0;  // max_k max_s |s_k(s) - s_k(0)| / max_k |s_k(0)|
};

ConservationReport conservation_sweep(const HSolution& hs, const GeodesicState& s0,
                                      const std::vector<double>& t_grid, double T, int max_order = 2,
                                      const IntegrateOptions& opt = {});

// Real roots of F_t, ascending. Throws InterlacingViolation if a root has |Im| > imag_tol.
std::vector<double> polynomial_real_roots(const std::vector<double>& c, double imag_tol = 1e-8);
std::vector<double> integral_roots(const HSolution& hs, const GeodesicState& s, double imag_tol = 1e-8);

// min over i of min(t_i - mu_i, mu_{i+1} - t_i); negative means violated.
double interlacing_slack(const std::vector<double>& mu, const std::vector<double>& roots);

struct ShootOptions {
  double h = 1e-2;
  double tol = 1e-6;
  int max_iter = 60;
  int scan = 24;
  double max_length = 6.0;
};

struct ShotResult {
  GeodesicState start;  // unit-speed initial state at x
  GeodesicState end;    // state on arrival at y
  double length = 0.0;
  double miss = 0.0;    // chart distance to y at arrival
};

// Bisection on the initial direction inside span{e, Je}, e pointing from x to y.
std::optional<ShotResult> shoot_geodesic(const MetricField& g, const MatD& J, const VecD& x, const VecD& y,
                                         const ShootOptions& opt = {});

struct OrderingReport {
  int pairs = 0;
  int violations = 0;
  double min_slack = 0.0;        // min_i min_{pairs} mu_{i+1}(y) - mu_i(x)
  int shots = 0;
  int shot_failures = 0;
  int chain_violations = 0;
  double chain_min_slack = 0.0;  // over mu_i(x) <= t_i(x) and t_i(y) <= mu_{i+1}(y)
  double root_transport = 0.0;   // max |t_i(x, zeta_0) - t_i(y, zeta_1)|
};

OrderingReport global_ordering_probe(const HSolution& hs, const std::vector<std::pair<VecD, VecD>>& pairs,
                                     bool shoot = true, const ShootOptions& opt = {});

// I_0 = g(Lambdabar, zeta)^2
double integral_I0(const HSolution& hs, const GeodesicState& s);
// (d^{k-1}/dt^{k-1} F_t)(zeta) at t = rho_c, k the half multiplicity of rho_c.
double integral_Ik(const HSolution& hs, const GeodesicState& s, double rho_c, int k);

}  // namespace hproj
