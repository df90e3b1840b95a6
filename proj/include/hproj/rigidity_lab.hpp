#pragma once

#include <vector>

#include "hproj/hproj_core.hpp"

namespace hproj {

struct RigidityParams {
  int n = 2;
  int k1 = 0;  // half multiplicity of rho1; k2 = n - 1 - k1
  double c0 = 0.0, c1 = 0.0, c2 = 1.0;
  double beta = 0.0;
  double C = 0.0;
  double D = 1.0;
  double d = 0.0;

  double alpha() const { return 0.25 * c1 * c1 - c0; }
  double rho1() const;
  double rho2() const;
  int k2() const { return n - 1 - k1; }
  // C = -(n-1)/2 c1 - (2 k1 + 1 - n) sqrt(alpha) + (n+1) beta
  double C_from_constants() const;
  void validate() const;  // throws InvalidParams
};

// Flow of a vector field by RK4, with the Jacobian of the flow map from the variational equation.
struct FlowResult {
  VecD x;
  MatD jac;
};
FlowResult flow_with_jacobian(const VectorField& v, const VecD& x, double s, int steps = 1);

struct LieDerivativeA {
  MatD ad;        // v(A) - (dv)A + A(dv)
  MatD pullback;  // ((Phi_eps)^*A - (Phi_-eps)^*A) / (2 eps)
  double agreement = 0.0;
};
LieDerivativeA lie_derivative_A(const VectorField& v, const MatrixField& A, const VecD& x, double eps = 1e-4);

struct QuadraticLaw {
  double c2 = 0.0, c1 = 0.0, c0 = 0.0;
  double residual = 0.0;  // max entry residual / max(1, max |L_v A|)
  double cond = 0.0;
  bool underdetermined = false;
  // normalized law with leading coefficient 1 (v replaced by v / c2)
  double c1_normalized() const { return c1 / c2; }
  double c0_normalized() const { return c0 / c2; }
  void require_determined() const;  // throws DegenerateFamily
};

struct LawSample {
  MatD A;
  MatD L;
};
QuadraticLaw fit_quadratic_law(const std::vector<LawSample>& samples, double max_cond = 1e8);

double rho_closed_form(const RigidityParams& p, double t);
double rho_dot_closed_form(const RigidityParams& p, double t);
// max |rho' - (rho^2 + c1 rho + c0)| over a grid, with rho' by central differences of the samples
double rho_ode_residual(const std::vector<double>& t, const std::vector<double>& rho, double c1, double c0);

struct FlowEigenvalueSamples {
  std::vector<double> t;    // normalized flow time, t = time_scale * s
  std::vector<double> rho;  // tracked eigenvalue
  std::vector<VecD> x;
};

// Integrates x' = v by RK4 from x0 for s in [s0, s1] and tracks the non-constant eigenvalue
// (the one with the largest gradient at x0) by continuity.
FlowEigenvalueSamples sample_rho_along_flow(const HSolution& hs, const VectorField& v, const VecD& x0, double s0,
                                            double s1, double h, double time_scale = 1.0);

struct TanhFit {
  double c1 = 0.0, alpha = 0.0, d = 0.0;
  double max_deviation = 0.0;
  int iterations = 0;
  bool converged = false;
};
TanhFit fit_tanh_profile(const std::vector<double>& t, const std::vector<double>& rho);

struct TwoDimBlock {
  double t = 0.0;
  double h = 0.0, h_dot = 0.0;
  double gLL = 0.0;  // g(Lambda, Lambda)
  double rho = 0.0, rho_dot = 0.0;
  double phi = 0.0, psi = 0.0, phi_dot = 0.0;
};

template <class T>
T block_h(const RigidityParams& p, const T& t) {
  T c = cosh(std::sqrt(p.alpha()) * (t + p.d));
  return p.D * exp((p.C - p.c1) * t) / (c * c);
}

template <class T>
T block_rho(const RigidityParams& p, const T& t) {
  const double a = std::sqrt(p.alpha());
  return -0.5 * p.c1 - a * tanh(a * (t + p.d));
}

template <class T>
T block_rho_dot(const RigidityParams& p, const T& t) {
  T c = cosh(std::sqrt(p.alpha()) * (t + p.d));
  return -p.alpha() / (c * c);
}

template <class T>
T block_gLL(const RigidityParams& p, const T& t) {
  T r = block_rho_dot(p, t);
  return r * r / (4.0 * block_h(p, t));
}

TwoDimBlock block_metric(const RigidityParams& p, double t);

// K(t) from the closed form with gamma_1, gamma_2, gamma_3.
double block_curvature(const RigidityParams& p, double t);
// Gauss curvature of h dt^2 + gLL dx^2 through the tensorlab Riemann tensor.
double block_curvature_ad(const RigidityParams& p, double t);
double max_abs_block_curvature(const RigidityParams& p, double t_min, double t_max, int points);

struct LengthReport {
  double condition = 0.0;       // 1 - (C - c1) / (2 sqrt(alpha))
  double exponent = 0.0;        // asymptotic rate of sqrt(h) as t -> +inf
  bool predicted_finite = false;
  double integral_T = 0.0;      // int_0^T sqrt(h)
  double integral_2T = 0.0;
  bool numerically_finite = false;
};
double length_integral(const RigidityParams& p, double a, double b, int intervals = 20000);
LengthReport length_finiteness(const RigidityParams& p);

struct MuBSolution {
  double mu = 0.0, B = 0.0;
  double residual = 0.0;
  bool consistent = false;
};
MuBSolution mu_B_solve(const RigidityParams& p, double rho, double gLL, double phidot_plus_phipsi,
                       double tol = 1e-6);
MuBSolution mu_B_solve(const RigidityParams& p, double t);

// Pointwise least squares for nabla Lambda = mu Id + B A.
MuBSolution fit_mu_B(const HSolution& hs, const VecD& x);

// mu = (trace nabla Lambda - B trace A) / (2n)
ScalarField mu_field_from_trace(const HSolution& hs, double B);
// mu = 2 B lambda + m0
ScalarField mu_field_from_lambda(const HSolution& hs, double B, double m0);

struct SystemResidual {
  double r1 = 0.0;  // main equation
  double r2 = 0.0;  // nabla_X Lambda - mu X - B A X
  double r3 = 0.0;  // nabla_X mu - 2 B g(X, Lambda)
};
SystemResidual system_residual(const HSolution& hs, const ScalarField& mu, double B, const VecD& x);

struct TannoResidual {
  double tanno = 0.0;  // max over coordinate triples
  double chain = 0.0;  // |nabla nabla mu - 2B(mu g + B g(A., .))|
  double scale = 0.0;  // max |nabla nabla nabla mu|
};
TannoResidual tanno_residual(const HSolution& hs, const ScalarField& mu, double B, const VecD& x,
                             double fd_step = 1e-4);

// Sectional curvature of span{X, JX}.
double holomorphic_sectional_curvature(const MetricField& g, const MatD& J, const VecD& x, const VecD& X);

struct SplittingReport {
  bool skipped = false;
  double f = 0.0;                  // [v, Lambda] = f Lambda
  double parallel_defect = 0.0;    // relative to |Lambda|
  double f_mismatch = 0.0;         // |f_Lambda - f_Lambdabar|
  double eigen_bracket = 0.0;      // max |(A - rho)[v, U]| / |U| over eigenvector fields
  double vrho = 0.0;               // max |v(rho) - (c2 rho^2 + c1 rho + c0)|
};
SplittingReport v_splitting_check(const HSolution& hs, const VectorField& v, const QuadraticLaw& law, const VecD& x,
                                  double fd_step = 1e-5);

struct AvShift {
  double beta = 0.0;
  double defect = 0.0;  // |A_v - c2 A - beta Id|
};
AvShift av_shift(const MetricField& g, const VectorField& v, const MatrixField& A, double c2, const VecD& x);

}  // namespace hproj
