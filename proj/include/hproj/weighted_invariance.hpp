#pragma once

#include <Eigen/Dense>
#include <vector>

#include "hproj/hproj_core.hpp"
#include "hproj/tensorlab.hpp"

namespace hproj {

inline constexpr int kSigmaWeight = 2;

// sigma^{ij} = g^{ij} (det g)^{1/(2(n+1))}, components in the chart trivialization dx^1 ^ ... ^ dx^{2n}.
template <class T>
Mat<T> metric_to_sigma(const Mat<T>& g) {
  const int n = static_cast<int>(g.rows()) / 2;
  T dg = det(g);
  if (!(value_of(dg) > 0.0)) throw DegenerateMetric("metric determinant is not positive");
  return inverse(g) * pow(dg, 1.0 / (2.0 * (n + 1)));
}
MatrixField sigma_field(const MetricField& g);

// g^{ij} = sigma^{ij} |det sigma|^{1/2}
template <class T>
Mat<T> sigma_to_inverse_metric(const Mat<T>& s) {
  T ds = det(s);
  if (std::abs(value_of(ds)) < 1e-300) throw SingularMatrix("sigma is degenerate");
  return s * pow(abs(ds), 0.5);
}
template <class T>
Mat<T> sigma_to_metric(const Mat<T>& s) {
  return inverse(sigma_to_inverse_metric(s));
}
MetricField metric_from_sigma(const MatrixField& sigma);

// Hermitian with respect to J: J sigma J^T = sigma.
double hermitian_defect(const MatD& sigma, const MatD& J);

// out(i,j,k) = D_k sigma^{ij} for a density of weight w = 2.
Tensor3<double> weighted_covariant_derivative(const Tensor3<double>& G, const MatD& sigma,
                                              const std::vector<MatD>& dsigma);
Tensor3<double> weighted_covariant_derivative(const Tensor3<double>& G, const MatrixField& sigma, const VecD& x);
Tensor3<double> weighted_covariant_derivative_fd(const Tensor3<double>& G, const MatrixField& sigma, const VecD& x,
                                                 double h = 1e-5);
// D_l sigma^{lj}
VecD weighted_divergence(const Tensor3<double>& Ds);

// max over i,j,k of the left side of the h-projectively invariant equation
double weighted_main_residual(const Tensor3<double>& Ds, const MatD& J);
double weighted_main_residual(const Tensor3<double>& G, const MatD& J, const MatrixField& sigma, const VecD& x);

// Gammabar^i_{jk} = Gamma^i_{jk} + d^i_j Phi_k + d^i_k Phi_j - J^i_j J^l_k Phi_l - J^i_k J^l_j Phi_l
Tensor3<double> connection_change(const Tensor3<double>& G, const VecD& Phi, const MatD& J);
Connection connection_change(const Connection& G, const std::function<VecD(const VecD&)>& Phi, const MatD& J);

struct TransformCheck {
  double law1 = 0.0;  // full derivative
  double law2 = 0.0;  // divergence
};
TransformCheck weighted_transform_check(const Tensor3<double>& G, const VecD& Phi, const MatD& J,
                                        const MatrixField& sigma, const VecD& x);

// max |D_k J^i_j| for the constant chart J
double complex_defect(const Tensor3<double>& G, const MatD& J);

// Phi_i = -(1/2n) sigma_{im} D_l sigma^{lm}
VecD normalizing_phi(const Tensor3<double>& G, const MatrixField& sigma, const VecD& x);

struct NormalizationReport {
  VecD phi;
  double trace_after = 0.0;    // max |Dbar_l sigma^{lj}|
  double full_after = 0.0;     // max |Dbar_k sigma^{ij}|
  double levi_civita_deviation = 0.0;  // max |Gammabar - Gamma(g(sigma))|
};
NormalizationReport normalize_connection(const Tensor3<double>& G, const MatD& J, const MatrixField& sigma,
                                         const VecD& x);

// (L_v sigma)^{ij} = v(sigma^{ij}) - sigma^{kj} d_k v^i - sigma^{ik} d_k v^j + (w/(2(n+1))) (div v) sigma^{ij}
MatD lie_derivative_sigma(const MatrixField& sigma, const VectorField& v, const VecD& x);

struct KappaFit {
  Eigen::Matrix2d kappa = Eigen::Matrix2d::Zero();
  double pointwise_deviation = 0.0;  // max |kappa(x) - kappa|
  double residual = 0.0;             // max entry residual of the global fit
  double min_singular = 0.0;         // independence certificate of {sigma, sigmabar}
  double c2() const { return -kappa(0, 1); }
  double c1() const { return kappa(1, 1) - kappa(0, 0); }
  double c0() const { return kappa(1, 0); }
};
// Rows of kappa: L_v sigma = k11 sigma + k12 sigmabar, L_v sigmabar = k21 sigma + k22 sigmabar.
KappaFit fit_lie_endomorphism(const MatrixField& sigma, const MatrixField& sigmabar, const VectorField& v,
                              const std::vector<VecD>& points, double min_independence = 1e-6);

// Components after a linear chart change xt = P x with det P > 0.
MatD transform_sigma(const MatD& sigma, const MatD& P, int weight = kSigmaWeight);

}  // namespace hproj
