#pragma once

#include <vector>

#include "hproj/tensorlab.hpp"

namespace hproj {

// A(g, gbar) = (det gbar / det g)^{1/(2(n+1))} gbar^{-1} g, real dimension 2n.
template <class T>
Mat<T> compute_A(const Mat<T>& g, const Mat<T>& gbar) {
  const double n = static_cast<double>(g.rows()) / 2.0;
  T dg = det(g), dgb = det(gbar);
  if (!(value_of(dg) > 0.0) || !(value_of(dgb) > 0.0)) throw DegenerateMetric("metric is not positive definite");
  Mat<T> gbi;
  try {
    gbi = inverse(gbar);
  } catch (const SingularMatrix&) {
    throw DegenerateMetric("gbar is singular");
  }
  return Mat<T>(pow(dgb / dg, 1.0 / (2.0 * (n + 1.0))) * (gbi * g));
}

MatrixField A_field(const MetricField& g, const MetricField& gbar);

// gbar = det(A + shift)^{-1/2} g (A + shift)^{-1}
MatD reconstruct_gbar(const MatD& g, const MatD& A, double shift = 0.0);

// A1 in Sol(g) -> A1 A^{-1} in Sol(gbar)
MatD solution_transport(const MatD& A1, const MatD& A);
MatrixField solution_transport_field(const MatrixField& A1, const MatrixField& A);

struct HSolution {
  int n = 0;
  MetricField g;
  MatD J;  // constant complex structure of the chart
  MatrixField A;
  ScalarField lambda;      // trace(A) / 4
  VectorField Lambda;      // grad lambda
  VectorField Lambdabar;   // J Lambda
};

HSolution make_hsolution(const MetricField& g, const MatD& J, const MatrixField& A);

struct MainEquationCheck {
  double invariant = 0.0;  // max_{j,k} |residual vector|_g over basis X = e_k, Y = e_j
  double index = 0.0;      // max |a_{ij,k} - rhs_{ijk}|
  double agreement = 0.0;  // max |lowered invariant residual - index residual|
};

MainEquationCheck main_equation_check(const HSolution& hs, const VecD& x);
double main_equation_residual(const HSolution& hs, const VecD& x);

// |X(trace A) - trace of the right-hand side contracted with X|, max over basis X.
double trace_identity_residual(const HSolution& hs, const VecD& x);

// A_v = g^{-1} L_v g - trace(g^{-1} L_v g) / (2(n+1)) Id
template <class T>
Mat<T> A_from_vector_field(const MetricField& g, const VectorField& v, const Vec<T>& x) {
  const int dim = static_cast<int>(x.size());
  Mat<T> L = solve_matrix(g(x), lie_derivative_metric(g, v, x));
  return Mat<T>(L - (trace(L) / (static_cast<double>(dim) + 2.0)) * identity<T>(dim));
}

MatrixField A_v_field(const MetricField& g, const VectorField& v);

double killing_residual(const MetricField& g, const VectorField& V, const VecD& x);

struct CommutingCheck {
  double lie_Lambda_J = 0.0;
  double lie_Lambdabar_J = 0.0;
  double bracket = 0.0;
};

CommutingCheck commuting_holomorphic_check(const MetricField& g, const MatD& J, const VectorField& Lambda,
                                           const VectorField& Lambdabar, const VecD& x);

struct EigenData {
  std::vector<double> mu;      // n values, each eigenvalue listed with half its multiplicity
  std::vector<double> values;  // distinct eigenvalue clusters, ascending
  std::vector<int> mult;       // total multiplicity per cluster
  MatD frame;                  // columns U_1, JU_1, U_2, JU_2, ... ; g-orthonormal
  std::vector<int> frame_cluster;  // cluster index of each frame column
  double min_gap = 0.0;        // smallest distance between distinct clusters
  bool even = true;            // every cluster has even multiplicity
};

EigenData eigen_structure(const MatD& g, const MatD& A, const MatD& J, double cluster_tol = 1e-7);

// g-orthogonal projector onto the span of the frame columns of one cluster.
MatD cluster_projector(const EigenData& e, const MatD& g, int cluster);

struct EigenvalueReport {
  double rho = 0.0;
  int multiplicity = 0;
  double grad_norm = 0.0;      // |grad rho|_g
  double grad_defect = 0.0;    // |grad rho - P grad rho|_g, P onto E_A(rho)
  double modulo_residual = 0.0;
  bool nonconstant = false;
};

struct EigenGradientCheck {
  bool skipped = false;  // clusters closer than gap_tol
  std::vector<EigenvalueReport> clusters;
};

// grad rho = g^{-1} d rho with d_k rho = g(U, d_k A U) for a unit eigenvector U.
VecD eigenvalue_gradient(const HSolution& hs, const VecD& x, const EigenData& e, int cluster);

EigenGradientCheck eigen_gradient_check(const HSolution& hs, const VecD& x, double gap_tol = 1e-6,
                                        double nonconstant_tol = 1e-8, double fd_step = 1e-5);

}  // namespace hproj
