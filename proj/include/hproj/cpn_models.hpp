#pragma once

#include <complex>
#include <vector>

#include "hproj/tensorlab.hpp"

namespace hproj {

using MatC = Eigen::MatrixXcd;

struct CPnChart {
  int n = 1;
  double c = 1.0;
  int dim() const { return 2 * n; }
};

struct BeltramiMap {
  MatC matrix;  // (n+1)x(n+1), acts on homogeneous coordinates (Z0, ..., Zn)
};

struct KahlerModel {
  CPnChart chart;
  MetricField g;
  ComplexStructureField J;
  MatD J0;  // J is constant in the affine chart
};

// Minimal complex arithmetic over dual scalars.
template <class T>
struct Cx {
  T re{}, im{};
  Cx() = default;
  Cx(T r, T i) : re(r), im(i) {}
  Cx operator+(const Cx& o) const { return {re + o.re, im + o.im}; }
  Cx operator-(const Cx& o) const { return {re - o.re, im - o.im}; }
  Cx operator*(const Cx& o) const { return {re * o.re - im * o.im, re * o.im + im * o.re}; }
  Cx operator*(std::complex<double> o) const {
    return {re * o.real() - im * o.imag(), re * o.imag() + im * o.real()};
  }
  Cx operator/(const Cx& o) const {
    T den = o.re * o.re + o.im * o.im;
    return {(re * o.re + im * o.im) / den, (im * o.re - re * o.im) / den};
  }
  T norm2() const { return re * re + im * im; }
  Cx conj() const { return {re, -im}; }
};

// Block-diagonal rotation blocks [[0,-1],[1,0]], so J e_{2k} = e_{2k+1}.
MatD standard_J(int n);

template <class T>
Mat<T> fs_metric(const CPnChart& chart, const Vec<T>& x) {
  const int n = chart.n;
  T s(1.0);
  for (int i = 0; i < 2 * n; ++i) s += x[i] * x[i];
  Mat<T> g(2 * n, 2 * n);
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k) {
      Cx<T> zj(x[2 * j], x[2 * j + 1]), zk(x[2 * k], x[2 * k + 1]);
      Cx<T> p = zj.conj() * zk;
      T a = ((j == k ? s : T(0.0)) - p.re) / (s * s) * chart.c;
      T b = -p.im / (s * s) * chart.c;
      g(2 * j, 2 * k) = a;
      g(2 * j, 2 * k + 1) = b;
      g(2 * j + 1, 2 * k) = -b;
      g(2 * j + 1, 2 * k + 1) = a;
    }
  return g;
}

KahlerModel fubini_study(const CPnChart& chart);

template <class T>
struct BeltramiValue {
  Vec<T> w;    // chart image
  Mat<T> jac;  // real Jacobian dw/dx
};

// Chart expression of z -> [M (1,z)] with its exact Jacobian.
template <class T>
BeltramiValue<T> beltrami_eval(const MatC& M, const Vec<T>& x) {
  const int n = static_cast<int>(M.rows()) - 1;
  std::vector<Cx<T>> W(n + 1, Cx<T>(T(0.0), T(0.0)));
  for (int k = 0; k <= n; ++k) {
    W[k] = Cx<T>(T(M(k, 0).real()), T(M(k, 0).imag()));
    for (int j = 1; j <= n; ++j) W[k] = W[k] + Cx<T>(x[2 * (j - 1)], x[2 * (j - 1) + 1]) * M(k, j);
  }
  double wn = 0.0;
  for (const auto& w : W) wn += value_of(w.norm2());
  if (value_of(W[0].norm2()) <= 1e-24 * wn) throw ChartEscape("image reaches the hyperplane at infinity");
  BeltramiValue<T> out;
  out.w.resize(2 * n);
  out.jac.resize(2 * n, 2 * n);
  Cx<T> W0sq = W[0] * W[0];
  for (int k = 1; k <= n; ++k) {
    Cx<T> wk = W[k] / W[0];
    out.w[2 * (k - 1)] = wk.re;
    out.w[2 * (k - 1) + 1] = wk.im;
    for (int j = 1; j <= n; ++j) {
      Cx<T> Mkj(T(M(k, j).real()), T(M(k, j).imag())), M0j(T(M(0, j).real()), T(M(0, j).imag()));
      Cx<T> d = (Mkj * W[0] - W[k] * M0j) / W0sq;
      out.jac(2 * (k - 1), 2 * (j - 1)) = d.re;
      out.jac(2 * (k - 1), 2 * (j - 1) + 1) = -d.im;
      out.jac(2 * (k - 1) + 1, 2 * (j - 1)) = d.im;
      out.jac(2 * (k - 1) + 1, 2 * (j - 1) + 1) = d.re;
    }
  }
  return out;
}

MetricField beltrami_pullback(const CPnChart& chart, const BeltramiMap& map);

// v(p) = d/ds at 0 of the chart expression of f_{exp(sX)}(p).
VectorField hprojective_field_from_flow(const CPnChart& chart, const MatC& X);

// Exact flow of that field: the Beltrami map of exp(sX).
VecD flow_point(const MatC& X, double s, const VecD& x);
MatD flow_jacobian(const MatC& X, double s, const VecD& x);

struct CurveSample {
  VecD x;  // position
  VecD v;  // velocity
  VecD a;  // coordinate acceleration
};

double hplanarity_residual(const std::vector<CurveSample>& curve, const MetricField& g, const MatD& J);

}  // namespace hproj
