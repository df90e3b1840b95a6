#include "hproj/cpn_models.hpp"

#include <unsupported/Eigen/MatrixFunctions>

namespace hproj {

MatD standard_J(int n) {
  MatD J = MatD::Zero(2 * n, 2 * n);
  for (int k = 0; k < n; ++k) {
    J(2 * k + 1, 2 * k) = 1.0;
    J(2 * k, 2 * k + 1) = -1.0;
  }
  return J;
}

KahlerModel fubini_study(const CPnChart& chart) {
  if (chart.n < 1 || !(chart.c > 0.0)) throw InvalidParams("CP(n) chart needs n >= 1 and c > 0");
  KahlerModel m;
  m.chart = chart;
  m.g = MetricField::make<3>(chart.dim(), [chart](const auto& x) { return fs_metric(chart, x); });
  m.J0 = standard_J(chart.n);
  m.J = constant_field(m.J0);
  return m;
}

MetricField beltrami_pullback(const CPnChart& chart, const BeltramiMap& map) {
  if (map.matrix.rows() != chart.n + 1 || map.matrix.cols() != chart.n + 1)
    throw InvalidParams("Beltrami matrix has the wrong size");
  if (std::abs(map.matrix.determinant()) < 1e-14) throw InvalidParams("Beltrami matrix is singular");
  MatC M = map.matrix;
  return MetricField::make<3>(chart.dim(), [chart, M](const auto& x) {
    auto f = beltrami_eval(M, x);
    return decltype(f.jac)(f.jac.transpose() * fs_metric(chart, f.w) * f.jac);
  });
}

VectorField hprojective_field_from_flow(const CPnChart& chart, const MatC& X) {
  if (X.rows() != chart.n + 1 || X.cols() != chart.n + 1) throw InvalidParams("generator has the wrong size");
  const int n = chart.n;
  return VectorField::make<3>(chart.dim(), [n, X](const auto& x) {
    using T = typename std::decay_t<decltype(x)>::Scalar;
    std::vector<Cx<T>> XW(n + 1);
    for (int k = 0; k <= n; ++k) {
      XW[k] = Cx<T>(T(X(k, 0).real()), T(X(k, 0).imag()));
      for (int j = 1; j <= n; ++j) XW[k] = XW[k] + Cx<T>(x[2 * (j - 1)], x[2 * (j - 1) + 1]) * X(k, j);
    }
    Vec<T> v(2 * n);
    for (int k = 1; k <= n; ++k) {
      Cx<T> vk = XW[k] - Cx<T>(x[2 * (k - 1)], x[2 * (k - 1) + 1]) * XW[0];
      v[2 * (k - 1)] = vk.re;
      v[2 * (k - 1) + 1] = vk.im;
    }
    return v;
  });
}

VecD flow_point(const MatC& X, double s, const VecD& x) {
  MatC E = (s * X).exp();
  return beltrami_eval(E, x).w;
}

MatD flow_jacobian(const MatC& X, double s, const VecD& x) {
  MatC E = (s * X).exp();
  return beltrami_eval(E, x).jac;
}

double hplanarity_residual(const std::vector<CurveSample>& curve, const MetricField& g, const MatD& J) {
  double worst = 0.0;
  for (const auto& c : curve) {
    MatD gx = g(c.x);
    double vv = c.v.dot(gx * c.v);
    if (!(vv > 1e-24)) throw DegenerateCurve("zero velocity");
    Tensor3<double> G = christoffels(g, c.x);
    const int n = static_cast<int>(c.x.size());
    VecD acc = c.a;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) acc[i] += G(i, j, k) * c.v[j] * c.v[k];
    // J v is g-orthogonal to v with the same length
    VecD jv = J * c.v;
    VecD perp = acc - (acc.dot(gx * c.v) / vv) * c.v - (acc.dot(gx * jv) / vv) * jv;
    worst = std::max(worst, std::sqrt(std::max(0.0, perp.dot(gx * perp))));
  }
  return worst;
}

}  // namespace hproj
