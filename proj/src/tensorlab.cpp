#include "hproj/tensorlab.hpp"

namespace hproj {

Tensor3<double> christoffels_fd(const MetricField& g, const VecD& x, double h) {
  const int n = static_cast<int>(x.size());
  MatD gi = inverse(MatD(g(x)));
  std::vector<MatD> dg = fd_partials(g, x, h);
  Tensor3<double> G(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        double s = 0.0;
        for (int l = 0; l < n; ++l) s += gi(i, l) * (dg[j](l, k) + dg[k](j, l) - dg[l](j, k));
        G(i, j, k) = 0.5 * s;
      }
  return G;
}

Connection levi_civita(const MetricField& g) {
  return [g](const VecD& x) { return christoffels(g, x); };
}

namespace {

Tensor4<double> riemann_from(const Tensor3<double>& G, const std::vector<Tensor3<double>>& dG) {
  const int n = G.n;
  Tensor4<double> R(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) {
          double s = dG[k](i, l, j) - dG[l](i, k, j);
          for (int m = 0; m < n; ++m) s += G(i, k, m) * G(m, l, j) - G(i, l, m) * G(m, k, j);
          R(i, j, k, l) = s;
        }
  return R;
}

}  // namespace

Tensor4<double> riemann_tensor(const MetricField& g, const VecD& x) {
  const int n = static_cast<int>(x.size());
  std::vector<Tensor3<double>> dG;
  Tensor3<double> G(n);
  for (int k = 0; k < n; ++k) {
    Tensor3<D1> Gk = christoffels(g, seeded(x, k));
    Tensor3<double> d(n);
    for (size_t a = 0; a < d.a.size(); ++a) {
      d.a[a] = Gk.a[a].d;
      if (k == 0) G.a[a] = Gk.a[a].v;
    }
    dG.push_back(std::move(d));
  }
  return riemann_from(G, dG);
}

Tensor4<double> riemann_tensor_fd(const MetricField& g, const VecD& x, double h) {
  const int n = static_cast<int>(x.size());
  std::vector<Tensor3<double>> dG;
  for (int k = 0; k < n; ++k) {
    VecD xp = x, xm = x;
    xp[k] += h;
    xm[k] -= h;
    Tensor3<double> Gp = christoffels_fd(g, xp, h), Gm = christoffels_fd(g, xm, h);
    Tensor3<double> d(n);
    for (size_t a = 0; a < d.a.size(); ++a) d.a[a] = (Gp.a[a] - Gm.a[a]) / (2.0 * h);
    dG.push_back(std::move(d));
  }
  return riemann_from(christoffels_fd(g, x, h), dG);
}

VecD riemann_apply(const Tensor4<double>& R, const VecD& X, const VecD& Y, const VecD& Z) {
  const int n = R.n;
  VecD out = VecD::Zero(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) out[i] += R(i, j, k, l) * Z[j] * X[k] * Y[l];
  return out;
}

VecD riemann_curvature(const MetricField& g, const VecD& x, const VecD& X, const VecD& Y, const VecD& Z) {
  return riemann_apply(riemann_tensor(g, x), X, Y, Z);
}

double sectional_curvature(const Tensor4<double>& R, const MatD& gx, const VecD& X, const VecD& Y) {
  double num = X.dot(gx * riemann_apply(R, X, Y, Y));
  double den = X.dot(gx * X) * Y.dot(gx * Y) - std::pow(X.dot(gx * Y), 2);
  if (std::abs(den) < 1e-300) throw DegenerateCurve("sectional curvature of a degenerate plane");
  return num / den;
}

double sectional_curvature(const MetricField& g, const VecD& x, const VecD& X, const VecD& Y) {
  return sectional_curvature(riemann_tensor(g, x), g(x), X, Y);
}

double bianchi_residual(const Tensor4<double>& R) {
  const int n = R.n;
  double m = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l)
          m = std::max(m, std::abs(R(i, j, k, l) + R(i, k, l, j) + R(i, l, j, k)));
  return m;
}

VectorField gradient_field(const MetricField& g, const ScalarField& f) {
  int level = std::min(g.max_level(), f.max_level() - 1);
  return make_capped<Vec>(g.dim(), level, [g, f](const auto& x) { return gradient(g, f, x); });
}

MetricField pullback_metric(const MetricField& g, const VectorField& phi) {
  int level = std::min(g.max_level(), phi.max_level() - 1);
  return make_capped<Mat>(g.dim(), level, [g, phi](const auto& x) {
    using T = typename std::decay_t<decltype(x)>::Scalar;
    Mat<T> D = jacobian(phi, x);
    return Mat<T>(D.transpose() * g(Vec<T>(phi(x))) * D);
  });
}

}  // namespace hproj
