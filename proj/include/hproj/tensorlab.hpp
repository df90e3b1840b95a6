#pragma once

#include <functional>

#include "hproj/field.hpp"

namespace hproj {

// Levi-Civita Christoffel symbols, G(i,j,k) = Gamma^i_{jk}.
// Evaluating at level T needs the metric at level T+1.
template <class T>
Tensor3<T> christoffels(const MetricField& g, const Vec<T>& x) {
  const int n = static_cast<int>(x.size());
  Mat<T> gv = vpart(g(seeded(x, 0)));
  std::vector<Mat<T>> dg = partials(g, x);
  Mat<T> gi;
  try {
    gi = inverse(gv);
  } catch (const SingularMatrix&) {
    throw DegenerateMetric("metric matrix is singular");
  }
  Tensor3<T> G(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = j; k < n; ++k) {
        T s(0.0);
        for (int l = 0; l < n; ++l) s += gi(i, l) * (dg[j](l, k) + dg[k](j, l) - dg[l](j, k));
        G(i, j, k) = 0.5 * s;
        G(i, k, j) = G(i, j, k);
      }
  return G;
}

Tensor3<double> christoffels_fd(const MetricField& g, const VecD& x, double h = 1e-5);

// Connection given pointwise at double level; used where only the
// connection (not a metric) is known.
using Connection = std::function<Tensor3<double>(const VecD&)>;
Connection levi_civita(const MetricField& g);

// out(k,i,j) = nabla_k T^i_j
template <class T>
Tensor3<T> covariant_derivative_11(const Tensor3<T>& G, const MatrixField& A, const Vec<T>& x) {
  const int n = static_cast<int>(x.size());
  Mat<T> a = vpart(A(seeded(x, 0)));
  std::vector<Mat<T>> da = partials(A, x);
  Tensor3<T> out(n);
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        T s = da[k](i, j);
        for (int l = 0; l < n; ++l) s += G(i, k, l) * a(l, j) - G(l, k, j) * a(i, l);
        out(k, i, j) = s;
      }
  return out;
}

template <class T>
Tensor3<T> covariant_derivative_11(const MetricField& g, const MatrixField& A, const Vec<T>& x) {
  return covariant_derivative_11(christoffels(g, x), A, x);
}

// out(k,i,j) = nabla_k B_{ij}
template <class T>
Tensor3<T> covariant_derivative_02(const MetricField& g, const MatrixField& B, const Vec<T>& x) {
  const int n = static_cast<int>(x.size());
  Tensor3<T> G = christoffels(g, x);
  Mat<T> b = vpart(B(seeded(x, 0)));
  std::vector<Mat<T>> db = partials(B, x);
  Tensor3<T> out(n);
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        T s = db[k](i, j);
        for (int l = 0; l < n; ++l) s -= G(l, k, i) * b(l, j) + G(l, k, j) * b(i, l);
        out(k, i, j) = s;
      }
  return out;
}

// out(i,k) = nabla_k V^i
template <class T>
Mat<T> covariant_derivative_vector(const Tensor3<T>& G, const VectorField& V, const Vec<T>& x) {
  const int n = static_cast<int>(x.size());
  Vec<T> v = V(x);
  Mat<T> out = jacobian(V, x);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k)
      for (int l = 0; l < n; ++l) out(i, k) += G(i, k, l) * v[l];
  return out;
}

template <class T>
Mat<T> covariant_derivative_vector(const MetricField& g, const VectorField& V, const Vec<T>& x) {
  return covariant_derivative_vector(christoffels(g, x), V, x);
}

// R(i,j,k,l) = R^i_{jkl}, with R(X,Y)Z = R^i_{jkl} Z^j X^k Y^l.
Tensor4<double> riemann_tensor(const MetricField& g, const VecD& x);
Tensor4<double> riemann_tensor_fd(const MetricField& g, const VecD& x, double h = 1e-5);
VecD riemann_apply(const Tensor4<double>& R, const VecD& X, const VecD& Y, const VecD& Z);
VecD riemann_curvature(const MetricField& g, const VecD& x, const VecD& X, const VecD& Y, const VecD& Z);
double sectional_curvature(const MetricField& g, const VecD& x, const VecD& X, const VecD& Y);
double sectional_curvature(const Tensor4<double>& R, const MatD& gx, const VecD& X, const VecD& Y);
double bianchi_residual(const Tensor4<double>& R);

template <class T>
Vec<T> gradient(const MetricField& g, const ScalarField& f, const Vec<T>& x) {
  Mat<T> gx = g(x);
  Vec<T> df = gradient_coords(f, x);
  try {
    return solve(gx, df);
  } catch (const SingularMatrix&) {
    throw DegenerateMetric("metric matrix is singular");
  }
}

VectorField gradient_field(const MetricField& g, const ScalarField& f);

// (L_v g)_{ij} = v^k d_k g_ij + g_kj d_i v^k + g_ik d_j v^k
template <class T>
Mat<T> lie_derivative_metric(const MetricField& g, const VectorField& v, const Vec<T>& x) {
  const int n = static_cast<int>(x.size());
  Mat<T> gx = g(x);
  std::vector<Mat<T>> dg = partials(g, x);
  Vec<T> vx = v(x);
  Mat<T> dv = jacobian(v, x);  // dv(k,i) = d_i v^k
  Mat<T> out = Mat<T>::Constant(n, n, T(0.0));
  for (int k = 0; k < n; ++k) out += vx[k] * dg[k];
  out += dv.transpose() * gx + gx * dv;
  return out;
}

// (L_v A)^i_j = v^k d_k A^i_j - A^k_j d_k v^i + A^i_k d_j v^k
template <class T>
Mat<T> lie_derivative_11(const MatrixField& A, const VectorField& v, const Vec<T>& x) {
  const int n = static_cast<int>(x.size());
  Mat<T> ax = A(x);
  std::vector<Mat<T>> da = partials(A, x);
  Vec<T> vx = v(x);
  Mat<T> dv = jacobian(v, x);
  Mat<T> out = Mat<T>::Constant(n, n, T(0.0));
  for (int k = 0; k < n; ++k) out += vx[k] * da[k];
  out += ax * dv - dv * ax;
  return out;
}

// [u,w]^i = u^k d_k w^i - w^k d_k u^i
template <class T>
Vec<T> lie_bracket(const VectorField& u, const VectorField& w, const Vec<T>& x) {
  return jacobian(w, x) * u(x) - jacobian(u, x) * w(x);
}

// (phi^* g)(x) = Dphi(x)^T g(phi(x)) Dphi(x)
MetricField pullback_metric(const MetricField& g, const VectorField& phi);

}  // namespace hproj
