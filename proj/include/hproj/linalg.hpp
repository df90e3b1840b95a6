#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <utility>
#include <vector>

#include "hproj/dual.hpp"
#include "hproj/errors.hpp"

namespace hproj {

template <class T>
using Vec = Eigen::Matrix<T, Eigen::Dynamic, 1>;
template <class T>
using Mat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

using VecD = Vec<double>;
using MatD = Mat<double>;

template <class T>
Vec<T> lift(const VecD& x) {
  Vec<T> out(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) out[i] = T(x[i]);
  return out;
}

template <class T>
Mat<T> lift(const MatD& a) {
  Mat<T> out(a.rows(), a.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j) out(i, j) = T(a(i, j));
  return out;
}

template <class T>
VecD values(const Vec<T>& x) {
  VecD out(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) out[i] = value_of(x[i]);
  return out;
}

template <class T>
MatD values(const Mat<T>& a) {
  MatD out(a.rows(), a.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j) out(i, j) = value_of(a(i, j));
  return out;
}

// Strip one dual level: value part and derivative part.
inline double vpart(double x) { return x; }
template <class T> T vpart(const Dual<T>& x) { return x.v; }
template <class T> T dpart(const Dual<T>& x) { return x.d; }

template <class T>
Vec<T> vpart(const Vec<Dual<T>>& x) {
  Vec<T> out(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) out[i] = x[i].v;
  return out;
}
template <class T>
Vec<T> dpart(const Vec<Dual<T>>& x) {
  Vec<T> out(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) out[i] = x[i].d;
  return out;
}
template <class T>
Mat<T> vpart(const Mat<Dual<T>>& a) {
  Mat<T> out(a.rows(), a.cols());
  for (Eigen::Index i = 0; i < a.size(); ++i) out.data()[i] = a.data()[i].v;
  return out;
}
template <class T>
Mat<T> dpart(const Mat<Dual<T>>& a) {
  Mat<T> out(a.rows(), a.cols());
  for (Eigen::Index i = 0; i < a.size(); ++i) out.data()[i] = a.data()[i].d;
  return out;
}

// x + eps*e_k with the derivative slot seeded.
template <class T>
Vec<Dual<T>> seeded(const Vec<T>& x, int k) {
  Vec<Dual<T>> out(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) out[i] = Dual<T>(x[i], T(i == k ? 1.0 : 0.0));
  return out;
}

template <class T>
Vec<Dual<T>> seeded_dir(const Vec<T>& x, const VecD& dir) {
  Vec<Dual<T>> out(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) out[i] = Dual<T>(x[i], T(dir[i]));
  return out;
}

// LU with partial pivoting, pivot choice made on the value part so the
// factorization is differentiable through dual scalars.
template <class T>
struct LU {
  Mat<T> lu;
  std::vector<int> perm;
  int sign = 1;

  explicit LU(const Mat<T>& a, double rel_tol = 1e-14) : lu(a), perm(a.rows()) {
    const int n = static_cast<int>(a.rows());
    double scale = 0.0;
    for (Eigen::Index i = 0; i < a.size(); ++i) scale = std::max(scale, std::abs(value_of(a.data()[i])));
    if (scale == 0.0) throw SingularMatrix("zero matrix");
    for (int i = 0; i < n; ++i) perm[i] = i;
    for (int k = 0; k < n; ++k) {
      int p = k;
      double best = std::abs(value_of(lu(k, k)));
      for (int i = k + 1; i < n; ++i) {
        double v = std::abs(value_of(lu(i, k)));
        if (v > best) { best = v; p = i; }
      }
      if (best <= rel_tol * scale) throw SingularMatrix("singular matrix in LU");
      if (p != k) {
        lu.row(p).swap(lu.row(k));
        std::swap(perm[p], perm[k]);
        sign = -sign;
      }
      for (int i = k + 1; i < n; ++i) {
        T f = lu(i, k) / lu(k, k);
        lu(i, k) = f;
        for (int j = k + 1; j < n; ++j) lu(i, j) -= f * lu(k, j);
      }
    }
  }

  T det() const {
    T d(static_cast<double>(sign));
    for (Eigen::Index i = 0; i < lu.rows(); ++i) d *= lu(i, i);
    return d;
  }

  Vec<T> solve(const Vec<T>& b) const {
    const int n = static_cast<int>(lu.rows());
    Vec<T> y(n);
    for (int i = 0; i < n; ++i) {
      T s = b[perm[i]];
      for (int j = 0; j < i; ++j) s -= lu(i, j) * y[j];
      y[i] = s;
    }
    for (int i = n - 1; i >= 0; --i) {
      T s = y[i];
      for (int j = i + 1; j < n; ++j) s -= lu(i, j) * y[j];
      y[i] = s / lu(i, i);
    }
    return y;
  }

  Mat<T> inverse() const {
    const int n = static_cast<int>(lu.rows());
    Mat<T> inv(n, n);
    for (int c = 0; c < n; ++c) {
      Vec<T> e = Vec<T>::Constant(n, T(0.0));
      e[c] = T(1.0);
      inv.col(c) = solve(e);
    }
    return inv;
  }
};

template <class T>
Mat<T> inverse(const Mat<T>& a) { return LU<T>(a).inverse(); }

template <class T>
T det(const Mat<T>& a) {
  try {
    return LU<T>(a).det();
  } catch (const SingularMatrix&) {
    return T(0.0);
  }
}

template <class T>
Vec<T> solve(const Mat<T>& a, const Vec<T>& b) { return LU<T>(a).solve(b); }

template <class T>
Mat<T> solve_matrix(const Mat<T>& a, const Mat<T>& b) {
  LU<T> lu(a);
  Mat<T> out(b.rows(), b.cols());
  for (Eigen::Index c = 0; c < b.cols(); ++c) out.col(c) = lu.solve(Vec<T>(b.col(c)));
  return out;
}

template <class T>
T trace(const Mat<T>& a) {
  T s(0.0);
  for (Eigen::Index i = 0; i < a.rows(); ++i) s += a(i, i);
  return s;
}

template <class T>
Mat<T> identity(int n) {
  Mat<T> out = Mat<T>::Constant(n, n, T(0.0));
  for (int i = 0; i < n; ++i) out(i, i) = T(1.0);
  return out;
}

inline double max_abs(const MatD& a) { return a.size() ? a.cwiseAbs().maxCoeff() : 0.0; }
inline double max_abs(const VecD& a) { return a.size() ? a.cwiseAbs().maxCoeff() : 0.0; }

// Dense rank-3 tensor T(i,j,k), row-major.
template <class T>
struct Tensor3 {
  int n = 0;
  std::vector<T> a;
  Tensor3() = default;
  explicit Tensor3(int dim) : n(dim), a(static_cast<size_t>(dim) * dim * dim, T(0.0)) {}
  T& operator()(int i, int j, int k) { return a[(static_cast<size_t>(i) * n + j) * n + k]; }
  const T& operator()(int i, int j, int k) const { return a[(static_cast<size_t>(i) * n + j) * n + k]; }
};

template <class T>
struct Tensor4 {
  int n = 0;
  std::vector<T> a;
  Tensor4() = default;
  explicit Tensor4(int dim) : n(dim), a(static_cast<size_t>(dim) * dim * dim * dim, T(0.0)) {}
  T& operator()(int i, int j, int k, int l) { return a[((static_cast<size_t>(i) * n + j) * n + k) * n + l]; }
  const T& operator()(int i, int j, int k, int l) const {
    return a[((static_cast<size_t>(i) * n + j) * n + k) * n + l];
  }
};

template <class T>
double max_abs(const Tensor3<T>& t) {
  double m = 0.0;
  for (const auto& v : t.a) m = std::max(m, std::abs(value_of(v)));
  return m;
}

template <class T>
Tensor3<double> values(const Tensor3<T>& t) {
  Tensor3<double> out(t.n);
  for (size_t i = 0; i < t.a.size(); ++i) out.a[i] = value_of(t.a[i]);
  return out;
}

}  // namespace hproj
