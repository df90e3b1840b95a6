#pragma once

#include <functional>
#include <stdexcept>
#include <string>
#include <utility>

#include "hproj/linalg.hpp"

namespace hproj {

template <class T>
using Scalar = T;

// A field on a chart, evaluable at every dual level up to max_level().
// Level k means coordinates of type D_k, i.e. k nested derivative slots.
template <template <class> class Out>
class Field {
 public:
  Field() = default;

  template <int MaxL, class F>
  static Field make(int dim, F f) {
    static_assert(MaxL >= 0 && MaxL <= kMaxLevel);
    Field out;
    out.dim_ = dim;
    out.max_level_ = MaxL;
    out.f0_ = [f](const Vec<D0>& x) -> Out<D0> { return f(x); };
    if constexpr (MaxL >= 1) out.f1_ = [f](const Vec<D1>& x) -> Out<D1> { return f(x); };
    if constexpr (MaxL >= 2) out.f2_ = [f](const Vec<D2>& x) -> Out<D2> { return f(x); };
    if constexpr (MaxL >= 3) out.f3_ = [f](const Vec<D3>& x) -> Out<D3> { return f(x); };
    return out;
  }

  int dim() const { return dim_; }
  int max_level() const { return max_level_; }
  explicit operator bool() const { return max_level_ >= 0; }

  Out<D0> operator()(const VecD& x) const { return operator()<D0>(x); }

  template <class T>
  Out<T> operator()(const Vec<T>& x) const {
    constexpr int L = dual_depth<T>::value;
    if constexpr (L > kMaxLevel) {
      throw std::logic_error("dual nesting deeper than supported");
    } else {
      if (L > max_level_)
        throw std::logic_error("field evaluated above its differentiability level " + std::to_string(max_level_));
      if constexpr (L == 0) return f0_(x);
      else if constexpr (L == 1) return f1_(x);
      else if constexpr (L == 2) return f2_(x);
      else return f3_(x);
    }
  }

 private:
  int dim_ = 0;
  int max_level_ = -1;
  std::function<Out<D0>(const Vec<D0>&)> f0_;
  std::function<Out<D1>(const Vec<D1>&)> f1_;
  std::function<Out<D2>(const Vec<D2>&)> f2_;
  std::function<Out<D3>(const Vec<D3>&)> f3_;
};

using ScalarField = Field<Scalar>;
using VectorField = Field<Vec>;
using MatrixField = Field<Mat>;
using MetricField = MatrixField;
using ComplexStructureField = MatrixField;

// Runtime level selection for fields derived from other fields.
template <template <class> class Out, class F>
Field<Out> make_capped(int dim, int level, F f) {
  switch (level) {
    case 3: return Field<Out>::template make<3>(dim, f);
    case 2: return Field<Out>::template make<2>(dim, f);
    case 1: return Field<Out>::template make<1>(dim, f);
    case 0: return Field<Out>::template make<0>(dim, f);
    default: throw std::logic_error("field has no evaluable level");
  }
}

inline MatrixField constant_field(const MatD& m) {
  return MatrixField::make<3>(static_cast<int>(m.rows()), [m](const auto& x) {
    using T = typename std::decay_t<decltype(x)>::Scalar;
    return lift<T>(m);
  });
}

// Partial derivatives at level T through one extra dual level.
template <class T>
std::vector<Mat<T>> partials(const MatrixField& f, const Vec<T>& x) {
  std::vector<Mat<T>> out;
  out.reserve(x.size());
  for (int k = 0; k < x.size(); ++k) out.push_back(dpart(f(seeded(x, k))));
  return out;
}

template <class T>
Mat<T> jacobian(const VectorField& f, const Vec<T>& x) {
  const int n = static_cast<int>(x.size());
  Mat<T> out;
  for (int k = 0; k < n; ++k) {
    Vec<T> col = dpart(f(seeded(x, k)));
    if (k == 0) out.resize(col.size(), n);
    out.col(k) = col;
  }
  return out;
}

template <class T>
Vec<T> gradient_coords(const ScalarField& f, const Vec<T>& x) {
  Vec<T> out(x.size());
  for (int k = 0; k < x.size(); ++k) out[k] = dpart(f(seeded(x, k)));
  return out;
}

// Central finite-difference counterparts, double level only.
inline std::vector<MatD> fd_partials(const MatrixField& f, const VecD& x, double h = 1e-5) {
  std::vector<MatD> out;
  for (int k = 0; k < x.size(); ++k) {
    VecD xp = x, xm = x;
    xp[k] += h;
    xm[k] -= h;
    out.push_back((f(xp) - f(xm)) / (2.0 * h));
  }
  return out;
}

inline MatD fd_jacobian(const VectorField& f, const VecD& x, double h = 1e-5) {
  MatD out;
  for (int k = 0; k < x.size(); ++k) {
    VecD xp = x, xm = x;
    xp[k] += h;
    xm[k] -= h;
    VecD col = (f(xp) - f(xm)) / (2.0 * h);
    if (k == 0) out.resize(col.size(), x.size());
    out.col(k) = col;
  }
  return out;
}

inline VecD fd_gradient_coords(const ScalarField& f, const VecD& x, double h = 1e-5) {
  VecD out(x.size());
  for (int k = 0; k < x.size(); ++k) {
    VecD xp = x, xm = x;
    xp[k] += h;
    xm[k] -= h;
    out[k] = (f(xp) - f(xm)) / (2.0 * h);
  }
  return out;
}

}  // namespace hproj
