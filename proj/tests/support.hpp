#pragma once

#include <random>

#include "hproj/cpn_models.hpp"

namespace hproj::testing {

// Uniform point in the chart ball of the given radius.
inline VecD random_point(std::mt19937_64& rng, int dim, double radius = 1.0) {
  std::normal_distribution<double> nd(0.0, 1.0);
  std::uniform_real_distribution<double> ud(0.0, 1.0);
  VecD x(dim);
  for (int i = 0; i < dim; ++i) x[i] = nd(rng);
  return x * (radius * std::pow(ud(rng), 1.0 / dim) / x.norm());
}

inline VecD random_vector(std::mt19937_64& rng, int dim) {
  std::normal_distribution<double> nd(0.0, 1.0);
  VecD x(dim);
  for (int i = 0; i < dim; ++i) x[i] = nd(rng);
  return x;
}

inline MatC diag_map(std::initializer_list<double> d) {
  MatC M = MatC::Zero(d.size(), d.size());
  int i = 0;
  for (double v : d) M(i, i) = v, ++i;
  return M;
}

inline MatC random_unitary(std::mt19937_64& rng, int m) {
  std::normal_distribution<double> nd(0.0, 1.0);
  MatC Z(m, m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) Z(i, j) = {nd(rng), nd(rng)};
  Eigen::HouseholderQR<MatC> qr(Z);
  return qr.householderQ();
}

inline double rel_err(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

}  // namespace hproj::testing
