#include <catch_amalgamated.hpp>

#include "hproj/cpn_models.hpp"
#include "support.hpp"

using namespace hproj;
using hproj::testing::random_point;
using hproj::testing::random_vector;

namespace {

MetricField flat(int dim) { return constant_field(MatD::Identity(dim, dim)); }

double max_diff(const Tensor3<double>& a, const Tensor3<double>& b) {
  double m = 0.0;
  for (size_t i = 0; i < a.a.size(); ++i) m = std::max(m, std::abs(a.a[i] - b.a[i]));
  return m;
}

}  // namespace

TEST_CASE("dual numbers give exact derivatives") {
  D1 x(0.7, 1.0);
  D1 y = sin(x) * exp(x) / (1.0 + x * x);
  double f = std::sin(0.7) * std::exp(0.7) / (1.0 + 0.49);
  double h = 1e-6;
  auto F = [](double t) { return std::sin(t) * std::exp(t) / (1.0 + t * t); };
  CHECK(y.v == Catch::Approx(f).epsilon(1e-15));
  CHECK(y.d == Catch::Approx((F(0.7 + h) - F(0.7 - h)) / (2 * h)).epsilon(1e-8));

  // second derivative of t^3 via nesting
  D2 t(D1(2.0, 1.0), D1(1.0, 0.0));
  D2 c = t * t * t;
  CHECK(c.d.d == Catch::Approx(12.0));
  CHECK(pow(D1(4.0, 1.0), 0.5).d == Catch::Approx(0.25));
  CHECK(tanh(D1(0.3, 1.0)).d == Catch::Approx(1.0 - std::pow(std::tanh(0.3), 2)));
}

TEST_CASE("generic LU matches Eigen and differentiates") {
  std::mt19937_64 rng(7);
  MatD a = MatD::Random(5, 5) + 3.0 * MatD::Identity(5, 5);
  CHECK((inverse(a) - a.inverse()).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(det(a) == Catch::Approx(a.determinant()).epsilon(1e-12));
  // d/ds det(a + s b) = det(a) tr(a^-1 b)
  MatD b = MatD::Random(5, 5);
  Mat<D1> ad(5, 5);
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j) ad(i, j) = D1(a(i, j), b(i, j));
  CHECK(det(ad).d == Catch::Approx(a.determinant() * (a.inverse() * b).trace()).epsilon(1e-10));
  CHECK_THROWS_AS(inverse(MatD(MatD::Zero(3, 3))), SingularMatrix);
}

TEST_CASE("christoffels of the flat metric vanish") {
  auto g = flat(4);
  VecD x = VecD::LinSpaced(4, -0.3, 0.8);
  CHECK(max_abs(christoffels(g, x)) == 0.0);
}

TEST_CASE("christoffels vanish at the origin of the CP(1) chart") {
  auto m = fubini_study({1, 1.0});
  VecD x = VecD::Zero(2);
  CHECK(max_abs(christoffels(m.g, x)) < 1e-14);
  CHECK(max_abs(christoffels_fd(m.g, x)) < 1e-10);
}

TEST_CASE("dual-number christoffels agree with finite differences") {
  std::mt19937_64 rng(11);
  auto fs = fubini_study({2, 1.3});
  auto ga = beltrami_pullback({2, 1.0}, {hproj::testing::diag_map({1, 2, 3})});
  for (int s = 0; s < 10; ++s) {
    VecD x = random_point(rng, 4, 1.5);
    for (const auto* g : {&fs.g, &ga}) {
      auto ad = christoffels(*g, x);
      auto fd = christoffels_fd(*g, x);
      double scale = std::max(1.0, max_abs(ad));
      CHECK(max_diff(ad, fd) / scale < 1e-6);
      for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j)
          for (int k = 0; k < 4; ++k) CHECK(ad(i, j, k) == ad(i, k, j));
    }
  }
}

TEST_CASE("covariant derivatives: identity, metricity, Kahler J") {
  std::mt19937_64 rng(13);
  auto m = fubini_study({2, 1.0});
  auto id = constant_field(MatD::Identity(4, 4));
  for (int s = 0; s < 20; ++s) {
    VecD x = random_point(rng, 4, 2.0);
    CHECK(max_abs(covariant_derivative_11(m.g, id, x)) < 1e-14);
    CHECK(max_abs(covariant_derivative_11(m.g, m.J, x)) < 1e-8);
    CHECK(max_abs(covariant_derivative_02(m.g, m.g, x)) < 1e-8);
  }
}

TEST_CASE("curvature of flat space vanishes") {
  auto R = riemann_tensor(flat(3), VecD::Constant(3, 0.2));
  for (double v : R.a) CHECK(v == 0.0);
}

TEST_CASE("CP(1) has constant curvature, checked against the FD oracle") {
  std::mt19937_64 rng(17);
  auto m = fubini_study({1, 1.0});
  VecD e0(2), e1(2);
  e0 << 1, 0;
  e1 << 0, 1;
  double K0 = sectional_curvature(riemann_tensor_fd(m.g, VecD::Zero(2)), m.g(VecD::Zero(2)), e0, e1);
  CHECK(K0 == Catch::Approx(4.0).epsilon(1e-4));
  for (int s = 0; s < 20; ++s) {
    VecD x = random_point(rng, 2, 2.0);
    double K = sectional_curvature(m.g, x, random_vector(rng, 2), random_vector(rng, 2));
    CHECK(std::abs(K - K0) < 1e-4);
  }
}

TEST_CASE("curvature symmetries on CP(2)") {
  std::mt19937_64 rng(19);
  auto m = fubini_study({2, 1.0});
  for (int s = 0; s < 10; ++s) {
    VecD x = random_point(rng, 4, 1.5);
    auto R = riemann_tensor(m.g, x);
    auto Rfd = riemann_tensor_fd(m.g, x);
    double d = 0.0;
    for (size_t i = 0; i < R.a.size(); ++i) d = std::max(d, std::abs(R.a[i] - Rfd.a[i]));
    CHECK(d < 1e-4);
    CHECK(bianchi_residual(R) < 1e-8);
    MatD gx = m.g(x);
    VecD X = random_vector(rng, 4), Y = random_vector(rng, 4), Z = random_vector(rng, 4),
         W = random_vector(rng, 4);
    double a = W.dot(gx * riemann_apply(R, X, Y, Z));
    double b = W.dot(gx * riemann_apply(R, Y, X, Z));
    CHECK(std::abs(a + b) < 1e-8);
  }
}

TEST_CASE("gradient of simple functions") {
  auto g = flat(3);
  auto c = ScalarField::make<3>(3, [](const auto& x) {
    using T = typename std::decay_t<decltype(x)>::Scalar;
    return T(2.5);
  });
  auto x1 = ScalarField::make<3>(3, [](const auto& x) { return x[0]; });
  VecD p = VecD::Constant(3, 0.4);
  CHECK(gradient(g, c, p).norm() == 0.0);
  CHECK((gradient(g, x1, p) - VecD::Unit(3, 0)).norm() == 0.0);
}

TEST_CASE("lie derivative of the metric along a rotation of flat space vanishes") {
  auto g = flat(2);
  auto rot = VectorField::make<3>(2, [](const auto& x) {
    using T = typename std::decay_t<decltype(x)>::Scalar;
    Vec<T> v(2);
    v << -x[1], x[0];
    return v;
  });
  VecD p(2);
  p << 0.3, -0.7;
  CHECK(max_abs(MatD(lie_derivative_metric(g, rot, p))) < 1e-15);
  CHECK(lie_bracket(rot, rot, p).norm() < 1e-15);
}

TEST_CASE("fields refuse evaluation above their level") {
  auto f = ScalarField::make<1>(2, [](const auto& x) { return x[0] * x[1]; });
  VecD p = VecD::Ones(2);
  CHECK_NOTHROW(gradient_coords(f, p));
  CHECK_THROWS_AS(gradient_coords(f, lift<D1>(p)), std::logic_error);
}
