#include <catch_amalgamated.hpp>

#include <unsupported/Eigen/MatrixFunctions>

#include "hproj/cpn_models.hpp"
#include "support.hpp"

using namespace hproj;
using hproj::testing::diag_map;
using hproj::testing::random_point;
using hproj::testing::random_unitary;
using hproj::testing::random_vector;

namespace {

double holomorphic_curvature(const MetricField& g, const MatD& J, const VecD& x, const VecD& X) {
  return sectional_curvature(g, x, X, VecD(J * X));
}

}  // namespace

TEST_CASE("FS metric at the origin of CP(1) is a multiple of the identity") {
  auto m = fubini_study({1, 1.0});
  MatD g0 = m.g(VecD::Zero(2));
  CHECK((g0 - g0(0, 0) * MatD::Identity(2, 2)).cwiseAbs().maxCoeff() == 0.0);
  CHECK(g0(0, 0) > 0.0);
}

TEST_CASE("FS metric is hermitian, J is a complex structure") {
  std::mt19937_64 rng(3);
  for (int n = 1; n <= 3; ++n) {
    auto m = fubini_study({n, 0.7});
    MatD J = m.J0;
    CHECK((J * J + MatD::Identity(2 * n, 2 * n)).cwiseAbs().maxCoeff() < 1e-15);
    for (int s = 0; s < 10; ++s) {
      VecD x = random_point(rng, 2 * n, 2.0);
      MatD g = m.g(x);
      CHECK((g - g.transpose()).cwiseAbs().maxCoeff() < 1e-12);
      CHECK((J.transpose() * g * J - g).cwiseAbs().maxCoeff() < 1e-12);
      CHECK(Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(g).eigenvalues().minCoeff() > 0.0);
    }
  }
}

TEST_CASE("FS metric on CP(2) is Kahler") {
  std::mt19937_64 rng(5);
  auto m = fubini_study({2, 1.0});
  for (int s = 0; s < 20; ++s) {
    VecD x = random_point(rng, 4, 2.0);
    CHECK(max_abs(covariant_derivative_11(m.g, m.J, x)) < 1e-8);
  }
}

TEST_CASE("holomorphic sectional curvature of FS is constant and equals 4/c") {
  std::mt19937_64 rng(6);
  for (double c : {1.0, 2.5}) {
    auto m = fubini_study({2, c});
    std::vector<double> ks;
    for (int s = 0; s < 20; ++s) {
      VecD x = random_point(rng, 4, 2.0);
      ks.push_back(holomorphic_curvature(m.g, m.J0, x, random_vector(rng, 4)));
    }
    for (double k : ks) CHECK(std::abs(k - ks.front()) < 1e-8);
    CHECK(ks.front() == Catch::Approx(4.0 / c).epsilon(1e-8));
  }
}

TEST_CASE("Beltrami pullback by identity and unitary maps reproduces FS") {
  std::mt19937_64 rng(8);
  CPnChart chart{2, 1.0};
  auto fs = fubini_study(chart);
  auto gid = beltrami_pullback(chart, {MatC::Identity(3, 3)});
  MatC U = random_unitary(rng, 3);
  auto gu = beltrami_pullback(chart, {U});
  MatC B = diag_map({1, 2, 3});
  B(0, 2) = {0.3, -0.2};
  auto gb = beltrami_pullback(chart, {B});
  auto gub = beltrami_pullback(chart, {MatC(U * B)});
  int tested = 0;
  for (int s = 0; s < 20; ++s) {
    VecD x = random_point(rng, 4, 1.5);
    MatD f = fs.g(x);
    CHECK((MatD(gid(x)) - f).cwiseAbs().maxCoeff() < 1e-12);
    try {
      CHECK((MatD(gu(x)) - f).cwiseAbs().maxCoeff() < 1e-10);
      CHECK((MatD(gub(x)) - MatD(gb(x))).cwiseAbs().maxCoeff() < 1e-10);
      ++tested;
    } catch (const ChartEscape&) {
    }
  }
  CHECK(tested > 10);
}

TEST_CASE("diag(1,2,3) pullback differs from FS and stays hermitian positive") {
  std::mt19937_64 rng(9);
  CPnChart chart{2, 1.0};
  auto fs = fubini_study(chart);
  auto ga = beltrami_pullback(chart, {diag_map({1, 2, 3})});
  MatD J = standard_J(2);
  for (int s = 0; s < 20; ++s) {
    VecD x = random_point(rng, 4, 2.0);
    MatD g = ga(x);
    CHECK((g - fs.g(x)).cwiseAbs().maxCoeff() > 1e-3);
    CHECK((g - g.transpose()).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((J.transpose() * g * J - g).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(g).eigenvalues().minCoeff() > 0.0);
    CHECK(max_abs(covariant_derivative_11(ga, constant_field(J), x)) < 1e-8);
  }
}

TEST_CASE("Beltrami Jacobian matches finite differences") {
  std::mt19937_64 rng(10);
  MatC M = MatC::Random(3, 3) + 2.0 * MatC::Identity(3, 3);
  auto f = VectorField::make<3>(4, [M](const auto& x) { return beltrami_eval(M, x).w; });
  for (int s = 0; s < 10; ++s) {
    VecD x = random_point(rng, 4, 0.5);
    MatD jac = beltrami_eval(M, x).jac;
    CHECK((jac - fd_jacobian(f, x)).cwiseAbs().maxCoeff() < 1e-6);
    CHECK((jac - MatD(jacobian(f, x))).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("chart escape is reported") {
  MatC M = MatC::Identity(2, 2);
  M(0, 1) = 1.0;  // W0 = 1 + z vanishes at z = -1
  VecD x(2);
  x << -1.0, 0.0;
  CHECK_THROWS_AS(beltrami_eval(M, x), ChartEscape);
}

TEST_CASE("h-projective fields from generators") {
  std::mt19937_64 rng(12);
  CPnChart chart{2, 1.0};
  auto fs = fubini_study(chart);
  std::complex<double> I(0.0, 1.0);
  auto v0 = hprojective_field_from_flow(chart, I * MatC::Identity(3, 3));
  MatC S = MatC::Random(3, 3);
  MatC skew = S - S.adjoint();
  auto vk = hprojective_field_from_flow(chart, skew);
  auto vd = hprojective_field_from_flow(chart, diag_map({1, 0, 0}));
  for (int s = 0; s < 10; ++s) {
    VecD x = random_point(rng, 4, 1.5);
    CHECK(VecD(v0(x)).norm() < 1e-15);
    CHECK(max_abs(MatD(lie_derivative_metric(fs.g, vk, x))) < 1e-8);
    CHECK((VecD(vd(x)) + x).norm() < 1e-15);
    // L_v J = -[Dv, J] with J constant
    MatD dv = jacobian(vd, x);
    CHECK((dv * fs.J0 - fs.J0 * dv).cwiseAbs().maxCoeff() < 1e-8);
  }
}

TEST_CASE("exact flow and RK4 integration of the generator agree to fourth order") {
  CPnChart chart{2, 1.0};
  MatC X = diag_map({1, 0, 0});
  X(1, 2) = {0.3, 0.1};
  X(0, 1) = {0.2, -0.4};
  auto v = hprojective_field_from_flow(chart, X);
  VecD x0(4);
  x0 << 0.2, -0.1, 0.3, 0.25;
  auto rk4 = [&](double h, int steps) {
    VecD y = x0;
    for (int i = 0; i < steps; ++i) {
      VecD k1 = v(y), k2 = v(VecD(y + 0.5 * h * k1)), k3 = v(VecD(y + 0.5 * h * k2)), k4 = v(VecD(y + h * k3));
      y += h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
    }
    return y;
  };
  VecD exact = flow_point(X, 0.5, x0);
  double e1 = (rk4(0.05, 10) - exact).norm();
  double e2 = (rk4(0.025, 20) - exact).norm();
  CHECK(e1 < 1e-5);
  CHECK(e1 / e2 > 12.0);
  CHECK(e1 / e2 < 20.0);
}

TEST_CASE("h-planarity residual") {
  CPnChart chart{2, 1.0};
  auto fs = fubini_study(chart);
  MatD J = standard_J(2);
  std::vector<CurveSample> line, wild;
  for (int i = 0; i < 20; ++i) {
    double t = 0.05 * i;
    // curve inside the projective line z2 = 0
    VecD x(4), v(4), a(4);
    x << std::cos(t) * t, std::sin(2 * t), 0.0, 0.0;
    v << std::cos(t) - t * std::sin(t), 2 * std::cos(2 * t), 0.0, 0.0;
    a << -2 * std::sin(t) - t * std::cos(t), -4 * std::sin(2 * t), 0.0, 0.0;
    line.push_back({x, v, a});
    VecD xw(4), vw(4), aw(4);
    xw << t, 0.3 * t * t, 0.5 * std::sin(3 * t), t * t * t;
    vw << 1.0, 0.6 * t, 1.5 * std::cos(3 * t), 3 * t * t;
    aw << 0.0, 0.6, -4.5 * std::sin(3 * t), 6 * t;
    wild.push_back({xw, vw, aw});
  }
  CHECK(hplanarity_residual(line, fs.g, J) < 1e-6);
  CHECK(hplanarity_residual(wild, fs.g, J) > 0.1);

  std::vector<CurveSample> still{{VecD::Zero(4), VecD::Zero(4), VecD::Zero(4)}};
  CHECK_THROWS_AS(hplanarity_residual(still, fs.g, J), DegenerateCurve);
}
