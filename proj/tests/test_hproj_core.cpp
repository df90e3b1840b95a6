#include <catch_amalgamated.hpp>

#include "hproj/models.hpp"
#include "support.hpp"

using namespace hproj;
using hproj::testing::diag_map;
using hproj::testing::random_point;
using hproj::testing::random_vector;

namespace {

const CPnChart kCP2{2, 1.0};

PairModel& diag123() {
  static PairModel p = beltrami_pair(kCP2, diag_map({1, 2, 3}));
  return p;
}

// Non-holomorphic perturbation of the identity map.
VectorField twist(double eps) {
  return VectorField::make<3>(4, [eps](const auto& x) {
    using T = typename std::decay_t<decltype(x)>::Scalar;
    Vec<T> y = x;
    y[0] += eps * x[0] * x[0];
    y[3] += eps * x[1] * x[2];
    return y;
  });
}

}  // namespace

TEST_CASE("compute_A trivial cases") {
  MatD g = fubini_study(kCP2).g(VecD::Constant(4, 0.3));
  CHECK((compute_A(g, g) - MatD::Identity(4, 4)).cwiseAbs().maxCoeff() < 1e-14);
  MatD A = compute_A(g, MatD(2.5 * g));
  CHECK((A - std::pow(2.5, -1.0 / 3.0) * MatD::Identity(4, 4)).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("Beltrami A is complex, self-adjoint and has non-constant eigenvalues") {
  std::mt19937_64 rng(21);
  auto& p = diag123();
  MatD J = p.fs.J0;
  std::vector<double> lows;
  for (int s = 0; s < 20; ++s) {
    VecD x = random_point(rng, 4, 1.5);
    MatD g = p.fs.g(x), gb = p.gbar(x), A = p.hs.A(x);
    CHECK((A * J - J * A).cwiseAbs().maxCoeff() < 1e-10);
    CHECK(((g * A) - (g * A).transpose()).cwiseAbs().maxCoeff() < 1e-10);
    CHECK(((gb * A) - (gb * A).transpose()).cwiseAbs().maxCoeff() < 1e-10);
    lows.push_back(eigen_structure(g, A, J).values.front());
  }
  auto [lo, hi] = std::minmax_element(lows.begin(), lows.end());
  CHECK(*hi - *lo > 1e-3);
}

TEST_CASE("main equation: trivial, Beltrami and negative control") {
  std::mt19937_64 rng(23);
  auto fs = fubini_study(kCP2);
  auto hs_id = make_hsolution(fs.g, fs.J0, constant_field(MatD::Identity(4, 4)));
  auto& p = diag123();
  auto gbad = pullback_metric(fs.g, twist(0.3));
  auto hs_bad = make_hsolution(fs.g, fs.J0, A_field(fs.g, gbad));
  double worst = 0.0, agree = 0.0, bad = 0.0, idx = 0.0;
  for (int s = 0; s < 50; ++s) {
    VecD x = random_point(rng, 4, 1.5);
    CHECK(main_equation_residual(hs_id, x) < 1e-14);
    auto c = main_equation_check(p.hs, x);
    worst = std::max(worst, c.invariant);
    idx = std::max(idx, c.index);
    agree = std::max(agree, c.agreement);
    bad = std::max(bad, main_equation_residual(hs_bad, x));
  }
  CHECK(worst < 1e-6);
  CHECK(idx < 1e-6);
  CHECK(agree < 1e-12);
  CHECK(bad > 1e-2);
}

TEST_CASE("trace identity and AD gradient of lambda") {
  std::mt19937_64 rng(24);
  auto& p = diag123();
  for (int s = 0; s < 10; ++s) {
    VecD x = random_point(rng, 4, 1.5);
    CHECK(trace_identity_residual(p.hs, x) < 1e-6);
    VecD ad = p.hs.Lambda(x);
    VecD fd = p.fs.g(x).ldlt().solve(fd_gradient_coords(p.hs.lambda, x));
    CHECK((ad - fd).norm() < 1e-6);
  }
}

TEST_CASE("reconstruct_gbar closes the loop") {
  std::mt19937_64 rng(25);
  auto& p = diag123();
  MatD g0 = p.fs.g(VecD::Constant(4, 0.2));
  CHECK((reconstruct_gbar(g0, MatD::Identity(4, 4)) - g0).cwiseAbs().maxCoeff() < 1e-14);
  CHECK((reconstruct_gbar(g0, 2.0 * MatD::Identity(4, 4)) - std::pow(2.0, -3.0) * g0).cwiseAbs().maxCoeff() <
        1e-14);
  for (int s = 0; s < 20; ++s) {
    VecD x = random_point(rng, 4, 1.5);
    MatD g = p.fs.g(x), A = p.hs.A(x);
    MatD gb = reconstruct_gbar(g, A);
    CHECK((gb - MatD(p.gbar(x))).cwiseAbs().maxCoeff() < 1e-8);
    CHECK((compute_A(g, gb) - A).cwiseAbs().maxCoeff() < 1e-10);
    // shifted solutions stay reconstructible
    CHECK_NOTHROW(reconstruct_gbar(g, A, 0.5));
  }
  CHECK_THROWS_AS(reconstruct_gbar(g0, MatD(-MatD::Identity(4, 4)).eval() * 0.0), NotReconstructible);
  MatD neg = MatD::Identity(4, 4);
  neg(0, 0) = -1.0;
  CHECK_THROWS_AS(reconstruct_gbar(g0, neg), NotReconstructible);
}

TEST_CASE("solution transport") {
  std::mt19937_64 rng(26);
  auto& p = diag123();
  VecD x0 = random_point(rng, 4, 1.0);
  MatD A = p.hs.A(x0);
  CHECK((solution_transport(A, A) - MatD::Identity(4, 4)).cwiseAbs().maxCoeff() < 1e-12);
  MatD A1 = MatD::Random(4, 4), A2 = MatD::Random(4, 4);
  MatD lhs = solution_transport(MatD(2.0 * A1 - 3.0 * A2), A);
  MatD rhs = 2.0 * solution_transport(A1, A) - 3.0 * solution_transport(A2, A);
  CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-12);

  auto Ainv = solution_transport_field(constant_field(MatD::Identity(4, 4)), p.hs.A);
  auto hs_bar = make_hsolution(p.gbar, p.fs.J0, Ainv);
  for (int s = 0; s < 20; ++s) {
    VecD x = random_point(rng, 4, 1.5);
    CHECK(main_equation_residual(hs_bar, x) < 1e-6);
  }
}

TEST_CASE("A_v from vector fields") {
  std::mt19937_64 rng(27);
  auto fs = fubini_study(kCP2);
  MatC S = MatC::Random(3, 3);
  auto vk = hprojective_field_from_flow(kCP2, MatC(S - S.adjoint()));
  auto vd = hprojective_field_from_flow(kCP2, diag_generator(2));
  auto hs_v = make_hsolution(fs.g, fs.J0, A_v_field(fs.g, vd));
  for (int s = 0; s < 20; ++s) {
    VecD x = random_point(rng, 4, 1.5);
    CHECK(max_abs(MatD(A_from_vector_field(fs.g, vk, x))) < 1e-8);
    CHECK(main_equation_residual(hs_v, x) < 1e-6);
  }
  // dilation of flat space: L_v g = 2g, so A_v = 2/(n+1) Id
  auto flat = constant_field(MatD::Identity(4, 4));
  auto dil = VectorField::make<3>(4, [](const auto& x) { return x; });
  MatD Av = A_from_vector_field(flat, dil, VecD(VecD::Constant(4, 0.7)));
  CHECK((Av - (2.0 / 3.0) * MatD::Identity(4, 4)).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("Killing, holomorphic and commuting residuals") {
  std::mt19937_64 rng(28);
  auto& p = diag123();
  auto zero = VectorField::make<3>(4, [](const auto& x) {
    using T = typename std::decay_t<decltype(x)>::Scalar;
    return Vec<T>(Vec<T>::Constant(4, T(0.0)));
  });
  auto wild = VectorField::make<3>(4, [](const auto& x) {
    using T = typename std::decay_t<decltype(x)>::Scalar;
    Vec<T> v(4);
    v << x[0] * x[0], T(0.0), x[1], T(1.0);
    return v;
  });
  double lam_killing = 0.0;
  for (int s = 0; s < 20; ++s) {
    VecD x = random_point(rng, 4, 1.5);
    CHECK(killing_residual(p.fs.g, zero, x) == 0.0);
    CHECK(killing_residual(p.fs.g, p.hs.Lambdabar, x) < 1e-6);
    lam_killing = std::max(lam_killing, killing_residual(p.fs.g, p.hs.Lambda, x));
    auto c = commuting_holomorphic_check(p.fs.g, p.fs.J0, p.hs.Lambda, p.hs.Lambdabar, x);
    CHECK(c.lie_Lambda_J < 1e-6);
    CHECK(c.lie_Lambdabar_J < 1e-6);
    CHECK(c.bracket < 1e-6);
    auto z = commuting_holomorphic_check(p.fs.g, p.fs.J0, zero, zero, x);
    CHECK(z.lie_Lambda_J + z.lie_Lambdabar_J + z.bracket == 0.0);
    CHECK(commuting_holomorphic_check(p.fs.g, p.fs.J0, wild, zero, x).lie_Lambda_J > 1e-2);
  }
  CHECK(lam_killing > 1e-2);
}

TEST_CASE("eigenstructure of the identity") {
  auto fs = fubini_study(kCP2);
  VecD x = VecD::Constant(4, 0.1);
  auto e = eigen_structure(fs.g(x), MatD::Identity(4, 4), fs.J0);
  REQUIRE(e.values.size() == 1);
  CHECK(e.values[0] == Catch::Approx(1.0));
  CHECK(e.mult[0] == 4);
  CHECK(e.mu.size() == 2);
  MatD F = e.frame;
  CHECK((F.transpose() * MatD(fs.g(x)) * F - MatD::Identity(4, 4)).cwiseAbs().maxCoeff() < 1e-10);
  auto hs = make_hsolution(fs.g, fs.J0, constant_field(MatD::Identity(4, 4)));
  auto chk = eigen_gradient_check(hs, x);
  REQUIRE(chk.clusters.size() == 1);
  CHECK_FALSE(chk.clusters[0].nonconstant);
}

TEST_CASE("Beltrami eigenstructure: multiplicity, grad rho in E_A(rho), eq. modulo") {
  std::mt19937_64 rng(29);
  auto& p = diag123();
  int checked = 0;
  for (int s = 0; s < 20; ++s) {
    VecD x = random_point(rng, 4, 1.5);
    MatD g = p.fs.g(x), A = p.hs.A(x);
    auto e = eigen_structure(g, A, p.fs.J0);
    CHECK((e.frame.transpose() * g * e.frame - MatD::Identity(4, 4)).cwiseAbs().maxCoeff() < 1e-10);
    CHECK((A * e.frame - e.frame * e.frame.transpose() * g * A * e.frame).cwiseAbs().maxCoeff() < 1e-8);
    auto chk = eigen_gradient_check(p.hs, x);
    if (chk.skipped) continue;
    ++checked;
    for (const auto& c : chk.clusters) {
      if (c.nonconstant) CHECK(c.multiplicity == 2);
      CHECK(c.grad_defect < 1e-6);
      CHECK(c.modulo_residual < 1e-5);
    }
  }
  CHECK(checked >= 15);
}
