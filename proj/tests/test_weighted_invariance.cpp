#include <catch_amalgamated.hpp>

#include "hproj/models.hpp"
#include "hproj/rigidity_lab.hpp"
#include "hproj/weighted_invariance.hpp"
#include "support.hpp"

using namespace hproj;
using hproj::testing::diag_map;
using hproj::testing::random_point;
using hproj::testing::random_vector;

namespace {

PairModel& cp2() {
  static PairModel p = beltrami_pair({2, 1.0}, diag_map({1, 2, 3}));
  return p;
}

// hermitian but not h-projectively equivalent to g_FS
MetricField conformal_fs() {
  MetricField g = cp2().fs.g;
  return MetricField::make<3>(4, [g](const auto& x) { return (g(x) * (1.0 + 0.3 * x[0] * x[0])).eval(); });
}

double tensor_diff(const Tensor3<double>& a, const Tensor3<double>& b) {
  double m = 0.0;
  for (size_t k = 0; k < a.a.size(); ++k) m = std::max(m, std::abs(a.a[k] - b.a[k]));
  return m;
}

}  // namespace

TEST_CASE("sigma of a Kaehler metric is hermitian and parallel") {
  const auto& p = cp2();
  MatrixField s = sigma_field(p.fs.g);
  std::mt19937_64 rng(1);
  for (int k = 0; k < 20; ++k) {
    VecD x = random_point(rng, 4, 0.9);
    MatD sx = s(x);
    CHECK(max_abs(MatD(sx - sx.transpose())) < 1e-14);
    CHECK(hermitian_defect(sx, p.fs.J0) < 1e-10);
    Tensor3<double> G = christoffels(p.fs.g, x);
    Tensor3<double> D = weighted_covariant_derivative(G, s, x);
    CHECK(max_abs(D) < 1e-8);
    CHECK(tensor_diff(D, weighted_covariant_derivative_fd(G, s, x)) < 1e-6);
    // a non-parallel sigma still agrees with the FD route
    MatrixField sb = sigma_field(p.gbar);
    CHECK(max_abs(weighted_covariant_derivative(G, sb, x)) > 1e-3);
    CHECK(tensor_diff(weighted_covariant_derivative(G, sb, x), weighted_covariant_derivative_fd(G, sb, x)) < 1e-6);
  }
}

TEST_CASE("flat connection reduces to partial derivatives") {
  MatrixField s = MatrixField::make<3>(4, [](const auto& x) {
    using T = typename std::decay_t<decltype(x)>::Scalar;
    Mat<T> m = identity<T>(4);
    m(0, 0) = m(1, 1) = 1.0 + x[2] * x[2];
    return m;
  });
  VecD x(4);
  x << 0.1, 0.2, 0.3, 0.4;
  Tensor3<double> zero(4);
  Tensor3<double> D = weighted_covariant_derivative(zero, s, x);
  std::vector<MatD> ds = partials(s, x);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      for (int k = 0; k < 4; ++k) CHECK(D(i, j, k) == ds[k](i, j));
  CHECK(max_abs(weighted_covariant_derivative(zero, constant_field(MatD::Identity(4, 4)), x)) == 0.0);
}

TEST_CASE("weighted main equation and its invariance") {
  const auto& p = cp2();
  MatrixField s = sigma_field(p.fs.g), sb = sigma_field(p.gbar), sc = sigma_field(conformal_fs());
  const MatD& J = p.fs.J0;
  std::mt19937_64 rng(3);
  for (int k = 0; k < 10; ++k) {
    VecD x = random_point(rng, 4, 0.8);
    Tensor3<double> G = christoffels(p.fs.g, x);
    CHECK(weighted_main_residual(G, J, s, x) < 1e-8);
    CHECK(weighted_main_residual(G, J, sb, x) < 1e-8);
    const double base = weighted_main_residual(G, J, sc, x);
    CHECK(base > 1e-3);
    VecD Phi = random_vector(rng, 4);
    Tensor3<double> Gb = connection_change(G, Phi, J);
    CHECK(std::abs(weighted_main_residual(Gb, J, sc, x) - base) < 1e-8);
    CHECK(weighted_main_residual(Gb, J, sb, x) < 1e-8);
  }
}

TEST_CASE("non h-projective change breaks the weighted equation") {
  const auto& p = cp2();
  MatrixField s = sigma_field(p.fs.g);
  std::mt19937_64 rng(4);
  VecD x = random_point(rng, 4, 0.8);
  Tensor3<double> G = christoffels(p.fs.g, x);
  VecD Phi = random_vector(rng, 4);
  // projective change without the J terms
  Tensor3<double> Gp = G;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      for (int k = 0; k < 4; ++k) Gp(i, j, k) += (i == j ? Phi[k] : 0.0) + (i == k ? Phi[j] : 0.0);
  CHECK(weighted_main_residual(Gp, p.fs.J0, s, x) > 1e-3);
  CHECK(complex_defect(Gp, p.fs.J0) > 1e-3);
}

TEST_CASE("connection change and transformation laws") {
  const auto& p = cp2();
  const MatD& J = p.fs.J0;
  MatrixField sb = sigma_field(p.gbar), sc = sigma_field(conformal_fs());
  std::mt19937_64 rng(6);
  for (int k = 0; k < 10; ++k) {
    VecD x = random_point(rng, 4, 0.8);
    Tensor3<double> G = christoffels(p.fs.g, x);
    CHECK(tensor_diff(connection_change(G, VecD::Zero(4), J), G) == 0.0);
    VecD Phi = random_vector(rng, 4);
    for (const auto* s : {&sb, &sc}) {
      TransformCheck t = weighted_transform_check(G, Phi, J, *s, x);
      CHECK(t.law1 < 1e-8);
      CHECK(t.law2 < 1e-8);
    }
    CHECK(complex_defect(G, J) < 1e-8);
    CHECK(complex_defect(connection_change(G, Phi, J), J) < 1e-8);
  }
  Connection lc = levi_civita(p.fs.g);
  Connection shifted = connection_change(lc, [](const VecD& y) { return VecD(y * 0.5); }, J);
  VecD x = VecD::Constant(4, 0.2);
  CHECK(tensor_diff(shifted(x), connection_change(lc(x), VecD(x * 0.5), J)) == 0.0);
}

TEST_CASE("sigma and metric round trip") {
  const auto& p = cp2();
  MatD id = MatD::Identity(4, 4);
  CHECK(max_abs(MatD(sigma_to_metric(metric_to_sigma(id)) - id)) < 1e-15);
  CHECK(max_abs(MatD(metric_to_sigma(id) - id)) < 1e-15);
  std::mt19937_64 rng(7);
  for (int k = 0; k < 20; ++k) {
    VecD x = random_point(rng, 4, 0.9);
    for (const MatD& g : {MatD(p.fs.g(x)), MatD(p.gbar(x))}) {
      MatD s = metric_to_sigma(g);
      CHECK(max_abs(MatD(sigma_to_metric(s) - g)) < 1e-10);
      CHECK(max_abs(MatD(sigma_to_inverse_metric(s) - g.inverse())) < 1e-10);
      CHECK(Eigen::SelfAdjointEigenSolver<MatD>(sigma_to_metric(s)).eigenvalues().minCoeff() > 0.0);
    }
  }
  // sigma -> c sigma rescales g^{ij} by c^{1 + 2n/2} = c^3 in real dimension 4
  MatD s = metric_to_sigma(MatD(p.fs.g(VecD::Constant(4, 0.3))));
  for (double c : {0.5, 2.0, 7.0}) {
    double ratio = sigma_to_inverse_metric(MatD(c * s))(0, 0) / sigma_to_inverse_metric(s)(0, 0);
    CHECK(std::log(ratio) / std::log(c) == Catch::Approx(3.0).epsilon(1e-12));
  }
  CHECK_THROWS_AS(sigma_to_metric(MatD(MatD::Zero(4, 4))), SingularMatrix);
  MatD indefinite = id;
  indefinite(0, 0) = -1.0;
  CHECK_THROWS_AS(metric_to_sigma(indefinite), DegenerateMetric);
}

TEST_CASE("normalizing one-form recovers the Levi-Civita connection") {
  const auto& p = cp2();
  const MatD& J = p.fs.J0;
  MatrixField s = sigma_field(p.fs.g), sb = sigma_field(p.gbar);
  std::mt19937_64 rng(8);
  for (int k = 0; k < 10; ++k) {
    VecD x = random_point(rng, 4, 0.8);
    Tensor3<double> G = christoffels(p.fs.g, x);
    CHECK(max_abs(normalizing_phi(G, s, x)) < 1e-10);
    Tensor3<double> G0 = connection_change(G, random_vector(rng, 4), J);
    NormalizationReport r = normalize_connection(G0, J, sb, x);
    CHECK(r.trace_after < 1e-8);
    CHECK(r.full_after < 1e-7);
    CHECK(r.levi_civita_deviation < 1e-6);
    CHECK(tensor_diff(connection_change(G0, r.phi, J), christoffels(p.gbar, x)) < 1e-6);
  }
}

TEST_CASE("Lie derivative of sigma") {
  const auto& p = cp2();
  MatrixField s = sigma_field(p.fs.g);
  std::mt19937_64 rng(9);
  const auto& em = []() -> const EssentialModel& {
    static EssentialModel m = essential_model({2, 1.0}, diag_generator(2), 0.7);
    return m;
  }();
  for (int k = 0; k < 10; ++k) {
    VecD x = random_point(rng, 4, 0.8);
    CHECK(max_abs(lie_derivative_sigma(s, p.hs.Lambdabar, x)) < 1e-10);
    // through L_v g: L_v sigma = -g^-1 (L_v g) g^-1 det^p + p tr(g^-1 L_v g) sigma, p = 1/(2(n+1))
    MatD g = p.fs.g(x), gi = g.inverse(), Lg = lie_derivative_metric(p.fs.g, em.v, x);
    const double pw = 1.0 / 6.0;
    MatD expect = -gi * Lg * gi * std::pow(g.determinant(), pw) + pw * (gi * Lg).trace() * s(x);
    CHECK(max_abs(MatD(lie_derivative_sigma(s, em.v, x) - expect)) < 1e-10);
  }
}

TEST_CASE("Lie endomorphism on the solution space") {
  auto em = essential_model({2, 1.0}, diag_generator(2), 0.7);
  const auto& hs = em.pair.hs;
  MatrixField s = sigma_field(em.pair.fs.g), sb = sigma_field(em.pair.gbar);
  std::mt19937_64 rng(10);
  std::vector<VecD> pts;
  for (int k = 0; k < 30; ++k) pts.push_back(random_point(rng, 4, 0.8));
  for (const auto& x : pts) CHECK(max_abs(MatD(sb(x) * s(x).inverse() - hs.A(x))) < 1e-10);

  KappaFit f = fit_lie_endomorphism(s, sb, em.v, pts);
  CHECK(f.pointwise_deviation < 1e-5);
  CHECK(f.residual < 1e-8);
  CHECK(f.min_singular > 1e-6);

  std::vector<LawSample> samples;
  for (int k = 0; k < 6; ++k) samples.push_back({hs.A(pts[k]), lie_derivative_11(hs.A, em.v, pts[k])});
  QuadraticLaw law = fit_quadratic_law(samples);
  CHECK(std::abs(f.c2() - law.c2) < 1e-4);
  CHECK(std::abs(f.c1() - law.c1) < 1e-4);
  CHECK(std::abs(f.c0() - law.c0) < 1e-4);

  KappaFit killing = fit_lie_endomorphism(s, sb, hs.Lambdabar, pts);
  CHECK(killing.kappa.cwiseAbs().maxCoeff() < 1e-8);

  MatrixField twice = MatrixField::make<3>(4, [s](const auto& x) { return (2.0 * s(x)).eval(); });
  CHECK_THROWS_AS(fit_lie_endomorphism(s, twice, em.v, pts), DegenerateFamily);
}

TEST_CASE("weight bookkeeping under a chart rescaling") {
  const auto& p = cp2();
  MetricField g = p.gbar;
  std::mt19937_64 rng(12);
  std::vector<MatD> maps;
  maps.push_back(2.0 * MatD::Identity(4, 4));
  MatD Q = MatD::Identity(4, 4) + 0.3 * MatD(random_vector(rng, 4) * random_vector(rng, 4).transpose());
  if (Q.determinant() < 0.0) Q.row(0) *= -1.0;
  maps.push_back(Q);
  for (const MatD& P : maps) {
    MatD Pi = P.inverse();
    // the same metric in the chart xt = P x
    MetricField gt = MetricField::make<3>(4, [g, Pi](const auto& xt) {
      using T = typename std::decay_t<decltype(xt)>::Scalar;
      Mat<T> Pl = lift<T>(Pi);
      Vec<T> x = Pl * xt;
      return Mat<T>(Pl.transpose() * g(x) * Pl);
    });
    for (int k = 0; k < 5; ++k) {
      VecD x = random_point(rng, 4, 0.6);
      MatD direct = metric_to_sigma(gt(VecD(P * x)));
      CHECK(max_abs(MatD(direct - transform_sigma(metric_to_sigma(g(x)), P))) < 1e-12);
    }
  }
  // rescaled chart: the weighted equation holds with its own Levi-Civita connection
  MatD P = 2.0 * MatD::Identity(4, 4);
  MetricField fs = p.fs.g;
  MetricField fst = MetricField::make<3>(4, [fs](const auto& xt) { return (0.25 * fs((0.5 * xt).eval())).eval(); });
  MetricField gt = MetricField::make<3>(4, [g](const auto& xt) { return (0.25 * g((0.5 * xt).eval())).eval(); });
  VecD xt = VecD::Constant(4, 0.4);
  CHECK(weighted_main_residual(christoffels(fst, xt), p.fs.J0, sigma_field(gt), xt) < 1e-8);

  MatD R = MatD::Identity(4, 4);
  R(0, 0) = -1.0;
  CHECK_THROWS_AS(transform_sigma(MatD::Identity(4, 4), R), InvalidParams);
}
