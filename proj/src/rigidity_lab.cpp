#include "hproj/rigidity_lab.hpp"

#include <algorithm>
#include <cmath>
#include <unsupported/Eigen/NonLinearOptimization>

namespace hproj {

double RigidityParams::rho1() const { return -0.5 * c1 - std::sqrt(alpha()); }
double RigidityParams::rho2() const { return -0.5 * c1 + std::sqrt(alpha()); }

double RigidityParams::C_from_constants() const {
  return -0.5 * (n - 1) * c1 - (2.0 * k1 + 1.0 - n) * std::sqrt(alpha()) + (n + 1.0) * beta;
}

void RigidityParams::validate() const {
  if (!(alpha() > 0.0)) throw InvalidParams("alpha = c1^2/4 - c0 must be positive");
  if (!(D > 0.0)) throw InvalidParams("D must be positive");
  if (k1 < 0 || k1 > n - 1) throw InvalidParams("k1 out of range");
}

FlowResult flow_with_jacobian(const VectorField& v, const VecD& x, double s, int steps) {
  const int d = static_cast<int>(x.size());
  auto rhs = [&](const VecD& y, const MatD& J) {
    return std::make_pair(VecD(v(y)), MatD(jacobian(v, y) * J));
  };
  VecD y = x;
  MatD J = MatD::Identity(d, d);
  const double h = s / steps;
  for (int k = 0; k < steps; ++k) {
    auto [a1, b1] = rhs(y, J);
    auto [a2, b2] = rhs(y + 0.5 * h * a1, J + 0.5 * h * b1);
    auto [a3, b3] = rhs(y + 0.5 * h * a2, J + 0.5 * h * b2);
    auto [a4, b4] = rhs(y + h * a3, J + h * b3);
    y += h / 6.0 * (a1 + 2.0 * a2 + 2.0 * a3 + a4);
    J += h / 6.0 * (b1 + 2.0 * b2 + 2.0 * b3 + b4);
  }
  if (!y.allFinite()) throw ChartEscape("flow left the chart");
  return {y, J};
}

LieDerivativeA lie_derivative_A(const VectorField& v, const MatrixField& A, const VecD& x, double eps) {
  LieDerivativeA out;
  out.ad = lie_derivative_11(A, v, x);
  auto pull = [&](double s) {
    FlowResult f = flow_with_jacobian(v, x, s);
    return MatD(f.jac.lu().solve(MatD(A(f.x) * f.jac)));
  };
  out.pullback = (pull(eps) - pull(-eps)) / (2.0 * eps);
  out.agreement = max_abs(MatD(out.ad - out.pullback));
  return out;
}

void QuadraticLaw::require_determined() const {
  if (underdetermined) throw DegenerateFamily("quadratic law is not determined by the samples");
}

QuadraticLaw fit_quadratic_law(const std::vector<LawSample>& samples, double max_cond) {
  if (samples.empty()) throw DegenerateFamily("no samples");
  const int d = static_cast<int>(samples.front().A.rows());
  const int rows = static_cast<int>(samples.size()) * d * d;
  Eigen::MatrixXd M(rows, 3);
  Eigen::VectorXd y(rows);
  double lscale = 0.0;
  int r = 0;
  for (const auto& s : samples) {
    MatD A2 = s.A * s.A;
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j, ++r) {
        M(r, 0) = A2(i, j);
        M(r, 1) = s.A(i, j);
        M(r, 2) = i == j ? 1.0 : 0.0;
        y[r] = s.L(i, j);
        lscale = std::max(lscale, std::abs(s.L(i, j)));
      }
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(M, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  QuadraticLaw law;
  law.cond = sv[2] > 0.0 ? sv[0] / sv[2] : std::numeric_limits<double>::infinity();
  law.underdetermined = !(law.cond <= max_cond);
  svd.setThreshold(1e-12);
  Eigen::Vector3d c = svd.solve(y);
  law.c2 = c[0];
  law.c1 = c[1];
  law.c0 = c[2];
  law.residual = (M * c - y).cwiseAbs().maxCoeff() / std::max(1.0, lscale);
  return law;
}

double rho_closed_form(const RigidityParams& p, double t) {
  if (!(p.alpha() > 0.0)) throw InvalidParams("alpha must be positive");
  return block_rho(p, t);
}

double rho_dot_closed_form(const RigidityParams& p, double t) {
  if (!(p.alpha() > 0.0)) throw InvalidParams("alpha must be positive");
  return block_rho_dot(p, t);
}

double rho_ode_residual(const std::vector<double>& t, const std::vector<double>& rho, double c1, double c0) {
  double worst = 0.0;
  for (size_t k = 1; k + 1 < t.size(); ++k) {
    double rd = (rho[k + 1] - rho[k - 1]) / (t[k + 1] - t[k - 1]);
    worst = std::max(worst, std::abs(rd - (rho[k] * rho[k] + c1 * rho[k] + c0)));
  }
  return worst;
}

namespace {

int nearest_value(const std::vector<double>& vals, double target) {
  int best = 0;
  for (int c = 1; c < static_cast<int>(vals.size()); ++c)
    if (std::abs(vals[c] - target) < std::abs(vals[best] - target)) best = c;
  return best;
}

VecD rk4_field(const VectorField& v, const VecD& x, double h) {
  VecD k1 = v(x), k2 = v(VecD(x + 0.5 * h * k1)), k3 = v(VecD(x + 0.5 * h * k2)), k4 = v(VecD(x + h * k3));
  return x + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

}  // namespace

FlowEigenvalueSamples sample_rho_along_flow(const HSolution& hs, const VectorField& v, const VecD& x0, double s0,
                                            double s1, double h, double time_scale) {
  EigenData e0 = eigen_structure(hs.g(x0), hs.A(x0), hs.J);
  int pick = 0;
  double best = -1.0;
  for (int c = 0; c < static_cast<int>(e0.values.size()); ++c) {
    double gn = eigenvalue_gradient(hs, x0, e0, c).norm();
    if (gn > best) best = gn, pick = c;
  }
  const double rho0 = e0.values[pick];
  auto sweep = [&](double span, double step) {
    std::vector<std::pair<double, double>> ts;
    std::vector<VecD> xs;
    VecD x = x0;
    double prev = rho0, s = 0.0;
    const int steps = static_cast<int>(std::round(std::abs(span) / h));
    for (int k = 1; k <= steps; ++k) {
      x = rk4_field(v, x, step);
      if (!x.allFinite()) throw ChartEscape("flow left the chart");
      s += step;
      EigenData e = eigen_structure(hs.g(x), hs.A(x), hs.J);
      prev = e.values[nearest_value(e.values, prev)];
      ts.emplace_back(s, prev);
      xs.push_back(x);
    }
    return std::make_pair(ts, xs);
  };
  auto [back, xb] = sweep(s0, -h);
  auto [fwd, xf] = sweep(s1, h);
  FlowEigenvalueSamples out;
  for (size_t k = back.size(); k-- > 0;) {
    out.t.push_back(time_scale * back[k].first);
    out.rho.push_back(back[k].second);
    out.x.push_back(xb[k]);
  }
  out.t.push_back(0.0);
  out.rho.push_back(rho0);
  out.x.push_back(x0);
  for (size_t k = 0; k < fwd.size(); ++k) {
    out.t.push_back(time_scale * fwd[k].first);
    out.rho.push_back(fwd[k].second);
    out.x.push_back(xf[k]);
  }
  if (time_scale < 0.0) {
    std::reverse(out.t.begin(), out.t.end());
    std::reverse(out.rho.begin(), out.rho.end());
    std::reverse(out.x.begin(), out.x.end());
  }
  return out;
}

namespace {

struct TanhFunctor {
  using Scalar = double;
  using InputType = Eigen::VectorXd;
  using ValueType = Eigen::VectorXd;
  using JacobianType = Eigen::MatrixXd;
  enum { InputsAtCompileTime = Eigen::Dynamic, ValuesAtCompileTime = Eigen::Dynamic };

  const std::vector<double>& t;
  const std::vector<double>& rho;

  int inputs() const { return 3; }
  int values() const { return static_cast<int>(t.size()); }

  int operator()(const Eigen::VectorXd& p, Eigen::VectorXd& f) const {
    for (size_t k = 0; k < t.size(); ++k) f[k] = -0.5 * p[0] - p[1] * std::tanh(p[1] * (t[k] + p[2])) - rho[k];
    return 0;
  }
  int df(const Eigen::VectorXd& p, Eigen::MatrixXd& J) const {
    for (size_t k = 0; k < t.size(); ++k) {
      double u = p[1] * (t[k] + p[2]);
      double th = std::tanh(u), s2 = 1.0 - th * th;
      J(k, 0) = -0.5;
      J(k, 1) = -th - p[1] * s2 * (t[k] + p[2]);
      J(k, 2) = -p[1] * p[1] * s2;
    }
    return 0;
  }
};

}  // namespace

TanhFit fit_tanh_profile(const std::vector<double>& t, const std::vector<double>& rho) {
  if (t.size() < 5) throw DegenerateFamily("too few samples for a tanh fit");
  // starting point from a linear fit of rho' = rho^2 + b rho + c
  Eigen::MatrixXd M(t.size() - 2, 2);
  Eigen::VectorXd y(t.size() - 2);
  for (size_t k = 1; k + 1 < t.size(); ++k) {
    M(k - 1, 0) = rho[k];
    M(k - 1, 1) = 1.0;
    y[k - 1] = (rho[k + 1] - rho[k - 1]) / (t[k + 1] - t[k - 1]) - rho[k] * rho[k];
  }
  Eigen::Vector2d bc = M.colPivHouseholderQr().solve(y);
  double a0 = std::sqrt(std::max(0.25 * bc[0] * bc[0] - bc[1], 1e-6));
  size_t mid = t.size() / 2;
  double arg = std::clamp((-0.5 * bc[0] - rho[mid]) / a0, -0.999, 0.999);
  Eigen::VectorXd p(3);
  p << bc[0], a0, std::atanh(arg) / a0 - t[mid];

  TanhFunctor fn{t, rho};
  Eigen::LevenbergMarquardt<TanhFunctor> lm(fn);
  lm.parameters.xtol = 1e-15;
  lm.parameters.ftol = 1e-15;
  lm.parameters.maxfev = 2000;
  auto status = lm.minimize(p);
  TanhFit fit;
  fit.c1 = p[0];
  fit.alpha = p[1] * p[1];
  fit.d = p[2];
  fit.iterations = static_cast<int>(lm.iter);
  fit.converged = status != Eigen::LevenbergMarquardtSpace::ImproperInputParameters &&
                  status != Eigen::LevenbergMarquardtSpace::TooManyFunctionEvaluation;
  Eigen::VectorXd f(t.size());
  fn(p, f);
  fit.max_deviation = f.cwiseAbs().maxCoeff();
  return fit;
}

TwoDimBlock block_metric(const RigidityParams& p, double t) {
  p.validate();
  TwoDimBlock b;
  b.t = t;
  D1 td(t, 1.0);
  D1 h = block_h(p, td);
  b.h = h.v;
  b.h_dot = h.d;
  b.rho = block_rho(p, t);
  b.rho_dot = block_rho_dot(p, t);
  b.gLL = block_gLL(p, t);
  D1 phi = block_rho_dot(p, td) / (2.0 * h);
  b.phi = phi.v;
  b.phi_dot = phi.d;
  b.psi = b.h_dot / (2.0 * b.h);
  return b;
}

double block_curvature(const RigidityParams& p, double t) {
  p.validate();
  const double a = std::sqrt(p.alpha()), dc = p.C - p.c1;
  const double g1 = -4.0 * p.c0 - p.C * p.C + 2.0 * p.C * p.c1;
  const double g2 = -dc * dc;
  const double g3 = -2.0 * dc * a;
  const double s = 2.0 * a * (t + p.d), e = std::exp(-dc * t);
  return (g1 * e + g2 * std::cosh(s) * e + g3 * std::sinh(s) * e) / (4.0 * p.D);
}

double block_curvature_ad(const RigidityParams& p, double t) {
  p.validate();
  MetricField g = MetricField::make<3>(2, [p](const auto& x) {
    using T = typename std::decay_t<decltype(x)>::Scalar;
    Mat<T> m = Mat<T>::Constant(2, 2, T(0.0));
    m(0, 0) = block_h(p, x[0]);
    m(1, 1) = block_gLL(p, x[0]);
    return m;
  });
  VecD x(2);
  x << t, 0.0;
  return sectional_curvature(g, x, VecD::Unit(2, 0), VecD::Unit(2, 1));
}

double max_abs_block_curvature(const RigidityParams& p, double t_min, double t_max, int points) {
  double m = 0.0;
  for (int k = 0; k < points; ++k) {
    double t = t_min + (t_max - t_min) * k / (points - 1);
    m = std::max(m, std::abs(block_curvature(p, t)));
  }
  return m;
}

double length_integral(const RigidityParams& p, double a, double b, int intervals) {
  p.validate();
  if (intervals % 2) ++intervals;
  const double h = (b - a) / intervals, ra = std::sqrt(p.alpha());
  // sqrt(h) = 2 sqrt(D) exp((C - c1) t / 2 - |u|) / (1 + exp(-2|u|)), u = sqrt(alpha)(t + d)
  auto root_h = [&](double t) {
    double u = std::abs(ra * (t + p.d));
    return 2.0 * std::sqrt(p.D) * std::exp(0.5 * (p.C - p.c1) * t - u) / (1.0 + std::exp(-2.0 * u));
  };
  double s = 0.0;
  for (int k = 0; k <= intervals; ++k) {
    double w = (k == 0 || k == intervals) ? 1.0 : (k % 2 ? 4.0 : 2.0);
    s += w * root_h(a + k * h);
  }
  return s * h / 3.0;
}

LengthReport length_finiteness(const RigidityParams& p) {
  p.validate();
  LengthReport r;
  const double a = std::sqrt(p.alpha());
  r.condition = 1.0 - (p.C - p.c1) / (2.0 * a);
  r.exponent = 0.5 * (p.C - p.c1) - a;
  r.predicted_finite = r.condition > 0.0;
  const double T = std::abs(p.d) + std::min(500.0, 40.0 / std::max(std::abs(r.exponent), 0.05));
  r.integral_T = length_integral(p, 0.0, T);
  r.integral_2T = length_integral(p, 0.0, 2.0 * T, 40000);
  r.numerically_finite = (r.integral_2T - r.integral_T) < 1e-6 * std::max(r.integral_2T, 1e-300);
  return r;
}

MuBSolution mu_B_solve(const RigidityParams& p, double rho, double gLL, double phidot_plus_phipsi, double tol) {
  p.validate();
  std::vector<std::array<double, 3>> rows;
  rows.push_back({1.0, rho, phidot_plus_phipsi});
  if (p.k1 > 0) {
    if (std::abs(rho - p.rho1()) < 1e-14) throw InvalidParams("rho coincides with rho1");
    rows.push_back({1.0, p.rho1(), gLL / (rho - p.rho1())});
  }
  if (p.k2() > 0) {
    if (std::abs(rho - p.rho2()) < 1e-14) throw InvalidParams("rho coincides with rho2");
    rows.push_back({1.0, p.rho2(), gLL / (rho - p.rho2())});
  }
  Eigen::MatrixXd M(rows.size(), 2);
  Eigen::VectorXd y(rows.size());
  for (size_t r = 0; r < rows.size(); ++r) {
    M(r, 0) = rows[r][0];
    M(r, 1) = rows[r][1];
    y[r] = rows[r][2];
  }
  Eigen::Vector2d s = M.colPivHouseholderQr().solve(y);
  MuBSolution out;
  out.mu = s[0];
  out.B = s[1];
  out.residual = (M * s - y).norm();
  out.consistent = out.residual <= tol;
  return out;
}

MuBSolution mu_B_solve(const RigidityParams& p, double t) {
  TwoDimBlock b = block_metric(p, t);
  return mu_B_solve(p, b.rho, b.gLL, b.phi_dot + b.phi * b.psi);
}

MuBSolution fit_mu_B(const HSolution& hs, const VecD& x) {
  const int d = static_cast<int>(x.size());
  MatD N = covariant_derivative_vector(hs.g, hs.Lambda, x);
  MatD A = hs.A(x);
  Eigen::MatrixXd M(d * d, 2);
  Eigen::VectorXd y(d * d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) {
      M(i * d + j, 0) = i == j ? 1.0 : 0.0;
      M(i * d + j, 1) = A(i, j);
      y[i * d + j] = N(i, j);
    }
  Eigen::Vector2d s = M.colPivHouseholderQr().solve(y);
  MuBSolution out;
  out.mu = s[0];
  out.B = s[1];
  out.residual = (M * s - y).cwiseAbs().maxCoeff();
  out.consistent = out.residual <= 1e-6;
  return out;
}

ScalarField mu_field_from_trace(const HSolution& hs, double B) {
  const int level = std::min(hs.Lambda.max_level(), hs.g.max_level()) - 1;
  return make_capped<Scalar>(hs.g.dim(), level, [hs, B](const auto& x) {
    auto N = covariant_derivative_vector(hs.g, hs.Lambda, x);
    return (N.trace() - B * hs.A(x).trace()) / (2.0 * hs.n);
  });
}

ScalarField mu_field_from_lambda(const HSolution& hs, double B, double m0) {
  ScalarField lam = hs.lambda;
  return make_capped<Scalar>(lam.dim(), lam.max_level(),
                             [lam, B, m0](const auto& x) { return 2.0 * B * lam(x) + m0; });
}

SystemResidual system_residual(const HSolution& hs, const ScalarField& mu, double B, const VecD& x) {
  const int d = static_cast<int>(x.size());
  SystemResidual r;
  r.r1 = main_equation_residual(hs, x);
  MatD g = hs.g(x), A = hs.A(x);
  MatD N = covariant_derivative_vector(hs.g, hs.Lambda, x);
  double m = mu(x);
  MatD R = N - m * MatD::Identity(d, d) - B * A;
  for (int k = 0; k < d; ++k) {
    VecD c = R.col(k);
    r.r2 = std::max(r.r2, std::sqrt(std::max(0.0, c.dot(g * c))));
  }
  VecD dmu = gradient_coords(mu, x);
  VecD gl = g * hs.Lambda(x);
  r.r3 = max_abs(VecD(dmu - 2.0 * B * gl));
  return r;
}

namespace {

// H_jk = d_j d_k mu - Gamma^l_jk d_l mu
MatD hessian(const MetricField& g, const ScalarField& mu, const VecD& x) {
  const int d = static_cast<int>(x.size());
  MatD H(d, d);
  for (int j = 0; j < d; ++j) {
    Vec<D1> gj = gradient_coords(mu, seeded(x, j));
    for (int k = 0; k < d; ++k) H(j, k) = gj[k].d;
  }
  Tensor3<double> G = christoffels(g, x);
  VecD dm = gradient_coords(mu, x);
  for (int j = 0; j < d; ++j)
    for (int k = 0; k < d; ++k)
      for (int l = 0; l < d; ++l) H(j, k) -= G(l, j, k) * dm[l];
  return H;
}

}  // namespace

TannoResidual tanno_residual(const HSolution& hs, const ScalarField& mu, double B, const VecD& x, double fd_step) {
  const int d = static_cast<int>(x.size());
  TannoResidual r;
  MatD g = hs.g(x), A = hs.A(x), J = hs.J;
  MatD H = hessian(hs.g, mu, x);
  double m = mu(x);
  r.chain = max_abs(MatD(H - 2.0 * B * (m * g + B * g * A)));

  std::vector<MatD> dH(d);
  for (int i = 0; i < d; ++i) {
    VecD xp = x, xm = x;
    xp[i] += fd_step;
    xm[i] -= fd_step;
    dH[i] = (hessian(hs.g, mu, xp) - hessian(hs.g, mu, xm)) / (2.0 * fd_step);
  }
  Tensor3<double> G = christoffels(hs.g, x);
  VecD dm = gradient_coords(mu, x);
  VecD Jdm = J.transpose() * dm;  // (J^T dmu)_k = nabla_{J e_k} mu
  MatD JTg = J.transpose() * g;   // (J^T g)_{ij} = g(J e_i, e_j)
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      for (int k = 0; k < d; ++k) {
        double lhs = dH[i](j, k);
        for (int l = 0; l < d; ++l) lhs -= G(l, i, j) * H(l, k) + G(l, i, k) * H(j, l);
        double rhs = B * (2.0 * dm[i] * g(j, k) + dm[k] * g(i, j) + dm[j] * g(i, k) - Jdm[k] * JTg(i, j) -
                          Jdm[j] * JTg(i, k));
        r.tanno = std::max(r.tanno, std::abs(lhs - rhs));
        r.scale = std::max(r.scale, std::abs(lhs));
      }
  return r;
}

double holomorphic_sectional_curvature(const MetricField& g, const MatD& J, const VecD& x, const VecD& X) {
  return sectional_curvature(g, x, X, VecD(J * X));
}

SplittingReport v_splitting_check(const HSolution& hs, const VectorField& v, const QuadraticLaw& law, const VecD& x,
                                  double fd_step) {
  SplittingReport rep;
  const int d = static_cast<int>(x.size());
  MatD g = hs.g(x), A = hs.A(x);
  auto gnorm = [&](const VecD& u) { return std::sqrt(std::max(0.0, u.dot(g * u))); };
  VecD L = hs.Lambda(x), Lb = hs.Lambdabar(x);
  const double nl = gnorm(L);
  if (nl < 1e-8) {
    rep.skipped = true;
    return rep;
  }
  VecD bL = lie_bracket(v, hs.Lambda, x), bLb = lie_bracket(v, hs.Lambdabar, x);
  double f = bL.dot(g * L) / (nl * nl), fb = bLb.dot(g * Lb) / (nl * nl);
  rep.f = f;
  rep.parallel_defect = std::max(gnorm(VecD(bL - f * L)), gnorm(VecD(bLb - fb * Lb))) / nl;
  rep.f_mismatch = std::abs(f - fb);

  EigenData e = eigen_structure(g, A, hs.J);
  VecD vx = v(x);
  MatD dv = jacobian(v, x);
  for (int c = 0; c < static_cast<int>(e.values.size()); ++c) {
    VecD drho = g * eigenvalue_gradient(hs, x, e, c);
    double rho = e.values[c];
    rep.vrho = std::max(rep.vrho, std::abs(drho.dot(vx) - (law.c2 * rho * rho + law.c1 * rho + law.c0)));
  }
  if (e.min_gap < 1e-6) return rep;
  for (int f0 = 0; f0 < static_cast<int>(e.frame_cluster.size()); ++f0) {
    const int c = e.frame_cluster[f0];
    const double rho = e.values[c];
    VecD U0 = e.frame.col(f0);
    auto field = [&](const VecD& y) {
      MatD gy = hs.g(y);
      EigenData ey = eigen_structure(gy, hs.A(y), hs.J);
      return VecD(cluster_projector(ey, gy, nearest_value(ey.values, rho)) * U0);
    };
    MatD dU(d, d);
    for (int k = 0; k < d; ++k) {
      VecD yp = x, ym = x;
      yp[k] += fd_step;
      ym[k] -= fd_step;
      dU.col(k) = (field(yp) - field(ym)) / (2.0 * fd_step);
    }
    VecD br = dU * vx - dv * U0;
    rep.eigen_bracket = std::max(rep.eigen_bracket, gnorm(VecD((A - rho * MatD::Identity(d, d)) * br)));
  }
  return rep;
}

AvShift av_shift(const MetricField& g, const VectorField& v, const MatrixField& A, double c2, const VecD& x) {
  const int d = static_cast<int>(x.size());
  MatD R = A_from_vector_field(g, v, x) - c2 * A(x);
  AvShift s;
  s.beta = R.trace() / d;
  s.defect = max_abs(MatD(R - s.beta * MatD::Identity(d, d)));
  return s;
}

}  // namespace hproj
