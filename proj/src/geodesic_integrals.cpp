#include "hproj/geodesic_integrals.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <unsupported/Eigen/Polynomials>

namespace hproj {

GeodesicState geodesic_rhs(const MetricField& g, const GeodesicState& s) {
  const int d = static_cast<int>(s.x.size());
  Tensor3<double> G = christoffels(g, s.x);
  VecD a = VecD::Zero(d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      for (int k = 0; k < d; ++k) a[i] -= G(i, j, k) * s.v[j] * s.v[k];
  return {s.v, a};
}

namespace {

GeodesicState rk4_step(const MetricField& g, const GeodesicState& s, double h) {
  auto axpy = [](const GeodesicState& a, double c, const GeodesicState& k) {
    return GeodesicState{a.x + c * k.x, a.v + c * k.v};
  };
  GeodesicState k1 = geodesic_rhs(g, s);
  GeodesicState k2 = geodesic_rhs(g, axpy(s, 0.5 * h, k1));
  GeodesicState k3 = geodesic_rhs(g, axpy(s, 0.5 * h, k2));
  GeodesicState k4 = geodesic_rhs(g, axpy(s, h, k3));
  return {s.x + h / 6.0 * (k1.x + 2.0 * k2.x + 2.0 * k3.x + k4.x),
          s.v + h / 6.0 * (k1.v + 2.0 * k2.v + 2.0 * k3.v + k4.v)};
}

double energy(const MetricField& g, const GeodesicState& s) { return s.v.dot(g(s.x) * s.v); }

void check_chart(const GeodesicState& s, double radius) {
  if (!s.x.allFinite() || !s.v.allFinite() || s.x.norm() > radius)
    throw ChartEscape("geodesic left the chart");
}

// Pair the frame columns (U_i, JU_i) with their eigenvalues.
void eigen_pairs(const MatD& g, const MatD& A, const MatD& J, const VecD& zeta, std::vector<double>& mu,
                 std::vector<double>& w) {
  const int d = static_cast<int>(g.rows());
  EigenData e = eigen_structure(g, A, J);
  if (static_cast<int>(e.frame_cluster.size()) != d) throw DegenerateFamily("eigenframe is incomplete");
  VecD gz = g * zeta;
  mu.clear();
  w.clear();
  for (int i = 0; i < d / 2; ++i) {
    double a = gz.dot(e.frame.col(2 * i)), b = gz.dot(e.frame.col(2 * i + 1));
    mu.push_back(e.values[e.frame_cluster[2 * i]]);
    w.push_back(a * a + b * b);
  }
}

}  // namespace

Trajectory integrate_geodesic(const MetricField& g, const GeodesicState& s0, double T, const IntegrateOptions& opt) {
  if (!(opt.h > 0.0)) throw InvalidParams("step must be positive");
  check_chart(s0, opt.escape_radius);
  Trajectory tr;
  tr.s.push_back(0.0);
  tr.states.push_back(s0);
  const double E0 = energy(g, s0);
  GeodesicState cur = s0;
  double s = 0.0;
  const int steps = static_cast<int>(std::ceil(T / opt.h - 1e-9));
  for (int k = 0; k < steps; ++k) {
    double h = std::min(opt.h, T - s);
    cur = rk4_step(g, cur, h);
    s = (k + 1 == steps) ? T : s + h;
    check_chart(cur, opt.escape_radius);
    double drift = E0 > 0.0 ? std::abs(energy(g, cur) - E0) / E0 : 0.0;
    tr.energy_drift = std::max(tr.energy_drift, drift);
    if (tr.energy_drift > opt.max_drift) throw StepRejected("energy drift exceeds limit");
    tr.s.push_back(s);
    tr.states.push_back(cur);
  }
  return tr;
}

std::vector<double> integral_coefficients(const MatD& g, const MatD& A, const MatD& J, const VecD& zeta) {
  std::vector<double> mu, w;
  eigen_pairs(g, A, J, zeta, mu, w);
  const int n = static_cast<int>(mu.size());
  std::vector<double> c(n, 0.0);
  for (int i = 0; i < n; ++i) {
    std::vector<double> p{1.0};
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      std::vector<double> q(p.size() + 1, 0.0);
      for (size_t k = 0; k < p.size(); ++k) {
        q[k] += mu[j] * p[k];
        q[k + 1] -= p[k];
      }
      p = std::move(q);
    }
    for (int k = 0; k < n; ++k) c[k] += w[i] * p[k];
  }
  return c;
}

std::vector<double> integral_coefficients(const HSolution& hs, const GeodesicState& s) {
  return integral_coefficients(hs.g(s.x), hs.A(s.x), hs.J, s.v);
}

std::vector<double> poly_derivative(const std::vector<double>& c, int m) {
  std::vector<double> out = c;
  for (int r = 0; r < m; ++r) {
    if (out.empty()) break;
    std::vector<double> d(out.size() > 1 ? out.size() - 1 : 0);
    for (size_t k = 1; k < out.size(); ++k) d[k - 1] = static_cast<double>(k) * out[k];
    out = std::move(d);
  }
  return out;
}

double poly_eval(const std::vector<double>& c, double t, int m) {
  std::vector<double> d = poly_derivative(c, m);
  double r = 0.0;
  for (size_t k = d.size(); k-- > 0;) r = r * t + d[k];
  return r;
}

double F_t(const HSolution& hs, const GeodesicState& s, double t, int m) {
  return poly_eval(integral_coefficients(hs, s), t, m);
}

double F_t_determinant(const MatD& g, const MatD& A, const VecD& zeta, double t) {
  const int d = static_cast<int>(g.rows());
  MatD B = A - t * MatD::Identity(d, d);
  try {
    LU<double> lu(B, 1e-13);
    double det = lu.det();
    VecD y = lu.solve(zeta);
    return std::sqrt(std::max(det, 0.0)) * zeta.dot(g * y);
  } catch (const SingularMatrix&) {
    return std::numeric_limits<double>::quiet_NaN();
  }
}

ConservationReport conservation_sweep(const HSolution& hs, const GeodesicState& s0, const std::vector<double>& t_grid,
                                      double T, int max_order, const IntegrateOptions& opt) {
  Trajectory tr = integrate_geodesic(hs.g, s0, T, opt);
  ConservationReport rep;
  rep.energy_drift = tr.energy_drift;
  std::vector<std::vector<double>> coeffs;
  coeffs.reserve(tr.states.size());
  for (const auto& st : tr.states) coeffs.push_back(integral_coefficients(hs, st));
  const auto& c0 = coeffs.front();
  double cscale = 0.0;
  for (double v : c0) cscale = std::max(cscale, std::abs(v));
  for (const auto& c : coeffs)
    for (size_t k = 0; k < c.size(); ++k)
      rep.coefficient_drift = std::max(rep.coefficient_drift, std::abs(c[k] - c0[k]) / cscale);

  for (double t : t_grid)
    for (int m = 0; m <= max_order; ++m) {
      DriftEntry e;
      e.t = t;
      e.m = m;
      e.initial = poly_eval(c0, t, m);
      double scale = 0.0;
      for (size_t k = static_cast<size_t>(m); k < c0.size(); ++k) {
        double fall = 1.0;
        for (int r = 0; r < m; ++r) fall *= static_cast<double>(k - r);
        scale += std::abs(c0[k]) * fall * std::pow(std::abs(t), static_cast<double>(k - m));
      }
      double worst = 0.0;
      for (const auto& c : coeffs) worst = std::max(worst, std::abs(poly_eval(c, t, m) - e.initial));
      e.drift = scale > 0.0 ? worst / scale : worst;
      rep.max_drift = std::max(rep.max_drift, e.drift);
      rep.entries.push_back(e);
    }
  return rep;
}

std::vector<double> polynomial_real_roots(const std::vector<double>& c, double imag_tol) {
  int deg = static_cast<int>(c.size()) - 1;
  while (deg > 0 && c[deg] == 0.0) --deg;
  if (deg <= 0) return {};
  Eigen::VectorXd p(deg + 1);
  for (int k = 0; k <= deg; ++k) p[k] = c[k];
  std::vector<double> out;
  if (deg == 1) {
    out.push_back(-p[0] / p[1]);
    return out;
  }
  Eigen::PolynomialSolver<double, Eigen::Dynamic> solver(p);
  for (const auto& r : solver.roots()) {
    if (std::abs(r.imag()) > imag_tol) throw InterlacingViolation("integral polynomial has a non-real root");
    out.push_back(r.real());
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<double> integral_roots(const HSolution& hs, const GeodesicState& s, double imag_tol) {
  if (s.v.norm() == 0.0) throw InvalidParams("zero velocity");
  return polynomial_real_roots(integral_coefficients(hs, s), imag_tol);
}

double interlacing_slack(const std::vector<double>& mu, const std::vector<double>& roots) {
  double slack = std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < roots.size() && i + 1 < mu.size(); ++i)
    slack = std::min({slack, roots[i] - mu[i], mu[i + 1] - roots[i]});
  return slack;
}

namespace {

struct Crossing {
  bool hit = false;
  double q = 0.0;  // component along f at arrival
  GeodesicState state;
  double length = 0.0;
};

Crossing fly(const MetricField& g, const VecD& x, const VecD& e, const VecD& f, double dist, double theta,
             const ShootOptions& opt) {
  VecD dir = std::cos(theta) * e + std::sin(theta) * f;
  GeodesicState cur{x, dir / std::sqrt(dir.dot(g(x) * dir))};
  Crossing out;
  double s = 0.0;
  while (s < opt.max_length) {
    GeodesicState nxt = rk4_step(g, cur, opt.h);
    if (!nxt.x.allFinite() || nxt.x.norm() > 1e3) return out;
    double pa = (cur.x - x).dot(e), pb = (nxt.x - x).dot(e);
    if (pb >= dist && pa < dist) {
      double lo = 0.0, hi = opt.h;
      GeodesicState mid = nxt;
      for (int it = 0; it < 60; ++it) {
        double m = 0.5 * (lo + hi);
        mid = rk4_step(g, cur, m);
        if ((mid.x - x).dot(e) < dist) lo = m; else hi = m;
        if (hi - lo < 1e-14) break;
      }
      out.hit = true;
      out.state = rk4_step(g, cur, 0.5 * (lo + hi));
      out.q = (out.state.x - x).dot(f);
      out.length = s + 0.5 * (lo + hi);
      return out;
    }
    cur = nxt;
    s += opt.h;
  }
  return out;
}

}  // namespace

std::optional<ShotResult> shoot_geodesic(const MetricField& g, const MatD& J, const VecD& x, const VecD& y,
                                         const ShootOptions& opt) {
  const double dist = (y - x).norm();
  if (dist == 0.0) {
    ShotResult r;
    VecD v = VecD::Unit(x.size(), 0);
    r.start = r.end = {x, v / std::sqrt(v.dot(g(x) * v))};
    return r;
  }
  VecD e = (y - x) / dist;
  VecD f = J * e;
  f -= f.dot(e) * e;
  f.normalize();
  const double half = 0.5 * std::numbers::pi * (1.0 - 1e-3);
  std::vector<double> th(opt.scan + 1);
  std::vector<Crossing> cr(opt.scan + 1);
  for (int i = 0; i <= opt.scan; ++i) {
    th[i] = -half + 2.0 * half * i / opt.scan;
    cr[i] = fly(g, x, e, f, dist, th[i], opt);
  }
  int best = -1;
  for (int i = 0; i < opt.scan; ++i) {
    if (!cr[i].hit || !cr[i + 1].hit) continue;
    if ((cr[i].q <= 0.0) != (cr[i + 1].q <= 0.0) || cr[i].q == 0.0) {
      if (best < 0 || std::abs(th[i] + th[i + 1]) < std::abs(th[best] + th[best + 1])) best = i;
    }
  }
  if (best < 0) return std::nullopt;
  double lo = th[best], hi = th[best + 1];
  Crossing clo = cr[best], cmid = clo;
  for (int it = 0; it < opt.max_iter; ++it) {
    double m = 0.5 * (lo + hi);
    cmid = fly(g, x, e, f, dist, m, opt);
    if (!cmid.hit) return std::nullopt;
    if ((cmid.state.x - y).norm() < opt.tol) break;
    if ((cmid.q <= 0.0) == (clo.q <= 0.0)) {
      lo = m;
      clo = cmid;
    } else {
      hi = m;
    }
  }
  double miss = (cmid.state.x - y).norm();
  if (miss >= opt.tol) return std::nullopt;
  double theta = 0.5 * (lo + hi);
  VecD dir = std::cos(theta) * e + std::sin(theta) * f;
  ShotResult r;
  r.start = {x, dir / std::sqrt(dir.dot(g(x) * dir))};
  r.end = cmid.state;
  r.length = cmid.length;
  r.miss = miss;
  return r;
}

OrderingReport global_ordering_probe(const HSolution& hs, const std::vector<std::pair<VecD, VecD>>& pairs, bool shoot,
                                     const ShootOptions& opt) {
  OrderingReport rep;
  rep.min_slack = std::numeric_limits<double>::infinity();
  rep.chain_min_slack = std::numeric_limits<double>::infinity();
  for (const auto& [x, y] : pairs) {
    ++rep.pairs;
    std::vector<double> mx = eigen_structure(hs.g(x), hs.A(x), hs.J).mu;
    std::vector<double> my = eigen_structure(hs.g(y), hs.A(y), hs.J).mu;
    bool bad = false;
    for (size_t i = 0; i + 1 < mx.size() && i + 1 < my.size(); ++i) {
      double sl = my[i + 1] - mx[i];
      rep.min_slack = std::min(rep.min_slack, sl);
      if (sl < -1e-8) bad = true;
    }
    if (bad) ++rep.violations;
    if (!shoot) continue;
    auto shot = shoot_geodesic(hs.g, hs.J, x, y, opt);
    if (!shot) {
      ++rep.shot_failures;
      continue;
    }
    ++rep.shots;
    std::vector<double> tx = integral_roots(hs, shot->start), ty = integral_roots(hs, shot->end);
    bool cbad = false;
    for (size_t i = 0; i < tx.size() && i < ty.size(); ++i) {
      double sl = std::min(tx[i] - mx[i], my[i + 1] - ty[i]);
      rep.chain_min_slack = std::min(rep.chain_min_slack, sl);
      rep.root_transport = std::max(rep.root_transport, std::abs(tx[i] - ty[i]));
      if (sl < -1e-8) cbad = true;
    }
    if (cbad) ++rep.chain_violations;
  }
  return rep;
}

double integral_I0(const HSolution& hs, const GeodesicState& s) {
  double v = s.v.dot(hs.g(s.x) * hs.Lambdabar(s.x));
  return v * v;
}

double integral_Ik(const HSolution& hs, const GeodesicState& s, double rho_c, int k) {
  if (k < 1) throw InvalidParams("half multiplicity must be positive");
  return F_t(hs, s, rho_c, k - 1);
}

}  // namespace hproj
