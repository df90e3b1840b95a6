#include "hproj/hproj_core.hpp"

#include <limits>

namespace hproj {

MatrixField A_field(const MetricField& g, const MetricField& gbar) {
  int level = std::min(g.max_level(), gbar.max_level());
  return make_capped<Mat>(g.dim(), level, [g, gbar](const auto& x) { return compute_A(g(x), gbar(x)); });
}

MatD reconstruct_gbar(const MatD& g, const MatD& A, double shift) {
  MatD As = A + shift * MatD::Identity(A.rows(), A.cols());
  double d = det(As);
  if (!(d > 0.0)) throw NotReconstructible("det(A) must be positive");
  MatD Ai;
  try {
    Ai = inverse(As);
  } catch (const SingularMatrix&) {
    throw NotReconstructible("A is singular");
  }
  MatD gb = std::pow(d, -0.5) * g * Ai;
  return 0.5 * (gb + gb.transpose());
}

MatD solution_transport(const MatD& A1, const MatD& A) { return A1 * inverse(A); }

MatrixField solution_transport_field(const MatrixField& A1, const MatrixField& A) {
  int level = std::min(A1.max_level(), A.max_level());
  return make_capped<Mat>(A.dim(), level, [A1, A](const auto& x) {
    using T = typename std::decay_t<decltype(x)>::Scalar;
    return Mat<T>(A1(x) * inverse(A(x)));
  });
}

HSolution make_hsolution(const MetricField& g, const MatD& J, const MatrixField& A) {
  HSolution hs;
  hs.n = g.dim() / 2;
  hs.g = g;
  hs.J = J;
  hs.A = A;
  hs.lambda = make_capped<Scalar>(A.dim(), A.max_level(), [A](const auto& x) { return 0.25 * trace(A(x)); });
  hs.Lambda = gradient_field(g, hs.lambda);
  VectorField L = hs.Lambda;
  hs.Lambdabar = make_capped<Vec>(A.dim(), L.max_level(), [L, J](const auto& x) {
    using T = typename std::decay_t<decltype(x)>::Scalar;
    return Vec<T>(lift<T>(J) * L(x));
  });
  return hs;
}

MainEquationCheck main_equation_check(const HSolution& hs, const VecD& x) {
  const int d = static_cast<int>(x.size());
  Tensor3<double> G = christoffels(hs.g, x);
  Tensor3<double> nA = covariant_derivative_11(G, hs.A, x);
  MatD g = hs.g(x);
  VecD L = hs.Lambda(x);
  VecD Lb = hs.Lambdabar(x);
  const MatD& J = hs.J;
  MatD gJ = g * J;
  VecD lam = g * L;        // lambda_i
  VecD lamb = -(g * Lb);   // bar lambda_i
  VecD gLb = g * Lb;
  MainEquationCheck out;
  for (int k = 0; k < d; ++k)
    for (int j = 0; j < d; ++j) {
      VecD R(d);
      for (int p = 0; p < d; ++p) {
        double rhs = g(j, k) * L[p] + lam[j] * (p == k) + gJ(j, k) * Lb[p] + gLb[j] * J(p, k);
        R[p] = nA(k, p, j) - rhs;
      }
      out.invariant = std::max(out.invariant, std::sqrt(std::max(0.0, R.dot(g * R))));
      VecD lowered = g * R;
      for (int i = 0; i < d; ++i) {
        double a = 0.0;
        for (int p = 0; p < d; ++p) a += g(i, p) * nA(k, p, j);
        double r = a - (lam[i] * g(j, k) + lam[j] * g(i, k) - lamb[i] * gJ(j, k) - lamb[j] * gJ(i, k));
        out.index = std::max(out.index, std::abs(r));
        out.agreement = std::max(out.agreement, std::abs(lowered[i] - r));
      }
    }
  return out;
}

double main_equation_residual(const HSolution& hs, const VecD& x) { return main_equation_check(hs, x).invariant; }

double trace_identity_residual(const HSolution& hs, const VecD& x) {
  const int d = static_cast<int>(x.size());
  std::vector<MatD> dA = partials(hs.A, x);
  MatD g = hs.g(x);
  VecD L = hs.Lambda(x), Lb = hs.Lambdabar(x);
  MatD gJ = g * hs.J;
  VecD gL = g * L, gLb = g * Lb;
  double worst = 0.0;
  for (int k = 0; k < d; ++k) {
    double tr = 0.0;
    for (int j = 0; j < d; ++j) tr += g(j, k) * L[j] + gL[j] * (j == k) + gJ(j, k) * Lb[j] + gLb[j] * hs.J(j, k);
    worst = std::max(worst, std::abs(dA[k].trace() - tr));
  }
  return worst;
}

MatrixField A_v_field(const MetricField& g, const VectorField& v) {
  int level = std::min(g.max_level(), v.max_level()) - 1;
  return make_capped<Mat>(g.dim(), level, [g, v](const auto& x) { return A_from_vector_field(g, v, x); });
}

double killing_residual(const MetricField& g, const VectorField& V, const VecD& x) {
  MatD M = g(x) * covariant_derivative_vector(g, V, x);
  return max_abs(MatD(M + M.transpose()));
}

CommutingCheck commuting_holomorphic_check(const MetricField& /*g*/, const MatD& J, const VectorField& Lambda,
                                           const VectorField& Lambdabar, const VecD& x) {
  MatrixField Jf = constant_field(J);
  CommutingCheck out;
  out.lie_Lambda_J = max_abs(MatD(lie_derivative_11(Jf, Lambda, x)));
  out.lie_Lambdabar_J = max_abs(MatD(lie_derivative_11(Jf, Lambdabar, x)));
  out.bracket = max_abs(VecD(lie_bracket(Lambda, Lambdabar, x)));
  return out;
}

EigenData eigen_structure(const MatD& g, const MatD& A, const MatD& J, double cluster_tol) {
  const int d = static_cast<int>(g.rows());
  Eigen::MatrixXd gc = g;
  Eigen::LLT<Eigen::MatrixXd> llt(gc);
  if (llt.info() != Eigen::Success) throw DegenerateMetric("metric is not positive definite");
  Eigen::MatrixXd Linv = llt.matrixL().solve(Eigen::MatrixXd::Identity(d, d));
  Eigen::MatrixXd S = Linv * (gc * Eigen::MatrixXd(A)) * Linv.transpose();
  S = 0.5 * (S + S.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S);
  Eigen::VectorXd ev = es.eigenvalues();
  Eigen::MatrixXd U = Linv.transpose() * es.eigenvectors();

  EigenData e;
  std::vector<int> start;
  for (int i = 0; i < d; ++i) {
    double tol = cluster_tol * std::max(1.0, std::abs(ev[i]));
    if (i == 0 || ev[i] - ev[i - 1] > tol) {
      start.push_back(i);
      e.values.push_back(ev[i]);
      e.mult.push_back(1);
    } else {
      e.mult.back() += 1;
    }
  }
  for (size_t c = 0; c < start.size(); ++c) {
    double s = 0.0;
    for (int i = 0; i < e.mult[c]; ++i) s += ev[start[c] + i];
    e.values[c] = s / e.mult[c];
  }
  e.min_gap = std::numeric_limits<double>::infinity();
  for (size_t c = 1; c < e.values.size(); ++c) e.min_gap = std::min(e.min_gap, e.values[c] - e.values[c - 1]);

  e.frame = MatD::Zero(d, d);
  int col = 0;
  auto ip = [&](const VecD& a, const VecD& b) { return a.dot(g * b); };
  for (size_t c = 0; c < start.size(); ++c) {
    if (e.mult[c] % 2 != 0) e.even = false;
    int first = col;
    for (int i = 0; i < e.mult[c] && col - first + 2 <= e.mult[c]; ++i) {
      VecD w = U.col(start[c] + i);
      for (int f = first; f < col; ++f) w -= ip(VecD(e.frame.col(f)), w) * e.frame.col(f);
      double nw = std::sqrt(ip(w, w));
      if (nw < 0.5) continue;
      w /= nw;
      VecD jw = J * w;
      for (int f = first; f < col; ++f) jw -= ip(VecD(e.frame.col(f)), jw) * e.frame.col(f);
      jw -= ip(w, jw) * w;
      jw /= std::sqrt(ip(jw, jw));
      e.frame.col(col++) = w;
      e.frame.col(col++) = jw;
      e.frame_cluster.push_back(static_cast<int>(c));
      e.frame_cluster.push_back(static_cast<int>(c));
    }
    for (int k = 0; k < e.mult[c] / 2; ++k) e.mu.push_back(e.values[c]);
  }
  return e;
}

MatD cluster_projector(const EigenData& e, const MatD& g, int cluster) {
  const int d = static_cast<int>(g.rows());
  MatD P = MatD::Zero(d, d);
  for (int f = 0; f < static_cast<int>(e.frame_cluster.size()); ++f)
    if (e.frame_cluster[f] == cluster) P += e.frame.col(f) * (e.frame.col(f).transpose() * g);
  return P;
}

namespace {

int first_frame_column(const EigenData& e, int cluster) {
  for (int f = 0; f < static_cast<int>(e.frame_cluster.size()); ++f)
    if (e.frame_cluster[f] == cluster) return f;
  return -1;
}

int nearest_cluster(const EigenData& e, double rho) {
  int best = 0;
  for (int c = 1; c < static_cast<int>(e.values.size()); ++c)
    if (std::abs(e.values[c] - rho) < std::abs(e.values[best] - rho)) best = c;
  return best;
}

}  // namespace

VecD eigenvalue_gradient(const HSolution& hs, const VecD& x, const EigenData& e, int cluster) {
  const int d = static_cast<int>(x.size());
  int f = first_frame_column(e, cluster);
  if (f < 0) throw DegenerateFamily("cluster has no frame vectors");
  std::vector<MatD> dA = partials(hs.A, x);
  MatD g = hs.g(x);
  VecD U = e.frame.col(f);
  VecD drho(d);
  for (int k = 0; k < d; ++k) drho[k] = U.dot(g * dA[k] * U);
  return g.ldlt().solve(drho);
}

EigenGradientCheck eigen_gradient_check(const HSolution& hs, const VecD& x, double gap_tol,
                                        double nonconstant_tol, double fd_step) {
  const int d = static_cast<int>(x.size());
  MatD g = hs.g(x), A = hs.A(x);
  EigenData e = eigen_structure(g, A, hs.J);
  EigenGradientCheck out;
  for (size_t c = 0; c < e.values.size(); ++c) {
    EigenvalueReport r;
    r.rho = e.values[c];
    r.multiplicity = e.mult[c];
    out.clusters.push_back(r);
  }
  if (e.min_gap < gap_tol) {
    out.skipped = true;
    return out;
  }
  Tensor3<double> G = christoffels(hs.g, x);
  VecD L = hs.Lambda(x), Lb = hs.Lambdabar(x);
  auto gnorm = [&](const VecD& v) { return std::sqrt(std::max(0.0, v.dot(g * v))); };

  for (int c = 0; c < static_cast<int>(e.values.size()); ++c) {
    EigenvalueReport& r = out.clusters[c];
    VecD grad = eigenvalue_gradient(hs, x, e, c);
    VecD dr = g * grad;
    MatD P = cluster_projector(e, g, c);
    r.grad_norm = gnorm(grad);
    r.grad_defect = gnorm(VecD(grad - P * grad));
    r.nonconstant = r.grad_norm > nonconstant_tol;

    MatD Ash = A - r.rho * MatD::Identity(d, d);
    for (int f = 0; f < static_cast<int>(e.frame_cluster.size()); ++f) {
      if (e.frame_cluster[f] != c) continue;
      VecD U0 = e.frame.col(f);
      auto field = [&](const VecD& y) {
        MatD gy = hs.g(y);
        EigenData ey = eigen_structure(gy, hs.A(y), hs.J);
        VecD u = cluster_projector(ey, gy, nearest_cluster(ey, r.rho)) * U0;
        return VecD(u / std::sqrt(u.dot(gy * u)));
      };
      for (int k = 0; k < d; ++k) {
        VecD yp = x, ym = x;
        yp[k] += fd_step;
        ym[k] -= fd_step;
        VecD nab = (field(yp) - field(ym)) / (2.0 * fd_step);
        for (int i = 0; i < d; ++i)
          for (int l = 0; l < d; ++l) nab[i] += G(i, k, l) * U0[l];
        VecD gU = g * U0;
        VecD JX = hs.J.col(k);
        VecD res = Ash * nab - dr[k] * U0 + gU[k] * L + gU.dot(L) * VecD::Unit(d, k) + gU.dot(JX) * Lb +
                   gU.dot(Lb) * JX;
        r.modulo_residual = std::max(r.modulo_residual, gnorm(res));
      }
    }
  }
  return out;
}

}  // namespace hproj
