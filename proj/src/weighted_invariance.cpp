#include "hproj/weighted_invariance.hpp"

#include <cmath>

namespace hproj {

MatrixField sigma_field(const MetricField& g) {
  return make_capped<Mat>(g.dim(), g.max_level(), [g](const auto& x) { return metric_to_sigma(g(x)); });
}

MetricField metric_from_sigma(const MatrixField& sigma) {
  return make_capped<Mat>(sigma.dim(), sigma.max_level(),
                          [sigma](const auto& x) { return sigma_to_metric(sigma(x)); });
}

double hermitian_defect(const MatD& sigma, const MatD& J) {
  return max_abs(MatD(J * sigma * J.transpose() - sigma));
}

Tensor3<double> weighted_covariant_derivative(const Tensor3<double>& G, const MatD& s,
                                              const std::vector<MatD>& ds) {
  const int d = G.n, n = d / 2;
  const double wt = kSigmaWeight / (2.0 * (n + 1));
  Tensor3<double> out(d);
  for (int k = 0; k < d; ++k) {
    double tr = 0.0;
    for (int l = 0; l < d; ++l) tr += G(l, k, l);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) {
        double v = ds[k](i, j) - wt * tr * s(i, j);
        for (int l = 0; l < d; ++l) v += G(i, k, l) * s(l, j) + G(j, k, l) * s(i, l);
        out(i, j, k) = v;
      }
  }
  return out;
}

Tensor3<double> weighted_covariant_derivative(const Tensor3<double>& G, const MatrixField& sigma, const VecD& x) {
  return weighted_covariant_derivative(G, sigma(x), partials(sigma, x));
}

Tensor3<double> weighted_covariant_derivative_fd(const Tensor3<double>& G, const MatrixField& sigma, const VecD& x,
                                                 double h) {
  return weighted_covariant_derivative(G, sigma(x), fd_partials(sigma, x, h));
}

VecD weighted_divergence(const Tensor3<double>& Ds) {
  VecD out = VecD::Zero(Ds.n);
  for (int j = 0; j < Ds.n; ++j)
    for (int l = 0; l < Ds.n; ++l) out[j] += Ds(l, j, l);
  return out;
}

double weighted_main_residual(const Tensor3<double>& Ds, const MatD& J) {
  const int d = Ds.n, n = d / 2;
  VecD div = weighted_divergence(Ds);
  VecD Jdiv = J * div;
  double worst = 0.0;
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      for (int k = 0; k < d; ++k) {
        double rhs = (i == k ? div[j] : 0.0) + (j == k ? div[i] : 0.0) + J(i, k) * Jdiv[j] + J(j, k) * Jdiv[i];
        worst = std::max(worst, std::abs(Ds(i, j, k) - rhs / (2.0 * n)));
      }
  return worst;
}

double weighted_main_residual(const Tensor3<double>& G, const MatD& J, const MatrixField& sigma, const VecD& x) {
  return weighted_main_residual(weighted_covariant_derivative(G, sigma, x), J);
}

Tensor3<double> connection_change(const Tensor3<double>& G, const VecD& Phi, const MatD& J) {
  const int d = G.n;
  VecD JP = J.transpose() * Phi;  // (J^T Phi)_k = J^l_k Phi_l
  Tensor3<double> out = G;
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      for (int k = 0; k < d; ++k)
        out(i, j, k) += (i == j ? Phi[k] : 0.0) + (i == k ? Phi[j] : 0.0) - J(i, j) * JP[k] - J(i, k) * JP[j];
  return out;
}

Connection connection_change(const Connection& G, const std::function<VecD(const VecD&)>& Phi, const MatD& J) {
  return [G, Phi, J](const VecD& x) { return connection_change(G(x), Phi(x), J); };
}

TransformCheck weighted_transform_check(const Tensor3<double>& G, const VecD& Phi, const MatD& J,
                                        const MatrixField& sigma, const VecD& x) {
  const int d = G.n, n = d / 2;
  MatD s = sigma(x);
  std::vector<MatD> ds = partials(sigma, x);
  Tensor3<double> D = weighted_covariant_derivative(G, s, ds);
  Tensor3<double> Db = weighted_covariant_derivative(connection_change(G, Phi, J), s, ds);
  VecD ps = s.transpose() * Phi;  // Phi_l sigma^{lj}
  VecD Jps = J * ps;              // J^j_m Phi_l sigma^{lm}
  TransformCheck c;
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      for (int k = 0; k < d; ++k) {
        double pred = D(i, j, k) + (i == k ? ps[j] : 0.0) + (j == k ? ps[i] : 0.0) + J(i, k) * Jps[j] +
                      J(j, k) * Jps[i];
        c.law1 = std::max(c.law1, std::abs(Db(i, j, k) - pred));
      }
  c.law2 = max_abs(VecD(weighted_divergence(Db) - weighted_divergence(D) - 2.0 * n * ps));
  return c;
}

double complex_defect(const Tensor3<double>& G, const MatD& J) {
  const int d = G.n;
  double worst = 0.0;
  for (int k = 0; k < d; ++k)
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) {
        double v = 0.0;
        for (int l = 0; l < d; ++l) v += G(i, k, l) * J(l, j) - G(l, k, j) * J(i, l);
        worst = std::max(worst, std::abs(v));
      }
  return worst;
}

VecD normalizing_phi(const Tensor3<double>& G, const MatrixField& sigma, const VecD& x) {
  const int n = G.n / 2;
  MatD s = sigma(x);
  VecD div = weighted_divergence(weighted_covariant_derivative(G, s, partials(sigma, x)));
  return -s.lu().solve(div) / (2.0 * n);
}

NormalizationReport normalize_connection(const Tensor3<double>& G, const MatD& J, const MatrixField& sigma,
                                         const VecD& x) {
  NormalizationReport r;
  r.phi = normalizing_phi(G, sigma, x);
  Tensor3<double> Gb = connection_change(G, r.phi, J);
  Tensor3<double> Db = weighted_covariant_derivative(Gb, sigma, x);
  r.trace_after = max_abs(weighted_divergence(Db));
  r.full_after = max_abs(Db);
  Tensor3<double> lc = christoffels(metric_from_sigma(sigma), x);
  for (size_t k = 0; k < lc.a.size(); ++k)
    r.levi_civita_deviation = std::max(r.levi_civita_deviation, std::abs(lc.a[k] - Gb.a[k]));
  return r;
}

MatD lie_derivative_sigma(const MatrixField& sigma, const VectorField& v, const VecD& x) {
  const int d = static_cast<int>(x.size()), n = d / 2;
  MatD s = sigma(x);
  std::vector<MatD> ds = partials(sigma, x);
  VecD vx = v(x);
  MatD dv = jacobian(v, x);  // dv(i,k) = d_k v^i
  MatD out = MatD::Zero(d, d);
  for (int k = 0; k < d; ++k) out += vx[k] * ds[k];
  out -= dv * s + s * dv.transpose();
  out += kSigmaWeight / (2.0 * (n + 1)) * dv.trace() * s;
  return out;
}

KappaFit fit_lie_endomorphism(const MatrixField& sigma, const MatrixField& sigmabar, const VectorField& v,
                              const std::vector<VecD>& points, double min_independence) {
  if (points.empty()) throw DegenerateFamily("no sample points");
  const int d = sigma.dim(), e = d * d;
  const int rows = static_cast<int>(points.size()) * e;
  Eigen::MatrixXd M(rows, 2), L(rows, 2);
  std::vector<Eigen::Matrix2d> local;
  KappaFit fit;
  fit.min_singular = std::numeric_limits<double>::infinity();
  for (size_t p = 0; p < points.size(); ++p) {
    const VecD& x = points[p];
    MatD s = sigma(x), sb = sigmabar(x);
    MatD ls = lie_derivative_sigma(sigma, v, x), lsb = lie_derivative_sigma(sigmabar, v, x);
    Eigen::MatrixXd Mp(e, 2), Lp(e, 2);
    Mp.col(0) = Eigen::Map<const Eigen::VectorXd>(s.data(), e);
    Mp.col(1) = Eigen::Map<const Eigen::VectorXd>(sb.data(), e);
    Lp.col(0) = Eigen::Map<const Eigen::VectorXd>(ls.data(), e);
    Lp.col(1) = Eigen::Map<const Eigen::VectorXd>(lsb.data(), e);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(Mp);
    const auto& sv = svd.singularValues();
    fit.min_singular = std::min(fit.min_singular, sv[1] / sv[0]);
    local.push_back(Mp.colPivHouseholderQr().solve(Lp).transpose());
    M.middleRows(static_cast<Eigen::Index>(p) * e, e) = Mp;
    L.middleRows(static_cast<Eigen::Index>(p) * e, e) = Lp;
  }
  if (fit.min_singular < min_independence) throw DegenerateFamily("sigma and sigmabar are dependent");
  // column c of the solution holds the coefficients of L_v(basis_c), so kappa is its transpose
  Eigen::Matrix2d K = M.colPivHouseholderQr().solve(L);
  fit.kappa = K.transpose();
  fit.residual = (M * K - L).cwiseAbs().maxCoeff();
  for (const auto& k : local) fit.pointwise_deviation = std::max(fit.pointwise_deviation, (k - fit.kappa).cwiseAbs().maxCoeff());
  return fit;
}

MatD transform_sigma(const MatD& sigma, const MatD& P, int weight) {
  const int n = static_cast<int>(P.rows()) / 2;
  const double dp = P.determinant();
  if (!(dp > 0.0)) throw InvalidParams("chart change must preserve orientation");
  return std::pow(dp, -weight / (2.0 * (n + 1))) * P * sigma * P.transpose();
}

}  // namespace hproj
