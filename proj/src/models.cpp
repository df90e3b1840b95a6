#include "hproj/models.hpp"

#include <unsupported/Eigen/MatrixFunctions>

namespace hproj {

PairModel beltrami_pair(const CPnChart& chart, const MatC& M) {
  PairModel p;
  p.fs = fubini_study(chart);
  p.map = M;
  p.gbar = beltrami_pullback(chart, {M});
  p.hs = make_hsolution(p.fs.g, p.fs.J0, A_field(p.fs.g, p.gbar));
  return p;
}

EssentialModel essential_model(const CPnChart& chart, const MatC& X, double t0) {
  EssentialModel e;
  e.X = X;
  e.t0 = t0;
  e.pair = beltrami_pair(chart, MatC((t0 * X).exp()));
  e.v = hprojective_field_from_flow(chart, X);
  return e;
}

MatC diag_generator(int n) {
  MatC X = MatC::Zero(n + 1, n + 1);
  X(0, 0) = 1.0;
  return X;
}

MatC default_beltrami(int n) {
  MatC M = MatC::Zero(n + 1, n + 1);
  for (int i = 0; i <= n; ++i) M(i, i) = i + 1.0;
  return M;
}

}  // namespace hproj
