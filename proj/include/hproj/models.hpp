#pragma once

#include "hproj/cpn_models.hpp"
#include "hproj/hproj_core.hpp"

namespace hproj {

// g = c g_FS on CP(n) paired with gbar = f_M^* (c g_FS).
struct PairModel {
  KahlerModel fs;
  MatC map;
  MetricField gbar;
  HSolution hs;
};

PairModel beltrami_pair(const CPnChart& chart, const MatC& M);

// gbar is the time-t0 image of g under the flow of the h-projective
// field generated by X.
struct EssentialModel {
  PairModel pair;
  MatC X;
  double t0 = 0.0;
  VectorField v;
};

EssentialModel essential_model(const CPnChart& chart, const MatC& X, double t0);

MatC diag_generator(int n);  // diag(1, 0, ..., 0)
MatC default_beltrami(int n);  // diag(1, 2, ..., n+1)

}  // namespace hproj
