#pragma once

#include <limits>

#include "msa/eigen.hpp"
#include "msa/errors.hpp"
#include "msa/sparse.hpp"

namespace msa {

/// 2-norm condition estimate from the extreme eigenvalues.
/// kappa = lambda_max/lambda_min when lambda_min > 0, +infinity otherwise
/// (numerically singular matrices included).
struct ConditionEstimate {
  double kappa = 0.0;
  double lambda_max = 0.0;
  double lambda_min = 0.0;
  bool ill_conditioned = false;
  double threshold = 0.0;
};

/// Estimates kappa_2(A) by reusing the extreme-eigenpair solver: plain
/// Lanczos for lambda_max, shift-invert for lambda_min. A factorization
/// breakdown in the shift-invert step is reported as numerically singular.
inline ConditionEstimate estimate_condition(const SparseSymmetric& a,
                                            double threshold = 1e10,
                                            const EigenOptions& opts = {}) {
  if (a.dim() < 1) throw Error("estimate_condition: empty matrix");
  ConditionEstimate est;
  est.threshold = threshold;

  bool breakdown = false;
  if (a.dim() == 1) {
    const EigenSet e = solve_extreme_eigenpairs(a, 1, 0, opts);
    est.lambda_min = est.lambda_max = e.smallest[0].lambda;
  } else {
    const EigenSet top = solve_extreme_eigenpairs(a, 0, 1, opts);
    est.lambda_max = top.largest[0].lambda;
    try {
      const EigenSet bottom = solve_extreme_eigenpairs(a, 1, 0, opts);
      est.lambda_min = bottom.smallest[0].lambda;
    } catch (const SolverError&) {
      breakdown = true;
      est.lambda_min = 0.0;
    }
  }

  if (!breakdown && est.lambda_min > 0.0)
    est.kappa = est.lambda_max / est.lambda_min;
  else
    est.kappa = std::numeric_limits<double>::infinity();
  est.ill_conditioned = est.kappa > threshold;
  return est;
}

} // namespace msa
