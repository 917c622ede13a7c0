#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <vector>

#include "medmod/errors.hpp"
#include "medmod/special.hpp"
#include "medmod/table.hpp"

namespace medmod {

struct CoefficientEstimate {
  Term term;
  double estimate = 0;
  double std_error = 0;
  double t_value = 0;
  double p_value = 1;
};

struct RegressionFit {
  std::vector<CoefficientEstimate> coefficients;
  double residual_variance = 0;
  Eigen::Index df_resid = 0;
  double r_squared = 0;
  Eigen::Index n_obs = 0;

  bool has(const Term& term) const {
    for (const auto& c : coefficients) {
      if (c.term == term) return true;
    }
    return false;
  }

  const CoefficientEstimate& coef(const Term& term) const {
    for (const auto& c : coefficients) {
      if (c.term == term) return c;
    }
    throw MissingTermError("fit has no term '" + term.label() + "'");
  }
};

namespace detail {

/// Relative rank tolerance for the QR solve, against the largest |R| diagonal.
inline constexpr double kRankTolerance = 1e-10;

struct LeastSquaresSolution {
  Eigen::VectorXd beta;
  Eigen::VectorXd residuals;
  Eigen::MatrixXd xtx_inverse;
};

template <typename DerivedX, typename DerivedY>
LeastSquaresSolution solve_least_squares(const Eigen::MatrixBase<DerivedX>& X,
                                         const Eigen::MatrixBase<DerivedY>& y) {
  const Eigen::Index k = X.cols();
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
  const Eigen::MatrixXd& R = qr.matrixR();
  const double pivot = std::abs(R(0, 0));
  if (!(pivot > 0)) throw RankDeficientError("design matrix has rank 0");
  for (Eigen::Index i = 0; i < k; ++i) {
    if (std::abs(R(i, i)) < kRankTolerance * pivot) {
      throw RankDeficientError("design matrix is rank deficient (column " +
                               std::to_string(i) + " of pivoted R below tolerance)");
    }
  }

  LeastSquaresSolution out;
  out.beta = qr.solve(y.derived());
  out.residuals = y.derived() - X.derived() * out.beta;

  // (X'X)^-1 = P R^-1 R^-T P' from the pivoted factorization.
  Eigen::MatrixXd r_inv = R.topLeftCorner(k, k)
                              .template triangularView<Eigen::Upper>()
                              .solve(Eigen::MatrixXd::Identity(k, k));
  Eigen::MatrixXd inv = r_inv * r_inv.transpose();
  const auto& perm = qr.colsPermutation();
  out.xtx_inverse = perm * inv * perm.transpose();
  return out;
}

}  // namespace detail

/// Two-sided p-value for a t statistic with the given residual df.
inline double two_sided_p(double t, long df) { return student_t_two_sided_p(t, df); }

/// Ordinary least squares with coefficient inference. The formula is expanded
/// against `data` as-is; center beforehand with mean_center when wanted.
inline RegressionFit fit_ols(const DataTable& data, const ModelFormula& formula) {
  if (!data.has(formula.response)) throw UnknownColumnError(formula.response);
  Design design = build_design(data, formula);
  const Eigen::Index n = design.matrix.rows();
  const Eigen::Index k = design.matrix.cols();
  if (n <= k) {
    throw TooFewRowsError("need more than " + std::to_string(k) + " rows, got " +
                          std::to_string(n));
  }

  const Eigen::VectorXd& y = data.col(formula.response);
  detail::LeastSquaresSolution solution = detail::solve_least_squares(design.matrix, y);

  RegressionFit fit;
  fit.n_obs = n;
  fit.df_resid = n - k;
  const double sse = solution.residuals.squaredNorm();
  fit.residual_variance = sse / static_cast<double>(fit.df_resid);

  double sst;
  if (formula.intercept) {
    sst = (y.array() - y.mean()).square().sum();
  } else {
    sst = y.squaredNorm();
  }
  if (sst > 0) {
    fit.r_squared = std::min(1.0, std::max(0.0, 1.0 - sse / sst));
  } else {
    fit.r_squared = 0.0;
  }

  fit.coefficients.reserve(static_cast<std::size_t>(k));
  for (Eigen::Index j = 0; j < k; ++j) {
    CoefficientEstimate c;
    c.term = design.columns[static_cast<std::size_t>(j)];
    c.estimate = solution.beta(j);
    c.std_error = std::sqrt(fit.residual_variance * solution.xtx_inverse(j, j));
    if (c.std_error > 0) {
      c.t_value = c.estimate / c.std_error;
      c.p_value = two_sided_p(c.t_value, fit.df_resid);
    } else if (c.estimate == 0) {
      c.t_value = 0;
      c.p_value = 1;
    } else {
      // exact fit: the null is contradicted with no residual noise left
      c.t_value = std::numeric_limits<double>::infinity();
      c.p_value = 0;
    }
    fit.coefficients.push_back(c);
  }
  return fit;
}

}  // namespace medmod
