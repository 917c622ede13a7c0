#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "medmod/errors.hpp"
#include "medmod/special.hpp"
#include "medmod/table.hpp"

// Maximum-likelihood covariance-structure fitting for recursive path models
// over observed variables, the chi-square and descriptive fit indices, and
// the reduced-form algebra for the two competing five-variable models.

namespace medmod {

// ---------------------------------------------------------------------------
// Model specification
// ---------------------------------------------------------------------------

struct PathEquation {
  std::string response;
  std::vector<std::string> regressors;
};

/// Recursive path model: exogenous variables (those never a response) carry
/// free variances and, when enabled, free pairwise covariances; each equation
/// contributes free coefficients plus one free residual variance.
///
/// Parameter vector layout (natural units):
///   [exogenous variances] [exogenous covariances i<j] then per equation
///   [coefficients..., residual variance].
struct PathModel {
  std::vector<std::string> variables;
  std::vector<PathEquation> equations;
  bool exogenous_covariances_free = true;

  int index_of(const std::string& name) const {
    for (std::size_t i = 0; i < variables.size(); ++i) {
      if (variables[i] == name) return static_cast<int>(i);
    }
    throw UnknownColumnError(name);
  }

  bool is_endogenous(const std::string& name) const {
    for (const auto& eq : equations) {
      if (eq.response == name) return true;
    }
    return false;
  }

  std::vector<std::string> exogenous() const {
    std::vector<std::string> out;
    for (const auto& v : variables) {
      if (!is_endogenous(v)) out.push_back(v);
    }
    return out;
  }

  int parameter_count() const {
    const auto n_exo = static_cast<int>(exogenous().size());
    int q = n_exo;
    if (exogenous_covariances_free) q += n_exo * (n_exo - 1) / 2;
    for (const auto& eq : equations) q += static_cast<int>(eq.regressors.size()) + 1;
    return q;
  }

  int moment_count() const {
    const auto p = static_cast<int>(variables.size());
    return p * (p + 1) / 2;
  }

  int degrees_of_freedom() const { return moment_count() - parameter_count(); }

  std::vector<std::string> parameter_names() const {
    std::vector<std::string> names;
    const auto exo = exogenous();
    for (const auto& v : exo) names.push_back("var(" + v + ")");
    if (exogenous_covariances_free) {
      for (std::size_t i = 0; i < exo.size(); ++i) {
        for (std::size_t j = i + 1; j < exo.size(); ++j) {
          names.push_back("cov(" + exo[i] + "," + exo[j] + ")");
        }
      }
    }
    for (const auto& eq : equations) {
      for (const auto& r : eq.regressors) names.push_back(eq.response + "~" + r);
      names.push_back("resid(" + eq.response + ")");
    }
    return names;
  }

  /// Rejects cycles, dangling names, and over-parameterized blocks.
  void validate() const {
    if (variables.empty()) throw Error("path model has no variables");
    for (std::size_t i = 0; i < variables.size(); ++i) {
      for (std::size_t j = i + 1; j < variables.size(); ++j) {
        if (variables[i] == variables[j]) {
          throw InvalidDataError("duplicate variable: " + variables[i]);
        }
      }
    }
    std::vector<std::string> seen_responses;
    for (const auto& eq : equations) {
      index_of(eq.response);
      for (const auto& prior : seen_responses) {
        if (prior == eq.response) throw Error("two equations for " + eq.response);
      }
      for (const auto& reg : eq.regressors) {
        index_of(reg);
        if (reg == eq.response) throw Error(eq.response + " regressed on itself");
        if (is_endogenous(reg)) {
          bool earlier = false;
          for (const auto& prior : seen_responses) earlier = earlier || prior == reg;
          if (!earlier) {
            throw Error("equation order not recursive: " + eq.response + " ~ " + reg);
          }
        }
      }
      seen_responses.push_back(eq.response);
    }
    if (parameter_count() > moment_count()) {
      throw Error("model has more free parameters than sample moments");
    }
  }
};

// ---------------------------------------------------------------------------
// Implied covariance and its parameter derivatives
// ---------------------------------------------------------------------------

namespace detail {

struct RamMatrices {
  Eigen::MatrixXd coeffs;     // A: coeffs(response, regressor)
  Eigen::MatrixXd residual;   // R: exogenous block plus residual diagonal
  Eigen::MatrixXd total;      // B = (I - A)^-1
};

inline RamMatrices assemble_ram(const PathModel& model, const Eigen::VectorXd& theta) {
  const auto p = static_cast<Eigen::Index>(model.variables.size());
  RamMatrices ram;
  ram.coeffs = Eigen::MatrixXd::Zero(p, p);
  ram.residual = Eigen::MatrixXd::Zero(p, p);

  const auto exo = model.exogenous();
  Eigen::Index k = 0;
  for (const auto& v : exo) {
    const int i = model.index_of(v);
    ram.residual(i, i) = theta(k++);
  }
  if (model.exogenous_covariances_free) {
    for (std::size_t i = 0; i < exo.size(); ++i) {
      for (std::size_t j = i + 1; j < exo.size(); ++j) {
        const int a = model.index_of(exo[i]);
        const int b = model.index_of(exo[j]);
        ram.residual(a, b) = ram.residual(b, a) = theta(k++);
      }
    }
  }
  for (const auto& eq : model.equations) {
    const int r = model.index_of(eq.response);
    for (const auto& reg : eq.regressors) {
      ram.coeffs(r, model.index_of(reg)) = theta(k++);
    }
    ram.residual(r, r) = theta(k++);
  }

  ram.total = (Eigen::MatrixXd::Identity(p, p) - ram.coeffs)
                  .partialPivLu()
                  .solve(Eigen::MatrixXd::Identity(p, p));
  return ram;
}

}  // namespace detail

/// Sigma(theta) assembled by path rules; symmetric by construction.
inline Eigen::MatrixXd implied_covariance(const PathModel& model, const Eigen::VectorXd& theta) {
  model.validate();
  if (theta.size() != model.parameter_count()) {
    throw DimensionMismatchError("expected " + std::to_string(model.parameter_count()) +
                                 " parameters, got " + std::to_string(theta.size()));
  }
  const detail::RamMatrices ram = detail::assemble_ram(model, theta);
  return ram.total * ram.residual * ram.total.transpose();
}

/// dSigma/dtheta_j for every parameter, natural units.
inline std::vector<Eigen::MatrixXd> implied_covariance_gradient(const PathModel& model,
                                                                const Eigen::VectorXd& theta) {
  if (theta.size() != model.parameter_count()) {
    throw DimensionMismatchError("parameter vector has wrong length");
  }
  const detail::RamMatrices ram = detail::assemble_ram(model, theta);
  const Eigen::MatrixXd sigma = ram.total * ram.residual * ram.total.transpose();
  const Eigen::MatrixXd& B = ram.total;

  std::vector<Eigen::MatrixXd> grads;
  grads.reserve(static_cast<std::size_t>(theta.size()));
  const auto exo = model.exogenous();
  for (const auto& v : exo) {
    const int i = model.index_of(v);
    grads.push_back(B.col(i) * B.col(i).transpose());
  }
  if (model.exogenous_covariances_free) {
    for (std::size_t i = 0; i < exo.size(); ++i) {
      for (std::size_t j = i + 1; j < exo.size(); ++j) {
        const int a = model.index_of(exo[i]);
        const int b = model.index_of(exo[j]);
        Eigen::MatrixXd d = B.col(a) * B.col(b).transpose();
        grads.push_back(d + d.transpose());
      }
    }
  }
  for (const auto& eq : model.equations) {
    const int r = model.index_of(eq.response);
    for (const auto& reg : eq.regressors) {
      const int c = model.index_of(reg);
      Eigen::MatrixXd d = B.col(r) * sigma.row(c);
      grads.push_back(d + d.transpose());
    }
    grads.push_back(B.col(r) * B.col(r).transpose());
  }
  return grads;
}

// ---------------------------------------------------------------------------
// Maximum-likelihood discrepancy and fitting
// ---------------------------------------------------------------------------

/// F(theta) = ln|Sigma| + tr(S Sigma^-1) - ln|S| - p.
inline double ml_discrepancy(const PathModel& model, const Eigen::MatrixXd& S,
                             const Eigen::VectorXd& theta) {
  const Eigen::MatrixXd sigma = implied_covariance(model, theta);
  Eigen::LLT<Eigen::MatrixXd> llt(sigma);
  if (llt.info() != Eigen::Success) {
    return std::numeric_limits<double>::infinity();
  }
  double log_det_sigma = 0;
  for (Eigen::Index i = 0; i < sigma.rows(); ++i) {
    log_det_sigma += 2.0 * std::log(llt.matrixL()(i, i));
  }
  const double trace_term = llt.solve(S).trace();
  Eigen::LLT<Eigen::MatrixXd> llt_s(S);
  double log_det_s = 0;
  for (Eigen::Index i = 0; i < S.rows(); ++i) {
    log_det_s += 2.0 * std::log(llt_s.matrixL()(i, i));
  }
  return log_det_sigma + trace_term - log_det_s - static_cast<double>(S.rows());
}

/// Analytic gradient of the ML discrepancy, natural units:
/// dF/dtheta_j = tr[Sigma^-1 (Sigma - S) Sigma^-1 dSigma_j].
inline Eigen::VectorXd ml_discrepancy_gradient(const PathModel& model, const Eigen::MatrixXd& S,
                                               const Eigen::VectorXd& theta) {
  const Eigen::MatrixXd sigma = implied_covariance(model, theta);
  Eigen::LLT<Eigen::MatrixXd> llt(sigma);
  if (llt.info() != Eigen::Success) {
    throw SingularImpliedError("implied covariance is not positive definite");
  }
  const Eigen::Index p = sigma.rows();
  const Eigen::MatrixXd sigma_inv = llt.solve(Eigen::MatrixXd::Identity(p, p));
  const Eigen::MatrixXd weight = sigma_inv * (sigma - S) * sigma_inv;
  const std::vector<Eigen::MatrixXd> dsigma = implied_covariance_gradient(model, theta);
  Eigen::VectorXd grad(theta.size());
  for (Eigen::Index j = 0; j < theta.size(); ++j) {
    grad(j) = weight.cwiseProduct(dsigma[static_cast<std::size_t>(j)]).sum();
  }
  return grad;
}

/// Sample-moment start: exogenous block copied from S, each equation set to
/// its own least-squares solution computed from S.
inline Eigen::VectorXd start_values(const PathModel& model, const Eigen::MatrixXd& S) {
  model.validate();
  std::vector<double> theta;
  const auto exo = model.exogenous();
  for (const auto& v : exo) theta.push_back(S(model.index_of(v), model.index_of(v)));
  if (model.exogenous_covariances_free) {
    for (std::size_t i = 0; i < exo.size(); ++i) {
      for (std::size_t j = i + 1; j < exo.size(); ++j) {
        theta.push_back(S(model.index_of(exo[i]), model.index_of(exo[j])));
      }
    }
  }
  for (const auto& eq : model.equations) {
    const int r = model.index_of(eq.response);
    const auto k = static_cast<Eigen::Index>(eq.regressors.size());
    Eigen::MatrixXd srr(k, k);
    Eigen::VectorXd sry(k);
    for (Eigen::Index i = 0; i < k; ++i) {
      const int vi = model.index_of(eq.regressors[static_cast<std::size_t>(i)]);
      sry(i) = S(vi, r);
      for (Eigen::Index j = 0; j < k; ++j) {
        srr(i, j) = S(vi, model.index_of(eq.regressors[static_cast<std::size_t>(j)]));
      }
    }
    Eigen::VectorXd b = k > 0 ? srr.ldlt().solve(sry).eval() : Eigen::VectorXd();
    for (Eigen::Index i = 0; i < k; ++i) theta.push_back(b(i));
    const double resid = S(r, r) - (k > 0 ? sry.dot(b) : 0.0);
    theta.push_back(std::max(resid, 1e-10 * S(r, r)));
  }
  return Eigen::Map<Eigen::VectorXd>(theta.data(), static_cast<Eigen::Index>(theta.size()));
}

struct SemFit {
  double chi2 = 0;
  long df = 0;
  double p = 1;
  double gfi = 1;
  double agfi = std::numeric_limits<double>::quiet_NaN();
  double tli = std::numeric_limits<double>::quiet_NaN();
  bool converged = false;
  double f_min = 0;
  long iterations = 0;
  Eigen::VectorXd theta;           // natural units
  Eigen::MatrixXd sigma_hat;
  std::vector<double> f_history;   // F after each accepted step
};

struct FitIndices {
  double gfi = 1;
  double agfi = 1;
  double tli = 1;
};

/// GFI/AGFI/TLI per the usual ML definitions. The baseline is the
/// independence model (covariances fixed at zero, variances free).
inline FitIndices fit_indices(const SemFit& fit, const Eigen::MatrixXd& S,
                              const Eigen::MatrixXd& sigma_hat, const SemFit& baseline) {
  const Eigen::Index p = S.rows();
  FitIndices out;
  const Eigen::MatrixXd ratio = sigma_hat.ldlt().solve(S);
  const Eigen::MatrixXd dev = ratio - Eigen::MatrixXd::Identity(p, p);
  out.gfi = 1.0 - (dev * dev).trace() / (ratio * ratio).trace();
  if (fit.df == 0) throw ZeroDfError("AGFI/TLI undefined for a saturated model (df = 0)");
  out.agfi = 1.0 - (static_cast<double>(p * (p + 1)) / (2.0 * static_cast<double>(fit.df))) *
                       (1.0 - out.gfi);
  const double baseline_ratio = baseline.chi2 / static_cast<double>(baseline.df);
  const double model_ratio = fit.chi2 / static_cast<double>(fit.df);
  out.tli = (baseline_ratio - model_ratio) / (baseline_ratio - 1.0);
  return out;
}

namespace detail {

struct MlProblem {
  const PathModel* model;
  const Eigen::MatrixXd* S;
  std::vector<Eigen::Index> log_indices;  // residual-variance positions

  Eigen::VectorXd to_natural(const Eigen::VectorXd& u) const {
    Eigen::VectorXd theta = u;
    for (const Eigen::Index i : log_indices) theta(i) = std::exp(u(i));
    return theta;
  }

  Eigen::VectorXd to_internal(const Eigen::VectorXd& theta) const {
    Eigen::VectorXd u = theta;
    for (const Eigen::Index i : log_indices) u(i) = std::log(theta(i));
    return u;
  }

  double value(const Eigen::VectorXd& u) const {
    return ml_discrepancy(*model, *S, to_natural(u));
  }

  Eigen::VectorXd gradient(const Eigen::VectorXd& u) const {
    const Eigen::VectorXd theta = to_natural(u);
    Eigen::VectorXd g = ml_discrepancy_gradient(*model, *S, theta);
    for (const Eigen::Index i : log_indices) g(i) *= theta(i);
    return g;
  }
};

inline std::vector<Eigen::Index> residual_variance_indices(const PathModel& model) {
  std::vector<Eigen::Index> idx;
  const auto exo = model.exogenous();
  Eigen::Index k = static_cast<Eigen::Index>(exo.size());
  if (model.exogenous_covariances_free) {
    k += static_cast<Eigen::Index>(exo.size() * (exo.size() - 1) / 2);
  }
  for (const auto& eq : model.equations) {
    k += static_cast<Eigen::Index>(eq.regressors.size());
    idx.push_back(k++);
  }
  return idx;
}

// BFGS with Armijo backtracking; accepted steps never increase F.
inline void minimize(const MlProblem& problem, Eigen::VectorXd& u, SemFit& fit) {
  constexpr double kGradTol = 1e-8;
  constexpr double kValueTol = 1e-12;
  constexpr int kMaxIterations = 1000;

  const Eigen::Index q = u.size();
  Eigen::MatrixXd H = Eigen::MatrixXd::Identity(q, q);
  double f = problem.value(u);
  if (!std::isfinite(f)) {
    throw SingularImpliedError("implied covariance singular at the starting point");
  }
  Eigen::VectorXd g = problem.gradient(u);
  fit.f_history.push_back(f);

  for (int iter = 0; iter < kMaxIterations; ++iter) {
    fit.iterations = iter;
    if (g.lpNorm<Eigen::Infinity>() < kGradTol) {
      fit.converged = true;
      break;
    }
    Eigen::VectorXd direction = -(H * g);
    double slope = direction.dot(g);
    if (!(slope < 0)) {
      H.setIdentity();
      direction = -g;
      slope = direction.dot(g);
    }

    double step = 1.0;
    double f_new = std::numeric_limits<double>::infinity();
    Eigen::VectorXd u_new;
    bool accepted = false;
    for (int halving = 0; halving < 60; ++halving) {
      u_new = u + step * direction;
      f_new = problem.value(u_new);
      if (std::isfinite(f_new) && f_new <= f + 1e-4 * step * slope) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      // no decrease available along the quasi-Newton direction
      fit.converged = g.lpNorm<Eigen::Infinity>() < 1e-5;
      break;
    }

    const Eigen::VectorXd g_new = problem.gradient(u_new);
    const Eigen::VectorXd s = u_new - u;
    const Eigen::VectorXd delta_g = g_new - g;
    const double sy = s.dot(delta_g);
    if (sy > 1e-12 * s.norm() * delta_g.norm()) {
      const double rho = 1.0 / sy;
      const Eigen::MatrixXd outer = s * delta_g.transpose();
      H = (Eigen::MatrixXd::Identity(q, q) - rho * outer) * H *
              (Eigen::MatrixXd::Identity(q, q) - rho * outer.transpose()) +
          rho * (s * s.transpose());
    }

    const double improvement = f - f_new;
    u = u_new;
    g = g_new;
    f = f_new;
    fit.f_history.push_back(f);
    if (improvement < kValueTol) {
      fit.converged = true;
      break;
    }
  }
  fit.f_min = std::max(0.0, f);
}

inline SemFit fit_ml_impl(const PathModel& model, const Eigen::MatrixXd& S, long n,
                          const std::optional<Eigen::VectorXd>& start) {
  model.validate();
  const auto p = static_cast<Eigen::Index>(model.variables.size());
  if (S.rows() != p || S.cols() != p) {
    throw DimensionMismatchError("covariance matrix does not match the variable list");
  }
  if ((S - S.transpose()).lpNorm<Eigen::Infinity>() > 1e-8 * S.lpNorm<Eigen::Infinity>()) {
    throw Error("sample covariance matrix is not symmetric");
  }
  if (Eigen::LLT<Eigen::MatrixXd>(S).info() != Eigen::Success) {
    throw NotPositiveDefiniteError("sample covariance matrix is not positive definite");
  }
  if (n <= p) throw TooFewRowsError("need n > number of observed variables");

  MlProblem problem{&model, &S, residual_variance_indices(model)};
  const Eigen::VectorXd theta0 = start ? *start : start_values(model, S);
  if (theta0.size() != model.parameter_count()) {
    throw DimensionMismatchError("start vector has wrong length");
  }
  Eigen::VectorXd u = problem.to_internal(theta0);

  SemFit fit;
  minimize(problem, u, fit);
  fit.theta = problem.to_natural(u);
  fit.sigma_hat = implied_covariance(model, fit.theta);
  fit.df = model.degrees_of_freedom();
  fit.chi2 = static_cast<double>(n - 1) * fit.f_min;
  fit.p = fit.df > 0 ? chi_squared_upper_tail(fit.chi2, fit.df) : 1.0;
  return fit;
}

}  // namespace detail

/// Independence model over the same variables: all covariances fixed at zero,
/// variances free. Used as the TLI baseline.
inline PathModel independence_model(std::vector<std::string> variables) {
  PathModel model;
  model.variables = std::move(variables);
  model.exogenous_covariances_free = false;
  return model;
}

/// Fully saturated model: every variable exogenous with all moments free.
inline PathModel saturated_model(std::vector<std::string> variables) {
  PathModel model;
  model.variables = std::move(variables);
  return model;
}

/// Minimizes the ML discrepancy over the model's free parameters and fills
/// chi-square inference plus descriptive indices (AGFI/TLI are NaN at df=0).
inline SemFit fit_ml(const PathModel& model, const Eigen::MatrixXd& S, long n,
                     const std::optional<Eigen::VectorXd>& start = std::nullopt) {
  SemFit fit = detail::fit_ml_impl(model, S, n, start);
  SemFit baseline = detail::fit_ml_impl(independence_model(model.variables), S, n, std::nullopt);
  {
    const Eigen::Index p = S.rows();
    const Eigen::MatrixXd ratio = fit.sigma_hat.ldlt().solve(S);
    const Eigen::MatrixXd dev = ratio - Eigen::MatrixXd::Identity(p, p);
    fit.gfi = 1.0 - (dev * dev).trace() / (ratio * ratio).trace();
  }
  if (fit.df > 0 && baseline.df > 0) {
    const FitIndices indices = fit_indices(fit, S, fit.sigma_hat, baseline);
    fit.agfi = indices.agfi;
    fit.tli = indices.tli;
  }
  return fit;
}

// ---------------------------------------------------------------------------
// The two competing models, over (x, z, w, zx, wx, y) with m === w
// ---------------------------------------------------------------------------

inline std::vector<std::string> sem_variables() {
  return {"x", "z", "w", "zx", "wx", "y"};
}

// Both models are fit to the same 6-variable covariance matrix, so each
// carries the product term foreign to its own equations as a plain extra
// regressor (equivalent to freeing the disturbance covariance with it).
// This freeing pattern is a reconstruction: it is chosen so that each
// model's two over-identifying restrictions are exactly its substantive
// exclusions, and so that q = 19 free parameters leave df = 21 - 19 = 2.

/// Mediated-moderation path model. Restrictions: zx enters neither equation.
inline PathModel mediated_moderation_model() {
  PathModel model;
  model.variables = sem_variables();
  model.equations = {{"w", {"z", "x", "wx"}},
                     {"y", {"x", "z", "w", "wx"}}};
  return model;
}

/// Baron-Kenny mediation path model with m === w. Restrictions: neither z
/// nor zx enters the y equation (their effects must route through w).
inline PathModel baron_kenny_model() {
  PathModel model;
  model.variables = sem_variables();
  model.equations = {{"w", {"z", "x", "zx", "wx"}},
                     {"y", {"x", "w", "wx"}}};
  return model;
}

/// Sample covariance over (x, z, w, zx, wx, y) with the product columns
/// built from mean-centered mains.
inline Eigen::MatrixXd sem_covariance(const DataTable& data, const std::string& x = "x",
                                      const std::string& z = "z", const std::string& w = "w",
                                      const std::string& y = "y") {
  const Eigen::Index n = data.rows();
  if (n < 2) throw TooFewRowsError("need at least 2 rows for a covariance matrix");
  Eigen::MatrixXd columns(n, 6);
  columns.col(0) = data.col(x).array() - data.col(x).mean();
  columns.col(1) = data.col(z).array() - data.col(z).mean();
  columns.col(2) = data.col(w).array() - data.col(w).mean();
  columns.col(3) = columns.col(1).cwiseProduct(columns.col(0));  // zx
  columns.col(4) = columns.col(2).cwiseProduct(columns.col(0));  // wx
  columns.col(5) = data.col(y);
  columns.rowwise() -= columns.colwise().mean();
  return (columns.transpose() * columns) / static_cast<double>(n - 1);
}

// ---------------------------------------------------------------------------
// Reduced forms (regression of y on {1, x, z, zx} plus noise carriers)
// ---------------------------------------------------------------------------

struct BaronKennyParams {
  double m0 = 0, mz = 0, mx = 0, mzx = 0;   // m = m0 + mz*z + mx*x + mzx*zx + e_m
  double y0 = 0, yx = 0, ym = 0;            // y = y0 + yx*x + ym*m + e_y
};

struct MediatedModerationParams {
  double w0 = 0, wz = 0;                       // w = w0 + wz*z + e_w
  double y0 = 0, yx = 0, yz = 0, yw = 0, ywx = 0;  // y = y0 + yx*x + yz*z + yw*w + ywx*wx + e_y
};

/// Coefficients of y on {1, x, z, zx} after substituting the mediator
/// equation, plus the coefficients multiplying the noise carriers
/// (e_m, e_w, e_w*x); e_y always enters with coefficient 1.
struct ReducedForm {
  double intercept = 0;
  double x = 0;
  double z = 0;
  double zx = 0;
  double eps_m = 0;
  double eps_w = 0;
  double eps_w_x = 0;
};

inline ReducedForm reduced_form(const BaronKennyParams& p) {
  ReducedForm rf;
  rf.intercept = p.y0 + p.ym * p.m0;
  rf.x = p.yx + p.ym * p.mx;
  rf.z = p.ym * p.mz;
  rf.zx = p.ym * p.mzx;
  rf.eps_m = p.ym;
  return rf;
}

inline ReducedForm reduced_form(const MediatedModerationParams& p) {
  ReducedForm rf;
  rf.intercept = p.y0 + p.yw * p.w0;
  rf.x = p.yx + p.ywx * p.w0;
  rf.z = p.yz + p.yw * p.wz;
  rf.zx = p.ywx * p.wz;
  rf.eps_w = p.yw;
  rf.eps_w_x = p.ywx;
  return rf;
}

}  // namespace medmod
