#pragma once

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <string>

#include "medmod/errors.hpp"
#include "medmod/regress.hpp"
#include "medmod/table.hpp"

// Step-wise hypothesis procedures for moderation, mediation, and the
// four-step mediated-moderation decision tree, plus the closed-form
// predictor for the interaction slope a wrong moderator picks up.

namespace medmod {

struct InferenceConfig {
  double alpha = 0.05;
  bool skip_bk_step1 = false;   // drop condition 1 from the mediation verdict
  bool center_first = true;     // mean-center mains before building products
};

inline void validate(const InferenceConfig& cfg) {
  if (!(cfg.alpha > 0.0 && cfg.alpha < 1.0)) throw Error("alpha must lie in (0,1)");
}

namespace detail {

// Rank problems must name the equation they came from.
inline RegressionFit fit_equation(const DataTable& data, const ModelFormula& formula,
                                  const char* label) {
  try {
    return fit_ols(data, formula);
  } catch (const RankDeficientError& e) {
    throw RankDeficientError(std::string(label) + ": " + e.what());
  }
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Mediation (three-equation method with four conditions)
// ---------------------------------------------------------------------------

enum class MediationConclusion { NoMediation, PartialMediation, CompleteMediation };

struct MediationResult {
  RegressionFit eq1;  // y ~ x
  RegressionFit eq2;  // m ~ x
  RegressionFit eq3;  // y ~ x + m
  std::array<bool, 4> conditions_met{};
  MediationConclusion conclusion = MediationConclusion::NoMediation;
};

inline MediationResult assess_mediation(const DataTable& data, const std::string& x,
                                        const std::string& y, const std::string& m,
                                        const InferenceConfig& cfg = {}) {
  validate(cfg);
  MediationResult out;
  out.eq1 = detail::fit_equation(data, {y, {Term::main(x)}}, "equation 1 (y ~ x)");
  out.eq2 = detail::fit_equation(data, {m, {Term::main(x)}}, "equation 2 (m ~ x)");
  out.eq3 = detail::fit_equation(data, {y, {Term::main(x), Term::main(m)}},
                                 "equation 3 (y ~ x + m)");

  const double b1x = out.eq1.coef(Term::main(x)).estimate;
  const double b3x = out.eq3.coef(Term::main(x)).estimate;
  out.conditions_met[0] = out.eq1.coef(Term::main(x)).p_value < cfg.alpha;
  out.conditions_met[1] = out.eq2.coef(Term::main(x)).p_value < cfg.alpha;
  out.conditions_met[2] = out.eq3.coef(Term::main(m)).p_value < cfg.alpha;
  out.conditions_met[3] = std::abs(b3x) < std::abs(b1x);

  const bool met = (cfg.skip_bk_step1 || out.conditions_met[0]) && out.conditions_met[1] &&
                   out.conditions_met[2] && out.conditions_met[3];
  if (!met) {
    out.conclusion = MediationConclusion::NoMediation;
  } else if (out.eq3.coef(Term::main(x)).p_value < cfg.alpha) {
    out.conclusion = MediationConclusion::PartialMediation;
  } else {
    out.conclusion = MediationConclusion::CompleteMediation;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Moderation (single product-term test)
// ---------------------------------------------------------------------------

struct ModerationResult {
  RegressionFit eq4;  // y ~ x + z + zx
  double p_zx = 1;
  bool moderated = false;
};

inline ModerationResult assess_moderation(const DataTable& data, const std::string& x,
                                          const std::string& y, const std::string& z,
                                          const InferenceConfig& cfg = {}) {
  validate(cfg);
  const DataTable centered = cfg.center_first ? mean_center(data, {x, z}) : data;
  ModerationResult out;
  out.eq4 = detail::fit_equation(centered,
                                 {y, {Term::main(x), Term::main(z), Term::product(z, x)}},
                                 "equation 4 (y ~ x + z + zx)");
  out.p_zx = out.eq4.coef(Term::product(z, x)).p_value;
  out.moderated = out.p_zx < cfg.alpha;
  return out;
}

// ---------------------------------------------------------------------------
// Mediated moderation: the four-step decision tree
// ---------------------------------------------------------------------------

enum class TreeConclusion {
  NoInitialModeration,
  WNotModerator,
  MultipleModeratorModel,
  SpuriousModeration,
  MediatedModeration,
};

inline const char* to_string(TreeConclusion c) {
  switch (c) {
    case TreeConclusion::NoInitialModeration: return "NoInitialModeration";
    case TreeConclusion::WNotModerator: return "WNotModerator";
    case TreeConclusion::MultipleModeratorModel: return "MultipleModeratorModel";
    case TreeConclusion::SpuriousModeration: return "SpuriousModeration";
    case TreeConclusion::MediatedModeration: return "MediatedModeration";
  }
  return "";
}

struct DecisionTrace {
  std::array<double, 4> step_p{};   // zx in eq4; wx in eq7; zx in eq7; z in eq8
  std::array<bool, 4> step_yes{};   // step 3 answers yes when its p is NOT significant
  TreeConclusion conclusion = TreeConclusion::NoInitialModeration;
  RegressionFit eq4;  // y ~ x + z + zx
  RegressionFit eq7;  // y ~ x + z + w + zx + wx
  RegressionFit eq8;  // w ~ z + x
};

/// Conclusion as a pure function of the four step answers.
inline TreeConclusion tree_conclusion(const std::array<bool, 4>& yes) {
  if (!yes[0]) return TreeConclusion::NoInitialModeration;
  if (!yes[1]) return TreeConclusion::WNotModerator;
  if (!yes[2]) return TreeConclusion::MultipleModeratorModel;
  if (!yes[3]) return TreeConclusion::SpuriousModeration;
  return TreeConclusion::MediatedModeration;
}

/// Runs all three regressions unconditionally (every step p-value is always
/// populated); the conclusion applies the tree's short-circuit logic.
inline DecisionTrace assess_mediated_moderation(const DataTable& data, const std::string& x,
                                                const std::string& y, const std::string& z,
                                                const std::string& w,
                                                const InferenceConfig& cfg = {}) {
  validate(cfg);
  const DataTable centered = cfg.center_first ? mean_center(data, {x, z, w}) : data;

  DecisionTrace out;
  out.eq4 = detail::fit_equation(centered,
                                 {y, {Term::main(x), Term::main(z), Term::product(z, x)}},
                                 "equation 4 (y ~ x + z + zx)");
  out.eq7 = detail::fit_equation(centered,
                                 {y,
                                  {Term::main(x), Term::main(z), Term::main(w),
                                   Term::product(z, x), Term::product(w, x)}},
                                 "equation 7 (y ~ x + z + w + zx + wx)");
  out.eq8 = detail::fit_equation(centered, {w, {Term::main(z), Term::main(x)}},
                                 "equation 8 (w ~ z + x)");

  out.step_p[0] = out.eq4.coef(Term::product(z, x)).p_value;
  out.step_p[1] = out.eq7.coef(Term::product(w, x)).p_value;
  out.step_p[2] = out.eq7.coef(Term::product(z, x)).p_value;
  out.step_p[3] = out.eq8.coef(Term::main(z)).p_value;

  out.step_yes[0] = out.step_p[0] < cfg.alpha;
  out.step_yes[1] = out.step_p[1] < cfg.alpha;
  out.step_yes[2] = out.step_p[2] >= cfg.alpha;
  out.step_yes[3] = out.step_p[3] < cfg.alpha;
  out.conclusion = tree_conclusion(out.step_yes);
  return out;
}

// ---------------------------------------------------------------------------
// Current mediated-moderation method (no test of the coefficient drop)
// ---------------------------------------------------------------------------

struct CurrentMeMoResult {
  RegressionFit eq4;  // y ~ x + z + zx
  RegressionFit eq5;  // m ~ x + z + zx
  RegressionFit eq6;  // y ~ x + m + z + zx
  double b4zx = 0, b5zx = 0, b6zx = 0;
  bool inferred = false;
};

inline CurrentMeMoResult assess_current_memo(const DataTable& data, const std::string& x,
                                             const std::string& y, const std::string& z,
                                             const std::string& m,
                                             const InferenceConfig& cfg = {}) {
  validate(cfg);
  const DataTable centered = cfg.center_first ? mean_center(data, {x, z}) : data;

  CurrentMeMoResult out;
  const Term zx = Term::product(z, x);
  out.eq4 = detail::fit_equation(centered, {y, {Term::main(x), Term::main(z), zx}},
                                 "equation 4 (y ~ x + z + zx)");
  out.eq5 = detail::fit_equation(centered, {m, {Term::main(x), Term::main(z), zx}},
                                 "equation 5 (m ~ x + z + zx)");
  out.eq6 = detail::fit_equation(centered, {y, {Term::main(x), Term::main(m), Term::main(z), zx}},
                                 "equation 6 (y ~ x + m + z + zx)");
  out.b4zx = out.eq4.coef(zx).estimate;
  out.b5zx = out.eq5.coef(zx).estimate;
  out.b6zx = out.eq6.coef(zx).estimate;
  out.inferred = out.eq5.coef(zx).p_value < cfg.alpha && std::abs(out.b6zx) < std::abs(out.b4zx);
  return out;
}

// ---------------------------------------------------------------------------
// Simple slopes and the spurious-slope predictor
// ---------------------------------------------------------------------------

/// Conditional effect of x at moderator values (z0, w0) from a fitted
/// two-moderator equation: b_x + b_zx * z0 + b_wx * w0.
inline double simple_slope(const RegressionFit& fit, const std::string& x,
                           const std::string& z, const std::string& w, double z0,
                           double w0) {
  return fit.coef(Term::main(x)).estimate +
         fit.coef(Term::product(z, x)).estimate * z0 +
         fit.coef(Term::product(w, x)).estimate * w0;
}

struct SpuriousSlopeInput {
  double beta_wx = 0;
  double sigma_w = 1;
  double sigma_z = 1;
  double rho_zw = 0;
  double rho_wx = 0;
  double rho_zx = 0;
};

/// Population interaction slope attracted by a non-moderating z when the true
/// moderator is w:  beta_wx * (sigma_w / sigma_z) * (rho_zw + rho_wx * rho_zx)
/// / (1 + rho_zx^2). Holds for population data under joint normality.
inline double predict_spurious_slope(const SpuriousSlopeInput& in) {
  if (!(in.sigma_w > 0) || !(in.sigma_z > 0)) {
    throw Error("sigma_w and sigma_z must be positive");
  }
  Eigen::Matrix3d corr;
  corr << 1, in.rho_zw, in.rho_zx,
          in.rho_zw, 1, in.rho_wx,
          in.rho_zx, in.rho_wx, 1;
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eigen(corr);
  if (eigen.eigenvalues().minCoeff() < -1e-12) {
    throw NonPsdCorrelationError("correlation matrix is not positive semi-definite");
  }
  return in.beta_wx * (in.sigma_w / in.sigma_z) * (in.rho_zw + in.rho_wx * in.rho_zx) /
         (1.0 + in.rho_zx * in.rho_zx);
}

}  // namespace medmod
