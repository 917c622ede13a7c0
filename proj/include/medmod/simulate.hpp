#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <algorithm>
#include <array>
#include <atomic>
#include <cstdint>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "medmod/errors.hpp"
#include "medmod/inference.hpp"
#include "medmod/rng.hpp"
#include "medmod/table.hpp"

// Seeded data generation under the true one-moderator model and the
// 30-condition Monte Carlo study with conjunctive and primary tabulations.

namespace medmod {

// ---------------------------------------------------------------------------
// Study configuration types
// ---------------------------------------------------------------------------

/// y = beta_x*x + beta_z*z + beta_w*w + beta_wx*(w*x) + Normal(0, noise_sd^2)
struct GeneratingModel {
  double beta_x = 0.3;
  double beta_z = 0.3;
  double beta_w = 0.3;
  double beta_wx = 0.0;
  double noise_sd = 1.0;
};

/// Correlations of the standardized predictors, in (x, z, w) order.
struct CorrelationSpec {
  double rho_zw = 0.0;
  double rho_xw = 0.4;
  double rho_xz = 0.4;

  Eigen::Matrix3d matrix() const {
    Eigen::Matrix3d corr;
    corr << 1, rho_xz, rho_xw,
            rho_xz, 1, rho_zw,
            rho_xw, rho_zw, 1;
    return corr;
  }
};

struct Condition {
  Eigen::Index n = 100;
  GeneratingModel model;
  CorrelationSpec corr;
  long nrun = 10000;
  std::uint64_t seed = 0;
};

/// Proportions over nrun replications. Conjunctive entries require every
/// earlier step to also answer yes; primary entries are marginal per-step
/// rates. The fifth entry of both is the mediated-moderation rate.
struct ConditionResult {
  std::array<double, 5> conjunctive{};
  std::array<double, 5> primary{};
};

struct StudyGrid {
  std::vector<Eigen::Index> sample_sizes = {100, 250};
  std::vector<double> beta_wx_values = {-0.4, -0.2, 0.0, 0.2, 0.4};
  std::vector<double> rho_zw_values = {0.0, 0.3, 0.6};
  long nrun = 10000;
  GeneratingModel base_model;       // beta_wx overridden per cell
  CorrelationSpec base_correlation; // rho_zw overridden per cell

  std::size_t size() const {
    return sample_sizes.size() * beta_wx_values.size() * rho_zw_values.size();
  }
};

// ---------------------------------------------------------------------------
// Data generation
// ---------------------------------------------------------------------------

namespace detail {

inline Eigen::Matrix3d cholesky_factor(const CorrelationSpec& corr) {
  Eigen::LLT<Eigen::Matrix3d> llt(corr.matrix());
  if (llt.info() != Eigen::Success) {
    throw NotPositiveDefiniteError("correlation matrix is not positive definite");
  }
  return llt.matrixL();
}

}  // namespace detail

/// n i.i.d. rows of (x, z, w): the lower Cholesky factor of the correlation
/// matrix applied to standard normals drawn in fixed per-row order
/// (x-innovation, z-innovation, w-innovation).
inline DataTable sample_mvn(Eigen::Index n, const CorrelationSpec& corr,
                            const NormalStream& stream) {
  const Eigen::Matrix3d chol = detail::cholesky_factor(corr);
  Eigen::VectorXd x(n), z(n), w(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto row = static_cast<std::uint64_t>(i);
    const std::array<double, 2> first = stream.normal_pair(row, 0);
    const std::array<double, 2> second = stream.normal_pair(row, 1);
    const double n1 = first[0], n2 = first[1], n3 = second[0];
    x(i) = chol(0, 0) * n1;
    z(i) = chol(1, 0) * n1 + chol(1, 1) * n2;
    w(i) = chol(2, 0) * n1 + chol(2, 1) * n2 + chol(2, 2) * n3;
  }
  return DataTable({{"x", std::move(x)}, {"z", std::move(z)}, {"w", std::move(w)}});
}

/// One replication's dataset: predictors from sample_mvn plus the response,
/// with a fresh noise draw per row.
inline DataTable generate_dataset(const Condition& cond, const NormalStream& stream) {
  const Eigen::Matrix3d chol = detail::cholesky_factor(cond.corr);
  const GeneratingModel& m = cond.model;
  if (!(m.noise_sd > 0)) throw Error("noise_sd must be positive");
  const Eigen::Index n = cond.n;
  Eigen::VectorXd x(n), z(n), w(n), y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto row = static_cast<std::uint64_t>(i);
    const std::array<double, 2> first = stream.normal_pair(row, 0);
    const std::array<double, 2> second = stream.normal_pair(row, 1);
    const double n1 = first[0], n2 = first[1], n3 = second[0], eps = second[1];
    x(i) = chol(0, 0) * n1;
    z(i) = chol(1, 0) * n1 + chol(1, 1) * n2;
    w(i) = chol(2, 0) * n1 + chol(2, 1) * n2 + chol(2, 2) * n3;
    y(i) = m.beta_x * x(i) + m.beta_z * z(i) + m.beta_w * w(i) +
           m.beta_wx * w(i) * x(i) + m.noise_sd * eps;
  }
  return DataTable({{"x", std::move(x)},
                    {"z", std::move(z)},
                    {"w", std::move(w)},
                    {"y", std::move(y)}});
}

// ---------------------------------------------------------------------------
// Condition and study execution
// ---------------------------------------------------------------------------

namespace detail {

struct StepCounts {
  std::array<std::uint64_t, 4> primary{};
  std::array<std::uint64_t, 4> conjunctive{};

  void add(const std::array<bool, 4>& yes) {
    bool all_so_far = true;
    for (int s = 0; s < 4; ++s) {
      primary[static_cast<std::size_t>(s)] += yes[static_cast<std::size_t>(s)] ? 1 : 0;
      all_so_far = all_so_far && yes[static_cast<std::size_t>(s)];
      conjunctive[static_cast<std::size_t>(s)] += all_so_far ? 1 : 0;
    }
  }

  void merge(const StepCounts& other) {
    for (int s = 0; s < 4; ++s) {
      primary[static_cast<std::size_t>(s)] += other.primary[static_cast<std::size_t>(s)];
      conjunctive[static_cast<std::size_t>(s)] += other.conjunctive[static_cast<std::size_t>(s)];
    }
  }
};

/// Static chunking over [0, count); results must be merged order-insensitively.
template <typename Body>
void parallel_chunks(long count, int threads, const Body& body) {
  if (threads <= 1 || count < 2) {
    body(0L, count);
    return;
  }
  const long n_threads = std::min<long>(threads, count);
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(n_threads));
  const long chunk = (count + n_threads - 1) / n_threads;
  for (long t = 0; t < n_threads; ++t) {
    const long begin = t * chunk;
    const long end = std::min(count, begin + chunk);
    if (begin >= end) break;
    pool.emplace_back([&body, begin, end] { body(begin, end); });
  }
  for (auto& worker : pool) worker.join();
}

}  // namespace detail

/// Runs every replication of one condition and tabulates both distributions.
/// Replication r uses the substream derive_stream(cond.seed, r), so results
/// are identical for any thread count.
inline ConditionResult run_condition(const Condition& cond, const InferenceConfig& cfg = {},
                                     int threads = 1) {
  validate(cfg);
  if (cond.nrun <= 0) throw Error("nrun must be positive");
  if (cond.n <= 6) throw Error("n must exceed the widest design (n > 6)");

  std::vector<detail::StepCounts> partials(
      static_cast<std::size_t>(std::max(1, threads)));
  std::exception_ptr failure;
  std::mutex failure_mutex;

  std::atomic<std::size_t> next_slot{0};
  detail::parallel_chunks(cond.nrun, threads, [&](long begin, long end) {
    detail::StepCounts local;
    try {
      for (long rep = begin; rep < end; ++rep) {
        const NormalStream stream(
            derive_stream(cond.seed, static_cast<std::uint64_t>(rep)));
        const DataTable data = generate_dataset(cond, stream);
        const DecisionTrace trace = assess_mediated_moderation(data, "x", "y", "z", "w", cfg);
        local.add(trace.step_yes);
      }
    } catch (...) {
      std::lock_guard<std::mutex> lock(failure_mutex);
      if (!failure) failure = std::current_exception();
      return;
    }
    partials[next_slot.fetch_add(1)] = local;
  });
  if (failure) std::rethrow_exception(failure);

  detail::StepCounts total;
  for (const auto& partial : partials) total.merge(partial);

  ConditionResult result;
  const auto denom = static_cast<double>(cond.nrun);
  for (int s = 0; s < 4; ++s) {
    result.primary[static_cast<std::size_t>(s)] =
        static_cast<double>(total.primary[static_cast<std::size_t>(s)]) / denom;
    result.conjunctive[static_cast<std::size_t>(s)] =
        static_cast<double>(total.conjunctive[static_cast<std::size_t>(s)]) / denom;
  }
  result.conjunctive[4] = result.conjunctive[3];
  result.primary[4] = result.conjunctive[3];
  return result;
}

/// All grid cells in table order: n outer, then beta_wx as listed
/// (-0.4 first), then rho_zw ascending. Cell k draws its seed as
/// derive_stream(master_seed, k).
inline std::vector<std::pair<Condition, ConditionResult>> run_study(
    const StudyGrid& grid, const InferenceConfig& cfg, std::uint64_t master_seed,
    int threads = 1) {
  std::vector<std::pair<Condition, ConditionResult>> results;
  results.reserve(grid.size());
  std::uint64_t index = 0;
  for (const Eigen::Index n : grid.sample_sizes) {
    for (const double beta_wx : grid.beta_wx_values) {
      for (const double rho_zw : grid.rho_zw_values) {
        Condition cond;
        cond.n = n;
        cond.model = grid.base_model;
        cond.model.beta_wx = beta_wx;
        cond.corr = grid.base_correlation;
        cond.corr.rho_zw = rho_zw;
        cond.nrun = grid.nrun;
        cond.seed = derive_stream(master_seed, index);
        try {
          results.emplace_back(cond, run_condition(cond, cfg, threads));
        } catch (const Error& e) {
          throw Error("condition " + std::to_string(index) + " (n=" + std::to_string(n) +
                      ", beta_wx=" + std::to_string(beta_wx) +
                      ", rho_zw=" + std::to_string(rho_zw) + "): " + e.what());
        }
        ++index;
      }
    }
  }
  return results;
}

// ---------------------------------------------------------------------------
// Empirical spurious-slope oracle
// ---------------------------------------------------------------------------

struct SlopeEstimate {
  double estimate = 0;
  double std_error = 0;
};

/// Large-n empirical estimate of the population interaction slope a wrong
/// moderator z attracts: one big dataset, one fit of y ~ x + z + zx.
inline SlopeEstimate slope_oracle(const GeneratingModel& model, const CorrelationSpec& corr,
                                  Eigen::Index n_big = 2000000, std::uint64_t seed = 0) {
  Condition cond;
  cond.n = n_big;
  cond.model = model;
  cond.corr = corr;
  cond.seed = seed;
  const NormalStream stream(derive_stream(seed, 0));
  const DataTable data = generate_dataset(cond, stream);
  const DataTable centered = mean_center(data, {"x", "z"});
  const RegressionFit fit =
      fit_ols(centered, {"y", {Term::main("x"), Term::main("z"), Term::product("z", "x")}});
  const CoefficientEstimate& c = fit.coef(Term::product("z", "x"));
  return {c.estimate, c.std_error};
}

}  // namespace medmod
