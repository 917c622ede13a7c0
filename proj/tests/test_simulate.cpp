#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Core>
#include <array>
#include <cstdint>
#include <vector>

#include "medmod/rng.hpp"
#include "medmod/simulate.hpp"

using medmod::Condition;
using medmod::ConditionResult;
using medmod::CorrelationSpec;
using medmod::DataTable;
using medmod::GeneratingModel;
using medmod::NormalStream;

namespace {

double sample_corr(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const Eigen::ArrayXd da = a.array() - a.mean();
  const Eigen::ArrayXd db = b.array() - b.mean();
  return (da * db).sum() / std::sqrt((da * da).sum() * (db * db).sum());
}

}  // namespace

// ---------------------------------------------------------------------------
// counter-based RNG
// ---------------------------------------------------------------------------

TEST_CASE("philox4x32-10 known-answer vectors") {
  // Salmon et al. (2011) reference vectors
  const auto zeros = medmod::philox4x32({0, 0, 0, 0}, {0, 0});
  CHECK(zeros[0] == 0x6627e8d5u);
  CHECK(zeros[1] == 0xe169c58du);
  CHECK(zeros[2] == 0xbc57ac4cu);
  CHECK(zeros[3] == 0x9b00dbd8u);

  const auto ones = medmod::philox4x32({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu},
                                       {0xffffffffu, 0xffffffffu});
  CHECK(ones[0] == 0x408f276du);
  CHECK(ones[1] == 0x41c83b0eu);
  CHECK(ones[2] == 0xa20bc7c6u);
  CHECK(ones[3] == 0x6d5451fdu);

  const auto pi = medmod::philox4x32({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u},
                                     {0xa4093822u, 0x299f31d0u});
  CHECK(pi[0] == 0xd16cfe09u);
  CHECK(pi[1] == 0x94fdccebu);
  CHECK(pi[2] == 0x5001e420u);
  CHECK(pi[3] == 0x24126ea1u);
}

TEST_CASE("normal stream is a pure function of (key, row, pair)") {
  const NormalStream a(42), b(42), c(43);
  CHECK(a.normal_pair(7, 1) == b.normal_pair(7, 1));
  CHECK(a.normal_pair(7, 0) != a.normal_pair(7, 1));
  CHECK(a.normal_pair(7, 0) != a.normal_pair(8, 0));
  CHECK(a.normal_pair(7, 0) != c.normal_pair(7, 0));
}

TEST_CASE("normal stream draws have standard-normal moments") {
  const NormalStream stream(99);
  const int n = 20000;
  double sum = 0, sum_sq = 0;
  for (int i = 0; i < n; ++i) {
    const auto pair = stream.normal_pair(static_cast<std::uint64_t>(i), 0);
    for (const double v : pair) {
      sum += v;
      sum_sq += v * v;
    }
  }
  const double mean = sum / (2 * n);
  const double var = sum_sq / (2 * n) - mean * mean;
  CHECK(std::abs(mean) < 0.02);
  CHECK(std::abs(var - 1.0) < 0.04);
}

TEST_CASE("derive_stream separates substreams") {
  CHECK(medmod::derive_stream(1, 0) != medmod::derive_stream(1, 1));
  CHECK(medmod::derive_stream(1, 0) != medmod::derive_stream(2, 0));
  CHECK(medmod::derive_stream(123, 7) == medmod::derive_stream(123, 7));
}

// ---------------------------------------------------------------------------
// multivariate sampling and data generation
// ---------------------------------------------------------------------------

TEST_CASE("identity correlations give near-independent samples") {
  CorrelationSpec corr;
  corr.rho_zw = 0;
  corr.rho_xw = 0;
  corr.rho_xz = 0;
  CHECK(medmod::detail::cholesky_factor(corr).isIdentity(1e-14));

  const DataTable table = medmod::sample_mvn(10000, corr, NormalStream(5));
  CHECK(std::abs(sample_corr(table.col("x"), table.col("z"))) < 0.03);
  CHECK(std::abs(sample_corr(table.col("x"), table.col("w"))) < 0.03);
  CHECK(std::abs(sample_corr(table.col("z"), table.col("w"))) < 0.03);
}

TEST_CASE("target correlations are hit within the sampling band") {
  CorrelationSpec corr;
  corr.rho_zw = 0.6;
  const DataTable table = medmod::sample_mvn(10000, corr, NormalStream(6));
  CHECK(sample_corr(table.col("z"), table.col("w")) == doctest::Approx(0.6).epsilon(0.05));
  CHECK(sample_corr(table.col("x"), table.col("z")) == doctest::Approx(0.4).epsilon(0.08));
  CHECK(sample_corr(table.col("x"), table.col("w")) == doctest::Approx(0.4).epsilon(0.08));
  for (const char* name : {"x", "z", "w"}) {
    const Eigen::VectorXd& col = table.col(name);
    CHECK(std::abs(col.mean()) < 0.04);
    CHECK((col.array() - col.mean()).square().mean() == doctest::Approx(1.0).epsilon(0.05));
  }
}

TEST_CASE("a non-positive-definite correlation spec is rejected") {
  CorrelationSpec corr;
  corr.rho_zw = 0.9;
  corr.rho_xw = -0.9;
  corr.rho_xz = 0.9;
  CHECK_THROWS_AS(medmod::sample_mvn(10, corr, NormalStream(1)),
                  medmod::NotPositiveDefiniteError);
}

TEST_CASE("near-noiseless generation identifies the main effects") {
  Condition cond;
  cond.n = 500;
  cond.model.beta_wx = 0.0;
  cond.model.noise_sd = 1e-8;
  cond.seed = 7;
  const DataTable data = medmod::generate_dataset(cond, NormalStream(medmod::derive_stream(7, 0)));
  const medmod::RegressionFit fit = medmod::fit_ols(
      data, {"y",
             {medmod::Term::main("x"), medmod::Term::main("z"), medmod::Term::main("w")}});
  CHECK(fit.coef(medmod::Term::main("x")).estimate == doctest::Approx(0.3).epsilon(1e-6));
  CHECK(fit.coef(medmod::Term::main("z")).estimate == doctest::Approx(0.3).epsilon(1e-6));
  CHECK(fit.coef(medmod::Term::main("w")).estimate == doctest::Approx(0.3).epsilon(1e-6));
}

TEST_CASE("the generated interaction coefficient is recovered within 3 standard errors") {
  Condition cond;
  cond.n = 20000;
  cond.model.beta_wx = 0.4;
  cond.corr.rho_zw = 0.3;
  cond.seed = 8;
  const DataTable data = medmod::generate_dataset(cond, NormalStream(medmod::derive_stream(8, 0)));
  const DataTable centered = medmod::mean_center(data, {"x", "w"});
  const medmod::RegressionFit fit = medmod::fit_ols(
      centered, {"y",
                 {medmod::Term::main("x"), medmod::Term::main("w"),
                  medmod::Term::product("w", "x")}});
  const auto& wx = fit.coef(medmod::Term::product("w", "x"));
  CHECK(std::abs(wx.estimate - 0.4) < 3 * wx.std_error);
}

TEST_CASE("all-zero coefficients leave y as pure noise") {
  Condition cond;
  cond.n = 5000;
  cond.model = GeneratingModel{0, 0, 0, 0, 1.0};
  cond.seed = 9;
  const DataTable data = medmod::generate_dataset(cond, NormalStream(medmod::derive_stream(9, 0)));
  const medmod::RegressionFit fit = medmod::fit_ols(
      data, {"y",
             {medmod::Term::main("x"), medmod::Term::main("z"), medmod::Term::main("w")}});
  CHECK(fit.r_squared < 0.01);
}

// ---------------------------------------------------------------------------
// condition and study runs
// ---------------------------------------------------------------------------

TEST_CASE("condition tabulation invariants and thread determinism") {
  Condition cond;
  cond.n = 100;
  cond.model.beta_wx = -0.2;
  cond.corr.rho_zw = 0.3;
  cond.nrun = 2000;
  cond.seed = 321;

  const ConditionResult serial = medmod::run_condition(cond, {}, 1);
  for (int s = 0; s < 4; ++s) {
    CHECK(serial.conjunctive[static_cast<std::size_t>(s)] <=
          serial.primary[static_cast<std::size_t>(s)] + 1e-15);
    if (s > 0) {
      CHECK(serial.conjunctive[static_cast<std::size_t>(s)] <=
            serial.conjunctive[static_cast<std::size_t>(s - 1)] + 1e-15);
    }
  }
  CHECK(serial.conjunctive[4] == serial.conjunctive[3]);
  CHECK(serial.primary[4] == serial.conjunctive[4]);

  for (const int threads : {2, 4, 8}) {
    const ConditionResult parallel = medmod::run_condition(cond, {}, threads);
    for (int s = 0; s < 5; ++s) {
      CHECK(parallel.conjunctive[static_cast<std::size_t>(s)] ==
            serial.conjunctive[static_cast<std::size_t>(s)]);
      CHECK(parallel.primary[static_cast<std::size_t>(s)] ==
            serial.primary[static_cast<std::size_t>(s)]);
    }
  }
}

TEST_CASE("step-3 rate sits at its exact-null level") {
  Condition cond;
  cond.n = 100;
  cond.model.beta_wx = 0.4;
  cond.corr.rho_zw = 0.6;
  cond.nrun = 2000;
  cond.seed = 654;
  const ConditionResult result = medmod::run_condition(cond, {}, 2);
  CHECK(result.primary[2] > 0.93);
  CHECK(result.primary[2] < 0.97);
}

TEST_CASE("invalid conditions are rejected") {
  Condition cond;
  cond.nrun = 0;
  CHECK_THROWS_AS(medmod::run_condition(cond), medmod::Error);
  cond.nrun = 10;
  cond.n = 5;
  CHECK_THROWS_AS(medmod::run_condition(cond), medmod::Error);
}

TEST_CASE("study grid emits cells in table order and matches single-condition runs") {
  medmod::StudyGrid grid;
  grid.nrun = 200;
  const std::uint64_t master = 777;
  const auto rows = medmod::run_study(grid, {}, master, 2);
  REQUIRE(rows.size() == 30);

  // order: n in {100, 250} outer, beta_wx as listed, rho_zw ascending
  CHECK(rows[0].first.n == 100);
  CHECK(rows[0].first.model.beta_wx == -0.4);
  CHECK(rows[0].first.corr.rho_zw == 0.0);
  CHECK(rows[1].first.corr.rho_zw == 0.3);
  CHECK(rows[3].first.model.beta_wx == -0.2);
  CHECK(rows[15].first.n == 250);
  CHECK(rows[29].first.model.beta_wx == 0.4);
  CHECK(rows[29].first.corr.rho_zw == 0.6);

  // any cell reproduces as a standalone condition with the derived seed
  const std::size_t pick = 17;
  Condition cond = rows[pick].first;
  CHECK(cond.seed == medmod::derive_stream(master, pick));
  const ConditionResult redo = medmod::run_condition(cond, {}, 1);
  for (int s = 0; s < 5; ++s) {
    CHECK(redo.primary[static_cast<std::size_t>(s)] ==
          rows[pick].second.primary[static_cast<std::size_t>(s)]);
    CHECK(redo.conjunctive[static_cast<std::size_t>(s)] ==
          rows[pick].second.conjunctive[static_cast<std::size_t>(s)]);
  }
}

TEST_CASE("restricting the grid to beta_wx = 0 keeps mediated moderation at the floor") {
  medmod::StudyGrid grid;
  grid.beta_wx_values = {0.0};
  grid.nrun = 2000;
  const auto rows = medmod::run_study(grid, {}, 20110715, 2);
  REQUIRE(rows.size() == 6);
  for (const auto& [cond, result] : rows) {
    CHECK(result.primary[4] <= 0.005);
  }
}

// ---------------------------------------------------------------------------
// slope oracle
// ---------------------------------------------------------------------------

TEST_CASE("slope oracle brackets zero when the true interaction is absent") {
  GeneratingModel model;
  model.beta_wx = 0.0;
  CorrelationSpec corr;
  corr.rho_zw = 0.3;
  const auto est = medmod::slope_oracle(model, corr, 200000, 42);
  CHECK(est.std_error > 0);
  CHECK(std::abs(est.estimate) < 3 * est.std_error);
}

TEST_CASE("slope oracle agrees with the closed-form prediction at the strong cell") {
  GeneratingModel model;
  model.beta_wx = 0.4;
  CorrelationSpec corr;
  corr.rho_zw = 0.6;
  const auto est = medmod::slope_oracle(model, corr, 400000, 43);
  const double predicted = medmod::predict_spurious_slope({0.4, 1, 1, 0.6, 0.4, 0.4});
  CHECK(est.estimate > 0.0);
  CHECK(est.estimate < 0.4);
  CHECK(std::abs(est.estimate - predicted) < 4 * est.std_error);
}
