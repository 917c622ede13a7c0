#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Core>
#include <random>
#include <vector>

#include "medmod/regress.hpp"
#include "medmod/table.hpp"
#include "oracles.hpp"

using medmod::DataTable;
using medmod::ModelFormula;
using medmod::RegressionFit;
using medmod::Term;

namespace {

Eigen::VectorXd vec(std::initializer_list<double> values) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(values.size()));
  Eigen::Index i = 0;
  for (const double value : values) v(i++) = value;
  return v;
}

DataTable random_table(std::mt19937_64& rng, Eigen::Index n,
                       const std::vector<std::string>& names) {
  std::normal_distribution<double> normal;
  std::vector<std::pair<std::string, Eigen::VectorXd>> columns;
  for (const auto& name : names) {
    Eigen::VectorXd column(n);
    for (Eigen::Index i = 0; i < n; ++i) column(i) = normal(rng);
    columns.emplace_back(name, std::move(column));
  }
  return DataTable(std::move(columns));
}

}  // namespace

TEST_CASE("DataTable construction rules") {
  CHECK_THROWS_AS(DataTable({{"a", vec({1, 2})}, {"a", vec({3, 4})}}),
                  medmod::InvalidDataError);
  CHECK_THROWS_AS(DataTable({{"a", vec({1, 2})}, {"b", vec({3})}}), medmod::InvalidDataError);
  CHECK_THROWS_AS(DataTable({{"a", vec({1, std::nan("")})}}), medmod::InvalidDataError);
  CHECK_THROWS_AS(DataTable({{"a", vec({1, std::numeric_limits<double>::infinity()})}}),
                  medmod::InvalidDataError);
  const DataTable table({{"a", vec({1, 2, 3})}});
  CHECK(table.rows() == 3);
  CHECK_THROWS_AS(table.col("missing"), medmod::UnknownColumnError);
}

TEST_CASE("exact linear data recovers the line with zero residual variance") {
  const DataTable data({{"x", vec({0, 1, 2, 3})}, {"y", vec({1, 3, 5, 7})}});
  const RegressionFit fit = medmod::fit_ols(data, {"y", {Term::main("x")}});
  CHECK(fit.coef(Term::intercept()).estimate == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(fit.coef(Term::main("x")).estimate == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(fit.residual_variance == doctest::Approx(0.0).scale(1.0).epsilon(1e-20));
  CHECK(fit.df_resid == 2);
}

TEST_CASE("constant response gives zero slope") {
  const DataTable data({{"x", vec({0, 1, 2, 3})}, {"y", vec({5, 5, 5, 5})}});
  const RegressionFit fit = medmod::fit_ols(data, {"y", {Term::main("x")}});
  CHECK(fit.coef(Term::main("x")).estimate == doctest::Approx(0.0).scale(1.0).epsilon(1e-14));
  CHECK(fit.coef(Term::intercept()).estimate == doctest::Approx(5.0).epsilon(1e-14));
  CHECK(fit.r_squared >= 0.0);
  CHECK(fit.r_squared <= 1.0);
}

TEST_CASE("hand-solved normal equations: slope 0.6, intercept 0.1") {
  const DataTable data({{"x", vec({0, 1, 2, 3})}, {"y", vec({0, 1, 1, 2})}});
  const RegressionFit fit = medmod::fit_ols(data, {"y", {Term::main("x")}});
  CHECK(fit.coef(Term::main("x")).estimate == doctest::Approx(0.6).epsilon(1e-12));
  CHECK(fit.coef(Term::intercept()).estimate == doctest::Approx(0.1).epsilon(1e-12));
}

TEST_CASE("error paths: rank deficiency, too few rows, unknown column") {
  const DataTable data({{"x", vec({0, 1, 2, 3})},
                        {"x2", vec({0, 2, 4, 6})},
                        {"y", vec({0, 1, 1, 2})}});
  CHECK_THROWS_AS(medmod::fit_ols(data, {"y", {Term::main("x"), Term::main("x2")}}),
                  medmod::RankDeficientError);
  CHECK_THROWS_AS(
      medmod::fit_ols(data, {"y", {Term::main("x"), Term::main("x2"), Term::main("y")}}),
      medmod::TooFewRowsError);
  CHECK_THROWS_AS(medmod::fit_ols(data, {"y", {Term::main("nope")}}),
                  medmod::UnknownColumnError);
  CHECK_THROWS_AS(medmod::fit_ols(data, {"nope", {Term::main("x")}}),
                  medmod::UnknownColumnError);
  CHECK_THROWS_AS(medmod::fit_ols(data, {"y", {Term::main("x"), Term::main("x")}}),
                  medmod::InvalidDataError);
  CHECK_THROWS_AS(medmod::fit_ols(data, {"y", {}, false}), medmod::InvalidDataError);
}

TEST_CASE("intercept-only fit estimates the mean") {
  const DataTable data({{"y", vec({2, 4, 6, 8})}});
  const RegressionFit fit = medmod::fit_ols(data, {"y", {}});
  CHECK(fit.coef(Term::intercept()).estimate == doctest::Approx(5.0));
  CHECK(fit.df_resid == 3);
}

TEST_CASE("t and p relations inside a fit") {
  std::mt19937_64 rng(21);
  const DataTable data = random_table(rng, 40, {"x", "z", "y"});
  const RegressionFit fit =
      medmod::fit_ols(data, {"y", {Term::main("x"), Term::main("z")}});
  for (const auto& c : fit.coefficients) {
    CHECK(c.t_value == doctest::Approx(c.estimate / c.std_error).epsilon(1e-12));
    CHECK(c.p_value >= 0.0);
    CHECK(c.p_value <= 1.0);
    CHECK(c.p_value ==
          doctest::Approx(medmod::two_sided_p(c.t_value, fit.df_resid)).epsilon(1e-12));
  }
  CHECK(fit.df_resid == 40 - 3);
}

TEST_CASE("oracle equivalence: QR fit matches raw normal equations on random instances") {
  std::mt19937_64 rng(42);
  std::normal_distribution<double> normal;
  std::uniform_int_distribution<int> pick_n(8, 30);
  std::uniform_int_distribution<int> pick_k(1, 4);
  for (int trial = 0; trial < 500; ++trial) {
    const Eigen::Index n = pick_n(rng);
    const Eigen::Index k = pick_k(rng);
    Eigen::MatrixXd X(n, k + 1);
    X.col(0).setOnes();
    for (Eigen::Index j = 1; j <= k; ++j) {
      for (Eigen::Index i = 0; i < n; ++i) X(i, j) = normal(rng);
    }
    Eigen::VectorXd y(n);
    for (Eigen::Index i = 0; i < n; ++i) y(i) = normal(rng);

    std::vector<std::pair<std::string, Eigen::VectorXd>> columns;
    std::vector<Term> terms;
    for (Eigen::Index j = 1; j <= k; ++j) {
      const std::string name = "x" + std::to_string(j);
      columns.emplace_back(name, X.col(j));
      terms.push_back(Term::main(name));
    }
    columns.emplace_back("y", y);
    const RegressionFit fit = medmod::fit_ols(DataTable(std::move(columns)), {"y", terms});

    const std::vector<double> expected = oracles::normal_equations_solve(X, y);
    CHECK(fit.coef(Term::intercept()).estimate ==
          doctest::Approx(expected[0]).epsilon(1e-10));
    for (Eigen::Index j = 1; j <= k; ++j) {
      CHECK(fit.coef(Term::main("x" + std::to_string(j))).estimate ==
            doctest::Approx(expected[static_cast<std::size_t>(j)]).epsilon(1e-10));
    }
  }
}

TEST_CASE("row permutation leaves every fit field unchanged") {
  std::mt19937_64 rng(5);
  const Eigen::Index n = 25;
  const DataTable data = random_table(rng, n, {"x", "z", "y"});

  std::vector<Eigen::Index> perm(n);
  for (Eigen::Index i = 0; i < n; ++i) perm[static_cast<std::size_t>(i)] = i;
  std::shuffle(perm.begin(), perm.end(), rng);
  std::vector<std::pair<std::string, Eigen::VectorXd>> shuffled;
  for (const auto& name : data.names()) {
    Eigen::VectorXd column(n);
    for (Eigen::Index i = 0; i < n; ++i) column(i) = data.col(name)(perm[static_cast<std::size_t>(i)]);
    shuffled.emplace_back(name, std::move(column));
  }

  const ModelFormula formula{"y", {Term::main("x"), Term::main("z"), Term::product("z", "x")}};
  const RegressionFit a = medmod::fit_ols(data, formula);
  const RegressionFit b = medmod::fit_ols(DataTable(std::move(shuffled)), formula);
  CHECK(a.residual_variance == doctest::Approx(b.residual_variance).epsilon(1e-12));
  CHECK(a.r_squared == doctest::Approx(b.r_squared).epsilon(1e-12));
  for (std::size_t i = 0; i < a.coefficients.size(); ++i) {
    CHECK(a.coefficients[i].estimate == doctest::Approx(b.coefficients[i].estimate).epsilon(1e-12));
    CHECK(a.coefficients[i].std_error ==
          doctest::Approx(b.coefficients[i].std_error).epsilon(1e-12));
  }
}

TEST_CASE("mean_center examples") {
  const DataTable data({{"a", vec({1, 2, 3})}, {"b", vec({-1, 0, 1})}, {"c", vec({2, 2, 2})}});
  const DataTable centered = medmod::mean_center(data, {"a", "b", "c"});
  CHECK(centered.col("a")(0) == doctest::Approx(-1.0));
  CHECK(centered.col("a")(1) == doctest::Approx(0.0).scale(1.0));
  CHECK(centered.col("a")(2) == doctest::Approx(1.0));
  for (Eigen::Index i = 0; i < 3; ++i) {
    CHECK(centered.col("b")(i) == data.col("b")(i));  // already centered: unchanged
    CHECK(centered.col("c")(i) == doctest::Approx(0.0).scale(1.0));
  }
  CHECK_THROWS_AS(medmod::mean_center(data, {"missing"}), medmod::UnknownColumnError);

  // untouched columns are bitwise identical
  const DataTable partial = medmod::mean_center(data, {"a"});
  for (Eigen::Index i = 0; i < 3; ++i) CHECK(partial.col("c")(i) == 2.0);
}

TEST_CASE("build_design product columns and ordering") {
  const DataTable data({{"x", vec({1, 2})}, {"z", vec({3, 4})}, {"q", vec({0, 0})}});
  const medmod::Design design =
      medmod::build_design(data, {"", {Term::main("x"), Term::product("z", "x")}});
  REQUIRE(design.columns.size() == 3);
  CHECK(design.columns[0].kind == medmod::TermKind::Intercept);
  CHECK(design.columns[1] == Term::main("x"));
  CHECK(design.columns[2] == Term::product("z", "x"));
  CHECK(design.matrix(0, 2) == doctest::Approx(3.0));
  CHECK(design.matrix(1, 2) == doctest::Approx(8.0));

  const medmod::Design zero =
      medmod::build_design(data, {"", {Term::product("q", "x")}});
  CHECK(zero.matrix.col(1).cwiseAbs().maxCoeff() == 0.0);

  // centered mains can still produce a product column with nonzero mean
  const DataTable centered({{"x", vec({-1, 1})}, {"z", vec({-1, 1})}});
  const medmod::Design prod =
      medmod::build_design(centered, {"", {Term::product("z", "x")}});
  CHECK(prod.matrix(0, 1) == doctest::Approx(1.0));
  CHECK(prod.matrix(1, 1) == doctest::Approx(1.0));
}

TEST_CASE("centering invariance of product-term inference") {
  std::mt19937_64 rng(99);
  std::normal_distribution<double> normal;
  for (int trial = 0; trial < 100; ++trial) {
    const Eigen::Index n = 60;
    Eigen::VectorXd x(n), z(n), y(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      x(i) = normal(rng) + 1.5;  // deliberately uncentered
      z(i) = normal(rng) - 0.7;
      y(i) = 0.4 * x(i) + 0.2 * z(i) + 0.3 * x(i) * z(i) + normal(rng);
    }
    const DataTable raw({{"x", x}, {"z", z}, {"y", y}});
    const ModelFormula formula{"y",
                               {Term::main("x"), Term::main("z"), Term::product("z", "x")}};
    const RegressionFit fit_raw = medmod::fit_ols(raw, formula);
    const RegressionFit fit_centered =
        medmod::fit_ols(medmod::mean_center(raw, {"x", "z"}), formula);

    const auto& raw_zx = fit_raw.coef(Term::product("z", "x"));
    const auto& cen_zx = fit_centered.coef(Term::product("z", "x"));
    CHECK(raw_zx.estimate == doctest::Approx(cen_zx.estimate).epsilon(1e-10));
    CHECK(raw_zx.std_error == doctest::Approx(cen_zx.std_error).epsilon(1e-10));
    CHECK(raw_zx.t_value == doctest::Approx(cen_zx.t_value).epsilon(1e-10));
    CHECK(raw_zx.p_value == doctest::Approx(cen_zx.p_value).epsilon(1e-10));
  }
}
