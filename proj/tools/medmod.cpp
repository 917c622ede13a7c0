// medmod — command-line front end: Monte Carlo study of the mediated-
// moderation decision tree, step-wise analysis of user data, the closed-form
// spurious-slope predictor, and the path-model comparison fit.

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cstdint>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "medmod/errors.hpp"
#include "medmod/inference.hpp"
#include "medmod/io.hpp"
#include "medmod/pathfit.hpp"
#include "medmod/simulate.hpp"
#include "medmod/version.hpp"

namespace {

using nlohmann::ordered_json;

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;
constexpr std::uint64_t kDefaultSeed = 20110715;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::uint64_t resolve_seed(const std::optional<std::uint64_t>& flag_seed) {
  if (flag_seed) return *flag_seed;
  if (const char* env = std::getenv("MEDMOD_SEED")) {
    std::uint64_t value = 0;
    const std::string text(env);
    const auto result = std::from_chars(text.data(), text.data() + text.size(), value);
    if (result.ec != std::errc() || result.ptr != text.data() + text.size()) {
      throw UsageError("MEDMOD_SEED is not a valid unsigned integer: " + text);
    }
    return value;
  }
  return kDefaultSeed;
}

std::string iso_utc_now() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buffer[32];
  std::strftime(buffer, sizeof(buffer), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buffer;
}

std::uint64_t fnv1a64_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw medmod::Error("cannot open file: " + path);
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  char chunk[4096];
  while (in.read(chunk, sizeof(chunk)) || in.gcount() > 0) {
    for (std::streamsize i = 0; i < in.gcount(); ++i) {
      hash ^= static_cast<unsigned char>(chunk[i]);
      hash *= 0x100000001b3ULL;
    }
  }
  return hash;
}

std::string hex64(std::uint64_t value) {
  char buffer[17];
  std::snprintf(buffer, sizeof(buffer), "%016llx", static_cast<unsigned long long>(value));
  return buffer;
}

struct Manifest {
  std::string subcommand;
  ordered_json config;
  std::uint64_t master_seed = 0;
  std::string started;
  std::string finished;
  std::vector<std::pair<std::string, std::string>> input_digests;  // path, fnv1a64

  ordered_json to_json() const {
    ordered_json inputs = ordered_json::array();
    for (const auto& [path, digest] : input_digests) {
      inputs.push_back({{"path", path}, {"fnv1a64", digest}});
    }
    return ordered_json{{"schema", "medmod/1"},
                        {"kind", "manifest"},
                        {"tool", "medmod"},
                        {"version", medmod::kVersion},
                        {"subcommand", subcommand},
                        {"config", config},
                        {"master_seed", master_seed},
                        {"started_utc", started},
                        {"finished_utc", finished},
                        {"inputs", inputs}};
  }
};

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw medmod::Error("cannot write file: " + path);
  out << text;
}

ordered_json fit_to_json(const medmod::RegressionFit& fit) {
  ordered_json terms = ordered_json::array();
  for (const auto& c : fit.coefficients) {
    terms.push_back({{"term", c.term.label()},
                     {"estimate", c.estimate},
                     {"std_error", c.std_error},
                     {"t", c.t_value},
                     {"p", c.p_value}});
  }
  return ordered_json{{"terms", terms},
                      {"residual_variance", fit.residual_variance},
                      {"df_resid", fit.df_resid},
                      {"r_squared", fit.r_squared},
                      {"n", fit.n_obs}};
}

ordered_json semfit_to_json(const std::string& name, const medmod::SemFit& fit) {
  return ordered_json{{"model", name},       {"chi2", fit.chi2},
                      {"df", fit.df},        {"p", fit.p},
                      {"gfi", fit.gfi},      {"agfi", fit.agfi},
                      {"tli", fit.tli},      {"f_min", fit.f_min},
                      {"converged", fit.converged}};
}

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

struct SimulateOptions {
  std::vector<long> sample_sizes;
  std::vector<double> beta_wx;
  std::vector<double> rho_zw;
  long nrun = 10000;
  std::optional<std::uint64_t> seed;
  double alpha = 0.05;
  std::string out_dir = ".";
  int threads = 0;
};

std::string study_csv(const std::vector<std::pair<medmod::Condition, medmod::ConditionResult>>& rows,
                      bool conjunctive) {
  std::string text = "beta_wx,rho_zw,n,step1,step2,step3,step4,mediated_moderation\n";
  for (const auto& [cond, result] : rows) {
    const auto& values = conjunctive ? result.conjunctive : result.primary;
    text += medmod::format_fixed(cond.model.beta_wx, 4) + ",";
    text += medmod::format_fixed(cond.corr.rho_zw, 4) + ",";
    text += std::to_string(cond.n);
    for (const double v : values) text += "," + medmod::format_fixed(v, 4);
    text += "\n";
  }
  return text;
}

int run_simulate(const SimulateOptions& opt) {
  if (opt.nrun <= 0) throw UsageError("nrun must be positive");
  if (!(opt.alpha > 0.0 && opt.alpha < 1.0)) throw UsageError("alpha must lie in (0,1)");
  for (const long n : opt.sample_sizes) {
    if (n <= 6) throw UsageError("n must be greater than 6");
  }

  medmod::StudyGrid grid;
  grid.sample_sizes.assign(opt.sample_sizes.begin(), opt.sample_sizes.end());
  grid.beta_wx_values = opt.beta_wx;
  grid.rho_zw_values = opt.rho_zw;
  grid.nrun = opt.nrun;

  medmod::InferenceConfig cfg;
  cfg.alpha = opt.alpha;

  const std::uint64_t seed = resolve_seed(opt.seed);
  const int threads =
      opt.threads > 0 ? opt.threads : std::max(1u, std::thread::hardware_concurrency());

  Manifest manifest;
  manifest.subcommand = "simulate";
  manifest.master_seed = seed;
  manifest.started = iso_utc_now();
  manifest.config = ordered_json{{"n", opt.sample_sizes},   {"beta_wx", opt.beta_wx},
                                 {"rho_zw", opt.rho_zw},    {"nrun", opt.nrun},
                                 {"alpha", opt.alpha},      {"threads", threads},
                                 {"out_dir", opt.out_dir}};

  const auto rows = medmod::run_study(grid, cfg, seed, threads);
  manifest.finished = iso_utc_now();

  std::filesystem::create_directories(opt.out_dir);
  const auto dir = std::filesystem::path(opt.out_dir);
  write_text_file((dir / "conjunctive.csv").string(), study_csv(rows, true));
  write_text_file((dir / "primary.csv").string(), study_csv(rows, false));
  write_text_file((dir / "manifest.json").string(), manifest.to_json().dump(2) + "\n");
  std::cerr << "wrote " << rows.size() << " condition rows to " << opt.out_dir << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------
// analyze
// ---------------------------------------------------------------------------

struct AnalyzeOptions {
  std::string csv_path;
  std::string procedure = "tree";
  std::string x = "x", y = "y", z = "z", w = "w", m = "m";
  double alpha = 0.05;
  bool no_center = false;
  bool skip_bk_step1 = false;
  std::string out_path;  // empty: stdout
};

void require_columns(const medmod::DataTable& data, const std::vector<std::string>& names) {
  for (const auto& name : names) {
    if (!data.has(name)) throw UsageError("column not found in CSV: " + name);
  }
}

int run_analyze(const AnalyzeOptions& opt) {
  medmod::DataTable data;
  try {
    data = medmod::read_csv_file(opt.csv_path);
  } catch (const medmod::InvalidDataError& e) {
    throw UsageError(e.what());
  }

  medmod::InferenceConfig cfg;
  cfg.alpha = opt.alpha;
  cfg.center_first = !opt.no_center;
  cfg.skip_bk_step1 = opt.skip_bk_step1;
  if (!(cfg.alpha > 0.0 && cfg.alpha < 1.0)) throw UsageError("alpha must lie in (0,1)");

  ordered_json report{{"schema", "medmod/1"},
                      {"kind", "analyze"},
                      {"version", medmod::kVersion},
                      {"procedure", opt.procedure}};
  ordered_json config{{"alpha", cfg.alpha},
                      {"center_first", cfg.center_first},
                      {"skip_bk_step1", cfg.skip_bk_step1},
                      {"columns",
                       ordered_json{{"x", opt.x}, {"y", opt.y}, {"z", opt.z},
                                    {"w", opt.w}, {"m", opt.m}}}};
  report["config"] = config;
  report["input"] = ordered_json{{"path", opt.csv_path},
                                 {"fnv1a64", hex64(fnv1a64_file(opt.csv_path))},
                                 {"rows", data.rows()}};

  Manifest manifest;
  manifest.subcommand = "analyze";
  manifest.master_seed = 0;
  manifest.started = iso_utc_now();
  manifest.config = config;
  manifest.config["procedure"] = opt.procedure;
  manifest.config["csv"] = opt.csv_path;
  manifest.input_digests.emplace_back(opt.csv_path, hex64(fnv1a64_file(opt.csv_path)));

  if (opt.procedure == "tree") {
    require_columns(data, {opt.x, opt.y, opt.z, opt.w});
    const auto trace = medmod::assess_mediated_moderation(data, opt.x, opt.y, opt.z, opt.w, cfg);
    report["equations"] = ordered_json{{"eq4", fit_to_json(trace.eq4)},
                                       {"eq7", fit_to_json(trace.eq7)},
                                       {"eq8", fit_to_json(trace.eq8)}};
    report["steps"] = ordered_json{{"p", trace.step_p}, {"yes", trace.step_yes}};
    report["conclusion"] = medmod::to_string(trace.conclusion);
  } else if (opt.procedure == "mediation") {
    require_columns(data, {opt.x, opt.y, opt.m});
    const auto res = medmod::assess_mediation(data, opt.x, opt.y, opt.m, cfg);
    report["equations"] = ordered_json{{"eq1", fit_to_json(res.eq1)},
                                       {"eq2", fit_to_json(res.eq2)},
                                       {"eq3", fit_to_json(res.eq3)}};
    report["conditions_met"] = res.conditions_met;
    const char* names[] = {"NoMediation", "PartialMediation", "CompleteMediation"};
    report["conclusion"] = names[static_cast<int>(res.conclusion)];
  } else if (opt.procedure == "moderation") {
    require_columns(data, {opt.x, opt.y, opt.z});
    const auto res = medmod::assess_moderation(data, opt.x, opt.y, opt.z, cfg);
    report["equations"] = ordered_json{{"eq4", fit_to_json(res.eq4)}};
    report["p_zx"] = res.p_zx;
    report["conclusion"] = res.moderated ? "Moderation" : "NoModeration";
  } else if (opt.procedure == "current-memo") {
    require_columns(data, {opt.x, opt.y, opt.z, opt.m});
    const auto res = medmod::assess_current_memo(data, opt.x, opt.y, opt.z, opt.m, cfg);
    report["equations"] = ordered_json{{"eq4", fit_to_json(res.eq4)},
                                       {"eq5", fit_to_json(res.eq5)},
                                       {"eq6", fit_to_json(res.eq6)}};
    report["b_zx"] = ordered_json{{"eq4", res.b4zx}, {"eq5", res.b5zx}, {"eq6", res.b6zx}};
    report["conclusion"] = res.inferred ? "MediatedModerationInferred" : "NotInferred";
  } else {
    throw UsageError("unknown procedure: " + opt.procedure);
  }
  manifest.finished = iso_utc_now();

  const std::string payload = report.dump(2) + "\n";
  if (opt.out_path.empty()) {
    std::cout << payload;
  } else {
    write_text_file(opt.out_path, payload);
    write_text_file(opt.out_path + ".manifest.json", manifest.to_json().dump(2) + "\n");
    std::cerr << "wrote " << opt.out_path << "\n";
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------
// predict
// ---------------------------------------------------------------------------

int run_predict(const medmod::SpuriousSlopeInput& input) {
  double slope = 0;
  try {
    slope = medmod::predict_spurious_slope(input);
  } catch (const medmod::Error& e) {
    throw UsageError(e.what());
  }
  std::cout << medmod::format_fixed(slope, 12) << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------
// semfit
// ---------------------------------------------------------------------------

struct SemfitOptions {
  std::string data_path;
  std::string cov_path;
  long n = 0;
  std::string model = "both";
  std::string x = "x", z = "z", w = "w", y = "y";
  std::string out_path;
};

int run_semfit(const SemfitOptions& opt) {
  if (opt.data_path.empty() == opt.cov_path.empty()) {
    throw UsageError("provide exactly one of --data or --cov");
  }

  Eigen::MatrixXd S;
  long n = 0;
  std::string input_path;
  if (!opt.data_path.empty()) {
    input_path = opt.data_path;
    medmod::DataTable data;
    try {
      data = medmod::read_csv_file(opt.data_path);
    } catch (const medmod::InvalidDataError& e) {
      throw UsageError(e.what());
    }
    for (const auto& name : {opt.x, opt.z, opt.w, opt.y}) {
      if (!data.has(name)) throw UsageError("column not found in CSV: " + name);
    }
    S = medmod::sem_covariance(data, opt.x, opt.z, opt.w, opt.y);
    n = data.rows();
  } else {
    if (opt.n <= 0) throw UsageError("--n is required (and positive) with covariance input");
    input_path = opt.cov_path;
    medmod::NamedMatrix cov;
    try {
      cov = medmod::read_covariance_csv(opt.cov_path);
    } catch (const medmod::InvalidDataError& e) {
      throw UsageError(e.what());
    }
    // reorder to the canonical (x, z, w, zx, wx, y) layout
    const std::vector<std::string> wanted = medmod::sem_variables();
    S.resize(6, 6);
    std::vector<Eigen::Index> pos;
    for (const auto& name : wanted) {
      auto it = std::find(cov.names.begin(), cov.names.end(), name);
      if (it == cov.names.end()) {
        throw UsageError("covariance input must name variable '" + name + "'");
      }
      pos.push_back(static_cast<Eigen::Index>(it - cov.names.begin()));
    }
    for (std::size_t i = 0; i < wanted.size(); ++i) {
      for (std::size_t j = 0; j < wanted.size(); ++j) {
        S(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
            cov.values(pos[i], pos[j]);
      }
    }
    n = opt.n;
  }

  std::vector<std::pair<std::string, medmod::PathModel>> models;
  if (opt.model == "memo" || opt.model == "both") {
    models.emplace_back("mediated_moderation", medmod::mediated_moderation_model());
  }
  if (opt.model == "bk" || opt.model == "both") {
    models.emplace_back("baron_kenny", medmod::baron_kenny_model());
  }
  if (models.empty()) throw UsageError("unknown --model: " + opt.model);

  Manifest manifest;
  manifest.subcommand = "semfit";
  manifest.master_seed = 0;
  manifest.started = iso_utc_now();
  manifest.config = ordered_json{{"model", opt.model}, {"n", n}, {"input", input_path}};
  manifest.input_digests.emplace_back(input_path, hex64(fnv1a64_file(input_path)));

  ordered_json report{{"schema", "medmod/1"},
                      {"kind", "semfit"},
                      {"version", medmod::kVersion},
                      {"n", n}};
  ordered_json fits = ordered_json::array();

  bool all_converged = true;
  std::printf("%-22s %10s %4s %8s %8s %8s\n", "model", "chi2", "df", "p", "AGFI", "TLI");
  for (const auto& [name, model] : models) {
    const medmod::SemFit fit = medmod::fit_ml(model, S, n);
    all_converged = all_converged && fit.converged;
    fits.push_back(semfit_to_json(name, fit));
    std::printf("%-22s %10.3f %4ld %8.3f %8.3f %8.3f%s\n", name.c_str(), fit.chi2, fit.df,
                fit.p, fit.agfi, fit.tli, fit.converged ? "" : "  [not converged]");
  }
  report["fits"] = fits;
  report["input"] = ordered_json{{"path", input_path},
                                 {"fnv1a64", hex64(fnv1a64_file(input_path))}};
  manifest.finished = iso_utc_now();

  if (!opt.out_path.empty()) {
    write_text_file(opt.out_path, report.dump(2) + "\n");
    write_text_file(opt.out_path + ".manifest.json", manifest.to_json().dump(2) + "\n");
    std::cerr << "wrote " << opt.out_path << "\n";
  }
  if (!all_converged) {
    std::cerr << "warning: at least one fit did not converge\n";
    return kExitRuntime;
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"moderation/mediation inference, simulation, and path-model comparison"};
  app.require_subcommand(1);

  SimulateOptions sim;
  std::optional<std::uint64_t> sim_seed;
  auto* simulate = app.add_subcommand("simulate", "run the Monte Carlo study grid");
  simulate->add_option("--n", sim.sample_sizes, "sample sizes (repeatable)")
      ->default_val(std::vector<long>{100, 250});
  simulate->add_option("--beta-wx", sim.beta_wx, "true interaction effects (repeatable)")
      ->default_val(std::vector<double>{-0.4, -0.2, 0.0, 0.2, 0.4});
  simulate->add_option("--rho-zw", sim.rho_zw, "z-w correlations (repeatable)")
      ->default_val(std::vector<double>{0.0, 0.3, 0.6});
  simulate->add_option("--nrun", sim.nrun, "replications per condition");
  simulate->add_option("--seed", sim_seed, "master seed (fallback: MEDMOD_SEED)");
  simulate->add_option("--alpha", sim.alpha, "significance level");
  simulate->add_option("--out-dir", sim.out_dir, "output directory");
  simulate->add_option("--threads", sim.threads, "worker threads (0 = hardware)");

  AnalyzeOptions ana;
  auto* analyze = app.add_subcommand("analyze", "run an inference procedure on CSV data");
  analyze->add_option("csv", ana.csv_path, "input CSV file")->required();
  analyze->add_option("--procedure", ana.procedure,
                      "tree | mediation | moderation | current-memo");
  analyze->add_option("--x", ana.x, "independent variable column");
  analyze->add_option("--y", ana.y, "dependent variable column");
  analyze->add_option("--z", ana.z, "proposed moderator column");
  analyze->add_option("--w", ana.w, "true moderator column");
  analyze->add_option("--m", ana.m, "mediator column");
  analyze->add_option("--alpha", ana.alpha, "significance level");
  analyze->add_flag("--no-center", ana.no_center, "skip mean centering");
  analyze->add_flag("--skip-bk-step1", ana.skip_bk_step1,
                    "drop condition 1 from the mediation verdict");
  analyze->add_option("--out", ana.out_path, "write the JSON report here (default stdout)");

  medmod::SpuriousSlopeInput pin;
  auto* predict = app.add_subcommand("predict", "closed-form spurious moderation slope");
  predict->add_option("--beta-wx", pin.beta_wx, "true moderation effect of w")->required();
  predict->add_option("--sigma-w", pin.sigma_w, "sd of w");
  predict->add_option("--sigma-z", pin.sigma_z, "sd of z");
  predict->add_option("--rho-zw", pin.rho_zw, "corr(z,w)")->required();
  predict->add_option("--rho-wx", pin.rho_wx, "corr(w,x)")->required();
  predict->add_option("--rho-zx", pin.rho_zx, "corr(z,x)")->required();

  SemfitOptions sem;
  auto* semfit = app.add_subcommand("semfit", "fit the competing path models");
  semfit->add_option("--data", sem.data_path, "raw data CSV (columns x,z,w,y)");
  semfit->add_option("--cov", sem.cov_path, "covariance CSV over x,z,w,zx,wx,y");
  semfit->add_option("--n", sem.n, "sample size (required with --cov)");
  semfit->add_option("--model", sem.model, "bk | memo | both");
  semfit->add_option("--x", sem.x, "x column name");
  semfit->add_option("--z", sem.z, "z column name");
  semfit->add_option("--w", sem.w, "w column name");
  semfit->add_option("--y", sem.y, "y column name");
  semfit->add_option("--out", sem.out_path, "write the JSON report here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }

  try {
    if (simulate->parsed()) {
      sim.seed = sim_seed;
      return run_simulate(sim);
    }
    if (analyze->parsed()) return run_analyze(ana);
    if (predict->parsed()) return run_predict(pin);
    if (semfit->parsed()) return run_semfit(sem);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitUsage;
}
