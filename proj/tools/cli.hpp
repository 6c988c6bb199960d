#pragma once

// Command-line front end: fit, tune, simulate, evaluate and experiment.
// Matrices travel as CSV, reports as JSON (see json_out.hpp).
//
// Exit codes: 0 success, 2 usage or validation error, 3 non-convergence
// under --strict.

#include <algorithm>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cscs/cscs.hpp"
#include "json_out.hpp"

namespace cscs::cli {

inline constexpr const char* kSchema = "cscs-report/1";

enum ExitCode : int { kOk = 0, kUsage = 2, kNotConverged = 3 };

namespace detail {

struct Common {
  std::string method = "cscs";
  double epsilon = 1e-8;
  int max_iter = 1000;
  bool center = false;
  bool scale = false;
  std::size_t threads = 1;
  std::string report;
  bool strict = false;
};

struct InputSpec {
  std::string path;
  bool covariance = false;
  Index samples = 0;  // only meaningful with a covariance input
};

inline void add_common(CLI::App* cmd, Common& c, bool with_method = true) {
  if (with_method)
    cmd->add_option("--method", c.method, "cscs | sparse-cholesky | sparse-dag")
        ->check(CLI::IsMember({"cscs", "sparse-cholesky", "sparse-dag"}));
  cmd->add_option("--epsilon", c.epsilon, "convergence tolerance on the max-norm iterate change")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--max-iter", c.max_iter, "sweep cap per row")->check(CLI::PositiveNumber);
  cmd->add_flag("--center", c.center, "center data columns");
  cmd->add_flag("--scale", c.scale, "scale data columns to unit variance");
  cmd->add_option("--threads", c.threads, "worker cap for row-parallel fits (0 = all cores)");
  cmd->add_option("--report", c.report, "report path (default: stdout)");
}

inline void add_input(CLI::App* cmd, InputSpec& in) {
  cmd->add_option("--input", in.path, "CSV: n x p data, or p x p covariance with --covariance")->required();
  cmd->add_flag("--covariance", in.covariance, "input is a covariance matrix");
  cmd->add_option("--n", in.samples, "sample size behind a covariance input")->check(CLI::PositiveNumber);
}

inline Method method_of(const Common& c) {
  const auto m = parse_method(c.method);
  if (!m) throw Error(ErrorCode::InvalidConfig, "unknown method " + c.method);
  return *m;
}

inline SolverConfig solver_of(const Common& c) {
  SolverConfig cfg;
  cfg.epsilon = c.epsilon;
  cfg.max_iterations = c.max_iter;
  return cfg;
}

inline EstimateOptions estimate_options(const Common& c) {
  EstimateOptions o;
  o.parallel = c.threads != 1;
  o.threads = c.threads;
  return o;
}

struct Loaded {
  std::optional<DataMatrix> data;
  CovarianceMatrix cov;
  std::optional<Index> samples;
};

inline Loaded load(const InputSpec& in, const Common& c) {
  MatrixXd m = read_csv_matrix(in.path);
  if (in.covariance) {
    if (c.center || c.scale) throw Error(ErrorCode::InvalidConfig, "--center/--scale need a data input");
    std::optional<Index> n;
    if (in.samples > 0) n = in.samples;
    CovarianceMatrix cov(std::move(m), n);
    return {std::nullopt, std::move(cov), n};
  }
  DataMatrix data(std::move(m));
  CovarianceMatrix cov = sample_covariance(data, {c.center, c.scale, false});
  const Index n = data.samples();
  return {std::move(data), std::move(cov), n};
}

inline void require_distinct(const std::vector<std::string>& paths) {
  std::vector<std::string> used;
  for (const auto& p : paths) {
    if (p.empty() || p == "-") continue;
    if (std::find(used.begin(), used.end(), p) != used.end())
      throw Error(ErrorCode::InvalidConfig, "input and output paths must be distinct: " + p);
    used.push_back(p);
  }
}

inline Json array_of(const std::vector<double>& v) {
  Json a = Json::array();
  for (double x : v) a.push_back(x);
  return a;
}

inline Json array_of(const VectorXd& v) {
  Json a = Json::array();
  for (Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

inline Json header(const std::string& command) {
  Json j;
  j["schema"] = kSchema;
  j["command"] = command;
  return j;
}

inline void emit(const Json& report, const std::string& path, std::ostream& out) {
  const std::string text = to_json_text(report);
  if (path.empty() || path == "-") {
    out << text;
    return;
  }
  std::ofstream f(path);
  if (!f) throw Error(ErrorCode::InvalidConfig, "cannot write " + path);
  f << text;
}

inline std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(cell, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != cell.size()) throw Error(ErrorCode::InvalidConfig, "cannot parse grid value '" + cell + "'");
    out.push_back(v);
  }
  if (out.empty()) throw Error(ErrorCode::InvalidConfig, "empty grid");
  return out;
}

// ---------------------------------------------------------------------------

struct FitArgs {
  Common common;
  InputSpec input;
  std::optional<double> lambda;
  std::optional<double> alpha;
  std::string output;
};

inline int cmd_fit(const FitArgs& a, std::ostream& out, std::ostream& err) {
  if (a.lambda.has_value() == a.alpha.has_value())
    throw Error(ErrorCode::InvalidConfig, "give exactly one of --lambda or --quantile");
  require_distinct({a.input.path, a.output, a.common.report});
  const Method method = method_of(a.common);
  const Loaded in = load(a.input, a.common);
  const Index p = in.cov.dim();

  Json penalty;
  PenaltySpec pen = PenaltySpec::uniform(0.0);
  if (a.lambda) {
    pen = PenaltySpec::uniform(*a.lambda);
    penalty["mode"] = "scalar";
    penalty["lambda"] = *a.lambda;
  } else {
    if (!in.samples) throw Error(ErrorCode::InvalidConfig, "--quantile needs the sample size (--n)");
    pen = quantile_penalty(*in.samples, p, *a.alpha);
    penalty["mode"] = "quantile";
    penalty["alpha"] = *a.alpha;
    penalty["values"] = array_of(pen.values());
  }
  pen.check_dimension(p);

  const SolverConfig cfg = solver_of(a.common);
  const EstimateOptions eo = estimate_options(a.common);
  Json report = header("fit");
  report["method"] = method_name(method);
  report["penalty"] = penalty;
  report["dim"] = p;
  if (in.samples) report["samples"] = *in.samples;

  Json rows = Json::array();
  MatrixXd written;
  bool converged = true;
  switch (method) {
    case Method::Cscs: {
      FitOptions fo;
      fo.parallel = eo.parallel;
      fo.threads = eo.threads;
      const FitResult fit = fit_cscs(in.cov, pen, cfg, fo);
      for (std::size_t i = 0; i < fit.rows.size(); ++i)
        rows.push_back({{"row", i},
                        {"iterations", fit.rows[i].iterations},
                        {"converged", fit.rows[i].converged},
                        {"kkt_residual", fit.rows[i].kkt_residual},
                        {"low_rank", fit.rows[i].low_rank}});
      report["objective"] = fit.objective;
      report["converged"] = fit.converged;
      report["nonzeros"] = fit.factor.strict_lower_nonzeros();
      report["wall_time_seconds"] = fit.wall_time_seconds;
      converged = fit.converged;
      written = fit.factor.to_dense();
      report["output"] = "L";
      break;
    }
    case Method::SparseCholesky: {
      SparseCholOptions so;
      so.parallel = eo.parallel;
      so.threads = eo.threads;
      const SparseCholResult fit = fit_sparse_cholesky(in.cov, pen, cfg, so);
      for (std::size_t i = 0; i < fit.rows.size(); ++i)
        rows.push_back({{"row", i},
                        {"iterations", fit.rows[i].iterations},
                        {"converged", fit.rows[i].converged},
                        {"degenerate", fit.rows[i].degenerate},
                        {"min_raw_d", fit.rows[i].min_raw_d}});
      report["objective"] = fit.objective;
      report["converged"] = fit.converged;
      report["degenerate"] = fit.degenerate;
      report["degenerate_row"] = fit.degenerate_row ? Json(*fit.degenerate_row) : Json(nullptr);
      report["d"] = array_of(fit.params.d());
      report["nonzeros"] = static_cast<Index>(support(fit.params.t(), 0.0).size());
      report["wall_time_seconds"] = fit.wall_time_seconds;
      converged = fit.converged || fit.degenerate;
      written = fit.params.t();
      report["output"] = "T";
      break;
    }
    case Method::SparseDag: {
      const SparseDagResult fit = fit_sparse_dag(in.cov, pen, cfg, {eo.parallel, eo.threads});
      for (std::size_t i = 0; i < fit.rows.size(); ++i)
        rows.push_back({{"row", i},
                        {"iterations", fit.rows[i].iterations},
                        {"converged", fit.rows[i].converged},
                        {"kkt_residual", fit.rows[i].kkt_residual}});
      report["objective"] = fit.objective;
      report["converged"] = fit.converged;
      report["nonzeros"] = static_cast<Index>(support(fit.t, 0.0).size());
      report["wall_time_seconds"] = fit.wall_time_seconds;
      converged = fit.converged;
      written = fit.t;
      report["output"] = "T";
      break;
    }
  }
  report["rows"] = rows;
  if (!a.output.empty()) write_csv_matrix(a.output, written);
  emit(report, a.common.report, out);
  if (a.common.strict && !converged) {
    err << "error: NotConverged: at least one row hit the iteration cap\n";
    return kNotConverged;
  }
  return kOk;
}

// ---------------------------------------------------------------------------

struct TuneArgs {
  Common common;
  InputSpec input;
  std::string criterion;
  std::string grid;
  int grid_count = 10;
  int folds = 5;
  std::optional<std::uint64_t> seed;
  double alpha = 0.1;
};

inline int cmd_tune(const TuneArgs& a, std::ostream& out, std::ostream&) {
  require_distinct({a.input.path, a.common.report});
  const Method method = method_of(a.common);
  const Loaded in = load(a.input, a.common);
  const SolverConfig cfg = solver_of(a.common);
  const EstimateOptions eo = estimate_options(a.common);
  Json report = header("tune");
  report["criterion"] = a.criterion;

  if (a.criterion == "quantile") {
    if (!in.samples) throw Error(ErrorCode::InvalidConfig, "quantile tuning needs the sample size (--n)");
    const TuningReport t = tune_quantile(*in.samples, in.cov.dim(), a.alpha);
    report["alpha"] = a.alpha;
    report["samples"] = *in.samples;
    report["dim"] = in.cov.dim();
    report["selected"] = array_of(t.selected.values());
    emit(report, a.common.report, out);
    return kOk;
  }

  const std::vector<double> grid =
      a.grid.empty() ? default_grid(in.cov, a.grid_count, method, cfg, eo) : parse_list(a.grid);
  report["method"] = method_name(method);

  TuningReport t;
  if (a.criterion == "bic") {
    if (!in.samples) throw Error(ErrorCode::InvalidConfig, "BIC needs the sample size (--n)");
    t = tune_bic(in.cov, *in.samples, grid, method, cfg, eo);
  } else {
    if (!in.data) throw Error(ErrorCode::InvalidConfig, "cross-validation needs raw data, not a covariance");
    if (!a.seed) throw Error(ErrorCode::InvalidConfig, "cross-validation needs --seed");
    if (a.common.scale) throw Error(ErrorCode::InvalidConfig, "--scale is not supported with cross-validation");
    CvOptions co;
    co.center = a.common.center;
    co.estimate = eo;
    t = tune_cv(*in.data, grid, method, a.folds, *a.seed, cfg, co);
    report["folds"] = a.folds;
    report["seed"] = *a.seed;
    Json per_fold = Json::array();
    for (const auto& f : t.fold_scores) per_fold.push_back(array_of(f));
    report["fold_scores"] = per_fold;
  }
  report["grid"] = array_of(t.grid);
  report["scores"] = array_of(t.scores);
  report["selected_index"] = t.selected_index;
  report["selected"] = t.selected.scalar();
  emit(report, a.common.report, out);
  return kOk;
}

// ---------------------------------------------------------------------------

struct SimulateArgs {
  Index dim = 0;
  Index samples = 0;
  double zero_fraction = 0.98;
  std::uint64_t seed = 0;
  std::string output;
  std::string precision_output;
  std::string t_output;
  std::string report;
};

inline int cmd_simulate(const SimulateArgs& a, std::ostream& out, std::ostream&) {
  require_distinct({a.output, a.precision_output, a.t_output, a.report});
  ModelConfig mc;
  mc.dim = a.dim;
  mc.zero_fraction = a.zero_fraction;
  const GroundTruthModel model = generate_model(mc, derive_seed(a.seed, 0));
  const DataMatrix data = sample_gaussian(model, a.samples, derive_seed(a.seed, 1));
  write_csv_matrix(a.output, data.values());
  if (!a.precision_output.empty()) write_csv_matrix(a.precision_output, model.precision);
  if (!a.t_output.empty()) write_csv_matrix(a.t_output, model.params.t());

  Json report = header("simulate");
  report["dim"] = a.dim;
  report["samples"] = a.samples;
  report["zero_fraction"] = a.zero_fraction;
  report["seed"] = a.seed;
  Json edges = Json::array();
  for (const Edge& e : model.edges) edges.push_back({e.first, e.second});
  report["edges"] = edges;
  report["d"] = array_of(model.params.d());
  emit(report, a.report, out);
  return kOk;
}

// ---------------------------------------------------------------------------

struct EvaluateArgs {
  std::string factor;
  std::string truth_precision;
  std::string truth_t;
  std::string test;
  Index forecast_split = 0;
  std::string report;
};

inline int cmd_evaluate(const EvaluateArgs& a, std::ostream& out, std::ostream&) {
  const MatrixXd dense = read_csv_matrix(a.factor);
  if (dense.rows() != dense.cols()) throw Error(ErrorCode::DimensionMismatch, "factor must be square");
  const CholeskyFactor factor = CholeskyFactor::from_dense(dense);
  const Index p = factor.dim();
  const MatrixXd omega = precision_from_factor(factor);

  Json report = header("evaluate");
  report["dim"] = p;
  report["nonzeros"] = factor.strict_lower_nonzeros();
  if (!a.truth_precision.empty()) report["frobenius_error"] = frobenius_error(read_csv_matrix(a.truth_precision), omega);
  if (!a.truth_t.empty()) {
    const MatrixXd t = read_csv_matrix(a.truth_t);
    if (t.rows() != p || t.cols() != p) throw Error(ErrorCode::DimensionMismatch, "truth T has the wrong shape");
    const RocPoint r = selection_rates(support(factor), support(t, 0.0), p);
    report["tpr"] = r.tpr;
    report["fpr"] = r.fpr;
  }
  if (!a.test.empty()) {
    const DataMatrix test(read_csv_matrix(a.test));
    const VectorXd mean = VectorXd::Zero(p);
    report["loglik"] = gaussian_loglik(test, mean, factor);
    if (a.forecast_split > 0) {
      const Index s = a.forecast_split;
      if (s >= p) throw Error(ErrorCode::DimensionMismatch, "forecast split must be below p");
      const MatrixXd sigma = omega.inverse();
      MatrixXd pred(test.samples(), p - s);
      for (Index r = 0; r < test.samples(); ++r)
        pred.row(r) = conditional_forecast(mean, sigma, s, test.values().row(r).head(s).transpose()).transpose();
      report["forecast_split"] = s;
      report["forecast_error"] = array_of(forecast_error(pred, test.values().rightCols(p - s)));
    }
  }
  emit(report, a.report, out);
  return kOk;
}

// ---------------------------------------------------------------------------

struct ExperimentArgs {
  std::string name;
  Index dim = 0;
  Index samples = 0;
  int seeds = 20;
  int reps = 20;
  std::uint64_t seed = 1;
  double lambda = 0.1;
  int grid_count = 0;
  double zero_fraction = -1.0;
  double fpr_lo = 0.01;
  double fpr_hi = 0.15;
  double epsilon = 0.0;
  std::size_t threads = 1;
  std::string report;
};

inline Json experiment_degeneracy(const ExperimentArgs& a) {
  DegeneracyConfig cfg;
  if (a.dim) cfg.dim = a.dim;
  if (a.samples) cfg.samples = a.samples;
  if (a.zero_fraction >= 0.0) cfg.zero_fraction = a.zero_fraction;
  if (a.epsilon > 0.0) cfg.solver.epsilon = a.epsilon;
  cfg.seeds = a.seeds;
  cfg.seed = a.seed;
  cfg.lambda = a.lambda;
  const DegeneracyReport r = run_degeneracy(cfg);
  Json j;
  j["dim"] = cfg.dim;
  j["samples"] = cfg.samples;
  j["seeds"] = cfg.seeds;
  j["lambda"] = cfg.lambda;
  j["zero_fraction"] = cfg.zero_fraction;
  j["d_floor"] = cfg.sparse_cholesky.d_floor;
  j["degenerate_runs"] = r.degenerate_runs();
  j["smallest_raw_d"] = r.smallest_raw_d();
  j["smallest_cscs_diagonal"] = r.smallest_cscs_diagonal();
  Json runs = Json::array();
  for (const DegeneracyRun& run : r.runs)
    runs.push_back({{"seed", run.seed},
                    {"degenerate", run.degenerate},
                    {"degenerate_row", run.degenerate_row ? Json(*run.degenerate_row) : Json(nullptr)},
                    {"min_raw_d", run.min_raw_d},
                    {"cscs_min_diagonal", run.cscs_min_diagonal},
                    {"min_d_trace", array_of(run.min_d_trace)}});
  j["runs"] = runs;
  return j;
}

inline Json experiment_roc_auc(const ExperimentArgs& a) {
  RocAucConfig cfg;
  if (a.dim) cfg.dim = a.dim;
  if (a.samples) cfg.samples = a.samples;
  if (a.zero_fraction >= 0.0) cfg.zero_fraction = a.zero_fraction;
  if (a.grid_count) cfg.grid_count = a.grid_count;
  if (a.epsilon > 0.0) cfg.solver.epsilon = a.epsilon;
  cfg.replications = a.reps;
  cfg.seed = a.seed;
  cfg.fpr_lo = a.fpr_lo;
  cfg.fpr_hi = a.fpr_hi;
  cfg.estimate.parallel = a.threads != 1;
  cfg.estimate.threads = a.threads;
  const RocAucReport r = run_roc_auc(cfg);
  Json j;
  j["dim"] = cfg.dim;
  j["samples"] = cfg.samples;
  j["replications"] = cfg.replications;
  j["zero_fraction"] = cfg.zero_fraction;
  j["true_edges"] = r.true_edges;
  j["grid_count"] = cfg.grid_count;
  j["fpr_window"] = {cfg.fpr_lo, cfg.fpr_hi};
  Json methods = Json::array();
  for (const MethodAuc& m : r.methods)
    methods.push_back({{"method", method_name(m.method)}, {"mean", m.mean}, {"std", m.stddev}, {"auc", array_of(m.auc)}});
  j["methods"] = methods;
  const PairedComparison cmp = sign_test(r.of(Method::Cscs).auc, r.of(Method::SparseCholesky).auc);
  j["sign_test"] = {{"first", "cscs"},
                    {"second", "sparse-cholesky"},
                    {"wins", cmp.wins},
                    {"losses", cmp.losses},
                    {"ties", cmp.ties},
                    {"p_value", cmp.pvalue}};
  return j;
}

inline Json experiment_frobenius(const ExperimentArgs& a) {
  FrobeniusConfig cfg;
  if (a.dim) cfg.dim = a.dim;
  if (a.samples) cfg.samples = a.samples;
  if (a.zero_fraction >= 0.0) cfg.zero_fraction = a.zero_fraction;
  if (a.grid_count) cfg.grid_count = a.grid_count;
  if (a.epsilon > 0.0) cfg.solver.epsilon = a.epsilon;
  cfg.replications = a.reps;
  cfg.seed = a.seed;
  cfg.estimate.parallel = a.threads != 1;
  cfg.estimate.threads = a.threads;
  const FrobeniusReport r = run_frobenius_path(cfg);
  Json j;
  j["dim"] = cfg.dim;
  j["samples"] = cfg.samples;
  j["replications"] = cfg.replications;
  j["zero_fraction"] = cfg.zero_fraction;
  j["grid_count"] = cfg.grid_count;
  Json methods = Json::array();
  for (const MethodFrobenius& m : r.methods)
    methods.push_back({{"method", method_name(m.method)},
                       {"grid", array_of(m.grid)},
                       {"mean_error", array_of(m.mean_error)},
                       {"min_mean_error", m.min_mean_error},
                       {"argmin_lambda", m.argmin_lambda}});
  j["methods"] = methods;
  return j;
}

inline int cmd_experiment(const ExperimentArgs& a, std::ostream& out, std::ostream&) {
  Json report = header("experiment");
  report["experiment"] = a.name;
  report["seed"] = a.seed;
  Json body;
  if (a.name == "degeneracy") body = experiment_degeneracy(a);
  else if (a.name == "roc-auc") body = experiment_roc_auc(a);
  else if (a.name == "frobenius-path") body = experiment_frobenius(a);
  else throw Error(ErrorCode::InvalidConfig, "unknown experiment " + a.name);
  for (auto it = body.begin(); it != body.end(); ++it) report[it.key()] = it.value();
  emit(report, a.report, out);
  return kOk;
}

}  // namespace detail

/// Runs one command. `args` excludes the program name.
inline int run(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
  using namespace detail;
  CLI::App app{"Sparse Cholesky-factor estimation of precision matrices", "cscs"};
  app.require_subcommand(1);

  FitArgs fit;
  CLI::App* fit_cmd = app.add_subcommand("fit", "estimate a factor for one penalty");
  add_input(fit_cmd, fit.input);
  add_common(fit_cmd, fit.common);
  fit_cmd->add_option("--lambda", fit.lambda, "uniform penalty")->check(CLI::NonNegativeNumber);
  fit_cmd->add_option("--quantile", fit.alpha, "per-row normal-quantile penalty at level alpha")
      ->check(CLI::Range(0.0, 1.0));
  fit_cmd->add_option("--output", fit.output, "CSV for the estimated L (cscs) or T (baselines)");
  fit_cmd->add_flag("--strict", fit.common.strict, "exit 3 when a row does not converge");

  TuneArgs tune;
  CLI::App* tune_cmd = app.add_subcommand("tune", "select a penalty");
  add_input(tune_cmd, tune.input);
  add_common(tune_cmd, tune.common);
  tune_cmd->add_option("--criterion", tune.criterion, "bic | cv | quantile")
      ->required()
      ->check(CLI::IsMember({"bic", "cv", "quantile"}));
  tune_cmd->add_option("--grid", tune.grid, "comma-separated penalties (default: log grid)");
  tune_cmd->add_option("--grid-count", tune.grid_count, "size of the default grid")->check(CLI::Range(2, 10000));
  tune_cmd->add_option("--k", tune.folds, "cross-validation folds")->check(CLI::Range(2, 1000000));
  tune_cmd->add_option("--seed", tune.seed, "fold assignment seed");
  tune_cmd->add_option("--alpha", tune.alpha, "quantile level")->check(CLI::Range(0.0, 1.0));

  SimulateArgs sim;
  CLI::App* sim_cmd = app.add_subcommand("simulate", "draw a sparse DAG model and Gaussian data");
  sim_cmd->add_option("--p", sim.dim, "dimension")->required()->check(CLI::Range(2, 1000000));
  sim_cmd->add_option("--n", sim.samples, "sample count")->required()->check(CLI::PositiveNumber);
  sim_cmd->add_option("--zero-fraction", sim.zero_fraction, "fraction of zero strict-lower entries of T")
      ->check(CLI::Range(0.0, 1.0));
  sim_cmd->add_option("--seed", sim.seed, "random seed")->required();
  sim_cmd->add_option("--output", sim.output, "data CSV")->required();
  sim_cmd->add_option("--precision-output", sim.precision_output, "CSV for the true precision matrix");
  sim_cmd->add_option("--t-output", sim.t_output, "CSV for the true T");
  sim_cmd->add_option("--report", sim.report, "report path (default: stdout)");

  EvaluateArgs ev;
  CLI::App* ev_cmd = app.add_subcommand("evaluate", "score an estimated factor");
  ev_cmd->add_option("--factor", ev.factor, "CSV of the estimated lower-triangular L")->required();
  ev_cmd->add_option("--truth-precision", ev.truth_precision, "CSV of the true precision matrix");
  ev_cmd->add_option("--truth-t", ev.truth_t, "CSV of the true T (edge pattern)");
  ev_cmd->add_option("--test", ev.test, "CSV of zero-mean test data");
  ev_cmd->add_option("--forecast-split", ev.forecast_split, "forecast coordinates after the first s")
      ->check(CLI::PositiveNumber);
  ev_cmd->add_option("--report", ev.report, "report path (default: stdout)");

  ExperimentArgs ex;
  CLI::App* ex_cmd = app.add_subcommand("experiment", "reproduce a simulation protocol");
  ex_cmd->add_option("name", ex.name, "degeneracy | roc-auc | frobenius-path")->required();
  ex_cmd->add_option("--p", ex.dim, "dimension")->check(CLI::Range(2, 1000000));
  ex_cmd->add_option("--n", ex.samples, "samples per dataset")->check(CLI::PositiveNumber);
  ex_cmd->add_option("--seeds", ex.seeds, "datasets (degeneracy)")->check(CLI::PositiveNumber);
  ex_cmd->add_option("--reps", ex.reps, "replications (roc-auc, frobenius-path)")->check(CLI::PositiveNumber);
  ex_cmd->add_option("--seed", ex.seed, "base seed");
  ex_cmd->add_option("--lambda", ex.lambda, "penalty (degeneracy)")->check(CLI::NonNegativeNumber);
  ex_cmd->add_option("--grid-count", ex.grid_count, "penalty grid size")->check(CLI::Range(2, 10000));
  ex_cmd->add_option("--zero-fraction", ex.zero_fraction, "fraction of zero entries in T")
      ->check(CLI::Range(0.0, 1.0));
  ex_cmd->add_option("--fpr-lo", ex.fpr_lo, "AUC window start")->check(CLI::Range(0.0, 1.0));
  ex_cmd->add_option("--fpr-hi", ex.fpr_hi, "AUC window end")->check(CLI::Range(0.0, 1.0));
  ex_cmd->add_option("--epsilon", ex.epsilon, "solver tolerance")->check(CLI::PositiveNumber);
  ex_cmd->add_option("--threads", ex.threads, "worker cap (0 = all cores)");
  ex_cmd->add_option("--report", ex.report, "report path (default: stdout)");

  try {
    std::reverse(args.begin(), args.end());
    app.parse(args);
    if (fit_cmd->parsed()) return cmd_fit(fit, out, err);
    if (tune_cmd->parsed()) return cmd_tune(tune, out, err);
    if (sim_cmd->parsed()) return cmd_simulate(sim, out, err);
    if (ev_cmd->parsed()) return cmd_evaluate(ev, out, err);
    return cmd_experiment(ex, out, err);
  } catch (const CLI::Success& e) {
    app.exit(e, out, err);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  }
}

}  // namespace cscs::cli
