#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"

#include "illposed/baselines.hpp"
#include "illposed/csv.hpp"
#include "illposed/dictionary.hpp"
#include "illposed/lasso.hpp"
#include "illposed/model_select.hpp"
#include "illposed/precondition.hpp"
#include "illposed/problem.hpp"

namespace illposed {

struct DictionarySpec {
  std::string type = "laguerre";  // laguerre | rows | cols | rademacher | structured
  std::vector<int> degrees = {0, 1, 2, 3};
  std::vector<double> scales = {0.25, 0.5,  0.75, 1.0,  1.25, 1.5,  1.75, 2.0,
                                2.25, 2.5,  2.75, 3.0,  3.25, 3.5,  3.75, 4.0};
  int p = 0;  // random families; 0 means 2n
  std::uint64_t seed = 7;
  double frame_k = 1.0;
  int frame_m = 0;  // structured; 0 means 2n

  Dictionary build(const Grid& grid) const {
    if (type == "laguerre") return build_laguerre_dictionary(grid, degrees, scales);
    const int pp = p > 0 ? p : 2 * grid.n;
    if (type == "structured") {
      const int mm = frame_m > 0 ? frame_m : 2 * grid.n;
      return build_structured_dictionary(build_tight_frame(grid.n, mm, frame_k), pp, seed);
    }
    return build_random_dictionary(random_kind_from_string(type), grid.n, pp, seed);
  }
};

struct ExperimentConfig {
  TestFunction fn = TestFunction::F1;
  int n = 32;
  double snr = 3.0;
  double T = 4.0;
  DictionarySpec dictionary;
  int N_grid = 200;
  int replications = 100;
  double tau = 1.0;
  std::uint64_t master_seed = 1;
  std::vector<std::string> estimators = {"lasso_cv", "svd_oracle", "laguerre_oracle"};
  int k_max = 20;  // baselines try K = 1..min(n, k_max)
  // Laguerre baseline scale(s); with several entries the oracle ranges over
  // them too (e.g. the {0.25, 0.5, 1, 2} bracket)
  std::vector<double> laguerre_scales = {0.5};
  std::string pilot = "ti";            // ti | plain
  std::string selection = "refit_cp";  // refit_cp | shrunk_cp
  double lasso_tol = 1e-8;
  int lasso_max_iter = 50000;
  int threads = 0;  // 0: ILLPOSED_THREADS env or 1
  std::string out_table, out_plot, out_errors;

  bool has_estimator(const std::string& name) const {
    for (const auto& e : estimators)
      if (e == name) return true;
    return false;
  }
};

inline int resolve_threads(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("ILLPOSED_THREADS")) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  return 1;
}

inline ExperimentConfig config_from_json(const nlohmann::json& j) {
  ExperimentConfig c;
  if (j.contains("fn")) c.fn = test_function_from_string(j.at("fn").get<std::string>());
  if (j.contains("n")) c.n = j.at("n").get<int>();
  if (j.contains("snr")) c.snr = j.at("snr").get<double>();
  if (j.contains("T")) c.T = j.at("T").get<double>();
  if (j.contains("N_grid")) c.N_grid = j.at("N_grid").get<int>();
  if (j.contains("replications")) c.replications = j.at("replications").get<int>();
  if (j.contains("tau")) c.tau = j.at("tau").get<double>();
  if (j.contains("master_seed")) c.master_seed = j.at("master_seed").get<std::uint64_t>();
  if (j.contains("estimators")) c.estimators = j.at("estimators").get<std::vector<std::string>>();
  if (j.contains("k_max")) c.k_max = j.at("k_max").get<int>();
  if (j.contains("laguerre_scales"))
    c.laguerre_scales = j.at("laguerre_scales").get<std::vector<double>>();
  if (j.contains("pilot")) c.pilot = j.at("pilot").get<std::string>();
  if (j.contains("selection")) c.selection = j.at("selection").get<std::string>();
  if (j.contains("lasso_tol")) c.lasso_tol = j.at("lasso_tol").get<double>();
  if (j.contains("lasso_max_iter")) c.lasso_max_iter = j.at("lasso_max_iter").get<int>();
  if (j.contains("threads")) c.threads = j.at("threads").get<int>();
  if (j.contains("out_table")) c.out_table = j.at("out_table").get<std::string>();
  if (j.contains("out_plot")) c.out_plot = j.at("out_plot").get<std::string>();
  if (j.contains("out_errors")) c.out_errors = j.at("out_errors").get<std::string>();
  if (j.contains("dictionary")) {
    const auto& d = j.at("dictionary");
    if (d.contains("type")) c.dictionary.type = d.at("type").get<std::string>();
    if (d.contains("degrees")) c.dictionary.degrees = d.at("degrees").get<std::vector<int>>();
    if (d.contains("scales")) c.dictionary.scales = d.at("scales").get<std::vector<double>>();
    if (d.contains("p")) c.dictionary.p = d.at("p").get<int>();
    if (d.contains("seed")) c.dictionary.seed = d.at("seed").get<std::uint64_t>();
    if (d.contains("frame_k")) c.dictionary.frame_k = d.at("frame_k").get<double>();
    if (d.contains("frame_m")) c.dictionary.frame_m = d.at("frame_m").get<int>();
  }
  return c;
}

inline ExperimentConfig config_from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io_error("config: cannot open '" + path + "'");
  nlohmann::json j;
  in >> j;
  return config_from_json(j);
}

struct EstimatorStats {
  std::string name;
  double mean_error = 0.0;
  double std_error = 0.0;
  int count = 0;
  int failed = 0;
  std::vector<double> errors;  // per replication; NaN marks a failure
};

struct ExperimentReport {
  ExperimentConfig config;
  std::vector<EstimatorStats> stats;
};

/// n^{-1/2}·‖f̂ - f‖₂, the error metric every table entry reports.
inline double estimation_error(const Vector& f_hat, const Vector& f_true) {
  return (f_hat - f_true).norm() / std::sqrt(static_cast<double>(f_true.size()));
}

/// Runs the Monte Carlo benchmark. Each replication draws its noise from an
/// independent substream of the master seed, so the report is a pure
/// function of the config at any thread count.
inline ExperimentReport run_experiment(const ExperimentConfig& config) {
  if (config.replications < 1) throw std::invalid_argument("run_experiment: replications >= 1");
  const bool want_lasso = config.has_estimator("lasso_cv");
  const bool want_svd = config.has_estimator("svd_oracle");
  const bool want_lag = config.has_estimator("laguerre_oracle");
  if (want_lasso && !is_power_of_two(config.n))
    throw std::invalid_argument("run_experiment: lasso_cv pilot needs n to be a power of two");
  if (config.pilot != "ti" && config.pilot != "plain")
    throw std::invalid_argument("run_experiment: pilot must be 'ti' or 'plain'");
  if (config.selection != "refit_cp" && config.selection != "shrunk_cp")
    throw std::invalid_argument("run_experiment: selection must be 'refit_cp' or 'shrunk_cp'");

  const Grid grid = Grid::uniform(config.T, config.n);
  const Vector f = evaluate_test_function(config.fn, grid);
  const Matrix Q = build_convolution_operator([](double x) { return std::exp(-x); }, grid);
  const Vector q = Q * f;
  // snr = 0 is the documented noiseless switch
  const double sigma = config.snr > 0 ? sigma_from_snr(q, config.snr) : 0.0;
  const double sigma_eff = sigma * std::sqrt(config.T / config.n);

  // Observation-independent precomputation, shared read-only by workers.
  std::optional<Dictionary> dict;
  std::optional<PreconditionedSystem> sys;
  std::optional<Matrix> QPhi;
  if (want_lasso) {
    dict = config.dictionary.build(grid);
    InverseProblem pb0{grid, Q, f, q, 0.0};
    sys = precondition(pb0, *dict, config.tau);
    sys->sigma = sigma;
    sys->sigma_eff = sigma_eff;
    QPhi = Q * dict->Phi;
  }
  std::optional<TruncatedSvd> svd;
  if (want_svd) svd.emplace(Q);
  std::vector<LaguerreDesign> lag_designs;
  const int Kmax = std::min(config.n, config.k_max);
  if (want_lag)
    for (double b : config.laguerre_scales) lag_designs.emplace_back(Q, grid, Kmax, b);

  LassoOptions lasso_opts;
  lasso_opts.tol = config.lasso_tol;
  lasso_opts.max_iter = config.lasso_max_iter;

  const int R = config.replications;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> err_lasso(R, nan), err_svd(R, nan), err_lag(R, nan);

  auto run_replication = [&](int r) {
    const std::uint64_t seed_r = derive_seed(config.master_seed, static_cast<std::uint64_t>(r));
    const Vector y = synthesize_observations(Q, f, sigma, grid, seed_r);

    if (want_lasso) {
      try {
        const Vector b = sys->Psi.transpose() * y;
        const LassoPath path = lasso_path(sys->G, b, sys->nu, config.N_grid, lasso_opts);
        const PilotEstimate pilot = pilot_estimate_q(y, sigma_eff);
        const SelectionResult sel = cp_select_on(path, *QPhi, pilot.q_hat, sigma_eff);
        const Vector f_hat = dict->Phi * path.fits[sel.k_hat].theta;
        err_lasso[r] = estimation_error(f_hat, f);
      } catch (const std::exception&) {
      }
    }
    if (want_svd) {
      try {
        const auto errs = svd->oracle_errors(y, f, std::min(Kmax, svd->max_usable()));
        err_svd[r] = *std::min_element(errs.begin(), errs.end());
      } catch (const std::exception&) {
      }
    }
    if (want_lag) {
      try {
        double best = std::numeric_limits<double>::infinity();
        for (const auto& design : lag_designs)
          for (int K = 1; K <= design.rank(); ++K)
            best = std::min(best, estimation_error(design.estimate(y, K), f));
        if (std::isfinite(best)) err_lag[r] = best;
      } catch (const std::exception&) {
      }
    }
  };

  const int threads = std::min(resolve_threads(config.threads), R);
  if (threads <= 1) {
    for (int r = 0; r < R; ++r) run_replication(r);
  } else {
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (int t = 0; t < threads; ++t)
      pool.emplace_back([&] {
        for (int r = next.fetch_add(1); r < R; r = next.fetch_add(1)) run_replication(r);
      });
    for (auto& th : pool) th.join();
  }

  ExperimentReport report;
  report.config = config;
  auto aggregate = [&](const std::string& name, const std::vector<double>& errs) {
    EstimatorStats st;
    st.name = name;
    st.errors = errs;
    double sum = 0.0;
    for (double e : errs) {
      if (std::isnan(e)) {
        ++st.failed;
      } else {
        sum += e;
        ++st.count;
      }
    }
    if (st.failed * 20 > R)  // > 5% failures corrupts the comparison
      throw std::runtime_error("run_experiment: estimator '" + name + "' failed in " +
                               std::to_string(st.failed) + "/" + std::to_string(R) +
                               " replications");
    if (st.count > 0) st.mean_error = sum / st.count;
    if (st.count > 1) {
      double ss = 0.0;
      for (double e : errs)
        if (!std::isnan(e)) ss += (e - st.mean_error) * (e - st.mean_error);
      st.std_error = std::sqrt(ss / (st.count - 1));
    }
    report.stats.push_back(std::move(st));
  };
  for (const auto& name : config.estimators) {
    if (name == "lasso_cv") aggregate(name, err_lasso);
    else if (name == "svd_oracle") aggregate(name, err_svd);
    else if (name == "laguerre_oracle") aggregate(name, err_lag);
    else throw std::invalid_argument("run_experiment: unknown estimator '" + name + "'");
  }
  return report;
}

/// Fitted curves of every configured estimator for one replication, in the
/// plot-data layout of the Figure-1 overlays.
struct ReplicationEstimates {
  Grid grid;
  Vector f_true;
  std::vector<std::pair<std::string, Vector>> estimates;
};

inline ReplicationEstimates compute_replication_estimates(const ExperimentConfig& config,
                                                          int replication) {
  ReplicationEstimates out;
  out.grid = Grid::uniform(config.T, config.n);
  out.f_true = evaluate_test_function(config.fn, out.grid);
  const Matrix Q =
      build_convolution_operator([](double x) { return std::exp(-x); }, out.grid);
  const Vector q = Q * out.f_true;
  const double sigma = config.snr > 0 ? sigma_from_snr(q, config.snr, config.T) : 0.0;
  const double sigma_eff = sigma * std::sqrt(config.T / config.n);
  const Vector y = synthesize_observations(
      Q, out.f_true, sigma, out.grid,
      derive_seed(config.master_seed, static_cast<std::uint64_t>(replication)));
  InverseProblem pb{out.grid, Q, out.f_true, y, sigma};

  for (const auto& name : config.estimators) {
    if (name == "lasso_cv") {
      const Dictionary dict = config.dictionary.build(out.grid);
      auto sys = precondition(pb, dict, config.tau);
      LassoOptions opts;
      opts.tol = config.lasso_tol;
      opts.max_iter = config.lasso_max_iter;
      const LassoPath path = lasso_path(sys.G, sys.b, sys.nu, config.N_grid, opts);
      const PilotEstimate pilot = pilot_estimate_q(y, sigma_eff);
      const SelectionResult sel =
          cp_select(path, Q, dict, pilot.q_hat, sigma_eff, CriterionSpace::Image);
      out.estimates.emplace_back(name, Vector(dict.Phi * path.fits[sel.k_hat].theta));
    } else if (name == "svd_oracle") {
      std::vector<int> K_range;
      for (int k = 1; k <= std::min(config.n, config.k_max); ++k) K_range.push_back(k);
      out.estimates.emplace_back(name,
                                 oracle_select(BaselineMethod::SVD, pb, K_range).f_hat);
    } else if (name == "laguerre_oracle") {
      std::vector<int> K_range;
      for (int k = 1; k <= std::min(config.n, config.k_max); ++k) K_range.push_back(k);
      out.estimates.emplace_back(
          name,
          oracle_select(BaselineMethod::Laguerre, pb, K_range, config.laguerre_scales).f_hat);
    } else {
      throw std::invalid_argument("unknown estimator '" + name + "'");
    }
  }
  return out;
}

enum class TableFormat { Csv, Markdown };

inline std::string emit_table(const ExperimentReport& report, TableFormat format) {
  std::ostringstream out;
  const auto& c = report.config;
  if (format == TableFormat::Csv) {
    out << "# fn=" << to_string(c.fn) << " n=" << c.n << " snr=" << c.snr << " T=" << c.T
        << " replications=" << c.replications << " seed=" << c.master_seed << '\n';
    out << "estimator,mean_error,std_error,replications,failed\n";
    for (const auto& st : report.stats)
      out << st.name << ',' << csv::format_double(st.mean_error) << ','
          << csv::format_double(st.std_error) << ',' << st.count << ',' << st.failed << '\n';
  } else {
    out << "Test function " << to_string(c.fn) << ", SNR=" << c.snr << ", n=" << c.n << " ("
        << c.replications << " runs)\n\n";
    out << "| Method | mean error | (std) |\n|---|---|---|\n";
    char buf[64];
    for (const auto& st : report.stats) {
      std::snprintf(buf, sizeof(buf), "| %s | %.6f | (%.6f) |\n", st.name.c_str(), st.mean_error,
                    st.std_error);
      out << buf;
    }
  }
  return out.str();
}

/// Per-replication error dump; recomputing mean/std from it reproduces the
/// table entries exactly.
inline std::string emit_errors(const ExperimentReport& report) {
  std::ostringstream out;
  out << "rep";
  for (const auto& st : report.stats) out << ',' << st.name;
  out << '\n';
  for (int r = 0; r < report.config.replications; ++r) {
    out << r;
    for (const auto& st : report.stats) {
      out << ',';
      if (!std::isnan(st.errors[r])) out << csv::format_double(st.errors[r]);
    }
    out << '\n';
  }
  return out.str();
}

/// Overlay data for the Figure-1 style plots: x, f_true, one column per
/// estimator, one row per grid point.
inline void emit_plot_data(const Grid& grid, const Vector& f_true,
                           const std::vector<std::pair<std::string, Vector>>& estimates,
                           const std::string& path) {
  for (const auto& [name, v] : estimates)
    if (v.size() != grid.n)
      throw std::invalid_argument("emit_plot_data: estimate '" + name + "' has wrong length");
  std::ostringstream out;
  out << "x,f_true";
  for (const auto& [name, v] : estimates) out << ',' << name;
  out << '\n';
  for (int i = 0; i < grid.n; ++i) {
    out << csv::format_double(grid.points[i]) << ',' << csv::format_double(f_true[i]);
    for (const auto& [name, v] : estimates) out << ',' << csv::format_double(v[i]);
    out << '\n';
  }
  csv::write_file(path, out.str());
}

}  // namespace illposed
