#ifndef BMSENSE_HARNESS_HPP
#define BMSENSE_HARNESS_HPP

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "bmsense/measurement.hpp"
#include "bmsense/solver.hpp"

namespace bmsense {

enum class ExperimentKind {
  RecoveryCurveReal,
  RecoveryCurveComplex,
  PhaseGrid,
  SubgaussianStudy,
  DualCertStudy,
  SingleSolve,
};

const char* experiment_name(ExperimentKind kind);
ExperimentKind experiment_from_name(const std::string& name);

struct ExperimentConfig {
  ExperimentKind experiment = ExperimentKind::RecoveryCurveReal;
  int d = 50;
  int r = 1;
  int n = 0;  // 0: derived from the experiment defaults or the ratio grid
  std::vector<double> n_over_d_grid;
  std::vector<int> p_list = {1, 2, 3};
  int trials = 100;
  EnsembleSpec ensemble;
  double sigma = 0.0;
  std::uint64_t master_seed = 0;
  std::string output_dir = "out";
  double success_threshold = 1e-4;
  int threads = 1;
  bool peaky_truth = false;
  SolverConfig solver;

  nlohmann::json to_json() const;
  static ExperimentConfig from_json(const nlohmann::json& j);
};

struct ResultRow {
  std::string experiment_id;
  int trial = 0;
  int p = 0;
  int n = 0;
  int d = 0;
  std::string ensemble;
  std::uint64_t seed = 0;
  double final_error_phase_aligned = 0.0;
  double final_error_frobenius = 0.0;
  double final_f = 0.0;
  double grad_norm = 0.0;
  double min_curvature = 0.0;
  int iterations = 0;
  double wall_time_seconds = 0.0;
  bool success = false;

  static std::string csv_header();
  std::string to_csv() const;
  static ResultRow from_csv(const std::string& line);
  nlohmann::json to_json() const;
};

struct ExperimentOutput {
  std::vector<ResultRow> rows;
  nlohmann::json report;  // experiment-specific summary (echoes the config)
};

ExperimentOutput run_recovery_curves(const ExperimentConfig& config);
ExperimentOutput run_phase_grid(const ExperimentConfig& config);
ExperimentOutput run_subgaussian_study(const ExperimentConfig& config);
ExperimentOutput run_dual_cert_study(const ExperimentConfig& config);
ExperimentOutput run_single_solve(const ExperimentConfig& config);
ExperimentOutput run_experiment(const ExperimentConfig& config);

enum class OutputFormat { Csv, Json, SvgHistogram };

// Writes result files into config.output_dir.  CSV columns follow the
// ResultRow field order; SVG histograms bin log10(error) over [-10, 1]
// with 22 bins, one file per rank parameter.
std::vector<std::string> emit_outputs(const ExperimentOutput& output,
                                      const ExperimentConfig& config,
                                      const std::vector<OutputFormat>& formats);

// CSV comparison that ignores the wall-time column (determinism checks).
bool csv_rows_equal_ignoring_time(const std::string& a, const std::string& b);

}  // namespace bmsense

#endif
