#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "bmsense/harness.hpp"
#include "bmsense/serialize.hpp"
#include "bmsense/theory.hpp"

namespace {

using bmsense::Json;

Json load_json(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open " + path);
  Json j;
  is >> j;
  return j;
}

int cmd_run(const std::string& config_path, const std::string& out_dir,
            int threads, long long seed) {
  Json j = load_json(config_path);
  bmsense::ExperimentConfig config = bmsense::ExperimentConfig::from_json(j);
  if (!out_dir.empty()) config.output_dir = out_dir;
  if (threads > 0) config.threads = threads;
  if (seed >= 0) config.master_seed = static_cast<std::uint64_t>(seed);

  const bmsense::ExperimentOutput output = bmsense::run_experiment(config);
  const auto written = bmsense::emit_outputs(
      output, config,
      {bmsense::OutputFormat::Csv, bmsense::OutputFormat::Json,
       bmsense::OutputFormat::SvgHistogram});
  for (const auto& path : written) std::cout << "wrote " << path << '\n';
  return 0;
}

template <class Scalar>
int verify_point(const Json& problem_json, const Json& x_json) {
  const bmsense::Problem<Scalar> problem =
      bmsense::problem_from_json<Scalar>(problem_json);
  const bmsense::MatrixX<Scalar> x =
      bmsense::matrix_from_json<Scalar>(x_json);
  if (x.rows() != problem.d())
    throw std::runtime_error("verify: factor row count != problem dimension");

  bmsense::Objective<Scalar> obj(problem, x.cols());
  const auto cert = obj.certify_second_order(
      x, 1e-8, 1e-6, 200, bmsense::derive_seed(problem.seed, 0xCE27));
  const bool second_order = obj.certificate_passes(cert, 1e-8, 1e-6);

  const auto rep = bmsense::check_basic_inequality(problem, x);
  const double tol = bmsense::basic_inequality_tolerance(problem, x, cert, rep);
  const bool chain_holds = rep.slack >= -tol && rep.slack_mid >= -tol;

  Json out;
  out["objective_value"] = obj.value(x);
  out["certificate"] = {{"grad_norm", cert.grad_norm},
                        {"min_curvature", cert.min_curvature},
                        {"probes_used", cert.probes_used},
                        {"second_order_critical", second_order}};
  out["critical_point_inequality"] = {{"lhs", rep.lhs},
                                      {"rhs_mid", rep.rhs_mid},
                                      {"rhs_final", rep.rhs_final},
                                      {"slack", rep.slack},
                                      {"tolerance", tol},
                                      {"holds", chain_holds}};
  out["verified"] = second_order && chain_holds;
  std::cout << out.dump(2) << std::endl;
  return 0;
}

int cmd_verify(const std::string& problem_path, const std::string& x_path) {
  const Json problem_json = load_json(problem_path);
  const Json x_json = load_json(x_path);
  const std::string field = problem_json.at("field").get<std::string>();
  if (field == "complex") return verify_point<bmsense::Complex>(problem_json, x_json);
  return verify_point<double>(problem_json, x_json);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Low-rank PSD recovery from rank-one measurements"};
  app.require_subcommand(1);

  std::string config_path, out_dir, problem_path, x_path;
  int threads = 0;
  long long seed = -1;

  CLI::App* run = app.add_subcommand("run", "run an experiment from a config");
  run->add_option("--config", config_path, "experiment config (JSON)")
      ->required();
  run->add_option("--out", out_dir, "output directory");
  run->add_option("--threads", threads, "worker threads (0 = auto)");
  run->add_option("--seed", seed, "master seed override");

  CLI::App* verify = app.add_subcommand(
      "verify", "check a candidate factor against a problem record");
  verify->add_option("--problem", problem_path, "problem record (JSON)")
      ->required();
  verify->add_option("--x", x_path, "factor matrix (JSON)")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return cmd_run(config_path, out_dir, threads, seed);
    return cmd_verify(problem_path, x_path);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}
