#include "bmsense/harness.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "bmsense/serialize.hpp"
#include "bmsense/theory.hpp"

namespace bmsense {

const char* experiment_name(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::RecoveryCurveReal: return "recovery_curve_real";
    case ExperimentKind::RecoveryCurveComplex: return "recovery_curve_complex";
    case ExperimentKind::PhaseGrid: return "phase_grid";
    case ExperimentKind::SubgaussianStudy: return "subgaussian_study";
    case ExperimentKind::DualCertStudy: return "dual_cert_study";
    case ExperimentKind::SingleSolve: return "single_solve";
  }
  return "unknown";
}

ExperimentKind experiment_from_name(const std::string& name) {
  if (name == "recovery_curve_real") return ExperimentKind::RecoveryCurveReal;
  if (name == "recovery_curve_complex") return ExperimentKind::RecoveryCurveComplex;
  if (name == "phase_grid") return ExperimentKind::PhaseGrid;
  if (name == "subgaussian_study") return ExperimentKind::SubgaussianStudy;
  if (name == "dual_cert_study") return ExperimentKind::DualCertStudy;
  if (name == "single_solve") return ExperimentKind::SingleSolve;
  throw std::invalid_argument("unknown experiment: " + name);
}

nlohmann::json ExperimentConfig::to_json() const {
  nlohmann::json j;
  j["experiment"] = experiment_name(experiment);
  j["d"] = d;
  j["r"] = r;
  j["n"] = n;
  j["n_over_d_grid"] = n_over_d_grid;
  j["p_list"] = p_list;
  j["trials"] = trials;
  j["ensemble"] = ensemble.name();
  if (ensemble.kind == EnsembleKind::SubGaussianIID &&
      ensemble.distribution == SubGaussianDist::ScaledBernoulli)
    j["bernoulli_q"] = ensemble.bernoulli_q;
  j["sigma"] = sigma;
  j["master_seed"] = master_seed;
  j["output_dir"] = output_dir;
  j["success_threshold"] = success_threshold;
  j["threads"] = threads;
  j["peaky_truth"] = peaky_truth;
  j["solver"] = {{"max_iters", solver.max_iters},
                 {"grad_tol", solver.grad_tol},
                 {"curvature_tol", solver.curvature_tol},
                 {"initial_trust_radius", solver.initial_trust_radius},
                 {"max_trust_radius", solver.max_trust_radius},
                 {"cg_max_iters", solver.cg_max_iters},
                 {"cert_max_probes", solver.cert_max_probes}};
  return j;
}

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& j) {
  ExperimentConfig c;
  c.experiment = experiment_from_name(j.at("experiment").get<std::string>());
  if (j.contains("d")) c.d = j.at("d").get<int>();
  if (j.contains("r")) c.r = j.at("r").get<int>();
  if (j.contains("n")) c.n = j.at("n").get<int>();
  if (j.contains("n_over_d_grid"))
    c.n_over_d_grid = j.at("n_over_d_grid").get<std::vector<double>>();
  if (j.contains("p_list")) c.p_list = j.at("p_list").get<std::vector<int>>();
  if (j.contains("trials")) c.trials = j.at("trials").get<int>();
  if (j.contains("ensemble"))
    c.ensemble = ensemble_from_name(j.at("ensemble").get<std::string>());
  if (j.contains("bernoulli_q"))
    c.ensemble.bernoulli_q = j.at("bernoulli_q").get<double>();
  if (j.contains("sigma")) c.sigma = j.at("sigma").get<double>();
  if (j.contains("master_seed"))
    c.master_seed = j.at("master_seed").get<std::uint64_t>();
  if (j.contains("output_dir"))
    c.output_dir = j.at("output_dir").get<std::string>();
  if (j.contains("success_threshold"))
    c.success_threshold = j.at("success_threshold").get<double>();
  if (j.contains("threads")) c.threads = j.at("threads").get<int>();
  if (j.contains("peaky_truth")) c.peaky_truth = j.at("peaky_truth").get<bool>();
  if (j.contains("solver")) {
    const auto& s = j.at("solver");
    if (s.contains("max_iters")) c.solver.max_iters = s.at("max_iters").get<int>();
    if (s.contains("grad_tol")) c.solver.grad_tol = s.at("grad_tol").get<double>();
    if (s.contains("curvature_tol"))
      c.solver.curvature_tol = s.at("curvature_tol").get<double>();
    if (s.contains("initial_trust_radius"))
      c.solver.initial_trust_radius = s.at("initial_trust_radius").get<double>();
    if (s.contains("max_trust_radius"))
      c.solver.max_trust_radius = s.at("max_trust_radius").get<double>();
    if (s.contains("cg_max_iters"))
      c.solver.cg_max_iters = s.at("cg_max_iters").get<int>();
    if (s.contains("cert_max_probes"))
      c.solver.cert_max_probes = s.at("cert_max_probes").get<int>();
  }
  // Fill in field-compatible defaults for the named recovery curves.
  if (c.experiment == ExperimentKind::RecoveryCurveComplex &&
      c.ensemble.field() != Field::Complex)
    c.ensemble.kind = EnsembleKind::ComplexGaussian;
  return c;
}

std::string ResultRow::csv_header() {
  return "experiment_id,trial,p,n,d,ensemble,seed,"
         "final_error_phase_aligned,final_error_frobenius,final_f,"
         "grad_norm,min_curvature,iterations,wall_time_seconds,success";
}

std::string ResultRow::to_csv() const {
  std::ostringstream os;
  os.precision(17);
  os << experiment_id << ',' << trial << ',' << p << ',' << n << ',' << d
     << ',' << ensemble << ',' << seed << ',' << final_error_phase_aligned
     << ',' << final_error_frobenius << ',' << final_f << ',' << grad_norm
     << ',' << min_curvature << ',' << iterations << ','
     << wall_time_seconds << ',' << (success ? 1 : 0);
  return os.str();
}

ResultRow ResultRow::from_csv(const std::string& line) {
  std::vector<std::string> parts;
  std::stringstream ss(line);
  std::string item;
  while (std::getline(ss, item, ',')) parts.push_back(item);
  if (parts.size() != 15)
    throw std::invalid_argument("ResultRow::from_csv: expected 15 columns");
  ResultRow r;
  r.experiment_id = parts[0];
  r.trial = std::stoi(parts[1]);
  r.p = std::stoi(parts[2]);
  r.n = std::stoi(parts[3]);
  r.d = std::stoi(parts[4]);
  r.ensemble = parts[5];
  r.seed = std::stoull(parts[6]);
  r.final_error_phase_aligned = std::stod(parts[7]);
  r.final_error_frobenius = std::stod(parts[8]);
  r.final_f = std::stod(parts[9]);
  r.grad_norm = std::stod(parts[10]);
  r.min_curvature = std::stod(parts[11]);
  r.iterations = std::stoi(parts[12]);
  r.wall_time_seconds = std::stod(parts[13]);
  r.success = parts[14] == "1";
  return r;
}

nlohmann::json ResultRow::to_json() const {
  return {{"experiment_id", experiment_id},
          {"trial", trial},
          {"p", p},
          {"n", n},
          {"d", d},
          {"ensemble", ensemble},
          {"seed", seed},
          {"final_error_phase_aligned", final_error_phase_aligned},
          {"final_error_frobenius", final_error_frobenius},
          {"final_f", final_f},
          {"grad_norm", grad_norm},
          {"min_curvature", min_curvature},
          {"iterations", iterations},
          {"wall_time_seconds", wall_time_seconds},
          {"success", success}};
}

namespace {

int resolve_threads(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("BMSENSE_THREADS")) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

template <class Fn>
void parallel_for(int count, int threads, Fn&& fn) {
  threads = std::min(threads, count);
  if (threads <= 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  std::atomic<bool> failed{false};
  pool.reserve(static_cast<size_t>(threads));
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&]() {
      for (;;) {
        const int i = next.fetch_add(1);
        if (i >= count || failed.load()) break;
        try {
          fn(i);
        } catch (...) {
          failed.store(true);
          break;
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (failed.load())
    throw std::runtime_error("parallel_for: a worker task threw");
}

template <class Scalar>
ResultRow row_from_result(const ExperimentConfig& config,
                          const std::string& experiment_id, int trial, int p,
                          int n, std::uint64_t seed,
                          const SolveResult<Scalar>& res, double wall_seconds) {
  ResultRow row;
  row.experiment_id = experiment_id;
  row.trial = trial;
  row.p = p;
  row.n = n;
  row.d = config.d;
  row.ensemble = config.ensemble.name();
  row.seed = seed;
  row.final_error_phase_aligned = res.errors.phase_aligned;
  row.final_error_frobenius = res.errors.frobenius;
  row.final_f = res.final_f;
  row.grad_norm = res.certificate.grad_norm;
  row.min_curvature = res.certificate.min_curvature;
  row.iterations = res.iterations;
  row.wall_time_seconds = wall_seconds;
  const double err = config.r == 1 ? res.errors.phase_aligned
                                   : res.errors.frobenius;
  row.success = err < config.success_threshold;
  return row;
}

// One cell = one (trial, n, p) solve.  The problem depends on (trial, n)
// only, so the same trial shares its instance across the p sweep.
struct Cell {
  int trial = 0;
  int n = 0;
  int p = 0;
};

template <class Scalar>
std::vector<ResultRow> run_solve_cells(const ExperimentConfig& config,
                                       const std::string& experiment_id,
                                       const std::vector<Cell>& cells,
                                       TruthKind truth_kind) {
  std::vector<ResultRow> rows(cells.size());
  const int threads = resolve_threads(config.threads);
  parallel_for(static_cast<int>(cells.size()), threads, [&](int i) {
    const Cell& cell = cells[static_cast<size_t>(i)];
    const std::uint64_t prob_seed =
        derive_seed(config.master_seed, 0xF1, static_cast<std::uint64_t>(cell.trial),
                    static_cast<std::uint64_t>(cell.n));
    const Problem<Scalar> problem =
        make_problem<Scalar>(config.ensemble, config.d, config.r, cell.n,
                             prob_seed, truth_kind, config.sigma);
    SolverConfig solver = config.solver;
    solver.seed = derive_seed(config.master_seed, 0xBA7C,
                              static_cast<std::uint64_t>(cell.trial),
                              static_cast<std::uint64_t>(cell.p) |
                                  (static_cast<std::uint64_t>(cell.n) << 16));
    const auto t0 = std::chrono::steady_clock::now();
    const SolveResult<Scalar> res = solve(problem, cell.p, solver);
    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    rows[static_cast<size_t>(i)] = row_from_result(
        config, experiment_id, cell.trial, cell.p, cell.n, solver.seed, res,
        wall);
  });
  return rows;
}

nlohmann::json success_summary(const std::vector<ResultRow>& rows) {
  // success rate per (n, p) cell, in first-seen order.
  std::vector<std::pair<std::pair<int, int>, std::pair<int, int>>> cells;
  for (const auto& row : rows) {
    const std::pair<int, int> key{row.n, row.p};
    auto it = std::find_if(cells.begin(), cells.end(),
                           [&](const auto& c) { return c.first == key; });
    if (it == cells.end()) {
      cells.push_back({key, {0, 0}});
      it = std::prev(cells.end());
    }
    it->second.second += 1;
    if (row.success) it->second.first += 1;
  }
  nlohmann::json out = nlohmann::json::array();
  for (const auto& [key, counts] : cells)
    out.push_back({{"n", key.first},
                   {"p", key.second},
                   {"successes", counts.first},
                   {"trials", counts.second},
                   {"success_rate",
                    static_cast<double>(counts.first) / counts.second}});
  return out;
}

template <class Scalar>
ExperimentOutput run_recovery_curve(const ExperimentConfig& config,
                                    int default_n_per_d) {
  ExperimentConfig c = config;
  if (c.n == 0) c.n = default_n_per_d * c.d;
  std::vector<Cell> cells;
  for (int trial = 0; trial < c.trials; ++trial)
    for (int p : c.p_list) cells.push_back({trial, c.n, p});

  ExperimentOutput out;
  out.rows = run_solve_cells<Scalar>(c, experiment_name(c.experiment), cells,
                                     c.peaky_truth ? TruthKind::PeakyBasis
                                                   : TruthKind::RandomGaussian);
  out.report["config"] = c.to_json();
  out.report["summary"] = success_summary(out.rows);
  return out;
}

template <class Scalar>
ExperimentOutput run_phase_grid_impl(const ExperimentConfig& config) {
  ExperimentConfig c = config;
  if (c.n_over_d_grid.empty())
    c.n_over_d_grid = {1.5, 2.0, 2.5, 3.0, 4.0, 5.0, 6.0};
  std::vector<Cell> cells;
  for (double ratio : c.n_over_d_grid) {
    const int n = std::max(1, static_cast<int>(std::lround(ratio * c.d)));
    for (int trial = 0; trial < c.trials; ++trial)
      for (int p : c.p_list) cells.push_back({trial, n, p});
  }
  ExperimentOutput out;
  out.rows = run_solve_cells<Scalar>(c, experiment_name(c.experiment), cells,
                                     c.peaky_truth ? TruthKind::PeakyBasis
                                                   : TruthKind::RandomGaussian);
  out.report["config"] = c.to_json();
  out.report["summary"] = success_summary(out.rows);
  return out;
}

template <class Scalar>
ExperimentOutput run_dual_cert_study_impl(const ExperimentConfig& config) {
  ExperimentConfig c = config;
  if (c.n == 0) c.n = 40 * c.r * c.d;

  struct TrialReport {
    nlohmann::json j;
    std::vector<ResultRow> rows;
  };
  std::vector<TrialReport> trials(static_cast<size_t>(c.trials));

  const int threads = resolve_threads(c.threads);
  parallel_for(c.trials, threads, [&](int trial) {
    const std::uint64_t prob_seed =
        derive_seed(c.master_seed, 0xDC, static_cast<std::uint64_t>(trial));
    const Problem<Scalar> problem = make_problem<Scalar>(
        c.ensemble, c.d, c.r, c.n, prob_seed, TruthKind::RandomGaussian,
        c.sigma);
    const auto basis = tangent_basis<Scalar>(problem.z_star(), c.r);
    const auto cert =
        build_gaussian_dual_certificate<Scalar>(problem.measurements, basis);
    const auto a2 = estimate_restricted_conditioning<Scalar>(
        problem.measurements, basis, 40, derive_seed(prob_seed, 0xA2));

    nlohmann::json j;
    j["trial"] = trial;
    j["certificate"] = {{"valid", cert.s.valid},
                        {"epsilon", cert.s.epsilon},
                        {"lambda_norm", cert.s.lambda_norm},
                        {"tperp_min_eig", cert.s.tperp_min_eig},
                        {"rescale_applied", cert.s.rescale_applied}};
    j["restricted_conditioning"] = {{"mu_T", a2.mu_T}, {"L_T", a2.L_T}};

    nlohmann::json verdicts = nlohmann::json::array();
    TrialReport& rep = trials[static_cast<size_t>(trial)];
    for (int p : c.p_list) {
      const LandscapeVerdict v =
          landscape_verdict(cert, a2.mu_T, a2.L_T, problem, p);
      nlohmann::json vj = {{"p", p},
                           {"tau", v.tau},
                           {"applicable", v.applicable},
                           {"error_bound", v.error_bound},
                           {"gauss_threshold_form", v.gauss_threshold_form}};
      if (v.applicable && p > v.tau) {
        SolverConfig solver = c.solver;
        solver.seed = derive_seed(c.master_seed, 0xBA7C,
                                  static_cast<std::uint64_t>(trial),
                                  static_cast<std::uint64_t>(p));
        const auto t0 = std::chrono::steady_clock::now();
        const SolveResult<Scalar> res = solve(problem, p, solver);
        const double wall = std::chrono::duration<double>(
                                std::chrono::steady_clock::now() - t0)
                                .count();
        rep.rows.push_back(row_from_result(c, experiment_name(c.experiment),
                                           trial, p, c.n, solver.seed, res,
                                           wall));
        vj["solved_error_frobenius"] = res.errors.frobenius;
        vj["bound_holds"] = res.errors.frobenius <= v.error_bound + 1e-12;
      }
      verdicts.push_back(vj);
    }
    j["verdicts"] = verdicts;
    rep.j = std::move(j);
  });

  ExperimentOutput out;
  nlohmann::json trial_reports = nlohmann::json::array();
  int valid_count = 0;
  for (auto& rep : trials) {
    if (rep.j.at("certificate").at("valid").template get<bool>())
      ++valid_count;
    trial_reports.push_back(std::move(rep.j));
    for (auto& row : rep.rows) out.rows.push_back(std::move(row));
  }
  out.report["config"] = c.to_json();
  out.report["trials"] = std::move(trial_reports);
  out.report["valid_certificates"] = valid_count;
  out.report["summary"] = success_summary(out.rows);
  return out;
}

template <class Scalar>
ExperimentOutput run_single_solve_impl(const ExperimentConfig& config) {
  ExperimentConfig c = config;
  if (c.n == 0) c.n = 3 * c.d;
  std::vector<Cell> cells;
  for (int p : c.p_list) cells.push_back({0, c.n, p});
  ExperimentOutput out;
  out.rows = run_solve_cells<Scalar>(c, experiment_name(c.experiment), cells,
                                     c.peaky_truth ? TruthKind::PeakyBasis
                                                   : TruthKind::RandomGaussian);
  out.report["config"] = c.to_json();
  out.report["summary"] = success_summary(out.rows);
  return out;
}

template <class Fn>
auto dispatch_field(Field field, Fn&& fn) {
  if (field == Field::Complex) return fn(Complex{});
  return fn(double{});
}

std::string svg_histogram(const std::vector<double>& errors,
                          const std::string& title) {
  constexpr int kBins = 22;
  constexpr double kLo = -10.0, kHi = 1.0;
  std::vector<int> bins(kBins, 0);
  for (double e : errors) {
    const double le = std::log10(std::max(e, 1e-12));
    int b = static_cast<int>((le - kLo) / (kHi - kLo) * kBins);
    b = std::max(0, std::min(kBins - 1, b));
    ++bins[static_cast<size_t>(b)];
  }
  const int max_count = std::max(1, *std::max_element(bins.begin(), bins.end()));

  constexpr int kWidth = 640, kHeight = 360, kMargin = 40;
  const double bar_w = static_cast<double>(kWidth - 2 * kMargin) / kBins;
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth
     << "\" height=\"" << kHeight << "\">\n"
     << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
     << "<text x=\"" << kWidth / 2 << "\" y=\"20\" text-anchor=\"middle\" "
        "font-family=\"sans-serif\" font-size=\"14\">"
     << title << "</text>\n";
  for (int b = 0; b < kBins; ++b) {
    const double h = static_cast<double>(bins[static_cast<size_t>(b)]) /
                     max_count * (kHeight - 2 * kMargin);
    const double x = kMargin + b * bar_w;
    const double y = kHeight - kMargin - h;
    os << "<rect x=\"" << x << "\" y=\"" << y << "\" width=\"" << bar_w - 2
       << "\" height=\"" << h << "\" fill=\"steelblue\"/>\n";
  }
  os << "<line x1=\"" << kMargin << "\" y1=\"" << kHeight - kMargin
     << "\" x2=\"" << kWidth - kMargin << "\" y2=\"" << kHeight - kMargin
     << "\" stroke=\"black\"/>\n";
  for (int tick = 0; tick <= 11; ++tick) {
    const double lx = kLo + tick * (kHi - kLo) / 11.0;
    const double x = kMargin + tick * (kWidth - 2.0 * kMargin) / 11.0;
    os << "<text x=\"" << x << "\" y=\"" << kHeight - kMargin + 16
       << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
          "font-size=\"10\">"
       << lx << "</text>\n";
  }
  os << "<text x=\"" << kWidth / 2 << "\" y=\"" << kHeight - 6
     << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
        "font-size=\"12\">log10 error</text>\n</svg>\n";
  return os.str();
}

}  // namespace

ExperimentOutput run_recovery_curves(const ExperimentConfig& config) {
  if (config.experiment == ExperimentKind::RecoveryCurveComplex)
    return run_recovery_curve<Complex>(config, 5);
  return run_recovery_curve<double>(config, 3);
}

ExperimentOutput run_phase_grid(const ExperimentConfig& config) {
  return dispatch_field(config.ensemble.field(), [&](auto tag) {
    return run_phase_grid_impl<decltype(tag)>(config);
  });
}

ExperimentOutput run_subgaussian_study(const ExperimentConfig& config) {
  ExperimentConfig c = config;
  if (c.ensemble.is_gaussian()) {
    c.ensemble.kind = EnsembleKind::SubGaussianIID;
    c.ensemble.distribution = SubGaussianDist::Rademacher;
  }
  if (c.n == 0) c.n = 6 * c.d;
  return dispatch_field(c.ensemble.field(), [&](auto tag) {
    using Scalar = decltype(tag);
    std::vector<Cell> cells;
    for (int trial = 0; trial < c.trials; ++trial)
      for (int p : c.p_list) cells.push_back({trial, c.n, p});
    ExperimentOutput out;
    out.rows = run_solve_cells<Scalar>(
        c, experiment_name(c.experiment), cells,
        c.peaky_truth ? TruthKind::PeakyBasis : TruthKind::RandomGaussian);
    out.report["config"] = c.to_json();
    out.report["summary"] = success_summary(out.rows);
    return out;
  });
}

ExperimentOutput run_dual_cert_study(const ExperimentConfig& config) {
  return dispatch_field(config.ensemble.field(), [&](auto tag) {
    return run_dual_cert_study_impl<decltype(tag)>(config);
  });
}

ExperimentOutput run_single_solve(const ExperimentConfig& config) {
  return dispatch_field(config.ensemble.field(), [&](auto tag) {
    return run_single_solve_impl<decltype(tag)>(config);
  });
}

ExperimentOutput run_experiment(const ExperimentConfig& config) {
  switch (config.experiment) {
    case ExperimentKind::RecoveryCurveReal:
    case ExperimentKind::RecoveryCurveComplex:
      return run_recovery_curves(config);
    case ExperimentKind::PhaseGrid:
      return run_phase_grid(config);
    case ExperimentKind::SubgaussianStudy:
      return run_subgaussian_study(config);
    case ExperimentKind::DualCertStudy:
      return run_dual_cert_study(config);
    case ExperimentKind::SingleSolve:
      return run_single_solve(config);
  }
  throw std::invalid_argument("run_experiment: unknown experiment");
}

std::vector<std::string> emit_outputs(const ExperimentOutput& output,
                                      const ExperimentConfig& config,
                                      const std::vector<OutputFormat>& formats) {
  namespace fs = std::filesystem;
  fs::create_directories(config.output_dir);
  std::vector<std::string> written;

  for (OutputFormat fmt : formats) {
    switch (fmt) {
      case OutputFormat::Csv: {
        const fs::path path = fs::path(config.output_dir) / "results.csv";
        std::ofstream os(path);
        os << ResultRow::csv_header() << '\n';
        for (const auto& row : output.rows) os << row.to_csv() << '\n';
        written.push_back(path.string());
        break;
      }
      case OutputFormat::Json: {
        const fs::path path = fs::path(config.output_dir) / "report.json";
        nlohmann::json j = output.report;
        nlohmann::json rows = nlohmann::json::array();
        for (const auto& row : output.rows) rows.push_back(row.to_json());
        j["rows"] = std::move(rows);
        std::ofstream os(path);
        os << j.dump(2) << '\n';
        written.push_back(path.string());
        break;
      }
      case OutputFormat::SvgHistogram: {
        std::vector<int> p_values;
        for (const auto& row : output.rows)
          if (std::find(p_values.begin(), p_values.end(), row.p) ==
              p_values.end())
            p_values.push_back(row.p);
        for (int p : p_values) {
          std::vector<double> errors;
          for (const auto& row : output.rows)
            if (row.p == p)
              errors.push_back(config.r == 1 ? row.final_error_phase_aligned
                                             : row.final_error_frobenius);
          const fs::path path = fs::path(config.output_dir) /
                                ("histogram_p" + std::to_string(p) + ".svg");
          std::ofstream os(path);
          os << svg_histogram(errors,
                              std::string(experiment_name(config.experiment)) +
                                  ", p = " + std::to_string(p));
          written.push_back(path.string());
        }
        break;
      }
    }
  }
  return written;
}

bool csv_rows_equal_ignoring_time(const std::string& a, const std::string& b) {
  auto split = [](const std::string& s) {
    std::vector<std::string> parts;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) parts.push_back(item);
    return parts;
  };
  const auto pa = split(a), pb = split(b);
  if (pa.size() != pb.size()) return false;
  for (size_t i = 0; i < pa.size(); ++i) {
    if (i == 13) continue;  // wall_time_seconds
    if (pa[i] != pb[i]) return false;
  }
  return true;
}

}  // namespace bmsense
