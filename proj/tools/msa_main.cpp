// Command-line front end: `msa analyze` runs the full stability analysis
// and writes the JSON report (plus optional SVG overlays and a matrix
// dump); `msa check` runs the condition estimate only.
//
// Exit codes: 0 analysis ran (warnings included), 2 usage error,
// 3 invalid or unreadable model, 4 solver failure.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "msa/msa.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitModel = 3;
constexpr int kExitSolver = 4;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw msa::ModelError("cannot open model file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw msa::Error("cannot write file: " + path);
  out << bytes;
  if (!out) throw msa::Error("cannot write file: " + path);
}

struct AnalyzeArgs {
  std::string model_path;
  msa::AnalysisParams params;
  std::string out_path = "report.json";
  std::string svg_dir;
  std::vector<int> svg_eigvecs;
  std::string dump_matrix_path;
};

int run_analyze(AnalyzeArgs& args) {
  const std::string bytes = read_file(args.model_path);
  const msa::Model model = msa::parse_model(bytes);
  args.params.input_digest = msa::content_digest(bytes);

  const msa::DofMap dofmap = msa::build_dof_map(model);
  std::vector<std::string> cli_warnings;
  const int n = dofmap.free_count;
  if (n < 1) throw msa::ModelError("model is fully restrained (no free dofs)");
  if (args.params.n_largest > n) {
    args.params.n_largest = n;
    cli_warnings.push_back("n_l reduced to " + std::to_string(n) +
                           " (number of free dofs)");
  }
  if (args.params.n_smallest + args.params.n_largest > n) {
    args.params.n_smallest = n - args.params.n_largest;
    cli_warnings.push_back("n_s reduced to " +
                           std::to_string(args.params.n_smallest) +
                           " (n_s + n_l cannot exceed " + std::to_string(n) +
                           " free dofs)");
  }
  if (args.params.n_smallest + args.params.n_largest < 1)
    throw CLI::ValidationError("--ns/--nl", "nothing to compute");

  msa::StabilityReport report = msa::run_stability_analysis(model, args.params);
  report.warnings.insert(report.warnings.begin(), cli_warnings.begin(),
                         cli_warnings.end());

  if (!args.dump_matrix_path.empty()) {
    const msa::SparseSymmetric a = msa::assemble(model, dofmap);
    write_file(args.dump_matrix_path, a.dump_coordinate());
  }

  write_file(args.out_path, msa::report_to_json(report));

  if (!args.svg_dir.empty()) {
    std::filesystem::create_directories(args.svg_dir);
    for (const auto& field : report.fields) {
      if (field.kind != 'v') continue;
      if (!args.svg_eigvecs.empty() &&
          std::find(args.svg_eigvecs.begin(), args.svg_eigvecs.end(),
                    field.eigenvector) == args.svg_eigvecs.end())
        continue;
      char name[32];
      std::snprintf(name, sizeof(name), "eigvec_%03d.svg", field.eigenvector);
      write_file((std::filesystem::path(args.svg_dir) / name).string(),
                 msa::render_svg(model, field));
    }
  }

  // Human summary; the report file carries the full-precision data.
  std::cout << "free dofs: " << n << "\n";
  std::cout << "kappa_est: " << report.condition.kappa
            << (report.condition.ill_conditioned ? "  (ill-conditioned)" : "")
            << "\n";
  if (report.gap.k) {
    std::cout << "spectral gap k = " << *report.gap.k << "\n";
    for (const auto& field : report.fields) {
      if (field.kind != 'v') continue;
      std::cout << "eigenvector " << field.eigenvector << " suspects:";
      for (std::size_t i = 0; i < field.labels.size(); ++i)
        if (field.labels[i] == msa::ClusterLabel::suspect)
          std::cout << " " << report.element_ids[i];
      std::cout << "\n";
    }
  } else {
    std::cout << "spectral gap: none\n";
  }
  for (const auto& w : report.warnings) std::cerr << "warning: " << w << "\n";
  std::cout << "report written to " << args.out_path << "\n";
  return kExitOk;
}

int run_check(const std::string& model_path, double threshold,
              double tol, unsigned long long seed) {
  const msa::Model model = msa::parse_model(read_file(model_path));
  const msa::DofMap dofmap = msa::build_dof_map(model);
  if (dofmap.free_count < 1)
    throw msa::ModelError("model is fully restrained (no free dofs)");
  const msa::SparseSymmetric a = msa::assemble(model, dofmap);
  msa::EigenOptions opts;
  opts.tol = tol;
  opts.seed = seed;
  const msa::ConditionEstimate est =
      msa::estimate_condition(a, threshold, opts);
  std::printf("kappa_est: %.17g\n", est.kappa);
  std::printf("lambda_max_est: %.17g\n", est.lambda_max);
  std::printf("lambda_min_est: %.17g\n", est.lambda_min);
  std::printf("ill_conditioned: %s (threshold %.17g)\n",
              est.ill_conditioned ? "yes" : "no", est.threshold);
  return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Model stability analysis for 2D finite-element models"};
  app.require_subcommand(1);

  AnalyzeArgs analyze_args;
  auto* analyze = app.add_subcommand(
      "analyze", "Run the full stability analysis and write a JSON report");
  analyze->add_option("model", analyze_args.model_path, "model file (JSON)")
      ->required();
  analyze->add_option("--ns", analyze_args.params.n_smallest,
                      "number of smallest eigenpairs")
      ->default_val(8)
      ->check(CLI::NonNegativeNumber);
  analyze->add_option("--nl", analyze_args.params.n_largest,
                      "number of largest eigenpairs")
      ->default_val(0)
      ->check(CLI::NonNegativeNumber);
  analyze->add_option("--gf", analyze_args.params.gap_factor,
                      "spectral gap factor (>= 1)")
      ->default_val(10.0)
      ->check(CLI::Range(1.0, 1e300));
  analyze->add_option("--tol", analyze_args.params.tol,
                      "relative eigensolver residual tolerance")
      ->default_val(1e-8)
      ->check(CLI::PositiveNumber);
  analyze->add_option("--cond-threshold", analyze_args.params.cond_threshold,
                      "condition number threshold")
      ->default_val(1e10)
      ->check(CLI::PositiveNumber);
  analyze->add_option("--seed", analyze_args.params.seed,
                      "starting-vector seed")
      ->default_val(42ull);
  analyze->add_option("--out", analyze_args.out_path, "report path")
      ->default_val("report.json");
  analyze->add_option("--svg-dir", analyze_args.svg_dir,
                      "directory for per-eigenvector SVG overlays");
  analyze->add_option("--svg-eigvec", analyze_args.svg_eigvecs,
                      "eigenvector indices to render (default: all v-fields)")
      ->delimiter(',');
  analyze->add_option("--dump-matrix", analyze_args.dump_matrix_path,
                      "write the assembled matrix in coordinate text form");

  std::string check_path;
  double check_threshold = 1e10;
  double check_tol = 1e-8;
  unsigned long long check_seed = 42;
  auto* check = app.add_subcommand(
      "check", "Estimate the condition number only");
  check->add_option("model", check_path, "model file (JSON)")->required();
  check->add_option("--cond-threshold", check_threshold,
                    "condition number threshold")
      ->default_val(1e10)
      ->check(CLI::PositiveNumber);
  check->add_option("--tol", check_tol, "eigensolver tolerance")
      ->default_val(1e-8)
      ->check(CLI::PositiveNumber);
  check->add_option("--seed", check_seed, "starting-vector seed")
      ->default_val(42ull);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }

  try {
    if (analyze->parsed()) return run_analyze(analyze_args);
    return run_check(check_path, check_threshold, check_tol, check_seed);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const msa::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitModel;
  } catch (const msa::ModelError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitModel;
  } catch (const msa::SolverError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitSolver;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitSolver;
  }
}
