#include <cmath>
#include <fstream>
#include <ostream>

#include <CLI11.hpp>

#include "trapscope/cli.hpp"
#include "trapscope/error.hpp"

namespace trapscope {

namespace {

constexpr int kExitPass = 0;
constexpr int kExitUsage = 1;
constexpr int kExitCheckFailed = 2;

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::IoError, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(ErrorKind::IoError, "write failed for " + path.string());
}

int fit_order_for(int levels, int order) {
  int k = std::max(order, 2 * levels - 2) + 8;
  return k % 2 == 0 ? k : k + 1;
}

}  // namespace

int cmd_certify(const std::filesystem::path& config_path, const std::string& out_override, std::ostream& out,
                std::ostream& err) {
  RunConfig cfg;
  ProblemInstance inst = [&] {
    cfg = read_config_file(config_path);
    return cfg.instance(true);
  }();
  const int threads = threads_from_environment();
  const auto report = trap_certificate(inst, cfg.certificate_config(threads));
  const auto doc = report_to_json(report);

  const std::filesystem::path report_path = out_override.empty() ? cfg.out : out_override;
  write_text_file(report_path, doc.dump(2) + "\n");
  const auto summary = report_summary(doc);
  auto summary_path = report_path;
  summary_path.replace_extension(".txt");
  if (summary_path != report_path) write_text_file(summary_path, summary);
  out << summary;
  if (report.failure) err << "stage " << report.failure->stage << ": " << report.failure->message << "\n";
  return report.passed ? kExitPass : kExitCheckFailed;
}

int cmd_differential(const std::filesystem::path& config_path, const std::filesystem::path& control_path, int order,
                     const std::string& csv_path, std::ostream& out, std::ostream&) {
  if (order < 1) throw Error(ErrorKind::DomainError, "order must be at least 1");
  const auto cfg = read_config_file(config_path);
  const auto inst = cfg.instance(false);
  const auto f = read_control_file(control_path);
  require_same_grid(f, PiecewiseControl::zero(inst.system.horizon(), f.segments()));

  const int n_max = 2 * inst.system.levels() - 2;
  if (order > n_max) {
    throw Error(ErrorKind::InsufficientOrder,
                "order " + std::to_string(order) + " exceeds computed n_max = " + std::to_string(n_max));
  }
  DysonSettings settings;
  settings.substeps = cfg.substeps;
  settings.tolerance = cfg.tolerances.dyson_convergence;
  const auto forms = dyson_forms(inst.system, f, n_max, settings);
  const double analytic = differential(inst, forms, order);
  const int fit_order = fit_order_for(inst.system.levels(), order);
  const auto fit = taylor_fit(inst, f, fit_order, 0.5, 2 * fit_order + 4);
  const double fitted = fit.coefficient(order);
  const double gap = std::abs(fitted - analytic);

  out << "order        " << order << "\n";
  out << "analytic     " << format_real(analytic) << "\n";
  out << "fitted       " << format_real(fitted) << "\n";
  out << "discrepancy  " << format_real(gap) << "\n";
  out << "fit radius   " << format_real(fit.radius) << (fit.accepted ? "" : " (residual test not met)") << "\n";

  if (!csv_path.empty()) {
    const bool fresh = !std::filesystem::exists(csv_path) || std::filesystem::file_size(csv_path) == 0;
    std::ofstream csv(csv_path, std::ios::binary | std::ios::app);
    if (!csv) throw Error(ErrorKind::IoError, "cannot open " + csv_path);
    if (fresh) csv << "order,analytic,fitted,discrepancy\n";
    csv << order << ',' << format_real(analytic) << ',' << format_real(fitted) << ',' << format_real(gap) << '\n';
  }
  return kExitPass;
}

int cmd_scan(const std::filesystem::path& config_path, const std::filesystem::path& out_csv, double tmax, int points,
             std::ostream& out, std::ostream&) {
  if (!(tmax > 0.0)) throw Error(ErrorKind::DomainError, "--tmax must be positive");
  if (points < 2) throw Error(ErrorKind::DomainError, "--points must be at least 2");
  const auto cfg = read_config_file(config_path);
  const auto inst = cfg.instance(false);
  const auto cert = cfg.certificate_config(1);

  std::string text = "seed,mean_zero,t,J\n";
  for (int i = 0; i < cfg.directions; ++i) {
    const auto f = certificate_direction(cert, inst.system.horizon(), i);
    const auto seed = cfg.seed + static_cast<std::uint64_t>(i);
    for (int k = 0; k < points; ++k) {
      const double t = -tmax + 2.0 * tmax * k / (points - 1);
      const double value = objective(propagate(inst.system, f.scaled(t)), inst);
      text += std::to_string(seed) + ',' + (i % 2 == 0 ? "1" : "0") + ',' + format_real(t) + ',' +
              format_real(value) + '\n';
    }
  }
  write_text_file(out_csv, text);
  out << "wrote " << cfg.directions * points << " rows to " << out_csv.string() << "\n";
  return kExitPass;
}

int cmd_controllability(const std::filesystem::path& config_path, std::ostream& out, std::ostream&) {
  const auto cfg = read_config_file(config_path);
  const auto sys = build_system(cfg.levels, cfg.a, cfg.b, cfg.couplings, cfg.horizon);
  const auto result = lie_rank(sys, cfg.tolerances.lie, 12);
  const int n = sys.levels();
  out << "Lie algebra dimension  " << result.dimension << " (saturation at " << n * n - 1 << ", u(N) has "
      << n * n << ")\n";
  out << "depth reached          " << result.depth_reached << "\n";
  out << "tolerance              " << format_real(result.tolerance) << "\n";
  out << "saturated              " << (result.saturated ? "yes" : "no") << "\n";
  return result.saturated ? kExitPass : kExitCheckFailed;
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Certify higher-order traps of the zero control for degenerate N-level chains"};
  app.require_subcommand(1);

  std::string config;
  std::string report_out;
  auto* certify = app.add_subcommand("certify", "run every trap check and write a JSON certificate");
  certify->add_option("config", config, "run configuration")->required();
  certify->add_option("--out", report_out, "report path (overrides the config's out key)");

  std::string control;
  int order = 0;
  std::string csv;
  auto* diff = app.add_subcommand("differential", "evaluate one Taylor coefficient two ways");
  diff->add_option("config", config, "run configuration")->required();
  diff->add_option("--control", control, "control file")->required();
  diff->add_option("--order", order, "differential order")->required();
  diff->add_option("--csv", csv, "append a CSV row to this file");

  std::string scan_out;
  double tmax = 1.0;
  int points = 11;
  auto* scan = app.add_subcommand("scan", "sample J(t f) along the certificate directions");
  scan->add_option("config", config, "run configuration")->required();
  scan->add_option("--out", scan_out, "CSV output")->required();
  scan->add_option("--tmax", tmax, "largest |t|");
  scan->add_option("--points", points, "t samples per direction");

  auto* ctrl = app.add_subcommand("controllability", "Lie algebra rank test");
  ctrl->add_option("config", config, "run configuration")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitPass : kExitUsage;
  }

  try {
    if (certify->parsed()) return cmd_certify(config, report_out, out, err);
    if (diff->parsed()) return cmd_differential(config, control, order, csv, out, err);
    if (scan->parsed()) return cmd_scan(config, scan_out, tmax, points, out, err);
    if (ctrl->parsed()) return cmd_controllability(config, out, err);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}

}  // namespace trapscope
