#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "rieszlab/harness.hpp"
#include "rieszlab/morrey.hpp"
#include "rieszlab/suites.hpp"

namespace {

using namespace rieszlab;

// Exit codes: 0 all reports pass, 1 some report fails, 2 usage or config error.
int cmd_run(const std::string& path, const std::string& output_dir, const std::vector<std::string>& ids) {
  std::string text;
  if (!path.empty()) {
    std::ifstream in(path);
    if (!in) {
      std::cerr << "error: cannot read config " << path << "\n";
      return 2;
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    text = ss.str();
  }
  SuiteConfig cfg;
  try {
    if (!ids.empty() || !output_dir.empty()) {
      auto j = text.empty() ? nlohmann::json::object() : nlohmann::json::parse(text);
      if (!ids.empty()) j["ids"] = ids;
      if (!output_dir.empty()) j["output_dir"] = output_dir;
      text = j.dump();
    }
    cfg = parse_config(text);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  const RunResult res = run_suite(cfg);
  for (const auto& r : res.reports)
    std::printf("%-20s %s  constant=%.6g  drift=%.4g%s%s\n", r.inequality_id.c_str(), r.pass ? "PASS" : "FAIL",
                r.empirical_constant, r.scale_drift, r.reason.empty() ? "" : "  ", r.reason.c_str());
  std::printf("reports written to %s\n", cfg.output_dir.c_str());
  return res.exit_status;
}

int cmd_list() {
  for (const auto& s : registered_suites()) std::printf("%-20s %s\n", s.id, s.description);
  return 0;
}

int cmd_validate(int d, const TraceParams& tp, bool lebesgue) {
  const auto v = validate_trace_params(d, tp, lebesgue ? TraceWindow::lebesgue : TraceWindow::morrey);
  std::printf("kappa=%.6g eps_exponent=%.6g %s%s\n", v.kappa, v.eps_exponent, v.valid ? "valid" : "invalid: ",
              v.clause.c_str());
  return v.valid ? 0 : 1;
}

int cmd_sweep(double kappa_min, double p, int d, int n) {
  if (!(kappa_min > 0.0) || kappa_min > 0.25) {
    std::cerr << "error: --kappa-min must be in (0, 1/4]\n";
    return 2;
  }
  std::vector<double> kappas;
  for (double k = 0.25; k >= kappa_min * (1.0 - 1e-12); k /= 2.0) kappas.push_back(k);
  if (kappas.size() < 2) {
    std::cerr << "error: the sweep needs at least two kappa values (kappa-min <= 1/8)\n";
    return 2;
  }
  try {
    const SweepResult sw = counterexample_sweep(kappas, p, d, n);
    std::printf("log_kappa,log_norm_bDu,log_norm_D2u,log_norm_u\n");
    for (std::size_t k = 0; k < sw.kappa.size(); ++k)
      std::printf("%.10g,%.10g,%.10g,%.10g\n", std::log(sw.kappa[k]), std::log(sw.norm_bDu[k]),
                  std::log(sw.norm_D2u[k]), std::log(sw.norm_u[k]));
    std::printf("slope_bDu=%.6g slope_D2u=%.6g u_drift=%.6g\n", sw.slope_bDu, sw.slope_D2u, sw.u_drift);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Empirical checks of weighted Morrey and trace inequalities on grids"};
  app.require_subcommand(1);

  std::string config_path, output_dir;
  std::vector<std::string> ids;
  auto* run = app.add_subcommand("run", "run the selected suites and write reports");
  run->add_option("config", config_path, "JSON config (defaults when omitted)");
  run->add_option("--output-dir", output_dir, "override output_dir");
  run->add_option("--id", ids, "run only these ids");

  auto* list = app.add_subcommand("list", "list registered inequality ids");

  int d = 2;
  bool lebesgue = false;
  TraceParams tp{2.0, 4.0, 2.0, 1.5, 1.0, 1.5};
  auto* val = app.add_subcommand("validate-params", "check trace parameters against the admissible window");
  val->add_option("--d", d)->check(CLI::Range(2, 3));
  val->add_option("--p", tp.p);
  val->add_option("--q", tp.q);
  val->add_option("--r", tp.r);
  val->add_option("--beta", tp.beta);
  val->add_option("--gamma", tp.gamma);
  val->add_option("--mu", tp.mu);
  val->add_flag("--lebesgue", lebesgue, "use the L_r trace window");

  double kappa_min = 0.0625, p = 2.0;
  int sd = 3, sn = 65;
  auto* sweep = app.add_subcommand("sweep", "counterexample sweep over kappa = 1/4, 1/8, ... down to kappa-min");
  sweep->add_option("--kappa-min", kappa_min);
  sweep->add_option("--p", p);
  sweep->add_option("--d", sd)->check(CLI::Range(2, 3));
  sweep->add_option("--n", sn)->check(CLI::Range(17, kMaxNodesPerAxis));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }
  if (*run) return cmd_run(config_path, output_dir, ids);
  if (*list) return cmd_list();
  if (*val) return cmd_validate(d, tp, lebesgue);
  return cmd_sweep(kappa_min, p, sd, sn);
}
