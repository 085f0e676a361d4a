#include "rieszlab/suites.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <numbers>

#include "rieszlab/corpus.hpp"
#include "rieszlab/heat.hpp"
#include "rieszlab/parallel.hpp"
#include "rieszlab/report.hpp"
#include "rieszlab/singular_ops.hpp"

namespace rieszlab {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

const std::vector<SuiteInfo> kSuites{
    {"adams-2.1", "weighted Riesz potential bound ||b P_a f||_p <= N ||b||_{E_{q,a}} ||f||_p"},
    {"sharp-max-2.2", "sharp function of a Riesz potential against the fractional maximal function"},
    {"weighted-2.3", "||b u||_p <= N ||b||_{E_{q,1}} ||Du||_p and its second-order form"},
    {"hardy-2.4", "Hardy inequalities with weights |x|^-p and |x|^-2r"},
    {"truncated-2.6", "truncated Morrey quantity: inclusion bound and rho_b power law"},
    {"weighted-2.8", "int |b u|^p <= N b_hat^p (int |Du|^p + rho_b^-p int |u|^p)"},
    {"counterexample-2.9", "kappa sweep showing the second-order weighted bound cannot absorb"},
    {"trace-3.5", "L_r trace of u or Du at t = 0 against L_{p,q} norms"},
    {"trace-local-3.5c", "local L_r(B_rho) trace against norms on C_{2 rho}"},
    {"tail-3.6", "heat potential of f outside C_rho against rho^{g-b} M_b f(0)"},
    {"trace-morrey-3.2", "Morrey trace bound with eps^{-mu/(2-mu)}"},
    {"trace-morrey-3.3", "Morrey trace bound by the E^{1,2} norm"},
    {"trace-remark-3.4", "gradient trace in E_{p,beta} with eps^{-(q+2)/(q-2)}"},
};

ordered_json grid_json(int d, double L, int n) { return ordered_json{{"d", d}, {"L", L}, {"n", n}}; }

ordered_json trace_param_set(double p, double q, double r, double beta, double gamma, double mu) {
  return ordered_json{{"p", p}, {"q", q}, {"r", r}, {"beta", beta}, {"gamma", gamma}, {"mu", mu}};
}

ordered_json default_suites() {
  ordered_json s;
  s["adams-2.1"] = {{"grid", grid_json(3, 2.0, 33)},
                    {"params", {{"p", 2.0}, {"q", 2.5}, {"alpha", 1.0}, {"cases", 20}}}};
  s["sharp-max-2.2"] = {{"grid", grid_json(2, 2.0, 65)}, {"params", {{"alpha", 1.0}, {"cases", 20}}}};
  s["weighted-2.3"] = {{"grid", grid_json(3, 2.0, 33)}, {"params", {{"p", 2.0}, {"q", 2.5}, {"cases", 20}}}};
  s["hardy-2.4"] = {{"grid", grid_json(3, 2.0, 65)},
                    {"params",
                     {{"p", 2.0},
                      {"r", 1.25},
                      {"cases", 20},
                      {"near_extremal_delta", 0.1},
                      {"near_extremal_log_span", 6.0},
                      {"near_extremal_outer_radius_over_L", 0.8}}}};
  s["truncated-2.6"] = {{"grid", grid_json(3, 2.0, 33)},
                        {"params",
                         {{"p_b", 2.0},
                          {"rho_b", {0.25, 0.5}},
                          {"cases", 20},
                          {"slope_n", 65},
                          {"slope_p_b", 6.0},
                          {"slope_rho_b", {0.25, 0.5, 1.0}}}}};
  s["weighted-2.8"] = {{"grid", grid_json(3, 2.0, 33)},
                       {"params", {{"p", 2.0}, {"p_b", {2.5, 6.0}}, {"rho_b", {0.25, 0.5}}, {"cases", 20}}}};
  s["counterexample-2.9"] = {{"grid", {{"d", 3}, {"n", 65}}},
                             {"params", {{"p", 2.0}, {"kappa", {0.25, 0.125, 0.0625}}}}};

  const ordered_json slab{{"t0", -0.25}, {"t1", 0.24609375}, {"m", 128}};
  const ordered_json ex1 = trace_param_set(2.0, 4.0, 2.0, 1.5, 1.0, 1.5);
  const ordered_json ex2 = trace_param_set(1.2, 3.0, 2.0, 2.2, 0.0, 0.0 + 2.0 / 1.2 + 2.0 / 3.0 - 2.0 / 2.0);
  ordered_json trace_params{{"param_sets", {ex1, ex2}},
                            {"eps_log2_min", -10.0},
                            {"eps_log2_max", 10.0},
                            {"eps_steps_per_octave", 2},
                            {"mollifier_eps_over_L", {0.125, 0.0625}},
                            {"cases", 10}};
  for (const char* id : {"trace-3.5", "trace-morrey-3.2", "trace-morrey-3.3"})
    s[id] = {{"grid", grid_json(2, 2.0, 65)}, {"slab", slab}, {"params", trace_params}};
  ordered_json local = trace_params;
  local["rho"] = {0.125, 0.25};
  s["trace-local-3.5c"] = {{"grid", grid_json(2, 2.0, 65)}, {"slab", slab}, {"params", local}};
  ordered_json gradient_beta = trace_params;
  gradient_beta["param_sets"] = {ex1};
  s["trace-remark-3.4"] = {{"grid", grid_json(2, 2.0, 65)}, {"slab", slab}, {"params", gradient_beta}};

  ordered_json pairs = ordered_json::array();
  for (auto [g, b] : {std::pair{0.0, 3.0}, {1.0, 3.0}, {0.5, 2.5}, {1.0, 3.5}})
    pairs.push_back(ordered_json{{"gamma", g}, {"beta", b}});
  s["tail-3.6"] = {{"grid", grid_json(2, 2.0, 65)},
                   {"slab", {{"t0", 1.0 / 128}, {"t1", 1.0 / 128 + 127.0 / 64}, {"m", 128}}},
                   {"params", {{"profiles", pairs}, {"rho", {0.25, 0.5, 1.0}}}}};

  // registry order
  ordered_json out;
  for (const auto& info : kSuites) out[info.id] = s[info.id];
  return out;
}

ordered_json default_thresholds() {
  return {{"scale_drift", 1.5},
          {"hardy_sharp_constant", 4.0},
          {"hardy_slack", 0.05},
          {"hardy_near_extremal_min", 3.0},
          {"truncated_slack", 0.05},
          {"truncated_slope_tol", 0.05},
          {"counterexample_slope_tol", 0.15},
          {"counterexample_u_drift", 2.0},
          {"trace_recovery", 1e-3}};
}

std::string valid_ids() {
  std::string s;
  for (const auto& info : kSuites) s += (s.empty() ? "" : ", ") + std::string(info.id);
  return s;
}

// Objects merge key by key; any other value replaces the default of the same type.
void merge_into(ordered_json& target, const ordered_json& override, const std::string& where) {
  if (!override.is_object()) throw ConfigError(where + " must be an object");
  for (const auto& [k, v] : override.items()) {
    if (!target.contains(k)) throw ConfigError("unknown key " + where + "." + k);
    auto& old = target[k];
    if (old.is_object()) {
      merge_into(old, v, where + "." + k);
      continue;
    }
    const bool ok = (old.is_number() && v.is_number()) || (old.is_array() && v.is_array()) ||
                    (old.is_string() && v.is_string());
    if (!ok) throw ConfigError("wrong type for " + where + "." + k);
    old = v;
  }
}

void check_suite_grid(const std::string& id, const ordered_json& s) {
  const auto& g = s.at("grid");
  const int d = g.at("d").get<int>(), n = g.at("n").get<int>();
  if (d != 2 && d != 3) throw ConfigError(id + ": grid.d must be 2 or 3");
  if (n > kMaxNodesPerAxis) throw ConfigError(id + ": grid.n = " + std::to_string(n) + " exceeds the cap " +
                                              std::to_string(kMaxNodesPerAxis));
  if (n < 5 || n % 2 == 0) throw ConfigError(id + ": grid.n must be odd and at least 5");
  if (g.contains("L") && !(g.at("L").get<double>() > 0.0)) throw ConfigError(id + ": grid.L must be positive");
  if (s.contains("slab")) {
    const auto& sl = s.at("slab");
    const int m = sl.at("m").get<int>();
    if (m > kMaxTimeNodes) throw ConfigError(id + ": slab.m = " + std::to_string(m) + " exceeds the cap " +
                                             std::to_string(kMaxTimeNodes));
    if (m < 3) throw ConfigError(id + ": slab.m must be at least 3");
    if (!(sl.at("t1").get<double>() > sl.at("t0").get<double>())) throw ConfigError(id + ": slab needs t1 > t0");
  }
  if (id == "truncated-2.6" && s.at("params").at("slope_n").get<int>() > kMaxNodesPerAxis)
    throw ConfigError(id + ": params.slope_n exceeds the cap " + std::to_string(kMaxNodesPerAxis));
}

GridSpec grid_of(const ordered_json& s) {
  const auto& g = s.at("grid");
  return GridSpec(g.at("d").get<int>(), g.at("L").get<double>(), g.at("n").get<int>());
}

SpaceTimeGridSpec slab_of(const ordered_json& s) {
  const auto& sl = s.at("slab");
  return SpaceTimeGridSpec(grid_of(s), sl.at("t0").get<double>(), sl.at("t1").get<double>(), sl.at("m").get<int>());
}

std::vector<double> reals(const ordered_json& j) { return j.get<std::vector<double>>(); }

std::vector<double> scales_of(const SuiteConfig& cfg) {
  std::vector<double> out;
  for (int s = 0; s < cfg.scale_count; ++s) out.push_back(std::ldexp(1.0, s));
  return out;
}

using Task = std::function<std::vector<CaseResult>()>;

// Runs independent tasks, possibly concurrently, and concatenates their
// results in task order.
std::vector<CaseResult> run_tasks(const std::vector<Task>& tasks) {
  std::vector<std::vector<CaseResult>> parts(tasks.size());
  parallel_for(0, tasks.size(), [&](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i) parts[i] = tasks[i]();
  });
  std::vector<CaseResult> out;
  for (auto& p : parts)
    for (auto& c : p) out.push_back(std::move(c));
  return out;
}

CaseResult with_id(CaseResult r, std::string id, int scale) {
  r.case_id = std::move(id);
  r.scale_index = scale;
  return r;
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

// Whether b belongs to the homogeneous Morrey space E_{q,beta}: a pure power
// |x|^{-a} does only for a = beta, and needs a q < d to be locally integrable.
bool weight_in_morrey(const CorpusCase& c, double q, double beta) {
  if (c.kind != CaseKind::singular_weight) return true;
  const double a = c.param("a");
  return a == beta && a * q < c.spatial().d();
}

bool in_lebesgue(const CorpusCase& c, double p) { return singular_exponent(c) * p < c.spatial().d(); }

EstimateOptions estimate_options(const SuiteConfig& cfg) {
  EstimateOptions o;
  o.drift_threshold = cfg.threshold("scale_drift");
  return o;
}

void fail(VerificationReport& rep, const std::string& why) {
  rep.pass = false;
  rep.reason += (rep.reason.empty() ? "" : "; ") + why;
}

// ---- suites ----

SuiteOutput suite_adams(const SuiteConfig& cfg, const ordered_json& s) {
  const auto& P = s.at("params");
  const AdamsParams ap{P.at("p").get<double>(), P.at("q").get<double>(), P.at("alpha").get<double>()};
  const GridSpec grid = grid_of(s);
  const auto kinds = elliptic_kinds();
  const auto corpus = build_corpus(cfg.seed, kinds, grid, P.at("cases").get<int>());
  std::vector<CorpusCase> weights, data;
  for (const auto& c : corpus) {
    if (weight_in_morrey(c, ap.q, ap.alpha)) weights.push_back(c);
    if (c.kind != CaseKind::singular_weight && in_lebesgue(c, ap.p)) data.push_back(c);
  }
  const auto lambdas = scales_of(cfg);
  std::vector<Task> tasks;
  for (std::size_t si = 0; si < lambdas.size(); ++si)
    for (std::size_t i = 0; i < weights.size(); ++i)
      tasks.push_back([&, si, i] {
        const CorpusCase& f = data[i % data.size()];
        const auto r = ratio_adams(realize(weights[i], lambdas[si]), realize(f, lambdas[si]), ap);
        return std::vector{with_id(r, weights[i].case_id + "|" + f.case_id, static_cast<int>(si))};
      });
  SuiteOutput out;
  out.report = estimate_constant("adams-2.1", run_tasks(tasks), estimate_options(cfg));
  out.report.params["weights"] = weights.size();
  out.report.params["data"] = data.size();
  return out;
}

// Dyadic radii up to the box half-width L, so every ball around an interior
// node reaches the support of centered data.
RadiusSet reaching_radii(const GridSpec& spec) {
  std::vector<double> r;
  for (double x = 2.0 * spec.h(); x < spec.L() * (1.0 - 1e-12); x *= 2.0) r.push_back(x);
  r.push_back(spec.L());
  return RadiusSet(std::move(r), CapMode::homogeneous);
}

SuiteOutput suite_sharp(const SuiteConfig& cfg, const ordered_json& s) {
  const auto& P = s.at("params");
  const double alpha = P.at("alpha").get<double>();
  const GridSpec grid = grid_of(s);
  const std::vector<CaseKind> kinds{CaseKind::gaussian, CaseKind::bump, CaseKind::indicator_ball};
  const auto corpus = build_corpus(cfg.seed, kinds, grid, P.at("cases").get<int>());
  const auto lambdas = scales_of(cfg);
  std::vector<MadBracket> brackets(corpus.size());
  std::vector<Task> tasks;
  for (std::size_t si = 0; si < lambdas.size(); ++si)
    for (std::size_t i = 0; i < corpus.size(); ++i)
      tasks.push_back([&, si, i] {
        const GridFunction g = realize(corpus[i], lambdas[si]);
        const auto radii = reaching_radii(g.spec());
        const auto nodes = interior_nodes(g.spec());
        if (si == 0)
          brackets[i] = mad_bracket_check(riesz_potential(g, {alpha}), radii, nodes, kDefaultPairBudget);
        const auto r = ratio_sharp_maximal(g, alpha, radii, nodes);
        return std::vector{with_id(r.result, corpus[i].case_id, static_cast<int>(si))};
      });
  SuiteOutput out;
  out.report = estimate_constant("sharp-max-2.2", run_tasks(tasks), estimate_options(cfg));
  MadBracket total;
  for (const auto& b : brackets) {
    total.balls += b.balls;
    total.violations += b.violations;
    total.worst_lower = std::max(total.worst_lower, b.worst_lower);
    total.worst_upper = std::max(total.worst_upper, b.worst_upper);
  }
  out.report.params["mad_bracket"] = {{"balls", total.balls},
                                      {"violations", total.violations},
                                      {"max_mad_minus_pair_mean", total.worst_lower},
                                      {"max_pair_mean_minus_2mad", total.worst_upper}};
  if (total.violations > 0) fail(out.report, "MAD bracket violated");
  if (total.balls == 0) fail(out.report, "no exhaustive balls for the MAD bracket");
  return out;
}

SuiteOutput suite_weighted(const SuiteConfig& cfg, const ordered_json& s) {
  const auto& P = s.at("params");
  const WeightedParams wp{P.at("p").get<double>(), P.at("q").get<double>()};
  const GridSpec grid = grid_of(s);
  const int count = P.at("cases").get<int>();
  const auto kinds = elliptic_kinds();
  const std::vector<CaseKind> smooth{CaseKind::gaussian, CaseKind::bump};
  std::vector<CorpusCase> weights;
  for (const auto& c : build_corpus(cfg.seed, kinds, grid, count))
    if (weight_in_morrey(c, wp.q, 1.0)) weights.push_back(c);
  const auto us = build_corpus(cfg.seed, smooth, grid, count);
  const auto lambdas = scales_of(cfg);
  std::vector<Task> tasks;
  for (std::size_t si = 0; si < lambdas.size(); ++si)
    for (std::size_t i = 0; i < weights.size(); ++i)
      tasks.push_back([&, si, i] {
        const auto& u = us[i % us.size()];
        const GridFunction b = realize(weights[i], lambdas[si]), uf = realize(u, lambdas[si]);
        const std::string id = weights[i].case_id + "|" + u.case_id;
        const int sc = static_cast<int>(si);
        return std::vector{with_id(ratio_weighted(b, uf, wp, WeightedForm::gradient), id, sc),
                           with_id(ratio_weighted(b, uf, wp, WeightedForm::hessian), id + ":D", sc)};
      });
  SuiteOutput out;
  out.report = estimate_constant("weighted-2.3", run_tasks(tasks), estimate_options(cfg));
  double first = 0.0, second = 0.0;
  for (const auto& c : out.report.cases) {
    double& slot = c.case_id.ends_with(":D") ? second : first;
    slot = std::max(slot, c.ratio);
  }
  out.report.params["empirical_constant_first_form"] = first;
  out.report.params["empirical_constant_second_form"] = second;
  return out;
}

GridFunction near_extremal_on(const GridSpec& spec, double p, double delta, double span, double r_outer) {
  const int d = spec.d();
  const SingularNode origin{spec.origin_index(), near_extremal_profile(d, p, delta, span, r_outer, spec.h() / 2)};
  return sample(
      spec,
      [&](const Point& x) {
        const double r = std::sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]);
        return near_extremal_profile(d, p, delta, span, r_outer, r);
      },
      std::span<const SingularNode>(&origin, 1));
}

SuiteOutput suite_hardy(const SuiteConfig& cfg, const ordered_json& s) {
  const auto& P = s.at("params");
  const double p = P.at("p").get<double>(), r = P.at("r").get<double>();
  const double delta = P.at("near_extremal_delta").get<double>();
  const double span = P.at("near_extremal_log_span").get<double>();
  const double outer = P.at("near_extremal_outer_radius_over_L").get<double>();
  const GridSpec grid = grid_of(s);
  const std::vector<CaseKind> kinds{CaseKind::gaussian, CaseKind::bump, CaseKind::u_kappa};
  const auto corpus = build_corpus(cfg.seed, kinds, grid, P.at("cases").get<int>());
  const auto lambdas = scales_of(cfg);
  std::vector<Task> tasks;
  for (std::size_t si = 0; si < lambdas.size(); ++si) {
    const int sc = static_cast<int>(si);
    for (std::size_t i = 0; i < corpus.size(); ++i)
      tasks.push_back([&, si, i, sc] {
        const GridFunction u = realize(corpus[i], lambdas[si]);
        return std::vector{with_id(ratio_hardy(u, p, HardyForm::gradient), corpus[i].case_id, sc),
                           with_id(ratio_hardy(u, r, HardyForm::hessian), corpus[i].case_id + ":D2", sc)};
      });
    tasks.push_back([&, si, sc] {
      const GridSpec g = grid.dilated(lambdas[si]);
      const GridFunction u = near_extremal_on(g, p, delta, span, outer * g.L());
      return std::vector{with_id(ratio_hardy(u, p, HardyForm::gradient), "near_extremal" + fmt(":delta=%g", delta), sc)};
    });
  }
  SuiteOutput out;
  out.report = estimate_constant("hardy-2.4", run_tasks(tasks), estimate_options(cfg));
  const double bound = cfg.threshold("hardy_sharp_constant") * (1.0 + cfg.threshold("hardy_slack"));
  double first = 0.0, second = 0.0, grid_near = 0.0;
  for (const auto& c : out.report.cases) {
    if (c.case_id.ends_with(":D2"))
      second = std::max(second, c.ratio);
    else
      first = std::max(first, c.ratio);
    if (c.case_id.starts_with("near_extremal")) grid_near = std::max(grid_near, c.ratio);
  }
  const int d = grid.d();
  const double oracle = hardy_near_extremal_ratio(d, p, delta, span);
  const double classical = std::pow(p / (d - p), p);
  out.report.params["classical_sharp_constant"] = classical;
  out.report.params["max_ratio_first_form"] = first;
  out.report.params["max_ratio_second_form"] = second;
  out.report.params["near_extremal_oracle_ratio"] = oracle;
  out.report.params["near_extremal_grid_ratio"] = grid_near;
  if (first > bound) fail(out.report, "first-form ratio exceeds the sharp-constant bound");
  if (oracle < cfg.threshold("hardy_near_extremal_min")) fail(out.report, "near-extremal ratio below the minimum");
  return out;
}

SuiteOutput suite_truncated(const SuiteConfig& cfg, const ordered_json& s) {
  const auto& P = s.at("params");
  const double pb = P.at("p_b").get<double>();
  const auto rhos = reals(P.at("rho_b"));
  const GridSpec grid = grid_of(s);
  const auto kinds = elliptic_kinds();
  std::vector<CorpusCase> weights;
  for (const auto& c : build_corpus(cfg.seed, kinds, grid, P.at("cases").get<int>()))
    if (in_lebesgue(c, pb)) weights.push_back(c);
  const auto lambdas = scales_of(cfg);
  std::vector<Task> tasks;
  for (std::size_t si = 0; si < lambdas.size(); ++si)
    for (std::size_t i = 0; i < weights.size(); ++i)
      tasks.push_back([&, si, i] {
        const GridFunction b = realize(weights[i], lambdas[si]);
        std::vector<CaseResult> rs;
        for (double rb : rhos)
          rs.push_back(with_id(truncated_inclusion(b, {pb, rb / lambdas[si]}),
                               weights[i].case_id + fmt(":rb=%g", rb), static_cast<int>(si)));
        return rs;
      });
  SuiteOutput out;
  out.report = estimate_constant("truncated-2.6", run_tasks(tasks), estimate_options(cfg));

  // rho_b power law for a bounded weight concentrated near the origin
  const int d = grid.d();
  const GridSpec fine(d, grid.L(), P.at("slope_n").get<int>());
  const double spb = P.at("slope_p_b").get<double>();
  const auto srho = reals(P.at("slope_rho_b"));
  const double R = 2.0 * fine.h();
  const GridFunction narrow = sample(fine, [&](const Point& x) {
    const double y = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]) / (R * R);
    return y < 1.0 ? std::exp(-1.0 / (1.0 - y)) : 0.0;
  });
  const GridFunction flat = sample(fine, [](const Point&) { return 1.0; });
  std::vector<double> bh, bc;
  ordered_json norms = ordered_json::array();
  for (double rb : srho) {
    const MorreyResult m = truncated_morrey(narrow, {spb, rb});
    bh.push_back(m.value);
    bc.push_back(truncated_morrey(flat, {spb, rb}).value);
    norms.push_back(norm_result_to_json("truncated_morrey", {{"p_b", spb}, {"rho_b", rb}}, m, fine));
  }
  const double slope = fit_loglog_slope(srho, bh), want = 1.0 - d / spb;
  const double bound = 1.0 + cfg.threshold("truncated_slack");
  out.report.params["max_inclusion_ratio"] = out.report.empirical_constant;
  out.report.params["slope"] = {{"p_b", spb},
                                {"rho_b", srho},
                                {"b_hat", bh},
                                {"fitted", slope},
                                {"expected", want},
                                {"narrow_bump_radius", R},
                                {"constant_weight_b_hat", bc},
                                {"constant_weight_slope", fit_loglog_slope(srho, bc)},
                                {"norms", norms}};
  if (out.report.empirical_constant > bound) fail(out.report, "inclusion ratio exceeds 1 + slack");
  if (std::abs(slope - want) > cfg.threshold("truncated_slope_tol")) fail(out.report, "b_hat slope off 1 - d/p_b");
  return out;
}

SuiteOutput suite_weighted_truncated(const SuiteConfig& cfg, const ordered_json& s) {
  const auto& P = s.at("params");
  const double p = P.at("p").get<double>();
  const auto pbs = reals(P.at("p_b"));
  const auto rhos = reals(P.at("rho_b"));
  const GridSpec grid = grid_of(s);
  const int count = P.at("cases").get<int>();
  const auto kinds = elliptic_kinds();
  const std::vector<CaseKind> smooth{CaseKind::gaussian, CaseKind::bump};
  const auto weights = build_corpus(cfg.seed, kinds, grid, count);
  const auto us = build_corpus(cfg.seed, smooth, grid, count);
  const auto lambdas = scales_of(cfg);
  std::vector<Task> tasks;
  for (std::size_t si = 0; si < lambdas.size(); ++si)
    for (std::size_t i = 0; i < weights.size(); ++i)
      tasks.push_back([&, si, i] {
        const auto& u = us[i % us.size()];
        const GridFunction b = realize(weights[i], lambdas[si]), uf = realize(u, lambdas[si]);
        std::vector<CaseResult> rs;
        for (double pb : pbs) {
          if (!in_lebesgue(weights[i], pb)) continue;
          for (double rb : rhos)
            rs.push_back(with_id(ratio_weighted_truncated(b, uf, p, {pb, rb / lambdas[si]}),
                                 weights[i].case_id + "|" + u.case_id + fmt(":pb=%g", pb) + fmt(":rb=%g", rb),
                                 static_cast<int>(si)));
        }
        return rs;
      });
  SuiteOutput out;
  out.report = estimate_constant("weighted-2.8", run_tasks(tasks), estimate_options(cfg));
  return out;
}

SuiteOutput suite_counterexample(const SuiteConfig& cfg, const ordered_json& s) {
  const auto& P = s.at("params");
  const auto& G = s.at("grid");
  const double p = P.at("p").get<double>();
  const auto kappas = reals(P.at("kappa"));
  const SweepResult sw = counterexample_sweep(kappas, p, G.at("d").get<int>(), G.at("n").get<int>());
  EstimateOptions o = estimate_options(cfg);
  o.min_cases = static_cast<int>(kappas.size());
  SuiteOutput out;
  out.report = estimate_constant("counterexample-2.9", sw.cases, o);
  const double tol = cfg.threshold("counterexample_slope_tol");
  const int d = G.at("d").get<int>();
  out.report.params["sweep"] = {{"kappa", sw.kappa},
                                {"norm_bDu", sw.norm_bDu},
                                {"norm_D2u", sw.norm_D2u},
                                {"norm_u", sw.norm_u},
                                {"raw_norm_bDu", sw.raw_bDu},
                                {"raw_norm_D2u", sw.raw_D2u},
                                {"raw_norm_u", sw.raw_u},
                                {"slope_bDu", sw.slope_bDu},
                                {"slope_D2u", sw.slope_D2u},
                                {"raw_slope_bDu", sw.raw_slope_bDu},
                                {"raw_slope_D2u", sw.raw_slope_D2u},
                                {"expected_slope", -2.0},
                                {"expected_raw_slope", -2.0 + d / p},
                                {"u_drift", sw.u_drift},
                                {"annulus_error", sw.annulus_error},
                                {"annulus_bound", sw.annulus_bound}};
  if (std::abs(sw.slope_bDu + 2.0) > tol || std::abs(sw.slope_D2u + 2.0) > tol)
    fail(out.report, "sweep slopes off -2");
  if (sw.u_drift > cfg.threshold("counterexample_u_drift")) fail(out.report, "||u_kappa|| drifts too much");
  if (sw.annulus_error > sw.annulus_bound) fail(out.report, "|Du_kappa| off 1/kappa on the annulus");
  std::string csv = "log_kappa,log_norm_bDu,log_norm_D2u,log_norm_u,log_raw_norm_bDu,log_raw_norm_D2u,log_raw_norm_u\n";
  char buf[256];
  for (std::size_t k = 0; k < sw.kappa.size(); ++k) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", std::log(sw.kappa[k]),
                  std::log(sw.norm_bDu[k]), std::log(sw.norm_D2u[k]), std::log(sw.norm_u[k]),
                  std::log(sw.raw_bDu[k]), std::log(sw.raw_D2u[k]), std::log(sw.raw_u[k]));
    csv += buf;
  }
  out.extra_files.emplace_back("counterexample-2.9.sweep.csv", std::move(csv));
  return out;
}

TraceParams trace_params(const ordered_json& j) {
  return {j.at("p").get<double>(), j.at("q").get<double>(),     j.at("r").get<double>(),
          j.at("beta").get<double>(), j.at("gamma").get<double>(), j.at("mu").get<double>()};
}

std::vector<double> eps_list(const ordered_json& P) {
  const double lo = P.at("eps_log2_min").get<double>(), hi = P.at("eps_log2_max").get<double>();
  const int per = P.at("eps_steps_per_octave").get<int>();
  if (per < 1 || !(hi > lo)) throw ConfigError("bad eps range");
  std::vector<double> out;
  const int steps = static_cast<int>(std::lround((hi - lo) * per));
  for (int k = 0; k <= steps; ++k) out.push_back(std::exp2(lo + static_cast<double>(k) / per));
  return out;
}

GridFunction time_independent_recovery_slice(const GridSpec& g) {
  const double R2 = 0.36 * g.L() * g.L();
  return sample(g, [&](const Point& x) {
    const double y = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]) / R2;
    return y < 1.0 ? std::pow(1.0 - y, 4) : 0.0;
  });
}

SuiteOutput suite_trace(const SuiteConfig& cfg, const std::string& id, const ordered_json& s) {
  const auto& P = s.at("params");
  const SpaceTimeGridSpec slab = slab_of(s);
  const int d = slab.spatial().d();
  const auto corpus = build_corpus(cfg.seed, space_time_kinds(), slab, P.at("cases").get<int>());
  std::vector<TraceParams> sets;
  ordered_json validity = ordered_json::array();
  for (const auto& j : P.at("param_sets")) {
    sets.push_back(trace_params(j));
    const bool lebesgue = id == "trace-3.5" || id == "trace-local-3.5c";
    const auto v = validate_trace_params(d, sets.back(), lebesgue ? TraceWindow::lebesgue : TraceWindow::morrey);
    validity.push_back({{"valid", v.valid}, {"clause", v.clause}, {"kappa", v.kappa}, {"eps_exponent", v.eps_exponent}});
  }
  const auto eps = eps_list(P);
  const auto mol = reals(P.at("mollifier_eps_over_L"));
  std::vector<double> rhos{0.0};
  if (id == "trace-local-3.5c") rhos = reals(P.at("rho"));
  TraceMode mode = TraceMode::lr_global;
  if (id == "trace-local-3.5c") mode = TraceMode::lr_local;
  if (id == "trace-morrey-3.2") mode = TraceMode::morrey_mu;
  if (id == "trace-morrey-3.3") mode = TraceMode::morrey_full;
  if (id == "trace-remark-3.4") mode = TraceMode::gradient_beta;

  const auto lambdas = scales_of(cfg);
  std::vector<Task> tasks;
  for (std::size_t si = 0; si < lambdas.size(); ++si)
    for (std::size_t i = 0; i < corpus.size(); ++i)
      for (std::size_t k = 0; k < sets.size(); ++k)
        for (double rho : rhos)
          tasks.push_back([&, si, i, k, rho] {
            const double lam = lambdas[si];
            const SpaceTimeFunction u = realize_space_time(corpus[i], lam);
            TraceRunOptions opt;
            for (double e : mol) opt.mollifier_eps.push_back(e * slab.spatial().L() / lam);
            opt.rho = rho / lam;
            std::string cid = corpus[i].case_id + ":ps" + std::to_string(k);
            if (rho > 0.0) cid += fmt(":rho=%g", rho);
            const int sc = static_cast<int>(si);
            auto rs = ratio_trace(u, d, sets[k], eps, mode, opt, cid, sc);
            if (mode == TraceMode::morrey_full)
              for (auto& r : ratio_trace(u, d, sets[k], eps, TraceMode::morrey_homogeneous, opt, cid + ":homogeneous", sc))
                rs.push_back(std::move(r));
            return rs;
          });
  EstimateOptions o = estimate_options(cfg);
  if (mode == TraceMode::morrey_full) o.drift_suffix = ":homogeneous";
  // This lhs norm is weaker than the one in the Morrey trace, so the ratio scales by
  // lambda^{1 - kappa} under dilation; bounded means non-increasing maxima.
  if (mode == TraceMode::gradient_beta) o.drift_threshold = std::numeric_limits<double>::infinity();
  SuiteOutput out;
  out.report = estimate_constant(id, run_tasks(tasks), o);
  if (mode == TraceMode::gradient_beta) {
    std::vector<double> peak(lambdas.size(), 0.0);
    for (const auto& c : out.report.cases) peak[c.scale_index] = std::max(peak[c.scale_index], c.ratio);
    bool grows = false;
    for (std::size_t k = 1; k < peak.size(); ++k) grows = grows || peak[k] > peak[k - 1] * (1.0 + 1e-9);
    out.report.params["max_ratio_by_scale"] = peak;
    if (grows) fail(out.report, "ratio maxima grow under dilation");
  }
  out.report.params["validity"] = validity;
  if (mode != TraceMode::morrey_full) out.report.params["eps_count"] = eps.size();
  ordered_json exps = ordered_json::array();
  for (const auto& tp : sets) exps.push_back(trace_eps_exponent(d, tp, mode));
  out.report.params["eps_exponents"] = exps;
  if (mode == TraceMode::morrey_full) out.report.params["scale_drift_basis"] = "homogeneous";
  if (mode == TraceMode::gradient_beta) {
    ordered_json rq = ordered_json::array();
    for (const auto& tp : sets) rq.push_back((tp.q + 2.0) / (tp.q - 2.0));
    out.report.params["eps_exponents_gradient_beta"] = rq;
  }
  for (const auto& v : validity)
    if (!v.at("valid").get<bool>()) fail(out.report, "parameter window violated: " + v.at("clause").get<std::string>());

  if (mode == TraceMode::lr_global) {
    const GridFunction g = time_independent_recovery_slice(slab.spatial());
    std::vector<double> v;
    for (int j = 0; j < slab.m(); ++j) v.insert(v.end(), g.values().begin(), g.values().end());
    const SpaceTimeFunction u(slab, std::move(v), g.support_margin());
    std::vector<double> me;
    for (double e : mol) me.push_back(e * slab.spatial().L());
    const TraceResult tr = trace(u, 0, me);
    double err = 0.0, peak = 0.0;
    const double R = slab.spatial().L() / 2.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
      const Point x = slab.spatial().point(i);
      if (x[0] * x[0] + x[1] * x[1] + x[2] * x[2] >= R * R) continue;
      err = std::max(err, std::abs(tr.limit[0][i] - g[i]));
      peak = std::max(peak, std::abs(g[i]));
    }
    out.report.params["time_independent_recovery"] = err / peak;
    if (err / peak > cfg.threshold("trace_recovery")) fail(out.report, "time-independent trace not recovered");
  }
  if (mode == TraceMode::morrey_full) {
    ordered_json hq = ordered_json::array();
    for (const auto& tp : sets) {
      if (!(tp.beta < 2.0)) {
        hq.push_back({{"beta", tp.beta}, {"exponent", nullptr}, {"max_quotient", nullptr}});
        continue;
      }
      double q = 0.0;
      for (const auto& c : corpus) {
        const SpaceTimeFunction u = realize_space_time(c, 1.0);
        std::vector<double> me;
        for (double e : mol) me.push_back(e * slab.spatial().L());
        q = std::max(q, holder_quotient(trace(u, 0, me).limit[0], 2.0 - tp.beta));
      }
      hq.push_back({{"beta", tp.beta}, {"exponent", 2.0 - tp.beta}, {"max_quotient", q}});
    }
    out.report.params["holder_diagnostic"] = hq;
  }
  return out;
}

SpaceTimeFunction power_profile(const SpaceTimeGridSpec& slab, double beta, bool tilted) {
  const GridSpec& g = slab.spatial();
  std::vector<double> v(slab.size());
  for (int j = 0; j < slab.m(); ++j) {
    const double t = slab.time(j);
    for (std::size_t i = 0; i < g.size(); ++i) {
      const Point y = g.point(i);
      const double q = y[0] * y[0] + y[1] * y[1] + y[2] * y[2] + t;
      double f = std::pow(q, -beta / 2.0);
      if (tilted) f *= 1.0 + 0.5 * y[0] / std::sqrt(q);
      v[j * g.size() + i] = f;
    }
  }
  return SpaceTimeFunction(slab, std::move(v), 0);
}

SuiteOutput suite_tail(const SuiteConfig&, const ordered_json& s) {
  const auto& P = s.at("params");
  const SpaceTimeGridSpec slab = slab_of(s);
  const auto rhos = reals(P.at("rho"));
  std::vector<Task> tasks;
  for (const auto& pr : P.at("profiles")) {
    const double gamma = pr.at("gamma").get<double>(), beta = pr.at("beta").get<double>();
    for (bool tilted : {false, true})
      tasks.push_back([&, gamma, beta, tilted] {
        const std::string id = fmt("g%g", gamma) + fmt("-b%g", beta) + (tilted ? ":tilted" : ":radial");
        return ratio_tail(power_profile(slab, beta, tilted), gamma, beta, rhos, id);
      });
  }
  EstimateOptions o;
  o.drift_threshold = 1.5;
  SuiteOutput out;
  out.report = estimate_constant("tail-3.6", run_tasks(tasks), o);
  // indicator of C_1 \ C_{1/2}, reported only
  const GridSpec& g = slab.spatial();
  std::vector<double> v(slab.size());
  for (int j = 0; j < slab.m(); ++j)
    for (std::size_t i = 0; i < g.size(); ++i) {
      const Point y = g.point(i);
      const double r2 = y[0] * y[0] + y[1] * y[1] + y[2] * y[2], t = slab.time(j);
      const bool outer = t < 1.0 && r2 < 1.0, inner = t < 0.25 && r2 < 0.25;
      v[j * g.size() + i] = outer && !inner ? 1.0 : 0.0;
    }
  const SpaceTimeFunction ind(slab, std::move(v), 0);
  ordered_json ir = ordered_json::array();
  for (const auto& c : ratio_tail(ind, 0.0, 3.0, rhos, "indicator")) ir.push_back(c.ratio);
  out.report.params["annular_indicator"] = {
      {"outer", 1.0}, {"inner", 0.5}, {"gamma", 0.0}, {"beta", 3.0}, {"ratio_by_rho", ir}};
  return out;
}

SuiteOutput dispatch(const SuiteConfig& cfg, const std::string& id, const ordered_json& s) {
  if (id == "adams-2.1") return suite_adams(cfg, s);
  if (id == "sharp-max-2.2") return suite_sharp(cfg, s);
  if (id == "weighted-2.3") return suite_weighted(cfg, s);
  if (id == "hardy-2.4") return suite_hardy(cfg, s);
  if (id == "truncated-2.6") return suite_truncated(cfg, s);
  if (id == "weighted-2.8") return suite_weighted_truncated(cfg, s);
  if (id == "counterexample-2.9") return suite_counterexample(cfg, s);
  if (id == "tail-3.6") return suite_tail(cfg, s);
  return suite_trace(cfg, id, s);
}

}  // namespace

const std::vector<SuiteInfo>& registered_suites() { return kSuites; }

bool is_registered(std::string_view id) {
  return std::any_of(kSuites.begin(), kSuites.end(), [&](const SuiteInfo& s) { return id == s.id; });
}

static SuiteConfig parse_config_checked(std::string_view text);

SuiteConfig parse_config(std::string_view text) {
  try {
    return parse_config_checked(text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad config value: ") + e.what());
  } catch (const GridError& e) {
    throw ConfigError(e.what());
  }
}

static SuiteConfig parse_config_checked(std::string_view text) {
  ordered_json in = ordered_json::object();
  bool blank = true;
  for (char c : text) blank = blank && std::isspace(static_cast<unsigned char>(c));
  if (!blank) {
    try {
      in = ordered_json::parse(text);
    } catch (const ordered_json::parse_error& e) {
      throw ConfigError(std::string("malformed config: ") + e.what());
    }
  }
  if (!in.is_object()) throw ConfigError("config must be a JSON object");
  static const std::vector<std::string> keys{"seed", "ids",  "scale_count", "thresholds", "output_dir",
                                             "formats", "grid", "slab", "suites"};
  for (const auto& [k, v] : in.items())
    if (std::find(keys.begin(), keys.end(), k) == keys.end()) throw ConfigError("unknown key " + k);

  SuiteConfig cfg;
  try {
    cfg.seed = in.value("seed", std::uint64_t{1});
    cfg.scale_count = in.value("scale_count", 3);
    cfg.output_dir = in.value("output_dir", std::string("reports"));
    cfg.formats = in.value("formats", std::vector<std::string>{"json", "csv"});
    if (in.contains("ids")) {
      cfg.ids = in.at("ids").get<std::vector<std::string>>();
    } else {
      for (const auto& s : kSuites) cfg.ids.push_back(s.id);
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad config value: ") + e.what());
  }
  for (const auto& id : cfg.ids)
    if (!is_registered(id)) throw ConfigError("unknown inequality id '" + id + "'; registered ids: " + valid_ids());
  if (cfg.ids.empty()) throw ConfigError("no inequality ids selected");
  if (cfg.scale_count < 2 || cfg.scale_count > 4) throw ConfigError("scale_count must be in [2, 4]");
  for (const auto& f : cfg.formats)
    if (f != "json" && f != "csv") throw ConfigError("unknown format '" + f + "'; valid formats: json, csv");

  cfg.thresholds = default_thresholds();
  if (in.contains("thresholds")) merge_into(cfg.thresholds, in.at("thresholds"), "thresholds");

  ordered_json all = default_suites();
  for (auto& [id, s] : all.items()) {
    if (in.contains("grid")) {
      for (const auto& [k, v] : in.at("grid").items()) {
        if (k != "d" && k != "L" && k != "n") throw ConfigError("unknown key grid." + k);
        if (!v.is_number()) throw ConfigError("wrong type for grid." + k);
        if (s.at("grid").contains(k)) s["grid"][k] = v;
      }
    }
    if (in.contains("slab") && s.contains("slab")) merge_into(s["slab"], in.at("slab"), "slab");
  }
  if (in.contains("suites")) {
    const auto& su = in.at("suites");
    if (!su.is_object()) throw ConfigError("suites must be an object");
    for (const auto& [id, v] : su.items()) {
      if (!is_registered(id)) throw ConfigError("unknown inequality id '" + id + "'; registered ids: " + valid_ids());
      merge_into(all[id], v, "suites." + id);
    }
  }
  cfg.suites = ordered_json::object();
  for (const auto& id : cfg.ids) {
    check_suite_grid(id, all.at(id));
    cfg.suites[id] = all.at(id);
  }
  cfg.echo = {{"seed", cfg.seed},           {"ids", cfg.ids},           {"scale_count", cfg.scale_count},
              {"thresholds", cfg.thresholds}, {"output_dir", cfg.output_dir}, {"formats", cfg.formats},
              {"suites", cfg.suites}};
  // where the reports go does not change them
  ordered_json hashed = cfg.echo;
  hashed.erase("output_dir");
  cfg.config_hash = fnv1a64_hex(hashed.dump());
  return cfg;
}

SuiteOutput run_one(const SuiteConfig& cfg, const std::string& id) {
  if (!is_registered(id)) throw ConfigError("unknown inequality id '" + id + "'; registered ids: " + valid_ids());
  const ordered_json& s = cfg.suites.at(id);
  SuiteOutput out;
  try {
    out = dispatch(cfg, id, s);
  } catch (const std::exception& e) {
    out = SuiteOutput{};
    out.report.inequality_id = id;
    out.report.pass = false;
    out.report.reason = std::string("suite failed: ") + e.what();
  }
  ordered_json params = s;
  if (id != "tail-3.6" && id != "counterexample-2.9") {
    ordered_json sc = ordered_json::array();
    for (double l : scales_of(cfg)) sc.push_back(l);
    params["scales"] = sc;
  }
  for (const auto& [k, v] : out.report.params.items()) params["results"][k] = v;
  out.report.params = std::move(params);
  out.report.provenance = {cfg.seed, cfg.config_hash, kVersion};
  return out;
}

RunResult run_suite(const SuiteConfig& cfg) {
  namespace fs = std::filesystem;
  const fs::path dir(cfg.output_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create " + dir.string() + ": " + ec.message());
  write_text(dir / "config.echo.json", cfg.echo.dump(2) + "\n");
  RunResult res;
  ordered_json entries = ordered_json::array();
  bool all = true;
  for (const auto& id : cfg.ids) {
    SuiteOutput o = run_one(cfg, id);
    const auto& r = o.report;
    for (const auto& f : cfg.formats) {
      if (f == "json") write_text(dir / (id + ".json"), report_to_json(r).dump(2) + "\n");
      if (f == "csv") write_text(dir / (id + ".csv"), report_to_csv(r));
    }
    for (const auto& [name, text] : o.extra_files) write_text(dir / name, text);
    all = all && r.pass;
    entries.push_back({{"inequality_id", id},
                       {"pass", r.pass},
                       {"empirical_constant", std::isfinite(r.empirical_constant) ? ordered_json(r.empirical_constant) : ordered_json(nullptr)},
                       {"scale_drift", std::isfinite(r.scale_drift) ? ordered_json(r.scale_drift) : ordered_json(nullptr)},
                       {"reason", r.reason}});
    res.reports.push_back(std::move(o.report));
  }
  const ordered_json summary{{"reports", entries},
                             {"pass", all},
                             {"provenance", {{"seed", cfg.seed}, {"config_hash", cfg.config_hash}, {"version", kVersion}}}};
  write_text(dir / "summary.json", summary.dump(2) + "\n");
  res.exit_status = all ? 0 : 1;
  return res;
}

}  // namespace rieszlab
