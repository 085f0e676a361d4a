#pragma once

// Empirical verification: per-case lhs/rhs ratios for each inequality, the
// counterexample sweep, and aggregation into reports with an empirical
// constant and a scale drift.

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "rieszlab/grid.hpp"
#include "rieszlab/morrey.hpp"

namespace rieszlab {

class HarnessError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CaseResult {
  std::string case_id;
  int scale_index = 0;
  double lhs = 0.0;
  double rhs = 0.0;
  double ratio = 0.0;  // lhs / rhs; 0 when lhs = 0
  std::vector<std::string> flags;
};

CaseResult make_case(std::string case_id, int scale_index, double lhs, double rhs);

// ||b P_alpha f||_p <= N ||b||_{homogeneous E_{q,alpha}} ||f||_p
struct AdamsParams {
  double p, q, alpha;
};
CaseResult ratio_adams(const GridFunction& b, const GridFunction& f, const AdamsParams& params);

// max over nodes of sharp(P_alpha g) / M_alpha g, both over `radii`;
// nodes with M_alpha g = 0 are skipped.
struct SharpMaximalResult {
  CaseResult result;
  std::size_t argmax_node = 0;
};
SharpMaximalResult ratio_sharp_maximal(const GridFunction& g, double alpha, const RadiusSet& radii,
                                       std::span<const std::size_t> nodes);
// Nodes with |x|_inf <= L/2.
std::vector<std::size_t> interior_nodes(const GridSpec& spec);

// mad <= pair mean <= 2 mad on every ball of `radii` at `nodes` whose values
// fit the pair budget (so the pair mean is exact).
struct MadBracket {
  std::size_t balls = 0;
  std::size_t violations = 0;
  double worst_lower = 0.0;  // max of mad - pair_mean
  double worst_upper = 0.0;  // max of pair_mean - 2 mad
};
MadBracket mad_bracket_check(const GridFunction& u, const RadiusSet& radii, std::span<const std::size_t> nodes,
                             std::size_t pair_budget);

enum class WeightedForm {
  gradient,  // ||b u||_p <= N ||b|| ||Du||_p
  hessian,   // ||b |Du| ||_p <= N ||b|| ||D^2 u||_p
};
struct WeightedParams {
  double p, q;
};
CaseResult ratio_weighted(const GridFunction& b, const GridFunction& u, const WeightedParams& params,
                          WeightedForm form);

// int |b|^p |u|^p <= N b^p (int |Du|^p + rho_b^{-p} int |u|^p), b = truncated Morrey quantity.
CaseResult ratio_weighted_truncated(const GridFunction& b, const GridFunction& u, double p,
                                    const TruncatedMorreyParams& tm);

enum class HardyForm {
  gradient,  // int |u|^p / |x|^p <= N int |Du|^p, 1 < p < d
  hessian,   // int |u|^r / |x|^{2r} <= N int |D^2 u|^r, 1 < r < d/2
};
CaseResult ratio_hardy(const GridFunction& u, double exponent, HardyForm form);

// Radial quadrature of the first Hardy form for u(|x|) on (0, r_max).
double radial_hardy_ratio(int d, double p, const std::function<double(double)>& u,
                          const std::function<double(double)>& du, double r_max, int intervals = 200000);
// Ratio for u = r^{-(d-p)/p + delta} v(log r) with v = 1 below log r = 0 and a
// smooth decay to 0 at log r = log_span, computed in the log variable with the
// pure power part integrated in closed form.
double hardy_near_extremal_ratio(int d, double p, double delta, double log_span = 6.0);
// The same profile with the outer radius at r_outer, for sampling on a grid.
double near_extremal_profile(int d, double p, double delta, double log_span, double r_outer, double r);

// r (mean over B_r(x) of |1_{B_rho_b} b|^{p_b})^{1/p_b} <= b_hat over all dyadic r
// and nodes x; lhs is the maximum, rhs is b_hat.
CaseResult truncated_inclusion(const GridFunction& b, const TruncatedMorreyParams& tm);
// Least-squares slope of log y against log x.
double fit_loglog_slope(std::span<const double> x, std::span<const double> y);

struct SweepResult {
  std::vector<double> kappa;
  std::vector<double> norm_bDu;  // normalized over B_{4 kappa}
  std::vector<double> norm_D2u;
  std::vector<double> norm_u;
  std::vector<double> raw_bDu;   // unnormalized
  std::vector<double> raw_D2u;
  std::vector<double> raw_u;
  double slope_bDu = 0.0, slope_D2u = 0.0;
  double raw_slope_bDu = 0.0, raw_slope_D2u = 0.0;
  double u_drift = 0.0;         // max / min of norm_u
  double annulus_error = 0.0;   // max over B_{3k} \ B_{2k} of |kappa |Du| - 1|
  double annulus_bound = 0.0;   // h / kappa
  std::vector<CaseResult> cases;  // ||b |Du|| / ||D^2 u|| per kappa
};
// Each kappa gets its own grid: d dims, n nodes, L = 4 kappa (h = kappa / 8 at n = 65).
SweepResult counterexample_sweep(std::span<const double> kappas, double p, int d = 3, int n = 65);

enum class TraceMode {
  lr_global,           // L_r trace against L_{p,q} norms of the whole slab
  lr_local,            // L_r(B_rho) against norms on C_{2 rho}
  morrey_mu,           // E_{r, beta+gamma-mu} against E_{p,q,beta}
  morrey_full,         // E_{r, beta+gamma-2} against the E^{1,2} norm
  morrey_homogeneous,  // homogeneous E_{r, beta+gamma-2} against homogeneous E_{p,q,beta}
  gradient_beta,       // E_{r, beta} against E_{p,q,beta}, eps exponent mu/(2-mu)
};

struct TraceRunOptions {
  std::vector<double> mollifier_eps;  // trace extraction scales, largest first
  double rho = 0.0;                   // lr_local only
};

// One result per entry of eps_list (a single one for the eps-free modes).
// The trace of u at t = 0 is the mollifier limit; t = 0 must be a time node.
std::vector<CaseResult> ratio_trace(const SpaceTimeFunction& u, int d, const TraceParams& tp,
                                    std::span<const double> eps_list, TraceMode mode,
                                    const TraceRunOptions& options, const std::string& case_id,
                                    int scale_index);
// Exponent a in eps^{-a} used by the mode.
double trace_eps_exponent(int d, const TraceParams& tp, TraceMode mode);

// max over sampled node pairs in B_{L/2} of |g(x) - g(y)| / |x - y|^theta.
double holder_quotient(const GridFunction& g, double theta, std::size_t max_pairs = 400000);

// Per rho: lhs = tail potential, rhs = rho^{gamma - beta} M_beta f at (t0, 0).
std::vector<CaseResult> ratio_tail(const SpaceTimeFunction& f, double gamma, double beta,
                                   std::span<const double> rhos, const std::string& case_id);

struct Exclusion {
  std::string case_id;
  std::string reason;
};

struct Provenance {
  std::uint64_t seed = 0;
  std::string config_hash;
  std::string version;
};

struct VerificationReport {
  std::string inequality_id;
  nlohmann::ordered_json params = nlohmann::ordered_json::object();
  std::vector<CaseResult> cases;
  double empirical_constant = 0.0;
  double scale_drift = 0.0;
  std::vector<Exclusion> excluded;
  std::string reason;  // why pass is false, or why cases were excluded
  bool pass = false;
  Provenance provenance;
};

struct EstimateOptions {
  double drift_threshold = 1.5;
  int min_cases = 5;
  int min_scales = 2;
  // When nonempty, only cases whose id ends with this suffix enter the drift.
  std::string drift_suffix;
};

// Excludes rhs = 0 and non-finite cases, sorts by (case_id, scale_index),
// takes the max ratio and the spread of per-scale maxima. Throws when every
// case is degenerate.
VerificationReport estimate_constant(std::string inequality_id, std::vector<CaseResult> cases,
                                     const EstimateOptions& options = {});

}  // namespace rieszlab
