#include "rieszlab/report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

namespace rieszlab {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

ordered_json real(double v) { return std::isfinite(v) ? ordered_json(v) : ordered_json(nullptr); }

double read_real(const ordered_json& j) {
  return j.is_null() ? std::numeric_limits<double>::infinity() : j.get<double>();
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) out += c == '"' ? std::string("\"\"") : std::string(1, c);
  return out + "\"";
}

}  // namespace

ordered_json report_to_json(const VerificationReport& r) {
  ordered_json cases = ordered_json::array();
  for (const auto& c : r.cases) {
    ordered_json e{{"case_id", c.case_id},
                   {"scale_index", c.scale_index},
                   {"lhs", real(c.lhs)},
                   {"rhs", real(c.rhs)},
                   {"ratio", real(c.ratio)}};
    if (!c.flags.empty()) e["flags"] = c.flags;
    cases.push_back(std::move(e));
  }
  ordered_json items = ordered_json::array();
  for (const auto& x : r.excluded) items.push_back({{"case_id", x.case_id}, {"reason", x.reason}});
  ordered_json out;
  out["inequality_id"] = r.inequality_id;
  out["params"] = r.params;
  out["cases"] = std::move(cases);
  out["empirical_constant"] = real(r.empirical_constant);
  out["scale_drift"] = real(r.scale_drift);
  out["excluded"] = {{"count", r.excluded.size()}, {"items", std::move(items)}, {"reason", r.reason}};
  out["pass"] = r.pass;
  out["provenance"] = {{"seed", r.provenance.seed},
                       {"config_hash", r.provenance.config_hash},
                       {"version", r.provenance.version}};
  return out;
}

VerificationReport report_from_json(const ordered_json& j) {
  VerificationReport r;
  r.inequality_id = j.at("inequality_id").get<std::string>();
  r.params = j.at("params");
  for (const auto& c : j.at("cases")) {
    CaseResult cr;
    cr.case_id = c.at("case_id").get<std::string>();
    cr.scale_index = c.at("scale_index").get<int>();
    cr.lhs = read_real(c.at("lhs"));
    cr.rhs = read_real(c.at("rhs"));
    cr.ratio = read_real(c.at("ratio"));
    if (c.contains("flags")) cr.flags = c.at("flags").get<std::vector<std::string>>();
    r.cases.push_back(std::move(cr));
  }
  r.empirical_constant = read_real(j.at("empirical_constant"));
  r.scale_drift = read_real(j.at("scale_drift"));
  const auto& ex = j.at("excluded");
  for (const auto& x : ex.at("items"))
    r.excluded.push_back({x.at("case_id").get<std::string>(), x.at("reason").get<std::string>()});
  r.reason = ex.at("reason").get<std::string>();
  r.pass = j.at("pass").get<bool>();
  const auto& p = j.at("provenance");
  r.provenance = {p.at("seed").get<std::uint64_t>(), p.at("config_hash").get<std::string>(),
                  p.at("version").get<std::string>()};
  return r;
}

ordered_json norm_result_to_json(const std::string& norm_id, ordered_json params, const MorreyResult& result,
                                 const GridSpec& spec) {
  const Point x = spec.point(result.argmax_center);
  return {{"norm_id", norm_id},
          {"params", std::move(params)},
          {"value", real(result.value)},
          {"argmax_center", std::vector<double>(x.begin(), x.begin() + spec.d())},
          {"argmax_radius", result.argmax_radius},
          {"cap_limited", result.cap_limited}};
}

std::string report_to_csv(const VerificationReport& r) {
  std::string out = "case_id,scale_index,lhs,rhs,ratio\n";
  char buf[128];
  for (const auto& c : r.cases) {
    std::snprintf(buf, sizeof buf, ",%d,%.17g,%.17g,%.17g\n", c.scale_index, c.lhs, c.rhs, c.ratio);
    out += csv_field(c.case_id) + buf;
  }
  return out;
}

std::string fnv1a64_hex(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void write_text(const std::filesystem::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

}  // namespace rieszlab
