#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <map>
#include <sstream>

#include "rieszlab/report.hpp"

using namespace rieszlab;

namespace {

VerificationReport sample_report() {
  std::vector<CaseResult> cases{make_case("a", 0, 1.0, 2.0), make_case("a", 1, 1.5, 3.0),
                                make_case("b,quoted", 0, 0.25, 1.0 / 3.0), make_case("b,quoted", 1, 0.5, 2.0 / 3.0),
                                make_case("c", 0, 1.0, 0.0)};
  cases[1].flags.push_back("cap_limited");
  EstimateOptions o;
  o.min_cases = 2;
  VerificationReport r = estimate_constant("adams-2.1", cases, o);
  r.params = {{"p", 2.0}, {"grid", {{"d", 3}, {"n", 33}}}};
  r.provenance = {7, fnv1a64_hex("x"), kVersion};
  return r;
}

std::map<std::string, double> csv_ratios(const std::string& csv) {
  std::map<std::string, double> out;
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    std::string id;
    std::size_t pos = 0;
    if (line[0] == '"') {
      for (pos = 1; pos < line.size(); ++pos) {
        if (line[pos] == '"' && pos + 1 < line.size() && line[pos + 1] == '"') {
          id += '"';
          ++pos;
        } else if (line[pos] == '"') {
          break;
        } else {
          id += line[pos];
        }
      }
      pos += 1;
    } else {
      pos = line.find(',');
      id = line.substr(0, pos);
    }
    const std::string rest = line.substr(pos + 1);
    const auto last = rest.rfind(',');
    const int scale = std::stoi(rest.substr(0, rest.find(',')));
    out[id + "@" + std::to_string(scale)] = std::stod(rest.substr(last + 1));
  }
  return out;
}

}  // namespace

TEST(Report, TopLevelKeysInOrder) {
  const auto j = report_to_json(sample_report());
  std::vector<std::string> keys;
  for (const auto& [k, v] : j.items()) keys.push_back(k);
  EXPECT_EQ(keys, (std::vector<std::string>{"inequality_id", "params", "cases", "empirical_constant", "scale_drift",
                                            "excluded", "pass", "provenance"}));
  std::vector<std::string> prov;
  for (const auto& [k, v] : j.at("provenance").items()) prov.push_back(k);
  EXPECT_EQ(prov, (std::vector<std::string>{"seed", "config_hash", "version"}));
}

TEST(Report, JsonRoundTrip) {
  const VerificationReport r = sample_report();
  const auto j = report_to_json(r);
  const VerificationReport back = report_from_json(nlohmann::ordered_json::parse(j.dump()));
  EXPECT_EQ(report_to_json(back).dump(), j.dump());
  ASSERT_EQ(back.cases.size(), r.cases.size());
  for (std::size_t i = 0; i < r.cases.size(); ++i) {
    EXPECT_EQ(back.cases[i].case_id, r.cases[i].case_id);
    EXPECT_EQ(back.cases[i].ratio, r.cases[i].ratio);
    EXPECT_EQ(back.cases[i].flags, r.cases[i].flags);
  }
  EXPECT_EQ(back.excluded.size(), 1u);
  EXPECT_EQ(back.reason, r.reason);
  EXPECT_EQ(back.provenance.config_hash, r.provenance.config_hash);
}

TEST(Report, NonFiniteBecomesNullAndReadsBackInfinite) {
  VerificationReport r;
  r.inequality_id = "hardy-2.4";
  r.empirical_constant = std::numeric_limits<double>::infinity();
  r.scale_drift = std::nan("");
  const auto j = report_to_json(r);
  EXPECT_TRUE(j.at("empirical_constant").is_null());
  EXPECT_TRUE(j.at("scale_drift").is_null());
  EXPECT_TRUE(std::isinf(report_from_json(nlohmann::ordered_json::parse(j.dump())).empirical_constant));
}

TEST(Report, CsvAgreesWithJson) {
  const VerificationReport r = sample_report();
  const auto ratios = csv_ratios(report_to_csv(r));
  const auto j = report_to_json(r);
  ASSERT_EQ(ratios.size(), j.at("cases").size());
  for (const auto& c : j.at("cases")) {
    const std::string key = c.at("case_id").get<std::string>() + "@" + std::to_string(c.at("scale_index").get<int>());
    ASSERT_TRUE(ratios.count(key)) << key;
    EXPECT_EQ(ratios.at(key), c.at("ratio").get<double>());
  }
}

TEST(Report, EmptyCasesReportIsWellFormed) {
  const VerificationReport r = estimate_constant("tail-3.6", {});
  const auto j = report_to_json(r);
  EXPECT_TRUE(j.at("cases").empty());
  EXPECT_FALSE(j.at("pass").get<bool>());
  EXPECT_FALSE(j.at("excluded").at("reason").get<std::string>().empty());
  EXPECT_EQ(report_to_csv(r), "case_id,scale_index,lhs,rhs,ratio\n");
}

TEST(Report, Fnv1aKnownValues) {
  EXPECT_EQ(fnv1a64_hex(""), "cbf29ce484222325");
  EXPECT_EQ(fnv1a64_hex("a"), "af63dc4c8601ec8c");
  EXPECT_EQ(fnv1a64_hex("foobar"), "85944171f73967e8");
}

TEST(Report, NormResultFields) {
  const GridSpec spec(2, 2.0, 17);
  MorreyResult m;
  m.value = 1.5;
  m.argmax_center = spec.origin_index();
  m.argmax_radius = 0.5;
  const auto j = norm_result_to_json("elliptic_morrey", {{"q", 2.0}}, m, spec);
  std::vector<std::string> keys;
  for (const auto& [k, v] : j.items()) keys.push_back(k);
  EXPECT_EQ(keys, (std::vector<std::string>{"norm_id", "params", "value", "argmax_center", "argmax_radius",
                                            "cap_limited"}));
  EXPECT_EQ(j.at("argmax_center").size(), 2u);
  EXPECT_EQ(j.at("argmax_center")[0].get<double>(), 0.0);
}

TEST(Report, UnwritableDestinationThrows) {
  EXPECT_THROW(write_text("/nonexistent-dir/x/report.json", "{}"), std::runtime_error);
}
