#pragma once

// Report serialization: JSON with a fixed top-level layout, CSV with one row
// per case, and the summary written after every suite.

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "rieszlab/harness.hpp"
#include "rieszlab/morrey.hpp"

namespace rieszlab {

inline constexpr const char* kVersion = "0.1.0";

// Non-finite reals are written as null and read back as +infinity.
nlohmann::ordered_json report_to_json(const VerificationReport& report);
VerificationReport report_from_json(const nlohmann::ordered_json& j);
// Columns case_id, scale_index, lhs, rhs, ratio with round-trip precision.
std::string report_to_csv(const VerificationReport& report);

// {norm_id, params, value, argmax_center (coordinates), argmax_radius, cap_limited}
nlohmann::ordered_json norm_result_to_json(const std::string& norm_id, nlohmann::ordered_json params,
                                           const MorreyResult& result, const GridSpec& spec);

// 64-bit FNV-1a as 16 lowercase hex digits.
std::string fnv1a64_hex(std::string_view text);

// Writes text to path; throws on I/O failure.
void write_text(const std::filesystem::path& path, std::string_view text);

}  // namespace rieszlab
