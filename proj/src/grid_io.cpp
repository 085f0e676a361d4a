#include "rieszlab/grid_io.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <json.hpp>

namespace rieszlab {

namespace {

using nlohmann::json;

std::filesystem::path with_ext(const std::filesystem::path& stem, const char* ext) {
  auto p = stem;
  p += ext;
  return p;
}

void write_values(const std::filesystem::path& path, std::span<const double> values) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw GridError("cannot open " + path.string() + " for writing");
  for (double v : values) {
    auto bits = std::bit_cast<std::uint64_t>(v);
    unsigned char bytes[8];
    for (int b = 0; b < 8; ++b) bytes[b] = static_cast<unsigned char>(bits >> (8 * b));
    out.write(reinterpret_cast<const char*>(bytes), 8);
  }
  if (!out) throw GridError("write failed for " + path.string());
}

std::vector<double> read_values(const std::filesystem::path& path, std::size_t count) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw GridError("cannot open " + path.string());
  std::vector<double> values(count);
  for (double& v : values) {
    unsigned char bytes[8];
    if (!in.read(reinterpret_cast<char*>(bytes), 8)) throw GridError("truncated " + path.string());
    std::uint64_t bits = 0;
    for (int b = 0; b < 8; ++b) bits |= static_cast<std::uint64_t>(bytes[b]) << (8 * b);
    v = std::bit_cast<double>(bits);
  }
  if (in.peek() != std::char_traits<char>::eof())
    throw GridError("trailing data in " + path.string());
  return values;
}

void write_sidecar(const std::filesystem::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw GridError("cannot open " + path.string() + " for writing");
  out << j.dump(2) << '\n';
}

json read_sidecar(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw GridError("cannot open " + path.string());
  return json::parse(in);
}

}  // namespace

void save(const GridFunction& u, const std::filesystem::path& stem) {
  const auto& s = u.spec();
  write_values(with_ext(stem, ".bin"), u.values());
  write_sidecar(with_ext(stem, ".json"), json{{"d", s.d()},
                                               {"L", s.L()},
                                               {"n", s.n()},
                                               {"t0", nullptr},
                                               {"t1", nullptr},
                                               {"m", nullptr},
                                               {"support_margin", u.support_margin()}});
}

void save(const SpaceTimeFunction& u, const std::filesystem::path& stem) {
  const auto& st = u.spec();
  const auto& s = st.spatial();
  write_values(with_ext(stem, ".bin"), u.values());
  write_sidecar(with_ext(stem, ".json"), json{{"d", s.d()},
                                               {"L", s.L()},
                                               {"n", s.n()},
                                               {"t0", st.t0()},
                                               {"t1", st.t1()},
                                               {"m", st.m()},
                                               {"support_margin", u.support_margin()}});
}

GridFunction load_grid_function(const std::filesystem::path& stem) {
  const json j = read_sidecar(with_ext(stem, ".json"));
  if (!j.at("m").is_null()) throw GridError("sidecar describes a space-time function");
  GridSpec spec(j.at("d").get<int>(), j.at("L").get<double>(), j.at("n").get<int>());
  return GridFunction(spec, read_values(with_ext(stem, ".bin"), spec.size()),
                      j.at("support_margin").get<int>());
}

SpaceTimeFunction load_space_time_function(const std::filesystem::path& stem) {
  const json j = read_sidecar(with_ext(stem, ".json"));
  if (j.at("m").is_null()) throw GridError("sidecar describes a spatial function");
  GridSpec spatial(j.at("d").get<int>(), j.at("L").get<double>(), j.at("n").get<int>());
  SpaceTimeGridSpec spec(spatial, j.at("t0").get<double>(), j.at("t1").get<double>(),
                         j.at("m").get<int>());
  return SpaceTimeFunction(spec, read_values(with_ext(stem, ".bin"), spec.size()),
                           j.at("support_margin").get<int>());
}

}  // namespace rieszlab
