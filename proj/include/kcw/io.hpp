#pragma once

// Run manifests and the CSV / JSON forms of distribution tables. Exports carry
// the manifest's configuration and digest but no timestamps, so identical
// configurations give byte-identical files; timestamps go to an optional
// sidecar file.

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"
#include "kcw/cache.hpp"
#include "kcw/ctm.hpp"

namespace kcw {

inline constexpr const char* kVersion = "0.1.0";

using Json = nlohmann::ordered_json;

struct RunManifest {
  std::string command;
  std::vector<std::pair<std::string, std::string>> config;  // in insertion order

  RunManifest& set(std::string key, std::string value) {
    for (auto& [k, v] : config) {
      if (k == key) {
        v = std::move(value);
        return *this;
      }
    }
    config.emplace_back(std::move(key), std::move(value));
    return *this;
  }

  std::string canonical() const {
    std::string out = std::string("tool=kcw;version=") + kVersion + ";command=" + command;
    for (const auto& [k, v] : config) out += ";" + k + "=" + v;
    return out;
  }

  std::string digest() const { return hex64(fnv1a(canonical())); }

  Json to_json() const {
    Json cfg = Json::object();
    for (const auto& [k, v] : config) cfg[k] = v;
    return Json{{"tool", "kcw"}, {"version", kVersion}, {"command", command}, {"config", cfg}, {"digest", digest()}};
  }
};

inline std::string utc_timestamp(std::chrono::system_clock::time_point t) {
  const std::time_t tt = std::chrono::system_clock::to_time_t(t);
  std::tm tm{};
  gmtime_r(&tt, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

/// Manifest plus wall-clock times, written next to an export.
inline void write_manifest_sidecar(const std::filesystem::path& path, const RunManifest& m, std::chrono::system_clock::time_point started,
                                   std::chrono::system_clock::time_point finished) {
  Json j = m.to_json();
  j["started"] = utc_timestamp(started);
  j["finished"] = utc_timestamp(finished);
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write manifest " + path.string());
  out << j.dump(2) << '\n';
}

inline std::string manifest_comment(const RunManifest& m) { return "# manifest " + m.to_json().dump() + "\n"; }

/// A distribution table with the extra lines a ctm export carries.
struct DistributionExport {
  DistributionTable table;
  std::optional<std::uint64_t> crossing;  // flawed scheme: first N with total mass above 1
  std::optional<std::string> digest;      // manifest digest, filled in by the parsers
};

namespace detail {

inline std::string optional_int(const std::optional<int>& v) { return v ? std::to_string(*v) : std::string(); }

inline std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (std::size_t j = 0; j <= s.size(); ++j) {
    if (j == s.size() || s[j] == sep) {
      out.push_back(s.substr(start, j - start));
      start = j + 1;
    }
  }
  return out;
}

inline Rational parse_rational(std::string_view num, std::string_view den) {
  mpz_class n;
  mpz_class d;
  if (n.set_str(std::string(num), 10) != 0 || d.set_str(std::string(den), 10) != 0 || d <= 0) {
    throw std::invalid_argument("bad rational " + std::string(num) + "/" + std::string(den));
  }
  Rational q(n, d);
  q.canonicalize();
  return q;
}

inline std::uint64_t parse_count(std::string_view s, const char* what) {
  const auto v = parse_u64(s);
  if (!v) throw std::invalid_argument(std::string("bad ") + what + " '" + std::string(s) + "'");
  return *v;
}

inline std::optional<int> parse_optional_int(std::string_view s) {
  if (s.empty()) return std::nullopt;
  return static_cast<int>(parse_count(s, "L"));
}

}  // namespace detail

inline constexpr const char* kDistributionHeader = "output_string,mass_numerator,mass_denominator,scheme,universe,budget,L";

inline std::string distribution_csv(const DistributionExport& e, const RunManifest& m) {
  const DistributionTable& t = e.table;
  const Rational total = t.total_mass();
  std::string out = manifest_comment(m);
  out += "# meta," + std::string(scheme_name(t.scheme)) + "," + t.universe + "," + std::to_string(t.budget) + "," +
         detail::optional_int(t.L) + "\n";
  out += "# total_mass " + total.get_num().get_str() + "/" + total.get_den().get_str() + "\n";
  if (t.scheme == Scheme::Flawed) out += "# crossing_N " + (e.crossing ? std::to_string(*e.crossing) : std::string("none")) + "\n";
  out += kDistributionHeader;
  out += '\n';
  for (const auto& [x, mass] : t.entries) {
    out += x + "," + mass.get_num().get_str() + "," + mass.get_den().get_str() + "," + scheme_name(t.scheme) + "," + t.universe + "," +
           std::to_string(t.budget) + "," + detail::optional_int(t.L) + "\n";
  }
  return out;
}

inline DistributionExport parse_distribution_csv(std::string_view text) {
  DistributionExport e;
  bool meta = false;
  bool header = false;
  for (std::string_view line : detail::split(text, '\n')) {
    if (line.empty()) continue;
    if (line.starts_with("# manifest ")) {
      e.digest = Json::parse(line.substr(11)).at("digest").get<std::string>();
    } else if (line.starts_with("# meta,")) {
      const auto f = detail::split(line.substr(7), ',');
      if (f.size() != 4) throw std::invalid_argument("bad meta line");
      e.table.scheme = parse_scheme(f[0]);
      e.table.universe = std::string(f[1]);
      e.table.budget = detail::parse_count(f[2], "budget");
      e.table.L = detail::parse_optional_int(f[3]);
      meta = true;
    } else if (line.starts_with("# crossing_N ")) {
      const std::string_view v = line.substr(13);
      if (v != "none") e.crossing = detail::parse_count(v, "crossing_N");
    } else if (line.starts_with("#")) {
      continue;
    } else if (!header) {
      if (line != kDistributionHeader) throw std::invalid_argument("unexpected CSV header");
      header = true;
    } else {
      const auto f = detail::split(line, ',');
      if (f.size() != 7) throw std::invalid_argument("expected 7 CSV fields");
      require_binary(f[0], "parse_distribution_csv");
      e.table.entries.emplace(std::string(f[0]), detail::parse_rational(f[1], f[2]));
    }
  }
  if (!meta || !header) throw std::invalid_argument("distribution CSV lacks its meta or header line");
  return e;
}

inline Json distribution_json(const DistributionExport& e, const RunManifest& m) {
  const DistributionTable& t = e.table;
  const Rational total = t.total_mass();
  Json j;
  j["manifest"] = m.to_json();
  j["scheme"] = scheme_name(t.scheme);
  j["universe"] = t.universe;
  j["budget"] = t.budget;
  j["L"] = t.L ? Json(*t.L) : Json(nullptr);
  j["total_mass"] = Json{{"mass_numerator", total.get_num().get_str()}, {"mass_denominator", total.get_den().get_str()}};
  if (t.scheme == Scheme::Flawed) j["crossing_N"] = e.crossing ? Json(*e.crossing) : Json(nullptr);
  Json rows = Json::array();
  for (const auto& [x, mass] : t.entries) {
    rows.push_back(Json{{"output_string", x},
                        {"mass_numerator", mass.get_num().get_str()},
                        {"mass_denominator", mass.get_den().get_str()},
                        {"scheme", scheme_name(t.scheme)},
                        {"universe", t.universe},
                        {"budget", t.budget},
                        {"L", t.L ? Json(*t.L) : Json(nullptr)}});
  }
  j["entries"] = rows;
  return j;
}

inline DistributionExport parse_distribution_json(std::string_view text) {
  const Json j = Json::parse(text);
  DistributionExport e;
  e.digest = j.at("manifest").at("digest").get<std::string>();
  e.table.scheme = parse_scheme(j.at("scheme").get<std::string>());
  e.table.universe = j.at("universe").get<std::string>();
  e.table.budget = j.at("budget").get<std::uint64_t>();
  if (!j.at("L").is_null()) e.table.L = j.at("L").get<int>();
  if (j.contains("crossing_N") && !j.at("crossing_N").is_null()) e.crossing = j.at("crossing_N").get<std::uint64_t>();
  for (const Json& row : j.at("entries")) {
    const std::string x = row.at("output_string").get<std::string>();
    require_binary(x, "parse_distribution_json");
    e.table.entries.emplace(x, detail::parse_rational(row.at("mass_numerator").get<std::string>(), row.at("mass_denominator").get<std::string>()));
  }
  return e;
}

}  // namespace kcw
