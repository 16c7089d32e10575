#pragma once

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "majority/harness.hpp"

namespace majority {

/// I/O failure; what() already contains the path.
class IoError : public std::runtime_error {
 public:
  IoError(const std::string& path, const std::string& what)
      : std::runtime_error(path + ": " + what), path_(path) {}
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

enum class ReportFormat { Csv, Json };

inline ReportFormat parse_format(std::string_view s) {
  if (s == "csv") return ReportFormat::Csv;
  if (s == "json") return ReportFormat::Json;
  throw std::invalid_argument("unknown format '" + std::string(s) + "' (expected csv or json)");
}

inline constexpr std::string_view kCsvHeader =
    "model,n,delta,p,q,L,replicates,master_seed,plus_wins,minus_wins,halts,timeouts,avg_last_day,ci_low,ci_high";

/// %.6g rendering used for every floating CSV cell.
inline std::string format_real(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

inline void write_csv(std::ostream& out, const std::vector<ExperimentReport>& reports) {
  out << kCsvHeader << '\n';
  for (const auto& r : reports) {
    out << to_string(r.variant) << ',' << r.n << ',' << r.delta << ',' << format_real(r.p) << ','
        << format_real(r.q) << ',' << (r.L ? format_real(*r.L) : "") << ',' << r.replicates << ','
        << r.master_seed << ',' << r.plus_wins << ',' << r.minus_wins << ',' << r.halts << ',' << r.timeouts
        << ',' << (r.avg_last_day ? format_real(*r.avg_last_day) : "") << ',' << format_real(r.ci_low) << ','
        << format_real(r.ci_high) << '\n';
  }
}

inline std::string to_csv(const std::vector<ExperimentReport>& reports) {
  std::ostringstream s;
  write_csv(s, reports);
  return s.str();
}

namespace detail {

inline nlohmann::json histogram_to_json(const std::map<std::uint64_t, std::uint64_t>& h) {
  auto arr = nlohmann::json::array();
  for (const auto& [day, count] : h) arr.push_back({day, count});
  return arr;
}

inline std::map<std::uint64_t, std::uint64_t> histogram_from_json(const nlohmann::json& j) {
  std::map<std::uint64_t, std::uint64_t> h;
  for (const auto& e : j) h[e.at(0).get<std::uint64_t>()] = e.at(1).get<std::uint64_t>();
  return h;
}

inline OutcomeKind parse_outcome(std::string_view s) {
  for (auto k : {OutcomeKind::PlusWins, OutcomeKind::MinusWins, OutcomeKind::Halt, OutcomeKind::Timeout}) {
    if (to_string(k) == s) return k;
  }
  throw std::invalid_argument("unknown outcome '" + std::string(s) + "'");
}

}  // namespace detail

inline nlohmann::json to_json(const ExperimentReport& r) {
  nlohmann::json j;
  j["model"] = to_string(r.variant);
  j["n"] = r.n;
  j["delta"] = r.delta;
  j["p"] = r.p;
  j["q"] = r.q;
  j["L"] = r.L ? nlohmann::json(*r.L) : nlohmann::json(nullptr);
  j["replicates"] = r.replicates;
  j["max_rounds"] = r.max_rounds;
  j["master_seed"] = r.master_seed;
  j["plus_wins"] = r.plus_wins;
  j["minus_wins"] = r.minus_wins;
  j["halts"] = r.halts;
  j["timeouts"] = r.timeouts;
  j["avg_last_day"] = r.avg_last_day ? nlohmann::json(*r.avg_last_day) : nlohmann::json(nullptr);
  j["dominant"] = to_string(r.dominant);
  j["ci_low"] = r.ci_low;
  j["ci_high"] = r.ci_high;
  j["runs_with_flip_to_minus"] = r.runs_with_flip_to_minus;
  j["plus_days"] = detail::histogram_to_json(r.plus_days);
  j["minus_days"] = detail::histogram_to_json(r.minus_days);
  j["halt_days"] = detail::histogram_to_json(r.halt_days);
  return j;
}

inline ExperimentReport report_from_json(const nlohmann::json& j) {
  ExperimentReport r;
  r.variant = parse_variant(j.at("model").get<std::string>());
  r.n = j.at("n").get<std::size_t>();
  r.delta = j.at("delta").get<std::int64_t>();
  r.p = j.at("p").get<double>();
  r.q = j.at("q").get<double>();
  if (!j.at("L").is_null()) r.L = j.at("L").get<double>();
  r.replicates = j.at("replicates").get<std::uint64_t>();
  r.max_rounds = j.at("max_rounds").get<std::uint64_t>();
  r.master_seed = j.at("master_seed").get<std::uint64_t>();
  r.plus_wins = j.at("plus_wins").get<std::uint64_t>();
  r.minus_wins = j.at("minus_wins").get<std::uint64_t>();
  r.halts = j.at("halts").get<std::uint64_t>();
  r.timeouts = j.at("timeouts").get<std::uint64_t>();
  if (!j.at("avg_last_day").is_null()) r.avg_last_day = j.at("avg_last_day").get<double>();
  r.dominant = detail::parse_outcome(j.at("dominant").get<std::string>());
  r.ci_low = j.at("ci_low").get<double>();
  r.ci_high = j.at("ci_high").get<double>();
  r.runs_with_flip_to_minus = j.at("runs_with_flip_to_minus").get<std::uint64_t>();
  r.plus_days = detail::histogram_from_json(j.at("plus_days"));
  r.minus_days = detail::histogram_from_json(j.at("minus_days"));
  r.halt_days = detail::histogram_from_json(j.at("halt_days"));
  return r;
}

inline void write_json(std::ostream& out, const std::vector<ExperimentReport>& reports) {
  auto arr = nlohmann::json::array();
  for (const auto& r : reports) arr.push_back(to_json(r));
  out << arr.dump(2) << '\n';
}

inline std::vector<ExperimentReport> reports_from_json(std::string_view text) {
  const auto arr = nlohmann::json::parse(text);
  if (!arr.is_array()) throw std::invalid_argument("expected a JSON array of reports");
  std::vector<ExperimentReport> out;
  for (const auto& j : arr) out.push_back(report_from_json(j));
  return out;
}

/// Writes `reports` to `destination`, where "-" or "" means standard output.
inline void emit(const std::vector<ExperimentReport>& reports, ReportFormat format, const std::string& destination) {
  auto write = [&](std::ostream& out) {
    if (format == ReportFormat::Csv) {
      write_csv(out, reports);
    } else {
      write_json(out, reports);
    }
  };
  if (destination.empty() || destination == "-") {
    write(std::cout);
    std::cout.flush();
    if (!std::cout) throw IoError("<stdout>", "write failed");
    return;
  }
  std::ofstream file(destination, std::ios::out | std::ios::trunc);
  if (!file) throw IoError(destination, "cannot open for writing");
  write(file);
  file.flush();
  if (!file) throw IoError(destination, "write failed");
}

/// Spec file schema, field names as in ExperimentSpec:
///   {"variant": "markovian", "n": 50, "delta_rule": {"delta": 1},
///    "p": 0.5, "q": 0.3, "replicates": 1000, "max_rounds": 100000, "master_seed": 7}
/// with "delta_rule": {"regime": "experiment", "parameter": 2.788} as the
/// rule form. Omitted fields keep their defaults; unknown fields are rejected.
inline ExperimentSpec spec_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw std::invalid_argument("spec must be a JSON object");
  ExperimentSpec s;
  for (const auto& [key, value] : j.items()) {
    if (key == "variant") {
      s.variant = parse_variant(value.get<std::string>());
    } else if (key == "n") {
      s.n = value.get<std::size_t>();
    } else if (key == "delta_rule") {
      if (value.contains("delta")) {
        s.delta_rule = value.at("delta").get<std::int64_t>();
      } else if (value.contains("regime")) {
        ThresholdRegime rule;
        rule.kind = parse_regime(value.at("regime").get<std::string>());
        if (value.contains("parameter") && !value.at("parameter").is_null()) {
          rule.parameter = value.at("parameter").get<double>();
        }
        s.delta_rule = rule;
      } else {
        throw std::invalid_argument("delta_rule needs \"delta\" or \"regime\"");
      }
    } else if (key == "p") {
      s.p = value.get<double>();
    } else if (key == "q") {
      s.q = value.get<double>();
    } else if (key == "replicates") {
      s.replicates = value.get<std::uint64_t>();
    } else if (key == "max_rounds") {
      s.max_rounds = value.get<std::uint64_t>();
    } else if (key == "master_seed") {
      s.master_seed = value.get<std::uint64_t>();
    } else {
      throw std::invalid_argument("unknown spec field '" + key + "'");
    }
  }
  return s;
}

inline nlohmann::json to_json(const ExperimentSpec& s) {
  nlohmann::json j;
  j["variant"] = to_string(s.variant);
  j["n"] = s.n;
  if (const auto* d = std::get_if<std::int64_t>(&s.delta_rule)) {
    j["delta_rule"] = {{"delta", *d}};
  } else {
    const auto& rule = std::get<ThresholdRegime>(s.delta_rule);
    j["delta_rule"] = {{"regime", to_string(rule.kind)},
                       {"parameter", rule.parameter ? nlohmann::json(*rule.parameter) : nlohmann::json(nullptr)}};
  }
  j["p"] = s.p;
  j["q"] = s.q;
  j["replicates"] = s.replicates;
  j["max_rounds"] = s.max_rounds;
  j["master_seed"] = s.master_seed;
  return j;
}

inline ExperimentSpec load_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError(path, "cannot open for reading");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw std::invalid_argument(path + ": " + e.what());
  }
  return spec_from_json(j);
}

}  // namespace majority
