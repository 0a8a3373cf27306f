#pragma once

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "tickpred/error.hpp"
#include "tickpred/protocol.hpp"
#include "tickpred/quantize.hpp"

namespace tickpred {

/// Fixed rendering for report numbers so repeated runs are byte-identical.
inline std::string format_number(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", x);
  return buf;
}

inline std::string csv_cell(const std::string& v) {
  if (v.find_first_of(",\"\n") == std::string::npos) return v;
  std::string q = "\"";
  for (char c : v) {
    if (c == '"') q += '"';
    q += c;
  }
  return q + '"';
}

/// Numeric-looking cells become JSON numbers, empty cells null. Codes with
/// a leading zero ("000001") stay strings.
inline nlohmann::ordered_json json_cell(const std::string& v) {
  if (v.empty()) return nullptr;
  if (v == "true" || v == "false") return v == "true";
  const bool leading_zero = v.size() > 1 && v[0] == '0' && v[1] != '.';
  if (!leading_zero && v.find_first_not_of("0123456789+-.eE") == std::string::npos) {
    char* end = nullptr;
    const double x = std::strtod(v.c_str(), &end);
    if (end == v.c_str() + v.size() && std::isfinite(x)) {
      if (v.find_first_of(".eE") == std::string::npos) {
        std::int64_t i = 0;
        if (detail::parse_int(v, i)) return i;
      }
      return x;
    }
  }
  return v;
}

/// Header plus string rows; written as CSV or mirrored as a JSON array.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  void write_csv(std::ostream& out) const {
    auto line = [&](const std::vector<std::string>& cells) {
      for (std::size_t i = 0; i < cells.size(); ++i) out << (i ? "," : "") << csv_cell(cells[i]);
      out << '\n';
    };
    line(header);
    for (const auto& r : rows) line(r);
  }

  nlohmann::ordered_json to_json() const {
    auto arr = nlohmann::ordered_json::array();
    for (const auto& r : rows) {
      nlohmann::ordered_json obj;
      for (std::size_t i = 0; i < header.size() && i < r.size(); ++i) obj[header[i]] = json_cell(r[i]);
      arr.push_back(std::move(obj));
    }
    return arr;
  }
};

inline std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  return in;
}

inline void write_file(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  out << content;
}

inline void write_table(const std::filesystem::path& csv_path, const Table& table, bool json_mirror) {
  std::ostringstream os;
  table.write_csv(os);
  write_file(csv_path, os.str());
  if (json_mirror) {
    auto json_path = csv_path;
    json_path.replace_extension(".json");
    write_file(json_path, table.to_json().dump(2) + "\n");
  }
}

// States file: "day,state" rows, day being the 0-based trading-day index.

struct StatesFile {
  std::vector<StateId> states;
  std::vector<std::size_t> day_boundaries;
};

inline void write_states(std::ostream& out, std::span<const StateId> states, std::span<const std::size_t> day_boundaries) {
  out << "day,state\n";
  std::size_t day = 0;
  for (std::size_t i = 0; i < states.size(); ++i) {
    while (day + 1 < day_boundaries.size() && day_boundaries[day + 1] <= i) ++day;
    out << day << ',' << states[i] << '\n';
  }
}

inline StatesFile read_states(std::istream& in) {
  StatesFile f;
  std::string line;
  std::size_t lineno = 0;
  long long prev_day = -1;
  while (std::getline(in, line)) {
    ++lineno;
    auto v = detail::trim(line);
    if (v.empty() || (lineno == 1 && (v.front() < '0' || v.front() > '9'))) continue;
    long long day = 0;
    StateId s = 0;
    auto comma = v.find(',');
    bool ok = comma == std::string_view::npos
                  ? detail::parse_int(v, s)  // bare state ids: a single day
                  : detail::parse_int(detail::trim(v.substr(0, comma)), day) &&
                        detail::parse_int(detail::trim(v.substr(comma + 1)), s);
    if (!ok || s < 0 || day < prev_day) throw DataError("states file: malformed line " + std::to_string(lineno));
    if (day != prev_day) {
      f.day_boundaries.push_back(f.states.size());
      prev_day = day;
    }
    f.states.push_back(s);
  }
  if (f.states.empty()) throw DataError("states file is empty");
  return f;
}

inline void write_trace(std::ostream& out, const PredictionTrace& trace) {
  out << "index,predicted,actual\n";
  for (std::size_t k = 0; k < trace.size(); ++k)
    out << trace.start_index + k << ',' << trace.predictions[k].predicted << ',' << trace.predictions[k].actual << '\n';
}

inline PredictionTrace read_trace(std::istream& in) {
  PredictionTrace trace;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto v = detail::trim(line);
    if (v.empty() || (lineno == 1 && (v.front() < '0' || v.front() > '9'))) continue;
    auto a = v.find(','), b = v.find(',', a == std::string_view::npos ? a : a + 1);
    std::size_t index = 0;
    Prediction p;
    if (a == std::string_view::npos || b == std::string_view::npos ||
        !detail::parse_int(detail::trim(v.substr(0, a)), index) ||
        !detail::parse_int(detail::trim(v.substr(a + 1, b - a - 1)), p.predicted) ||
        !detail::parse_int(detail::trim(v.substr(b + 1)), p.actual))
      throw DataError("trace file: malformed line " + std::to_string(lineno));
    if (trace.predictions.empty()) trace.start_index = index;
    else if (index != trace.start_index + trace.predictions.size())
      throw DataError("trace file: indices not consecutive at line " + std::to_string(lineno));
    trace.predictions.push_back(p);
  }
  if (trace.empty()) throw DataError("trace file is empty");
  return trace;
}

inline nlohmann::ordered_json scheme_to_json(const QuantizationScheme& q) {
  nlohmann::ordered_json j;
  if (q.mode() == QuantizationMode::FixedInterval) {
    j["mode"] = "interval";
    j["interval_hundredths"] = q.width_numerator();
  } else {
    j["mode"] = "state_count";
    j["state_count"] = q.state_count();
    j["range_hundredths"] = q.width_numerator();
    j["origin_hundredths"] = q.origin().hundredths;
  }
  j["interval_cny"] = q.interval_cny();
  return j;
}

inline QuantizationScheme scheme_from_json(const nlohmann::json& j) {
  try {
    const auto mode = j.at("mode").get<std::string>();
    if (mode == "interval") return QuantizationScheme::fixed_interval(Price{j.at("interval_hundredths").get<std::int64_t>()});
    if (mode == "state_count") {
      const auto origin = j.at("origin_hundredths").get<std::int64_t>();
      return QuantizationScheme::fixed_state_count(j.at("state_count").get<std::int64_t>(), Price{origin},
                                                   Price{origin + j.at("range_hundredths").get<std::int64_t>()});
    }
    throw ConfigError("unknown scheme mode '" + mode + "'");
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad scheme JSON: ") + e.what());
  }
}

}  // namespace tickpred
