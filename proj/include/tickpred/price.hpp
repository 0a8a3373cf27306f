#pragma once

#include <charconv>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <string>
#include <string_view>

namespace tickpred {

/// Exchange price held as an exact count of hundredths (0.01 CNY ticks).
struct Price {
  std::int64_t hundredths = 0;

  static constexpr Price from_hundredths(std::int64_t h) { return Price{h}; }
  constexpr double cny() const { return static_cast<double>(hundredths) / 100.0; }

  friend constexpr auto operator<=>(const Price&, const Price&) = default;
};

/// Seconds since 1970-01-01 of a naive exchange-local wall clock. Calendar
/// dates are taken from this value directly; no timezone is applied.
using EpochSeconds = std::int64_t;

inline constexpr EpochSeconds kSecondsPerDay = 86400;

/// Calendar day number of a timestamp (days since the epoch, floor).
constexpr std::int64_t day_number(EpochSeconds t) {
  return t >= 0 ? t / kSecondsPerDay : -((-t + kSecondsPerDay - 1) / kSecondsPerDay);
}

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '"' || s.front() == '\r'))
    s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '"' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

template <class Int>
bool parse_int(std::string_view s, Int& out) {
  if (s.empty()) return false;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && ptr == s.data() + s.size();
}

inline bool all_digits(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s)
    if (c < '0' || c > '9') return false;
  return true;
}

}  // namespace detail

/// Parses a plain decimal ("18.6", "18.60", "1860") into hundredths, rounding
/// half away from zero past the second decimal. Rejects exponents and junk.
inline std::optional<std::int64_t> parse_hundredths(std::string_view text) {
  auto s = detail::trim(text);
  bool negative = false;
  if (!s.empty() && (s.front() == '-' || s.front() == '+')) {
    negative = s.front() == '-';
    s.remove_prefix(1);
  }
  auto dot = s.find('.');
  std::string_view whole = s.substr(0, dot);
  std::string_view frac = dot == std::string_view::npos ? std::string_view{} : s.substr(dot + 1);
  if (whole.empty() && frac.empty()) return std::nullopt;
  if (!whole.empty() && !detail::all_digits(whole)) return std::nullopt;
  if (!frac.empty() && !detail::all_digits(frac)) return std::nullopt;
  if (whole.size() > 15) return std::nullopt;

  std::int64_t value = 0;
  if (!whole.empty() && !detail::parse_int(whole, value)) return std::nullopt;
  value *= 100;
  int digits[3] = {0, 0, 0};
  for (std::size_t k = 0; k < frac.size() && k < 3; ++k) digits[k] = frac[k] - '0';
  value += digits[0] * 10 + digits[1];
  if (digits[2] >= 5) value += 1;
  return negative ? -value : value;
}

inline std::optional<Price> parse_price(std::string_view text) {
  auto h = parse_hundredths(text);
  if (!h) return std::nullopt;
  return Price{*h};
}

/// "18.60" style rendering with exactly two decimals.
inline std::string format_price(Price p) {
  std::int64_t h = p.hundredths;
  std::string sign = h < 0 ? "-" : "";
  if (h < 0) h = -h;
  std::string frac = std::to_string(h % 100);
  if (frac.size() < 2) frac.insert(0, "0");
  return sign + std::to_string(h / 100) + "." + frac;
}

/// Accepts "YYYY-MM-DD HH:MM:SS", the ISO 'T' form, '/' date separators,
/// compact "YYYYMMDDHHMMSS" and bare epoch seconds. Fractional seconds are
/// truncated.
inline std::optional<EpochSeconds> parse_timestamp(std::string_view text) {
  using namespace std::chrono;
  auto s = detail::trim(text);
  if (s.empty()) return std::nullopt;

  int Y = 0, M = 0, D = 0, h = 0, m = 0, sec = 0;
  auto num = [](std::string_view f, int& out) { return detail::all_digits(f) && detail::parse_int(f, out); };

  if (detail::all_digits(s) && s.size() == 14) {
    if (!num(s.substr(0, 4), Y) || !num(s.substr(4, 2), M) || !num(s.substr(6, 2), D) ||
        !num(s.substr(8, 2), h) || !num(s.substr(10, 2), m) || !num(s.substr(12, 2), sec))
      return std::nullopt;
  } else if (detail::all_digits(s) && s.size() <= 12) {
    EpochSeconds t = 0;
    if (!detail::parse_int(s, t)) return std::nullopt;
    return t;
  } else {
    if (s.size() < 10 || (s[4] != '-' && s[4] != '/') || s[7] != s[4]) return std::nullopt;
    if (!num(s.substr(0, 4), Y) || !num(s.substr(5, 2), M) || !num(s.substr(8, 2), D)) return std::nullopt;
    auto rest = s.substr(10);
    if (!rest.empty()) {
      if (rest.front() != ' ' && rest.front() != 'T') return std::nullopt;
      rest.remove_prefix(1);
      if (auto dot = rest.find('.'); dot != std::string_view::npos) {
        if (!detail::all_digits(rest.substr(dot + 1))) return std::nullopt;
        rest = rest.substr(0, dot);
      }
      if (rest.size() != 8 || rest[2] != ':' || rest[5] != ':') return std::nullopt;
      if (!num(rest.substr(0, 2), h) || !num(rest.substr(3, 2), m) || !num(rest.substr(6, 2), sec))
        return std::nullopt;
    }
  }
  if (h > 23 || m > 59 || sec > 60) return std::nullopt;
  year_month_day ymd{year{Y}, month{static_cast<unsigned>(M)}, day{static_cast<unsigned>(D)}};
  if (!ymd.ok()) return std::nullopt;
  auto days = sys_days{ymd}.time_since_epoch().count();
  return static_cast<EpochSeconds>(days) * kSecondsPerDay + h * 3600 + m * 60 + sec;
}

inline std::string format_timestamp(EpochSeconds t) {
  using namespace std::chrono;
  auto dn = day_number(t);
  year_month_day ymd{sys_days{days{dn}}};
  auto secs = t - dn * kSecondsPerDay;
  char buf[64];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u %02lld:%02lld:%02lld", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                static_cast<long long>(secs / 3600), static_cast<long long>(secs / 60 % 60),
                static_cast<long long>(secs % 60));
  return buf;
}

}  // namespace tickpred
