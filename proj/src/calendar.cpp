#include "volrank/calendar.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <stdexcept>

#include "volrank/errors.hpp"

namespace volrank {

namespace {

int parse_int(std::string_view s, std::string_view whole) {
  int v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw std::invalid_argument("invalid date '" + std::string(whole) + "'");
  }
  return v;
}

}  // namespace

Date parse_date(std::string_view text) {
  if (text.size() != 10 || text[4] != '-' || text[7] != '-') {
    throw std::invalid_argument("invalid date '" + std::string(text) + "' (expected YYYY-MM-DD)");
  }
  const int y = parse_int(text.substr(0, 4), text);
  const int m = parse_int(text.substr(5, 2), text);
  const int d = parse_int(text.substr(8, 2), text);
  Date date{std::chrono::year{y}, std::chrono::month{static_cast<unsigned>(m)},
            std::chrono::day{static_cast<unsigned>(d)}};
  if (!date.ok()) throw std::invalid_argument("invalid date '" + std::string(text) + "'");
  return date;
}

MonthId parse_month(std::string_view text) {
  if (text.size() != 7 || text[4] != '-') {
    throw std::invalid_argument("invalid month '" + std::string(text) + "' (expected YYYY-MM)");
  }
  const int y = parse_int(text.substr(0, 4), text);
  const int m = parse_int(text.substr(5, 2), text);
  if (m < 1 || m > 12) throw std::invalid_argument("invalid month '" + std::string(text) + "'");
  return MonthId::of(y, static_cast<unsigned>(m));
}

std::string format_date(const Date& d) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(d.year()),
                static_cast<unsigned>(d.month()), static_cast<unsigned>(d.day()));
  return buf;
}

std::string format_month(MonthId m) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u", m.year(), m.month());
  return buf;
}

TradingCalendar::TradingCalendar(std::vector<Date> days) : days_(std::move(days)) {
  for (std::size_t i = 1; i < days_.size(); ++i) {
    if (!(std::chrono::sys_days{days_[i - 1]} < std::chrono::sys_days{days_[i]})) {
      throw std::invalid_argument("trading calendar dates must be strictly increasing (at " +
                                  format_date(days_[i]) + ")");
    }
  }
  if (days_.empty()) return;
  day_month_.reserve(days_.size());
  for (const auto& d : days_) day_month_.push_back(MonthId::of(d));
  first_month_ = day_month_.front();
  const int n_months = day_month_.back() - first_month_ + 1;
  month_start_.assign(static_cast<std::size_t>(n_months) + 1, days_.size());
  // month_start_[m] = first day index with month offset >= m
  std::size_t day = 0;
  for (int m = 0; m < n_months; ++m) {
    while (day < days_.size() && day_month_[day] - first_month_ < m) ++day;
    month_start_[static_cast<std::size_t>(m)] = day;
  }
}

bool TradingCalendar::contains_month(MonthId m) const { return month_index(m).has_value(); }

std::optional<std::size_t> TradingCalendar::month_index(MonthId m) const {
  if (days_.empty()) return std::nullopt;
  const int off = m - first_month_;
  if (off < 0 || off >= static_cast<int>(month_count())) return std::nullopt;
  return static_cast<std::size_t>(off);
}

std::optional<std::size_t> TradingCalendar::index_of(const Date& d) const {
  const auto key = std::chrono::sys_days{d};
  auto it = std::lower_bound(days_.begin(), days_.end(), key, [](const Date& a, const auto& k) {
    return std::chrono::sys_days{a} < k;
  });
  if (it == days_.end() || std::chrono::sys_days{*it} != key) return std::nullopt;
  return static_cast<std::size_t>(it - days_.begin());
}

DayRange TradingCalendar::month_days(MonthId m) const { return months_days(m, 1); }

DayRange TradingCalendar::months_days(MonthId first, int count) const {
  if (days_.empty() || count <= 0) return {};
  const int n = static_cast<int>(month_count());
  const int lo = std::clamp(first - first_month_, 0, n);
  const int hi = std::clamp(first - first_month_ + count, 0, n);
  if (hi <= lo) return {};
  return {month_start_[static_cast<std::size_t>(lo)], month_start_[static_cast<std::size_t>(hi)]};
}

DayRange TradingCalendar::window(MonthId test_start, int q) const {
  if (q < 1) throw WindowError("window length must be at least one month");
  const MonthId first = test_start - q;
  const MonthId last = test_start - 1;
  if (!contains_month(first) || !contains_month(last)) {
    throw WindowError("window of " + std::to_string(q) + " month(s) before " +
                      format_month(test_start) + " exits the calendar");
  }
  return months_days(first, q);
}

DayRange TradingCalendar::clipped_window(MonthId test_start, int q) const {
  return months_days(test_start - q, q);
}

TradingCalendar TradingCalendar::slice(DayRange range) const {
  return TradingCalendar(std::vector<Date>(days_.begin() + static_cast<std::ptrdiff_t>(range.begin),
                                           days_.begin() + static_cast<std::ptrdiff_t>(range.end)));
}

}  // namespace volrank
