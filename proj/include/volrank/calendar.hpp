#pragma once

#include <chrono>
#include <compare>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace volrank {

using Date = std::chrono::year_month_day;

/// Calendar month as a running count (year * 12 + month - 1).
struct MonthId {
  int value = 0;

  static MonthId of(int year, unsigned month) {
    return MonthId{year * 12 + static_cast<int>(month) - 1};
  }
  static MonthId of(const Date& d) {
    return of(static_cast<int>(d.year()), static_cast<unsigned>(d.month()));
  }
  int year() const { return value >= 0 ? value / 12 : (value - 11) / 12; }
  unsigned month() const { return static_cast<unsigned>(value - year() * 12 + 1); }

  MonthId operator+(int months) const { return MonthId{value + months}; }
  MonthId operator-(int months) const { return MonthId{value - months}; }
  int operator-(MonthId other) const { return value - other.value; }
  auto operator<=>(const MonthId&) const = default;
};

Date parse_date(std::string_view text);
MonthId parse_month(std::string_view text);
std::string format_date(const Date& d);
std::string format_month(MonthId m);

/// Half-open range of day indices [begin, end).
struct DayRange {
  std::size_t begin = 0;
  std::size_t end = 0;

  std::size_t size() const { return end - begin; }
  bool empty() const { return end == begin; }
  bool contains(std::size_t i) const { return i >= begin && i < end; }
};

/// Ordered trading days. Months are contiguous from the month of the first
/// day to the month of the last day; a month may hold zero trading days.
class TradingCalendar {
 public:
  TradingCalendar() = default;
  /// Throws std::invalid_argument unless days are strictly increasing.
  explicit TradingCalendar(std::vector<Date> days);

  std::size_t size() const { return days_.size(); }
  bool empty() const { return days_.empty(); }
  const Date& day(std::size_t i) const { return days_[i]; }
  const std::vector<Date>& days() const { return days_; }

  MonthId month_of_day(std::size_t i) const { return day_month_[i]; }
  MonthId first_month() const { return first_month_; }
  MonthId last_month() const { return first_month_ + (static_cast<int>(month_count()) - 1); }
  std::size_t month_count() const { return month_start_.empty() ? 0 : month_start_.size() - 1; }
  bool contains_month(MonthId m) const;
  /// Offset of `m` from the first calendar month; nullopt if outside.
  std::optional<std::size_t> month_index(MonthId m) const;

  std::optional<std::size_t> index_of(const Date& d) const;

  /// Trading days of one calendar month (empty range for months outside).
  DayRange month_days(MonthId m) const;
  /// Trading days of months [first, first + count).
  DayRange months_days(MonthId first, int count) const;

  /// The `q` calendar months immediately preceding `test_start`. Throws
  /// WindowError when any of those months lies outside the calendar.
  DayRange window(MonthId test_start, int q) const;
  /// Like window() but truncated at the calendar start instead of throwing.
  DayRange clipped_window(MonthId test_start, int q) const;

  TradingCalendar slice(DayRange range) const;

 private:
  std::vector<Date> days_;
  std::vector<MonthId> day_month_;
  MonthId first_month_;
  std::vector<std::size_t> month_start_;  // month_count() + 1 entries
};

}  // namespace volrank
