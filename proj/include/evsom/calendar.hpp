#pragma once

#include <compare>
#include <optional>
#include <string>
#include <vector>

namespace evsom {

/// Calendar date (year, month, day). Business-day arithmetic is done by
/// position lookup in a panel calendar, not by civil-day math.
struct Date {
    int year = 0;
    int month = 0;
    int day = 0;

    auto operator<=>(const Date&) const = default;

    /// Parses strict ISO-8601 "YYYY-MM-DD"; throws std::runtime_error otherwise.
    static Date parse(const std::string& text);

    std::string to_string() const;

    /// Next civil day (handles month/year rollover and leap years).
    Date next() const;

    /// Next Monday..Friday civil day strictly after this one.
    Date next_weekday() const;

    bool is_weekend() const;
};

/// Index of `d` in a strictly increasing calendar, or nullopt.
std::optional<int> calendar_index(const std::vector<Date>& calendar, const Date& d);

/// Index of the first calendar date >= d, clamped to the last entry.
/// Used to map off-calendar dates (weekends, holidays) to the next business day.
int calendar_map_forward(const std::vector<Date>& calendar, const Date& d);

}  // namespace evsom
