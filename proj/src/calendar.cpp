#include "evsom/calendar.hpp"

#include <algorithm>
#include <cstdio>
#include <stdexcept>

namespace evsom {

namespace {

bool is_leap(int y) { return (y % 4 == 0 && y % 100 != 0) || y % 400 == 0; }

int days_in_month(int y, int m) {
    static constexpr int table[12] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    if (m == 2 && is_leap(y)) return 29;
    return table[m - 1];
}

// Day-of-week, 0 = Sunday (Zeller-style via days-from-civil).
int weekday(const Date& d) {
    int y = d.year;
    int m = d.month;
    if (m < 3) {
        y -= 1;
        m += 12;
    }
    int k = y % 100;
    int j = y / 100;
    int h = (d.day + 13 * (m + 1) / 5 + k + k / 4 + j / 4 + 5 * j) % 7;
    // Zeller: h == 0 is Saturday; convert so 0 = Sunday.
    return (h + 6) % 7;
}

}  // namespace

Date Date::parse(const std::string& text) {
    int y = 0, m = 0, d = 0;
    char extra = 0;
    if (std::sscanf(text.c_str(), "%4d-%2d-%2d%c", &y, &m, &d, &extra) != 3 ||
        text.size() != 10 || text[4] != '-' || text[7] != '-') {
        throw std::runtime_error("invalid date '" + text + "' (expected YYYY-MM-DD)");
    }
    if (m < 1 || m > 12 || d < 1 || d > days_in_month(y, m)) {
        throw std::runtime_error("invalid date '" + text + "'");
    }
    return Date{y, m, d};
}

std::string Date::to_string() const {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", year, month, day);
    return buf;
}

Date Date::next() const {
    Date n = *this;
    if (++n.day > days_in_month(n.year, n.month)) {
        n.day = 1;
        if (++n.month > 12) {
            n.month = 1;
            ++n.year;
        }
    }
    return n;
}

bool Date::is_weekend() const {
    int w = weekday(*this);
    return w == 0 || w == 6;
}

Date Date::next_weekday() const {
    Date n = next();
    while (n.is_weekend()) n = n.next();
    return n;
}

std::optional<int> calendar_index(const std::vector<Date>& calendar, const Date& d) {
    auto it = std::lower_bound(calendar.begin(), calendar.end(), d);
    if (it == calendar.end() || *it != d) return std::nullopt;
    return static_cast<int>(it - calendar.begin());
}

int calendar_map_forward(const std::vector<Date>& calendar, const Date& d) {
    if (calendar.empty()) throw std::runtime_error("empty calendar");
    auto it = std::lower_bound(calendar.begin(), calendar.end(), d);
    if (it == calendar.end()) return static_cast<int>(calendar.size()) - 1;
    return static_cast<int>(it - calendar.begin());
}

}  // namespace evsom
