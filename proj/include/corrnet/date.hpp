#pragma once

#include <chrono>
#include <compare>
#include <optional>
#include <string>
#include <string_view>

namespace corrnet {

/// Calendar date with ISO-8601 (YYYY-MM-DD) text form.
class Date {
public:
    constexpr Date() = default;
    constexpr explicit Date(std::chrono::sys_days days) : days_(days) {}
    Date(int year, unsigned month, unsigned day);

    /// Returns nullopt unless `text` is exactly a valid YYYY-MM-DD date.
    static std::optional<Date> parse(std::string_view text);

    std::string iso() const;
    std::chrono::sys_days days() const { return days_; }
    std::chrono::year_month_day ymd() const { return std::chrono::year_month_day{days_}; }
    bool is_weekday() const;

    Date operator+(int n) const { return Date{days_ + std::chrono::days{n}}; }

    friend auto operator<=>(const Date&, const Date&) = default;

private:
    std::chrono::sys_days days_{};
};

} // namespace corrnet
