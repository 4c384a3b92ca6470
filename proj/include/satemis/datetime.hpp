#pragma once

#include <cstdint>
#include <string>

namespace satemis {

// Timezone-naive local date-time, minute resolution with optional seconds.
// The count and detection datasets use local wall-clock time; the
// configuration declares which timezone that is.
struct DateTime {
    int year = 0;
    int month = 1;   // 1-12
    int day = 1;     // 1-31
    int hour = 0;    // 0-23
    int minute = 0;  // 0-59
    int second = 0;  // 0-59

    auto operator<=>(const DateTime&) const = default;
};

// Parses "YYYY-MM-DDTHH:MM" or "YYYY-MM-DDTHH:MM:SS" (a space is accepted in
// place of 'T'). Throws ValidationError on malformed input or out-of-range
// fields.
DateTime parse_datetime(const std::string& text);

// "YYYY-MM-DDTHH:MM"; seconds appended only when non-zero.
std::string format_datetime(const DateTime& dt);

// Days since 1970-01-01 for the calendar date part (proleptic Gregorian).
std::int64_t days_from_civil(int year, int month, int day);

// Inverse of days_from_civil; time-of-day fields come back zeroed.
DateTime civil_from_days(std::int64_t days);

// ISO-style weekday, Monday = 1 .. Sunday = 7.
int day_of_week(const DateTime& dt);

bool is_valid_date(int year, int month, int day);

}  // namespace satemis
