#include "satemis/datetime.hpp"

#include "satemis/errors.hpp"

#include <array>
#include <charconv>
#include <cstdio>

namespace satemis {
namespace {

int parse_int_field(const std::string& text, std::size_t begin, std::size_t len,
                    const std::string& what) {
    if (begin + len > text.size()) {
        throw ValidationError("timestamp too short: '" + text + "'");
    }
    int value = 0;
    const char* first = text.data() + begin;
    auto [ptr, ec] = std::from_chars(first, first + len, value);
    if (ec != std::errc{} || ptr != first + len) {
        throw ValidationError("bad " + what + " in timestamp '" + text + "'");
    }
    return value;
}

}  // namespace

bool is_valid_date(int year, int month, int day) {
    if (month < 1 || month > 12 || day < 1) {
        return false;
    }
    static constexpr std::array<int, 12> days_in = {31, 28, 31, 30, 31, 30,
                                                    31, 31, 30, 31, 30, 31};
    int limit = days_in[static_cast<std::size_t>(month - 1)];
    const bool leap = (year % 4 == 0 && year % 100 != 0) || year % 400 == 0;
    if (month == 2 && leap) {
        limit = 29;
    }
    return day <= limit;
}

DateTime parse_datetime(const std::string& text) {
    // YYYY-MM-DDTHH:MM[:SS]
    if (text.size() != 16 && text.size() != 19) {
        throw ValidationError("unparseable timestamp '" + text + "'");
    }
    if (text[4] != '-' || text[7] != '-' || (text[10] != 'T' && text[10] != ' ') ||
        text[13] != ':' || (text.size() == 19 && text[16] != ':')) {
        throw ValidationError("unparseable timestamp '" + text + "'");
    }
    DateTime dt;
    dt.year = parse_int_field(text, 0, 4, "year");
    dt.month = parse_int_field(text, 5, 2, "month");
    dt.day = parse_int_field(text, 8, 2, "day");
    dt.hour = parse_int_field(text, 11, 2, "hour");
    dt.minute = parse_int_field(text, 14, 2, "minute");
    dt.second = text.size() == 19 ? parse_int_field(text, 17, 2, "second") : 0;

    if (!is_valid_date(dt.year, dt.month, dt.day)) {
        throw ValidationError("invalid calendar date in timestamp '" + text + "'");
    }
    if (dt.hour < 0 || dt.hour > 23 || dt.minute < 0 || dt.minute > 59 ||
        dt.second < 0 || dt.second > 59) {
        throw ValidationError("time of day out of range in timestamp '" + text + "'");
    }
    return dt;
}

std::string format_datetime(const DateTime& dt) {
    char buf[24];
    if (dt.second != 0) {
        std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:%02d:%02d", dt.year,
                      dt.month, dt.day, dt.hour, dt.minute, dt.second);
    } else {
        std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:%02d", dt.year, dt.month,
                      dt.day, dt.hour, dt.minute);
    }
    return buf;
}

std::int64_t days_from_civil(int year, int month, int day) {
    // Howard Hinnant's algorithm, epoch 1970-01-01.
    year -= month <= 2;
    const std::int64_t era = (year >= 0 ? year : year - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(year - era * 400);
    const unsigned doy =
        static_cast<unsigned>((153 * (month + (month > 2 ? -3 : 9)) + 2) / 5 + day - 1);
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

DateTime civil_from_days(std::int64_t days) {
    days += 719468;
    const std::int64_t era = (days >= 0 ? days : days - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(days - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const std::int64_t y = static_cast<std::int64_t>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    const unsigned d = doy - (153 * mp + 2) / 5 + 1;
    const unsigned m = mp < 10 ? mp + 3 : mp - 9;
    DateTime dt;
    dt.year = static_cast<int>(y + (m <= 2));
    dt.month = static_cast<int>(m);
    dt.day = static_cast<int>(d);
    return dt;
}

int day_of_week(const DateTime& dt) {
    const std::int64_t days = days_from_civil(dt.year, dt.month, dt.day);
    // 1970-01-01 was a Thursday.
    const std::int64_t wd = (days % 7 + 7 + 3) % 7;  // 0 = Monday
    return static_cast<int>(wd) + 1;
}

}  // namespace satemis
