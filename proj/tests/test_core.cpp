#include "satemis/config.hpp"
#include "satemis/datetime.hpp"
#include "satemis/errors.hpp"
#include "satemis/rng.hpp"
#include "satemis/types.hpp"
#include "test_util.hpp"

#include <cmath>
#include <set>

#include <doctest.h>

using namespace satemis;

TEST_CASE("datetime parses and formats") {
    const DateTime dt = parse_datetime("2017-03-01T08:15");
    CHECK(dt.year == 2017);
    CHECK(dt.month == 3);
    CHECK(dt.day == 1);
    CHECK(dt.hour == 8);
    CHECK(dt.minute == 15);
    CHECK(format_datetime(dt) == "2017-03-01T08:15");

    const DateTime with_seconds = parse_datetime("2018-06-12T08:15:30");
    CHECK(with_seconds.second == 30);
    CHECK(format_datetime(with_seconds) == "2018-06-12T08:15:30");

    CHECK_THROWS_AS(parse_datetime("2017-13-01T00:00"), ValidationError);
    CHECK_THROWS_AS(parse_datetime("2017-02-29T00:00"), ValidationError);
    CHECK_THROWS_AS(parse_datetime("yesterday"), ValidationError);
    CHECK_THROWS_AS(parse_datetime("2017-03-01 0815"), ValidationError);
    CHECK_NOTHROW(parse_datetime("2016-02-29T00:00"));  // leap year
}

TEST_CASE("day_of_week uses Monday = 1") {
    CHECK(day_of_week(parse_datetime("2018-06-12T08:15")) == 2);  // Tuesday
    CHECK(day_of_week(parse_datetime("2017-01-01T00:00")) == 7);  // Sunday
    CHECK(day_of_week(parse_datetime("1970-01-01T00:00")) == 4);  // Thursday
}

TEST_CASE("civil day arithmetic round-trips") {
    for (const auto& text : {"1999-12-31T00:00", "2000-02-29T00:00", "2018-06-12T00:00"}) {
        const DateTime dt = parse_datetime(text);
        const auto days = days_from_civil(dt.year, dt.month, dt.day);
        const DateTime back = civil_from_days(days);
        CHECK(back.year == dt.year);
        CHECK(back.month == dt.month);
        CHECK(back.day == dt.day);
    }
    CHECK(days_from_civil(1970, 1, 1) == 0);
    CHECK(days_from_civil(1970, 1, 2) == 1);
}

TEST_CASE("rng streams are deterministic and forks are independent") {
    Rng a(123);
    Rng b(123);
    for (int i = 0; i < 100; ++i) {
        CHECK(a.next_u64() == b.next_u64());
    }

    Rng base(7);
    Rng f0 = base.fork(0);
    Rng f1 = base.fork(1);
    CHECK(f0.next_u64() != f1.next_u64());

    Rng u(99);
    for (int i = 0; i < 1000; ++i) {
        const double x = u.uniform01();
        CHECK(x >= 0.0);
        CHECK(x < 1.0);
    }
}

TEST_CASE("poisson draws have roughly the configured mean") {
    for (const double lambda : {3.0, 25.0, 300.0}) {
        Rng rng(42);
        double sum = 0.0;
        const int n = 4000;
        for (int i = 0; i < n; ++i) {
            sum += static_cast<double>(rng.poisson(lambda));
        }
        const double mean = sum / n;
        CHECK(std::abs(mean - lambda) < 5.0 * std::sqrt(lambda / n) + 0.5);
    }
    Rng rng(1);
    CHECK(rng.poisson(0.0) == 0);
}

TEST_CASE("enum round trips") {
    for (const auto rt : {RoadType::Motorways, RoadType::ARoads, RoadType::MinorRoads}) {
        CHECK(parse_road_type(to_string(rt)) == rt);
    }
    CHECK(parse_road_type("motorways") == RoadType::Motorways);
    CHECK(parse_road_type("a-roads") == RoadType::ARoads);
    CHECK(parse_road_type("minor-roads") == RoadType::MinorRoads);
    CHECK_THROWS_AS(parse_road_type("bridleways"), ValidationError);

    for (const auto vt : kVehicleTypes) {
        CHECK(parse_vehicle_type(to_string(vt)) == vt);
    }
    CHECK_THROWS_AS(parse_direction("C"), ValidationError);
}

TEST_CASE("flat key=value config parsing") {
    testutil::TempDir tmp("config");
    const auto path = tmp / "run.conf";
    testutil::write_file(path,
                         "# a comment\n"
                         "history = data/history.csv\n"
                         "seed=7\n"
                         "val_fraction = 0.2  # trailing comment\n"
                         "no_vehicle_type = true\n"
                         "\n");
    const auto kv = config::parse_key_values(path);
    CHECK(config::get_string(kv, "history", "") == "data/history.csv");
    CHECK(config::get_long(kv, "seed", 0) == 7);
    CHECK(config::get_double(kv, "val_fraction", 0.0) == 0.2);
    CHECK(config::get_bool(kv, "no_vehicle_type", false));
    CHECK(config::get_string(kv, "absent", "fallback") == "fallback");

    testutil::write_file(tmp / "bad.conf", "not an assignment\n");
    CHECK_THROWS_AS(config::parse_key_values(tmp / "bad.conf"), ValidationError);

    testutil::write_file(tmp / "badnum.conf", "seed = soup\n");
    const auto bad = config::parse_key_values(tmp / "badnum.conf");
    CHECK_THROWS_AS(config::get_long(bad, "seed", 0), ValidationError);

    CHECK(config::split_list("a, b,c") == std::vector<std::string>{"a", "b", "c"});
    CHECK(config::split_list("") == std::vector<std::string>{});
}
