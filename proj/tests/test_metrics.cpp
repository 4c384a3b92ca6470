#include "satemis/metrics.hpp"

#include "satemis/errors.hpp"
#include "test_util.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include <doctest.h>

using namespace satemis;
using metrics::EvalPair;

TEST_CASE("rmse matches closed-form values") {
    const std::vector<EvalPair> exact = {{3.0, 3.0, ""}, {7.5, 7.5, ""}};
    CHECK(metrics::rmse(exact) == 0.0);

    const std::vector<EvalPair> two = {{0.0, 3.0, ""}, {0.0, 4.0, ""}};
    CHECK(metrics::rmse(two) == doctest::Approx(3.5355339059327378).epsilon(1e-12));

    const std::vector<EvalPair> one = {{10.0, 7.0, ""}};
    CHECK(metrics::rmse(one) == 3.0);

    CHECK_THROWS_AS(metrics::rmse({}), ValidationError);
}

TEST_CASE("mape matches closed-form values and reports exclusions") {
    const std::vector<EvalPair> exact = {{5.0, 5.0, ""}};
    CHECK(metrics::mape(exact).value == 0.0);

    const std::vector<EvalPair> ten_percent = {{110.0, 100.0, ""}};
    CHECK(metrics::mape(ten_percent).value == doctest::Approx(0.10).epsilon(1e-12));

    const std::vector<EvalPair> two = {{110.0, 100.0, ""}, {80.0, 100.0, ""}};
    CHECK(metrics::mape(two).value == doctest::Approx(0.15).epsilon(1e-12));

    const std::vector<EvalPair> with_zero = {{110.0, 100.0, ""}, {3.0, 0.0, ""}};
    const auto result = metrics::mape(with_zero);
    CHECK(result.value == doctest::Approx(0.10).epsilon(1e-12));
    CHECK(result.excluded_zero_truth == 1);

    const std::vector<EvalPair> all_zero = {{1.0, 0.0, ""}};
    CHECK_THROWS_AS(metrics::mape(all_zero), ValidationError);
    CHECK_THROWS_AS(metrics::mape({}), ValidationError);
}

TEST_CASE("r_squared matches closed-form values") {
    const std::vector<EvalPair> perfect = {{1.0, 1.0, ""}, {2.0, 2.0, ""}, {3.0, 3.0, ""}};
    CHECK(metrics::r_squared(perfect) == 1.0);

    // Predicting the mean of the truths gives exactly zero.
    const std::vector<EvalPair> mean_pred = {{2.0, 1.0, ""}, {2.0, 2.0, ""}, {2.0, 3.0, ""}};
    CHECK(metrics::r_squared(mean_pred) == 0.0);

    // SS_res = 1, SS_tot = 2 -> 0.5
    const std::vector<EvalPair> half = {{1.0, 1.0, ""}, {2.0, 2.0, ""}, {4.0, 3.0, ""}};
    CHECK(metrics::r_squared(half) == doctest::Approx(0.5).epsilon(1e-12));

    const std::vector<EvalPair> single = {{1.0, 1.0, ""}};
    CHECK_THROWS_AS(metrics::r_squared(single), ValidationError);
    const std::vector<EvalPair> flat = {{1.0, 2.0, ""}, {3.0, 2.0, ""}};
    CHECK_THROWS_AS(metrics::r_squared(flat), ValidationError);
}

TEST_CASE("metrics are permutation invariant; rmse scales, mape does not") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> dist(1.0, 50.0);
    std::vector<EvalPair> pairs;
    for (int i = 0; i < 40; ++i) {
        pairs.push_back({dist(rng), dist(rng), ""});
    }
    std::vector<EvalPair> shuffled = pairs;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);

    CHECK(metrics::rmse(pairs) == doctest::Approx(metrics::rmse(shuffled)).epsilon(1e-12));
    CHECK(metrics::mape(pairs).value ==
          doctest::Approx(metrics::mape(shuffled).value).epsilon(1e-12));
    CHECK(metrics::r_squared(pairs) ==
          doctest::Approx(metrics::r_squared(shuffled)).epsilon(1e-12));

    const double c = 7.25;
    std::vector<EvalPair> scaled = pairs;
    for (auto& p : scaled) {
        p.predicted *= c;
        p.truth *= c;
    }
    CHECK(metrics::rmse(scaled) == doctest::Approx(c * metrics::rmse(pairs)).epsilon(1e-12));
    CHECK(metrics::mape(scaled).value ==
          doctest::Approx(metrics::mape(pairs).value).epsilon(1e-12));
}

TEST_CASE("metrics table appends AVERAGE rows") {
    testutil::TempDir tmp("metrics");

    SUBCASE("single AVERAGE row") {
        const std::vector<metrics::MetricsRow> rows = {
            {{"site1", "A"}, 10.0, 0.2}, {{"site2", "B"}, 20.0, 0.4}};
        const auto path = tmp / "table.csv";
        metrics::write_metrics_table(path, {"site", "direction", "rmse", "mape"}, rows);
        const std::string text = testutil::read_file(path);
        CHECK(text == "site,direction,rmse,mape\n"
                      "site1,A,10,0.2\n"
                      "site2,B,20,0.4\n"
                      "AVERAGE,,15,0.30000000000000004\n");
    }

    SUBCASE("grouped AVERAGE rows per road type") {
        const std::vector<metrics::MetricsRow> rows = {
            {{"LA1", "Motorways"}, 10.0, 0.2},
            {{"LA1", "A-Roads"}, 30.0, 0.1},
            {{"LA2", "Motorways"}, 20.0, 0.4},
            {{"LA2", "A-Roads"}, 50.0, 0.3},
        };
        const auto path = tmp / "grouped.csv";
        metrics::write_metrics_table(path, {"la", "road_type", "rmse", "mape"}, rows, 1);
        const std::string text = testutil::read_file(path);
        CHECK(text.find("AVERAGE,Motorways,15,") != std::string::npos);
        CHECK(text.find("AVERAGE,A-Roads,40,") != std::string::npos);
    }
}

TEST_CASE("scatter data columns") {
    testutil::TempDir tmp("scatter");
    const auto path = tmp / "scatter.csv";
    metrics::write_scatter_data(path, {{"LA1", "Motorways", 1.0, 2.0, 3.0, 4.0}});
    const std::string text = testutil::read_file(path);
    CHECK(text == "la,road_type,aadt_pred,aadt_true,ghg_pred,ghg_true\n"
                  "LA1,Motorways,1,2,3,4\n");
}
