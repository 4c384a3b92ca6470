#include "satemis/speed_estimation.hpp"

#include "satemis/errors.hpp"
#include "satemis/synth.hpp"
#include "test_util.hpp"

#include <cmath>

#include <doctest.h>

using namespace satemis;
using speed::Blob;
using speed::Grid;
using speed::Polarity;

namespace {

// band_a carries a gradient so the ensemble has variance.
speed::DualBandRaster gradient_raster(std::size_t n = 16) {
    speed::DualBandRaster raster;
    raster.band_a = Grid::zeros(n, n);
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t c = 0; c < n; ++c) {
            raster.band_a.at(r, c) = static_cast<double>(r * n + c);
        }
    }
    raster.band_b = raster.band_a;
    raster.gsd_m_per_px = 1.0;
    raster.time_lag_s = 0.26;
    return raster;
}

Grid rectangle_map(std::size_t rows, std::size_t cols, std::size_t r0, std::size_t c0,
                   std::size_t h, std::size_t w, double value) {
    Grid map = Grid::zeros(rows, cols);
    for (std::size_t r = 0; r < h; ++r) {
        for (std::size_t c = 0; c < w; ++c) {
            map.at(r0 + r, c0 + c) = value;
        }
    }
    return map;
}

Blob blob_at(double row, double col, Polarity polarity) {
    Blob b;
    b.centroid_row = row;
    b.centroid_col = col;
    b.area_px = 6;
    b.compactness = 0.7;
    b.rectangularity = 1.0;
    b.polarity = polarity;
    return b;
}

}  // namespace

TEST_CASE("change image is zero for identical or offset bands") {
    auto raster = gradient_raster();
    const auto change = speed::build_change_image(raster);
    CHECK(change.rows == raster.band_a.rows);
    for (const double v : change.values) {
        CHECK(std::abs(v) <= 1e-9);
    }

    for (auto& v : raster.band_b.values) {
        v += 42.5;  // uniform brightness shift is static scene content
    }
    const auto offset_change = speed::build_change_image(raster);
    for (const double v : offset_change.values) {
        CHECK(std::abs(v) <= 1e-9);
    }
}

TEST_CASE("constant bands are a degenerate input") {
    speed::DualBandRaster flat;
    flat.band_a = Grid::zeros(8, 8);
    flat.band_b = Grid::zeros(8, 8);
    flat.gsd_m_per_px = 1.0;
    flat.time_lag_s = 0.26;
    for (auto& v : flat.band_a.values) v = 7.0;
    for (auto& v : flat.band_b.values) v = 7.0;
    CHECK_THROWS_AS(speed::build_change_image(flat), ValidationError);
}

TEST_CASE("change image localises a shifted object as an extremum pair") {
    synth::RasterConfig cfg;
    cfg.rows = 64;
    cfg.cols = 64;
    cfg.object_rows = 3;
    cfg.object_cols = 2;
    cfg.object_row = 30;
    cfg.object_col = 20;
    cfg.shift_px = 4;
    cfg.noise_stddev = 0.0;
    const auto raster = synth::gen_raster(cfg);
    const auto change = speed::build_change_image(raster);

    std::size_t argmax = 0;
    std::size_t argmin = 0;
    for (std::size_t i = 0; i < change.values.size(); ++i) {
        if (change.values[i] > change.values[argmax]) argmax = i;
        if (change.values[i] < change.values[argmin]) argmin = i;
    }
    const auto row_of = [&](std::size_t i) { return i / change.cols; };
    const auto col_of = [&](std::size_t i) { return i % change.cols; };

    // The projection of mean-centred data stays zero-mean.
    double sum = 0.0;
    for (const double v : change.values) {
        sum += v;
    }
    CHECK(std::abs(sum / static_cast<double>(change.values.size())) <
          1e-9 * std::abs(change.values[argmax]));

    // One extremum inside the old footprint, the other inside the new one,
    // 4 columns apart.
    CHECK(row_of(argmax) >= 30);
    CHECK(row_of(argmax) < 33);
    CHECK(col_of(argmax) >= 20);
    CHECK(col_of(argmax) < 22);
    CHECK(row_of(argmin) >= 30);
    CHECK(row_of(argmin) < 33);
    CHECK(col_of(argmin) >= 24);
    CHECK(col_of(argmin) < 26);
    CHECK(change.values[argmax] > 0.0);
    CHECK(change.values[argmin] < 0.0);
}

TEST_CASE("detect_moving_objects on constructed maps") {
    SUBCASE("all zeros yield no blobs") {
        const Grid zeros = Grid::zeros(32, 32);
        CHECK(speed::detect_moving_objects(zeros).empty());
    }

    SUBCASE("a solid rectangle is one fully rectangular blob") {
        const Grid map = rectangle_map(64, 64, 10, 10, 2, 3, 8.0);
        const auto blobs = speed::detect_moving_objects(map);
        REQUIRE(blobs.size() == 1);
        CHECK(blobs[0].area_px == 6);
        CHECK(blobs[0].rectangularity == doctest::Approx(1.0).epsilon(1e-12));
        // 4*pi*6/10^2 with an exposed-edge perimeter of 10
        CHECK(blobs[0].compactness == doctest::Approx(0.7539822368615503).epsilon(1e-9));
        CHECK(blobs[0].polarity == Polarity::Bright);
        CHECK(blobs[0].centroid_row == doctest::Approx(10.5));
        CHECK(blobs[0].centroid_col == doctest::Approx(11.0));
    }

    SUBCASE("speckle below the area threshold is ignored") {
        Grid map = rectangle_map(64, 64, 10, 10, 2, 3, 8.0);
        map.at(40, 40) = 9.0;  // 1-px speckle
        map.at(50, 5) = -7.5;
        const auto blobs = speed::detect_moving_objects(map);
        REQUIRE(blobs.size() == 1);
        CHECK(blobs[0].area_px == 6);
    }

    SUBCASE("negative regions come back dark") {
        const Grid map = rectangle_map(64, 64, 20, 20, 2, 3, -8.0);
        const auto blobs = speed::detect_moving_objects(map);
        REQUIRE(blobs.size() == 1);
        CHECK(blobs[0].polarity == Polarity::Dark);
    }

    SUBCASE("non-finite change map is rejected") {
        Grid map = Grid::zeros(8, 8);
        map.at(1, 1) = std::nan("");
        CHECK_THROWS_AS(speed::detect_moving_objects(map), ValidationError);
    }
}

TEST_CASE("raising any geometric threshold never increases the blob count") {
    synth::RasterConfig cfg;
    cfg.noise_stddev = 2.0;
    cfg.shift_px = 4;
    const auto change = speed::build_change_image(synth::gen_raster(cfg));

    speed::BlobThresholds base;
    base.min_area_px = 1;
    base.min_compactness = 0.05;
    base.min_rectangularity = 0.05;
    base.intensity_quantile = 0.98;
    std::size_t previous = speed::detect_moving_objects(change, base).size();

    SUBCASE("area") {
        for (long a = 2; a <= 8; ++a) {
            auto t = base;
            t.min_area_px = a;
            const std::size_t count = speed::detect_moving_objects(change, t).size();
            CHECK(count <= previous);
            previous = count;
        }
    }
    SUBCASE("compactness") {
        for (double c = 0.1; c <= 0.9; c += 0.1) {
            auto t = base;
            t.min_compactness = c;
            const std::size_t count = speed::detect_moving_objects(change, t).size();
            CHECK(count <= previous);
            previous = count;
        }
    }
    SUBCASE("rectangularity") {
        for (double r = 0.1; r <= 1.0; r += 0.1) {
            auto t = base;
            t.min_rectangularity = r;
            const std::size_t count = speed::detect_moving_objects(change, t).size();
            CHECK(count <= previous);
            previous = count;
        }
    }
}

TEST_CASE("pair_blobs matches opposite polarities within the radius") {
    const double limit = speed::default_max_displacement_m(0.26);
    CHECK(limit == doctest::Approx(8.136128).epsilon(1e-9));

    const std::vector<Blob> blobs = {blob_at(10.0, 10.0, Polarity::Bright),
                                     blob_at(10.0, 14.0, Polarity::Dark)};

    SUBCASE("4 px at 1 m/px is within the 70 mph radius") {
        const auto pairs = speed::pair_blobs(blobs, limit, 1.0);
        REQUIRE(pairs.size() == 1);
        CHECK(pairs[0].distance_px == doctest::Approx(4.0));
    }

    SUBCASE("the same pixels at 3 m/px are out of reach") {
        CHECK(speed::pair_blobs(blobs, limit, 3.0).empty());
    }

    SUBCASE("equal polarities never pair") {
        const std::vector<Blob> bright = {blob_at(0.0, 0.0, Polarity::Bright),
                                          blob_at(0.0, 1.0, Polarity::Bright)};
        CHECK(speed::pair_blobs(bright, limit, 1.0).empty());
    }

    SUBCASE("each blob is used at most once, nearest first") {
        const std::vector<Blob> three = {blob_at(0.0, 0.0, Polarity::Bright),
                                         blob_at(0.0, 3.0, Polarity::Dark),
                                         blob_at(0.0, 5.0, Polarity::Bright)};
        const auto pairs = speed::pair_blobs(three, 100.0, 1.0);
        REQUIRE(pairs.size() == 1);
        CHECK(pairs[0].distance_px == doctest::Approx(2.0));  // (0,5)-(0,3)
    }
}

TEST_CASE("estimate_speed converts displacement to km/h") {
    std::vector<speed::BlobPair> pairs = {
        {blob_at(0, 0, Polarity::Bright), blob_at(0, 8, Polarity::Dark), 8.0}};

    const auto one = speed::estimate_speed(pairs, 1.0, 0.26);
    REQUIRE_FALSE(one.failed());
    CHECK(*one.mean_speed_kmh == doctest::Approx(110.76923076923077).epsilon(1e-12));
    CHECK(one.pair_count == 1);
    REQUIRE(one.pair_displacements_m.size() == 1);
    CHECK(one.pair_displacements_m[0] == doctest::Approx(8.0));

    pairs.push_back({blob_at(0, 0, Polarity::Bright), blob_at(0, 4, Polarity::Dark), 4.0});
    pairs[0].distance_px = 4.0;
    pairs[1].distance_px = 6.0;
    const auto two = speed::estimate_speed(pairs, 1.0, 0.26);
    CHECK(*two.mean_speed_kmh == doctest::Approx(69.23076923076923).epsilon(1e-12));

    const auto none = speed::estimate_speed({}, 1.0, 0.26);
    CHECK(none.failed());
    CHECK(none.pair_count == 0);
}

TEST_CASE("shift recovery across small shifts") {
    for (long shift = 2; shift <= 6; ++shift) {
        synth::RasterConfig cfg;
        cfg.seed = 100 + static_cast<std::uint64_t>(shift);
        cfg.object_rows = 3;  // 2 px along the shift axis
        cfg.object_cols = 2;
        cfg.shift_px = shift;
        cfg.gsd_m_per_px = 1.0;
        cfg.noise_stddev = 0.5;
        const auto raster = synth::gen_raster(cfg);
        const auto change = speed::build_change_image(raster);
        const auto blobs = speed::detect_moving_objects(change);
        const auto pairs = speed::pair_blobs(blobs, 15.0, raster.gsd_m_per_px);
        const auto estimate =
            speed::estimate_speed(pairs, raster.gsd_m_per_px, raster.time_lag_s);
        REQUIRE_FALSE(estimate.failed());
        const double expected = synth::implied_speed_kmh(cfg);
        CHECK(std::abs(*estimate.mean_speed_kmh - expected) / expected < 0.10);
    }
}

TEST_CASE("swapping the bands flips polarities but not the speed") {
    synth::RasterConfig cfg;
    cfg.shift_px = 4;
    cfg.noise_stddev = 0.5;
    const auto raster = synth::gen_raster(cfg);
    speed::DualBandRaster swapped = raster;
    std::swap(swapped.band_a, swapped.band_b);

    const auto blobs = speed::detect_moving_objects(speed::build_change_image(raster));
    const auto blobs_swapped =
        speed::detect_moving_objects(speed::build_change_image(swapped));
    REQUIRE(blobs.size() == blobs_swapped.size());
    REQUIRE_FALSE(blobs.empty());

    std::size_t bright = 0, dark = 0, bright_swapped = 0, dark_swapped = 0;
    for (const auto& b : blobs) {
        (b.polarity == Polarity::Bright ? bright : dark) += 1;
    }
    for (const auto& b : blobs_swapped) {
        (b.polarity == Polarity::Bright ? bright_swapped : dark_swapped) += 1;
    }
    CHECK(bright == dark_swapped);
    CHECK(dark == bright_swapped);

    const auto est = speed::estimate_speed(
        speed::pair_blobs(blobs, 15.0, raster.gsd_m_per_px), raster.gsd_m_per_px,
        raster.time_lag_s);
    const auto est_swapped = speed::estimate_speed(
        speed::pair_blobs(blobs_swapped, 15.0, raster.gsd_m_per_px), raster.gsd_m_per_px,
        raster.time_lag_s);
    REQUIRE_FALSE(est.failed());
    REQUIRE_FALSE(est_swapped.failed());
    CHECK(*est.mean_speed_kmh == doctest::Approx(*est_swapped.mean_speed_kmh).epsilon(1e-9));
}

TEST_CASE("global rescaling leaves centroids and pairing unchanged") {
    synth::RasterConfig cfg;
    cfg.shift_px = 3;
    cfg.noise_stddev = 0.8;
    const auto raster = synth::gen_raster(cfg);
    speed::DualBandRaster scaled = raster;
    for (auto& v : scaled.band_a.values) v *= 3.7;
    for (auto& v : scaled.band_b.values) v *= 3.7;

    const auto blobs = speed::detect_moving_objects(speed::build_change_image(raster));
    const auto blobs_scaled =
        speed::detect_moving_objects(speed::build_change_image(scaled));
    REQUIRE(blobs.size() == blobs_scaled.size());
    REQUIRE_FALSE(blobs.empty());
    for (std::size_t i = 0; i < blobs.size(); ++i) {
        CHECK(blobs[i].centroid_row ==
              doctest::Approx(blobs_scaled[i].centroid_row).epsilon(1e-9));
        CHECK(blobs[i].centroid_col ==
              doctest::Approx(blobs_scaled[i].centroid_col).epsilon(1e-9));
        CHECK(blobs[i].area_px == blobs_scaled[i].area_px);
    }

    const auto pairs = speed::pair_blobs(blobs, 15.0, raster.gsd_m_per_px);
    const auto pairs_scaled = speed::pair_blobs(blobs_scaled, 15.0, raster.gsd_m_per_px);
    REQUIRE(pairs.size() == pairs_scaled.size());
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        CHECK(pairs[i].distance_px == doctest::Approx(pairs_scaled[i].distance_px));
    }
}

TEST_CASE("minimum-area bounding rectangle") {
    using Points = std::vector<std::pair<double, double>>;

    const Points unit_square = {{0, 0}, {0, 1}, {1, 0}, {1, 1}};
    CHECK(speed::min_bounding_rect_area(unit_square) == doctest::Approx(1.0));

    const Points rect = {{0, 0}, {0, 3}, {2, 0}, {2, 3}, {1, 1.5}};
    CHECK(speed::min_bounding_rect_area(rect) == doctest::Approx(6.0));

    // Diagonal staircase of pixel squares: the rotated rectangle beats the
    // axis-aligned 3x3 box.
    Points staircase;
    for (int i = 0; i < 3; ++i) {
        staircase.push_back({i + 0.0, i + 0.0});
        staircase.push_back({i + 0.0, i + 1.0});
        staircase.push_back({i + 1.0, i + 0.0});
        staircase.push_back({i + 1.0, i + 1.0});
    }
    const double area = speed::min_bounding_rect_area(staircase);
    CHECK(area < 9.0);
    CHECK(area >= 3.0);

    const Points collinear = {{0, 0}, {1, 1}, {2, 2}};
    CHECK(speed::min_bounding_rect_area(collinear) == 0.0);
}

TEST_CASE("raster files round-trip") {
    testutil::TempDir tmp("raster");
    synth::RasterConfig cfg;
    cfg.rows = 16;
    cfg.cols = 24;
    cfg.object_row = 4;
    cfg.object_col = 4;
    cfg.shift_px = 2;
    const auto raster = synth::gen_raster(cfg);

    const auto path = tmp / "scene.dbr";
    speed::write_raster(path, raster);
    const auto loaded = speed::read_raster(path);
    CHECK(loaded.band_a.rows == 16);
    CHECK(loaded.band_a.cols == 24);
    CHECK(loaded.gsd_m_per_px == raster.gsd_m_per_px);
    CHECK(loaded.time_lag_s == raster.time_lag_s);
    for (std::size_t i = 0; i < loaded.band_a.values.size(); ++i) {
        // Stored as float32.
        CHECK(loaded.band_a.values[i] ==
              doctest::Approx(raster.band_a.values[i]).epsilon(1e-6));
    }

    speed::write_raster(tmp / "again.dbr", raster);
    CHECK(testutil::read_file(path) == testutil::read_file(tmp / "again.dbr"));

    testutil::write_file(tmp / "junk.dbr", "not a raster");
    CHECK_THROWS_AS(speed::read_raster(tmp / "junk.dbr"), ValidationError);
}
