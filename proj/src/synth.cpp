#include "satemis/synth.hpp"

#include "satemis/errors.hpp"
#include "satemis/rng.hpp"

#include <algorithm>
#include <cmath>

namespace satemis::synth {
namespace {

constexpr double kTwoPi = 2.0 * 3.14159265358979323846;

// Representative vehicle lengths per class, cm; widths are fixed at 200 cm.
constexpr std::array<double, 4> kClassLengthCm = {450.0, 600.0, 900.0, 1400.0};
constexpr double kVehicleWidthCm = 200.0;

DateTime interval_timestamp(const DateTime& start, std::size_t day,
                            std::size_t quarter_hour) {
    DateTime ts = civil_from_days(days_from_civil(start.year, start.month, start.day) +
                                  static_cast<std::int64_t>(day));
    const std::size_t minutes = quarter_hour * 15;
    ts.hour = static_cast<int>(minutes / 60);
    ts.minute = static_cast<int>(minutes % 60);
    return ts;
}

}  // namespace

std::string site_name(std::size_t site_index) {
    return "site" + std::to_string(site_index + 1);
}

std::string la_name(std::size_t site_index) {
    return "LA" + std::to_string(site_index + 1);
}

double interval_rate(const SynthConfig& config, std::size_t class_index,
                     const DateTime& t, Direction direction) {
    const double base = config.base_flow_per_hour.at(class_index) / 4.0;
    const double minute_of_day = t.hour * 60.0 + t.minute;
    const double diurnal =
        1.0 + config.diurnal_amplitude * std::sin(kTwoPi * minute_of_day / 1440.0 - kTwoPi / 4.0);
    const double weekly = day_of_week(t) >= 6 ? 1.0 - config.weekly_amplitude : 1.0;
    const double monthly =
        1.0 + config.monthly_amplitude * std::sin(kTwoPi * (t.month - 1) / 12.0);
    const double directional =
        direction == Direction::B ? config.direction_b_factor : 1.0;
    return std::max(0.0, base * diurnal * weekly * monthly * directional);
}

std::vector<CountRecord> gen_history_records(const SynthConfig& config,
                                             std::size_t site_index) {
    Rng rng = Rng(config.seed).fork(site_index);
    std::vector<CountRecord> records;
    records.reserve(config.days * 96 * config.directions.size());
    for (std::size_t day = 0; day < config.days; ++day) {
        for (std::size_t q = 0; q < 96; ++q) {
            const DateTime ts = interval_timestamp(config.start, day, q);
            for (const Direction dir : config.directions) {
                CountRecord rec;
                rec.timestamp = ts;
                rec.site_id = site_name(site_index);
                rec.direction = dir;
                long total = 0;
                for (std::size_t k = 0; k < 4; ++k) {
                    const long n = rng.poisson(interval_rate(config, k, ts, dir));
                    rec.counts[k] = n;
                    total += n;
                }
                rec.total = total;
                rec.mean_speed_kmh =
                    std::max(0.0, rng.normal(config.speed_mean_kmh, config.speed_stddev_kmh));
                records.push_back(std::move(rec));
            }
        }
    }
    return records;
}

std::vector<std::filesystem::path> gen_history(const SynthConfig& config,
                                               const std::filesystem::path& out_dir) {
    std::filesystem::create_directories(out_dir);
    std::vector<std::filesystem::path> paths;
    for (std::size_t i = 0; i < config.n_sites; ++i) {
        const auto path = out_dir / ("history_" + site_name(i) + ".csv");
        ingest::write_count_history(path, gen_history_records(config, i));
        paths.push_back(path);
    }
    return paths;
}

std::vector<SiteAadt> gen_site_aadt(const SynthConfig& config) {
    std::vector<SiteAadt> rows;
    for (std::size_t i = 0; i < config.n_sites; ++i) {
        const double site_scale = 1.0 + 0.2 * static_cast<double>(i);
        for (const auto& [road_type, factor] : config.road_type_aadt_factor) {
            for (const Direction dir : {Direction::A, Direction::B}) {
                const double share = dir == Direction::A ? config.direction_a_share
                                                         : 1.0 - config.direction_a_share;
                SiteAadt row;
                row.la_name = la_name(i);
                row.road_type = road_type;
                row.site_id = site_name(i);
                row.direction = dir;
                for (const auto vt : kVehicleTypes) {
                    row.aadt[vt] = config.aadt_base[vt] * site_scale * factor * share;
                }
                rows.push_back(std::move(row));
            }
        }
    }
    return rows;
}

speed::DualBandRaster gen_raster(const RasterConfig& config) {
    if (config.shift_px < 0) {
        throw ValidationError("gen_raster: shift_px must be >= 0");
    }
    if (config.object_row + config.object_rows > config.rows ||
        config.object_col + config.object_cols + static_cast<std::size_t>(config.shift_px) >
            config.cols) {
        throw ValidationError("gen_raster: object out of frame after shift");
    }

    Rng base(config.seed);
    Rng texture_rng = base.fork(0);
    Rng noise_a = base.fork(1);
    Rng noise_b = base.fork(2);

    // Smooth background: coarse uniform lattice, bilinear interpolation.
    constexpr std::size_t kStep = 8;
    const std::size_t coarse_rows = config.rows / kStep + 2;
    const std::size_t coarse_cols = config.cols / kStep + 2;
    std::vector<double> coarse(coarse_rows * coarse_cols);
    for (auto& v : coarse) {
        v = texture_rng.uniform(0.0, config.background_amplitude);
    }
    const auto background = [&](std::size_t r, std::size_t c) {
        const double fr = static_cast<double>(r) / kStep;
        const double fc = static_cast<double>(c) / kStep;
        const std::size_t r0 = static_cast<std::size_t>(fr);
        const std::size_t c0 = static_cast<std::size_t>(fc);
        const double tr = fr - static_cast<double>(r0);
        const double tc = fc - static_cast<double>(c0);
        const auto v = [&](std::size_t rr, std::size_t cc) {
            return coarse[rr * coarse_cols + cc];
        };
        return (1 - tr) * ((1 - tc) * v(r0, c0) + tc * v(r0, c0 + 1)) +
               tr * ((1 - tc) * v(r0 + 1, c0) + tc * v(r0 + 1, c0 + 1));
    };

    speed::DualBandRaster raster;
    raster.band_a = speed::Grid::zeros(config.rows, config.cols);
    raster.band_b = speed::Grid::zeros(config.rows, config.cols);
    raster.gsd_m_per_px = config.gsd_m_per_px;
    raster.time_lag_s = config.time_lag_s;

    for (std::size_t r = 0; r < config.rows; ++r) {
        for (std::size_t c = 0; c < config.cols; ++c) {
            const double bg = background(r, c);
            raster.band_a.at(r, c) = bg + noise_a.normal(0.0, config.noise_stddev);
            raster.band_b.at(r, c) = bg + noise_b.normal(0.0, config.noise_stddev);
        }
    }
    for (std::size_t r = 0; r < config.object_rows; ++r) {
        for (std::size_t c = 0; c < config.object_cols; ++c) {
            raster.band_a.at(config.object_row + r, config.object_col + c) +=
                config.object_contrast;
            raster.band_b.at(config.object_row + r,
                             config.object_col + c + static_cast<std::size_t>(config.shift_px)) +=
                config.object_contrast;
        }
    }
    return raster;
}

double implied_speed_kmh(const RasterConfig& config) {
    return static_cast<double>(config.shift_px) * config.gsd_m_per_px / config.time_lag_s *
           3.6;
}

GenDetectionsResult gen_detections(const DetectionsConfig& config) {
    if (config.segment_length_km <= 0.0) {
        throw ValidationError("gen_detections: segment_length_km must be > 0");
    }
    const double passes =
        config.speed_kmh * (15.0 / 60.0) / config.segment_length_km;

    GenDetectionsResult result;
    result.file.meta = config.meta;
    result.file.meta.gsd_m_per_px = config.gsd_m_per_px;
    result.file.meta.segment_length_km = config.segment_length_km;

    Rng rng(config.seed);
    for (std::size_t k = 0; k < 4; ++k) {
        const double truth = config.truth_counts_15min[k];
        if (truth < 0.0) {
            throw ValidationError("gen_detections: truth counts must be >= 0");
        }
        if (truth == 0.0) {
            continue;
        }
        if (passes <= 0.0) {
            throw ValidationError(
                "gen_detections: zero speed cannot produce a non-zero count");
        }
        const long n = std::lround(truth / passes);
        result.n_detections[k] = n;
        result.rounding_error_15min[k] =
            std::abs(static_cast<double>(n) * passes - truth);

        const double length_px = kClassLengthCm[k] / (100.0 * config.gsd_m_per_px);
        const double width_px = kVehicleWidthCm / (100.0 * config.gsd_m_per_px);
        for (long j = 0; j < n; ++j) {
            Detection d;
            const double x0 = rng.uniform(0.0, 1800.0);
            const double y0 = rng.uniform(0.0, 1800.0);
            const bool horizontal = (rng.next_u64() & 1) == 0;
            d.x_min = x0;
            d.y_min = y0;
            d.x_max = x0 + (horizontal ? length_px : width_px);
            d.y_max = y0 + (horizontal ? width_px : length_px);
            d.source_class = config.class_labels[k];
            d.confidence = rng.uniform(0.6, 0.99);
            d.gsd_m_per_px = config.gsd_m_per_px;
            result.file.detections.push_back(std::move(d));
        }
    }
    return result;
}

FixturePaths gen_fixture(const std::filesystem::path& dir, const FixtureConfig& config) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    fs::create_directories(dir / "detections");
    fs::create_directories(dir / "rasters");

    FixturePaths paths;

    // Training history: all sites in one file, training years only.
    std::vector<CountRecord> train_records;
    for (std::size_t i = 0; i < config.history.n_sites; ++i) {
        const auto site_records = gen_history_records(config.history, i);
        train_records.insert(train_records.end(), site_records.begin(), site_records.end());
    }
    paths.history_train = dir / "history_train.csv";
    ingest::write_count_history(paths.history_train, train_records);

    // Evaluation history: the acquisition day, distinct seed stream, speeds
    // clamped so the raster shifts stay inside the pairing radius.
    SynthConfig eval_cfg = config.history;
    eval_cfg.seed = Rng(config.history.seed).fork(0x5EED).next_u64();
    eval_cfg.start = config.acquisition;
    eval_cfg.start.hour = 0;
    eval_cfg.start.minute = 0;
    eval_cfg.days = 1;
    std::vector<CountRecord> eval_records;
    for (std::size_t i = 0; i < config.history.n_sites; ++i) {
        auto site_records = gen_history_records(eval_cfg, i);
        for (auto& rec : site_records) {
            rec.mean_speed_kmh = std::clamp(*rec.mean_speed_kmh, 40.0, 110.0);
        }
        eval_records.insert(eval_records.end(), site_records.begin(), site_records.end());
    }
    paths.history_eval = dir / "history_eval.csv";
    ingest::write_count_history(paths.history_eval, eval_records);

    paths.site_aadt = dir / "site_aadt.csv";
    ingest::write_site_aadt(paths.site_aadt, gen_site_aadt(config.history));

    // Factor table: published fuel figures plus synthetic road lengths.
    EmissionsFactors factors;
    factors.conversion_kgco2e_per_litre[Fuel::Petrol] = {2.16, "2018"};
    factors.conversion_kgco2e_per_litre[Fuel::Diesel] = {2.56, "2018"};
    factors.fuel_km_per_litre[{VehicleType::CarsTaxis, Fuel::Petrol}] = {20.0, "2012"};
    factors.fuel_km_per_litre[{VehicleType::CarsTaxis, Fuel::Diesel}] = {23.0, "2012"};
    factors.fuel_km_per_litre[{VehicleType::LGV, Fuel::Petrol}] = {18.4, "2012"};
    factors.fuel_km_per_litre[{VehicleType::LGV, Fuel::Diesel}] = {17.1, "2012"};
    factors.fuel_km_per_litre[{VehicleType::HGV, Fuel::Diesel}] = {3.6, "2012"};
    factors.fuel_mix[Fuel::Petrol] = {0.59, "2017"};
    factors.fuel_mix[Fuel::Diesel] = {0.40, "2017"};
    for (std::size_t i = 0; i < config.history.n_sites; ++i) {
        const double base = 5.0 + 2.0 * static_cast<double>(i);
        factors.road_length_km[{la_name(i), RoadType::Motorways}] = {base, "synth"};
        factors.road_length_km[{la_name(i), RoadType::ARoads}] = {base * 1.6, "synth"};
        factors.road_length_km[{la_name(i), RoadType::MinorRoads}] = {base * 4.0, "synth"};
    }
    paths.factors = dir / "factors.csv";
    ingest::write_factors(paths.factors, factors);

    // Per (site, direction): detections implied by the evaluation record at
    // the acquisition timestamp, and a raster whose shift tracks its speed.
    std::size_t stream = 0;
    for (std::size_t i = 0; i < config.history.n_sites; ++i) {
        for (const Direction direction : config.history.directions) {
            const CountRecord* truth = nullptr;
            for (const auto& rec : eval_records) {
                if (rec.site_id == site_name(i) && rec.direction == direction &&
                    rec.timestamp == config.acquisition) {
                    truth = &rec;
                    break;
                }
            }
            if (truth == nullptr) {
                throw ValidationError("gen_fixture: acquisition timestamp not on the "
                                      "evaluation day grid");
            }

            DetectionsConfig det_cfg;
            det_cfg.seed = Rng(config.history.seed).fork(0xDE7 + stream).next_u64();
            for (std::size_t k = 0; k < 4; ++k) {
                det_cfg.truth_counts_15min[k] = static_cast<double>(*truth->counts[k]);
            }
            det_cfg.speed_kmh = *truth->mean_speed_kmh;
            det_cfg.segment_length_km = config.segment_length_km;
            det_cfg.gsd_m_per_px = config.gsd_m_per_px;
            det_cfg.meta.acquisition_timestamp = config.acquisition;
            det_cfg.meta.site_id = site_name(i);
            det_cfg.meta.la_name = la_name(i);
            det_cfg.meta.direction = direction;
            det_cfg.meta.band_time_lag_s = config.band_time_lag_s;
            const auto detections = gen_detections(det_cfg);
            const auto det_path = dir / "detections" /
                                  (site_name(i) + "_" + to_string(direction) + ".json");
            ingest::write_detections(det_path, detections.file);
            paths.detections.push_back(det_path);

            RasterConfig raster_cfg = config.raster;
            raster_cfg.seed = Rng(config.history.seed).fork(0x7A5 + stream).next_u64();
            raster_cfg.gsd_m_per_px = config.gsd_m_per_px;
            raster_cfg.time_lag_s = config.band_time_lag_s;
            raster_cfg.shift_px = std::lround(*truth->mean_speed_kmh / 3.6 *
                                              config.band_time_lag_s / config.gsd_m_per_px);
            const auto raster_path =
                dir / "rasters" / (site_name(i) + "_" + to_string(direction) + ".dbr");
            speed::write_raster(raster_path, gen_raster(raster_cfg));
            paths.rasters.push_back(raster_path);

            ++stream;
        }
    }
    return paths;
}

}  // namespace satemis::synth
