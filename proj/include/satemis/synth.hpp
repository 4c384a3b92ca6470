#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "satemis/ingest.hpp"
#include "satemis/speed_estimation.hpp"
#include "satemis/types.hpp"

namespace satemis::synth {

// Deterministic synthetic traffic history: 15-minute counts drawn per
// interval from diurnal/weekly/monthly-modulated rates, independent across
// intervals (no autocorrelation — fine for pipeline testing, not a traffic
// model).
struct SynthConfig {
    std::uint64_t seed = 7;
    std::size_t n_sites = 2;
    DateTime start{2017, 1, 1, 0, 0};
    std::size_t days = 340;
    std::vector<Direction> directions = {Direction::A, Direction::B};
    std::array<double, 4> base_flow_per_hour = {1200.0, 160.0, 240.0, 24.0};
    double diurnal_amplitude = 0.6;   // fractions of the base rate
    double weekly_amplitude = 0.15;
    double monthly_amplitude = 0.10;
    double direction_b_factor = 0.85;
    double speed_mean_kmh = 100.0;
    double speed_stddev_kmh = 8.0;
    // Motorway AADT truth for the first LA; later LAs scale by 1 + 0.2*i.
    AADTVector aadt_base{30000.0, 5000.0, 6000.0, 800.0};
    std::map<RoadType, double> road_type_aadt_factor = {
        {RoadType::Motorways, 1.0}, {RoadType::ARoads, 0.8}, {RoadType::MinorRoads, 0.35}};
    double direction_a_share = 0.52;  // of the LA AADT; B gets the rest
};

std::string site_name(std::size_t site_index);
std::string la_name(std::size_t site_index);

// Expected (pre-draw) count rate for one class in one 15-minute interval.
double interval_rate(const SynthConfig& config, std::size_t class_index,
                     const DateTime& t, Direction direction);

std::vector<CountRecord> gen_history_records(const SynthConfig& config,
                                             std::size_t site_index);

// One count file per site under out_dir; returns the paths written.
std::vector<std::filesystem::path> gen_history(const SynthConfig& config,
                                               const std::filesystem::path& out_dir);

std::vector<SiteAadt> gen_site_aadt(const SynthConfig& config);

// Two-band scene with a rectangular object translated along columns between
// the bands, over smooth background texture plus per-band sensor noise.
struct RasterConfig {
    std::uint64_t seed = 7;
    std::size_t rows = 64;
    std::size_t cols = 64;
    std::size_t object_rows = 3;   // extent across the shift axis
    std::size_t object_cols = 2;   // extent along the shift axis
    std::size_t object_row = 30;   // top-left in band A
    std::size_t object_col = 20;
    long shift_px = 4;             // columns moved between exposures
    double object_contrast = 100.0;
    double background_amplitude = 20.0;
    double noise_stddev = 1.0;
    double gsd_m_per_px = 0.5;
    double time_lag_s = 0.26;
};

// Throws when the shifted object leaves the frame.
speed::DualBandRaster gen_raster(const RasterConfig& config);

// Ground speed implied by the configured shift.
double implied_speed_kmh(const RasterConfig& config);

// Detections consistent with a chosen 15-minute truth record: the per-class
// detection count inverts the flow formula at the given speed and segment
// length (rounded, with the residual flow error reported).
struct DetectionsConfig {
    std::uint64_t seed = 7;
    std::array<double, 4> truth_counts_15min{};
    double speed_kmh = 0.0;
    double segment_length_km = 1.0;
    double gsd_m_per_px = 0.5;
    ImageMeta meta;  // timestamp/site/la/direction; gsd and segment length are overwritten
    std::array<std::string, 4> class_labels = {"Small car", "Passenger vehicle", "Truck",
                                               "Cargo Truck"};
};

struct GenDetectionsResult {
    ingest::DetectionsFile file;
    std::array<long, 4> n_detections{};
    std::array<double, 4> rounding_error_15min{};  // |recovered - truth| per class
};

GenDetectionsResult gen_detections(const DetectionsConfig& config);

// A complete end-to-end fixture directory: training and evaluation count
// histories, site AADT truth, factor table, per-direction detections and
// rasters whose implied speeds track the evaluation records.
struct FixtureConfig {
    SynthConfig history;
    DateTime acquisition{2018, 6, 12, 8, 15};
    double segment_length_km = 1.0;
    double gsd_m_per_px = 0.5;
    double band_time_lag_s = 0.26;
    RasterConfig raster;  // seed/shift/gsd/lag are set per site from the eval record
};

struct FixturePaths {
    std::filesystem::path history_train;
    std::filesystem::path history_eval;
    std::filesystem::path site_aadt;
    std::filesystem::path factors;
    std::vector<std::filesystem::path> detections;
    std::vector<std::filesystem::path> rasters;
};

FixturePaths gen_fixture(const std::filesystem::path& dir, const FixtureConfig& config);

}  // namespace satemis::synth
