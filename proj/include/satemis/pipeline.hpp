#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "satemis/aadt_model.hpp"
#include "satemis/config.hpp"
#include "satemis/speed_estimation.hpp"
#include "satemis/types.hpp"

namespace satemis::pipeline {

enum class SpeedSource { Historical, Estimated };
enum class SpeedLookup { Per15Min, DailyMean };

// Everything a run needs, assembled from the flat config file with
// command-line flags layered on top.
struct RunConfig {
    // Inputs
    std::filesystem::path history;       // training count history
    std::filesystem::path eval_history;  // speed lookups and evaluation truth
    std::filesystem::path site_aadt;
    std::filesystem::path factors;
    std::filesystem::path detections;    // file or directory of *.json
    std::filesystem::path rasters;       // file or directory of *.dbr
    std::filesystem::path weights_dir;
    std::filesystem::path output_dir;

    SpeedSource speed_source = SpeedSource::Historical;
    SpeedLookup speed_lookup = SpeedLookup::Per15Min;
    // All timestamps are timezone-naive local times; this declares which
    // zone that is. Informational only, recorded with outputs.
    std::string timezone = "Europe/London";
    std::vector<RoadType> road_types = {RoadType::Motorways};
    bool no_vehicle_type = false;
    double confidence_threshold = 0.25;  // detector threshold; unvalidated default

    speed::BlobThresholds blob_thresholds;
    double max_displacement_m = 0.0;  // 0 = derive from 70 mph and the band lag

    aadt::TrainConfig train;

    // synth subcommand
    std::uint64_t seed = 42;
    std::size_t synth_sites = 2;
    std::size_t synth_days = 340;  // fills the training year so test-date features
                                   // stay in-distribution
    DateTime synth_acquisition{2018, 6, 12, 8, 15};
    std::array<double, 4> synth_base_flow = {1200.0, 160.0, 240.0, 24.0};
    double synth_speed_mean = 100.0;
    double synth_speed_stddev = 8.0;
    double segment_length_km = 1.0;
    double gsd_m_per_px = 0.5;
    double band_time_lag_s = 0.26;
};

RunConfig make_run_config(const config::KeyValueMap& kv);

// File-system-safe identifier (anything but [A-Za-z0-9_-] becomes '_').
std::string sanitize_for_path(const std::string& id);
std::string road_type_slug(RoadType road_type);

struct TrainOutcome {
    std::vector<std::filesystem::path> weights_files;
    std::vector<std::string> skipped_sites;  // failed the missing-data gate
};

TrainOutcome run_train(const RunConfig& config);

struct PredictOutcome {
    std::filesystem::path manifest;
    std::vector<std::filesystem::path> emissions_reports;
};

PredictOutcome run_predict(const RunConfig& config);

struct EvaluateOutcome {
    std::filesystem::path counts_table;
    std::filesystem::path aadt_table;
    std::filesystem::path ghg_table;
    std::filesystem::path scatter_data;
    std::filesystem::path mape_by_type;
};

EvaluateOutcome run_evaluate(const RunConfig& config);

struct SpeedRow {
    std::string raster;
    std::size_t blob_count = 0;
    std::size_t pair_count = 0;
    std::optional<double> mean_speed_kmh;
};

struct SpeedOutcome {
    std::vector<SpeedRow> rows;
    std::filesystem::path results_file;
    bool all_failed = false;
};

SpeedOutcome run_speed(const RunConfig& config);

std::filesystem::path run_synth(const RunConfig& config);

}  // namespace satemis::pipeline
