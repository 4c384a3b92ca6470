#include "satemis/pipeline.hpp"

#include "satemis/emissions.hpp"
#include "satemis/errors.hpp"
#include "satemis/ingest.hpp"
#include "satemis/metrics.hpp"
#include "satemis/synth.hpp"
#include "satemis/traffic_counts.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

namespace satemis::pipeline {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::vector<fs::path> list_inputs(const fs::path& path, const std::string& extension) {
    if (path.empty()) {
        throw ValidationError("no input path configured");
    }
    if (fs::is_directory(path)) {
        std::vector<fs::path> files;
        for (const auto& entry : fs::directory_iterator(path)) {
            if (entry.is_regular_file() && entry.path().extension() == extension) {
                files.push_back(entry.path());
            }
        }
        std::sort(files.begin(), files.end());
        if (files.empty()) {
            throw ValidationError("no *" + extension + " files in " + path.string());
        }
        return files;
    }
    if (!fs::exists(path)) {
        throw ValidationError("input not found: " + path.string());
    }
    return {path};
}

// History indexed for speed lookups: exact 15-minute record and daily mean.
class SpeedHistory {
public:
    explicit SpeedHistory(const std::vector<CountRecord>& records) {
        for (const auto& rec : records) {
            if (!rec.mean_speed_kmh.has_value()) {
                continue;
            }
            exact_[{rec.site_id, rec.direction, rec.timestamp}] = *rec.mean_speed_kmh;
            DateTime day = rec.timestamp;
            day.hour = day.minute = day.second = 0;
            auto& acc = daily_[{rec.site_id, rec.direction, day}];
            acc.first += *rec.mean_speed_kmh;
            acc.second += 1;
        }
    }

    double lookup(const std::string& site, Direction dir, const DateTime& ts,
                  SpeedLookup mode) const {
        if (mode == SpeedLookup::Per15Min) {
            const auto it = exact_.find({site, dir, ts});
            if (it == exact_.end()) {
                throw ValidationError("no historical speed for " + site + "/" +
                                      to_string(dir) + " at " + format_datetime(ts));
            }
            return it->second;
        }
        DateTime day = ts;
        day.hour = day.minute = day.second = 0;
        const auto it = daily_.find({site, dir, day});
        if (it == daily_.end() || it->second.second == 0) {
            throw ValidationError("no historical speeds for " + site + "/" +
                                  to_string(dir) + " on " + format_datetime(day));
        }
        return it->second.first / static_cast<double>(it->second.second);
    }

private:
    std::map<std::tuple<std::string, Direction, DateTime>, double> exact_;
    std::map<std::tuple<std::string, Direction, DateTime>, std::pair<double, int>> daily_;
};

void write_json_file(const fs::path& path, const json& doc) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw ValidationError("cannot write " + path.string());
    }
    out << doc.dump(2) << '\n';
}

json aadt_to_json(const AADTVector& v) {
    return {{"cars_taxis", v.cars_taxis},
            {"lgv", v.lgv},
            {"hgv", v.hgv},
            {"buses_coaches", v.buses_coaches}};
}

AADTVector aadt_from_json(const json& doc) {
    AADTVector v;
    v.cars_taxis = doc.at("cars_taxis").get<double>();
    v.lgv = doc.at("lgv").get<double>();
    v.hgv = doc.at("hgv").get<double>();
    v.buses_coaches = doc.at("buses_coaches").get<double>();
    return v;
}

struct EstimateRow {
    DateTime timestamp;
    std::array<double, 4> counts{};
    double total = 0.0;
    double speed_kmh = 0.0;
};

// Count-estimate files share the history schema but hold real values.
EstimateRow read_count_estimate(const fs::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ValidationError("cannot open " + path.string());
    }
    std::string header, line;
    if (!std::getline(in, header) || !std::getline(in, line)) {
        throw ValidationError(path.string() + ": expected header and one row");
    }
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ',')) {
        cells.push_back(cell);
    }
    if (cells.size() != 9) {
        throw ValidationError(path.string() + ": expected 9 cells");
    }
    EstimateRow row;
    row.timestamp = parse_datetime(cells[0]);
    for (std::size_t i = 0; i < 4; ++i) {
        row.counts[i] = std::stod(cells[3 + i]);
    }
    row.total = std::stod(cells[7]);
    row.speed_kmh = std::stod(cells[8]);
    return row;
}

std::map<VehicleType, double> read_emissions_per_type(const fs::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ValidationError("cannot open " + path.string());
    }
    std::string line;
    std::getline(in, line);  // header
    std::map<VehicleType, double> per_type;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::string cell;
        std::istringstream ss(line);
        while (std::getline(ss, cell, ',')) {
            cells.push_back(cell);
        }
        if (cells.size() != 7) {
            throw ValidationError(path.string() + ": expected 7 cells");
        }
        per_type[parse_vehicle_type(cells[2])] += std::stod(cells[6]);
    }
    return per_type;
}

speed::SpeedEstimate estimate_from_raster(const fs::path& raster_path,
                                          const RunConfig& config,
                                          std::size_t* blob_count) {
    const auto raster = speed::read_raster(raster_path);
    const auto change = speed::build_change_image(raster);
    const auto blobs = speed::detect_moving_objects(change, config.blob_thresholds);
    if (blob_count != nullptr) {
        *blob_count = blobs.size();
    }
    const double max_disp = config.max_displacement_m > 0.0
                                ? config.max_displacement_m
                                : speed::default_max_displacement_m(raster.time_lag_s);
    const auto pairs = speed::pair_blobs(blobs, max_disp, raster.gsd_m_per_px);
    return speed::estimate_speed(pairs, raster.gsd_m_per_px, raster.time_lag_s);
}

}  // namespace

std::string sanitize_for_path(const std::string& id) {
    std::string out;
    for (const char c : id) {
        const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                        (c >= '0' && c <= '9') || c == '_' || c == '-';
        out += ok ? c : '_';
    }
    return out.empty() ? "_" : out;
}

std::string road_type_slug(RoadType road_type) {
    switch (road_type) {
        case RoadType::Motorways: return "motorways";
        case RoadType::ARoads: return "a_roads";
        case RoadType::MinorRoads: return "minor_roads";
    }
    return "unknown";
}

RunConfig make_run_config(const config::KeyValueMap& kv) {
    using namespace satemis::config;
    RunConfig rc;
    rc.history = get_string(kv, "history", "");
    rc.eval_history = get_string(kv, "eval_history", "");
    rc.site_aadt = get_string(kv, "site_aadt", "");
    rc.factors = get_string(kv, "factors", "");
    rc.detections = get_string(kv, "detections", "");
    rc.rasters = get_string(kv, "rasters", "");
    rc.weights_dir = get_string(kv, "weights_dir", "weights");
    rc.output_dir = get_string(kv, "output_dir", "out");

    const std::string source = get_string(kv, "speed_source", "historical");
    if (source == "historical") {
        rc.speed_source = SpeedSource::Historical;
    } else if (source == "estimated") {
        rc.speed_source = SpeedSource::Estimated;
    } else {
        throw ValidationError("speed_source must be historical or estimated, got '" +
                              source + "'");
    }

    const std::string lookup = get_string(kv, "speed_lookup", "per15min");
    if (lookup == "per15min") {
        rc.speed_lookup = SpeedLookup::Per15Min;
    } else if (lookup == "daily_mean") {
        rc.speed_lookup = SpeedLookup::DailyMean;
    } else {
        throw ValidationError("speed_lookup must be per15min or daily_mean");
    }

    rc.road_types.clear();
    for (const auto& item : split_list(get_string(kv, "road_types", "motorways"))) {
        rc.road_types.push_back(parse_road_type(item));
    }
    if (rc.road_types.empty()) {
        throw ValidationError("road_types is empty");
    }

    rc.no_vehicle_type = get_bool(kv, "no_vehicle_type", false);
    rc.confidence_threshold = get_double(kv, "confidence_threshold", 0.25);
    rc.timezone = get_string(kv, "timezone", "Europe/London");

    rc.blob_thresholds.min_area_px = get_long(kv, "min_area_px", 4);
    rc.blob_thresholds.min_compactness = get_double(kv, "min_compactness", 0.3);
    rc.blob_thresholds.min_rectangularity = get_double(kv, "min_rectangularity", 0.5);
    rc.blob_thresholds.intensity_quantile = get_double(kv, "intensity_quantile", 0.995);
    rc.max_displacement_m = get_double(kv, "max_displacement_m", 0.0);

    rc.train.hidden_layers.clear();
    for (const auto& item : split_list(get_string(kv, "hidden_layers", "32,32"))) {
        rc.train.hidden_layers.push_back(static_cast<std::size_t>(std::stoul(item)));
    }
    rc.train.learning_rate = get_double(kv, "learning_rate", 1e-3);
    rc.train.lr_decay = get_double(kv, "lr_decay", 0.97);
    rc.train.batch_size = static_cast<std::size_t>(get_long(kv, "batch_size", 32));
    rc.train.patience = static_cast<std::size_t>(get_long(kv, "patience", 3));
    rc.train.val_fraction = get_double(kv, "val_fraction", 0.1);
    rc.train.max_epochs = static_cast<std::size_t>(get_long(kv, "max_epochs", 200));
    rc.train.test_year_start = static_cast<int>(get_long(kv, "test_year_start", 2018));
    const std::string optimizer = get_string(kv, "optimizer", "adam");
    if (optimizer == "adam") {
        rc.train.use_adam = true;
    } else if (optimizer == "sgd") {
        rc.train.use_adam = false;
    } else {
        throw ValidationError("optimizer must be adam or sgd");
    }

    rc.seed = static_cast<std::uint64_t>(get_long(kv, "seed", 42));
    rc.train.seed = rc.seed;
    rc.synth_sites = static_cast<std::size_t>(get_long(kv, "synth_sites", 2));
    rc.synth_days = static_cast<std::size_t>(get_long(kv, "synth_days", 340));
    const std::string acq = get_string(kv, "synth_acquisition", "");
    if (!acq.empty()) {
        rc.synth_acquisition = parse_datetime(acq);
    }
    const auto flows = split_list(get_string(kv, "synth_base_flow", ""));
    if (!flows.empty()) {
        if (flows.size() != 4) {
            throw ValidationError("synth_base_flow needs 4 comma-separated rates");
        }
        for (std::size_t i = 0; i < 4; ++i) {
            rc.synth_base_flow[i] = std::stod(flows[i]);
        }
    }
    rc.synth_speed_mean = get_double(kv, "synth_speed_mean", 100.0);
    rc.synth_speed_stddev = get_double(kv, "synth_speed_stddev", 8.0);
    rc.segment_length_km = get_double(kv, "segment_length_km", 1.0);
    rc.gsd_m_per_px = get_double(kv, "gsd_m_per_px", 0.5);
    rc.band_time_lag_s = get_double(kv, "band_time_lag_s", 0.26);
    return rc;
}

TrainOutcome run_train(const RunConfig& config) {
    if (config.history.empty() || config.site_aadt.empty()) {
        throw ValidationError(
            "train needs 'history' and 'site_aadt' inputs; set them in the config or "
            "on the command line");
    }
    const auto records = ingest::parse_count_history(config.history);
    const auto aadt_rows = ingest::parse_site_aadt(config.site_aadt);

    std::map<std::string, std::vector<CountRecord>> by_site;
    for (const auto& rec : records) {
        by_site[rec.site_id].push_back(rec);
    }
    if (by_site.empty()) {
        throw ValidationError("train: history has no rows");
    }

    fs::create_directories(config.weights_dir);
    TrainOutcome outcome;
    for (const auto& [site_id, site_records] : by_site) {
        const auto report = ingest::validate_site(site_records);
        if (!report.usable) {
            outcome.skipped_sites.push_back(site_id);
            continue;
        }

        // The site's LA comes from the ground-truth table.
        std::string la;
        for (const auto& row : aadt_rows) {
            if (row.site_id == site_id) {
                la = row.la_name;
                break;
            }
        }
        if (la.empty()) {
            throw ValidationError("train: no ground-truth AADT rows for site " + site_id);
        }

        for (const RoadType road_type : config.road_types) {
            std::vector<SiteAadt> la_rows;
            for (const auto& row : aadt_rows) {
                if (row.la_name == la && row.road_type == road_type) {
                    la_rows.push_back(row);
                }
            }
            if (la_rows.empty()) {
                throw ValidationError("train: ground truth has no " +
                                      to_string(road_type) + " rows for LA " + la);
            }
            const AADTVector target = aadt::derive_la_target(la_rows);
            const std::vector<AADTVector> targets(site_records.size(), target);

            aadt::ModelMeta meta{site_id, la, road_type};
            const auto result = aadt::train(site_records, targets, config.train, meta);

            const std::string stem =
                sanitize_for_path(site_id) + "_" + road_type_slug(road_type);
            const auto weights_path = config.weights_dir / (stem + ".json");
            aadt::save_weights(weights_path, result.weights);
            aadt::write_training_log(config.weights_dir / (stem + "_log.csv"), result.log);
            outcome.weights_files.push_back(weights_path);
        }
    }
    return outcome;
}

PredictOutcome run_predict(const RunConfig& config) {
    if (config.detections.empty() || config.factors.empty()) {
        throw ValidationError("predict needs 'detections' and 'factors' inputs");
    }
    if (config.speed_source == SpeedSource::Estimated && config.rasters.empty()) {
        throw ValidationError("speed_source estimated requires 'rasters'");
    }
    const auto factors = ingest::parse_factors(config.factors);

    std::optional<SpeedHistory> speed_history;
    if (!config.eval_history.empty()) {
        speed_history.emplace(ingest::parse_count_history(config.eval_history));
    }

    // (site -> direction -> detections file), sorted for determinism.
    std::map<std::string, std::map<Direction, ingest::DetectionsFile>> sites;
    for (const auto& path : list_inputs(config.detections, ".json")) {
        auto file = ingest::parse_detections(path);
        const auto site = file.meta.site_id;
        const auto dir = file.meta.direction;
        if (sites[site].count(dir) != 0) {
            throw ValidationError("duplicate detections for " + site + "/" +
                                  to_string(dir));
        }
        sites[site].emplace(dir, std::move(file));
    }

    fs::create_directories(config.output_dir);
    std::ostringstream manifest;
    manifest << "# timestamps are local time, timezone " << config.timezone << '\n';
    PredictOutcome outcome;

    for (const auto& [site_id, directions] : sites) {
        const std::string site_dir_name = sanitize_for_path(site_id);
        const fs::path site_out = config.output_dir / site_dir_name;

        // Per-direction stage: speed -> counts (road-type independent).
        std::map<Direction, counts::CountEstimate> estimates;
        std::vector<Detection> site_detections;  // fallback class mix, both directions
        for (const auto& [dir, file] : directions) {
            const fs::path dir_out = site_out / to_string(dir);
            fs::create_directories(dir_out);

            const auto kept =
                ingest::filter_by_confidence(file.detections, config.confidence_threshold);
            site_detections.insert(site_detections.end(), kept.begin(), kept.end());

            std::optional<double> speed_kmh;
            if (config.speed_source == SpeedSource::Estimated) {
                fs::path raster_path = config.rasters;
                if (fs::is_directory(config.rasters)) {
                    raster_path = config.rasters /
                                  (site_dir_name + "_" + to_string(dir) + ".dbr");
                }
                std::size_t blob_count = 0;
                const auto estimate =
                    estimate_from_raster(raster_path, config, &blob_count);
                json speed_doc = {
                    {"blob_count", blob_count},
                    {"pair_count", estimate.pair_count},
                    {"pair_displacements_m", estimate.pair_displacements_m},
                    {"status", estimate.failed() ? "failed" : "ok"},
                };
                if (!estimate.failed()) {
                    speed_doc["mean_speed_kmh"] = *estimate.mean_speed_kmh;
                    speed_kmh = estimate.mean_speed_kmh;
                    manifest << site_id << ',' << to_string(dir) << ",speed_estimated\n";
                } else if (speed_history.has_value()) {
                    speed_kmh = speed_history->lookup(site_id, dir,
                                                      file.meta.acquisition_timestamp,
                                                      config.speed_lookup);
                    speed_doc["fallback_speed_kmh"] = *speed_kmh;
                    manifest << site_id << ',' << to_string(dir)
                             << ",speed_fallback_historical\n";
                } else {
                    write_json_file(dir_out / "speed.json", speed_doc);
                    throw SpeedEstimationError(
                        "speed estimation failed for " + site_id + "/" + to_string(dir) +
                        " and no historical fallback is configured");
                }
                write_json_file(dir_out / "speed.json", speed_doc);
            } else {
                if (!speed_history.has_value()) {
                    throw ValidationError(
                        "speed_source is historical but 'eval_history' is not set");
                }
                speed_kmh = speed_history->lookup(
                    site_id, dir, file.meta.acquisition_timestamp, config.speed_lookup);
                manifest << site_id << ',' << to_string(dir) << ",speed_historical\n";
            }

            const auto estimate =
                counts::estimate_counts(kept, speed_kmh, file.meta.segment_length_km);
            counts::write_count_estimate(dir_out / "counts.csv", estimate, site_id, dir,
                                         file.meta.acquisition_timestamp);
            manifest << site_id << ',' << to_string(dir) << ",counts\n";
            estimates.emplace(dir, estimate);
        }

        // Per road type: features -> per-direction AADT -> mean -> emissions.
        for (const RoadType road_type : config.road_types) {
            const std::string slug = road_type_slug(road_type);
            const auto weights_path =
                config.weights_dir / (site_dir_name + "_" + slug + ".json");
            const auto weights = aadt::load_weights(weights_path);
            aadt::require_road_type(weights, road_type);
            if (weights.meta.site_id != site_id) {
                throw ValidationError(weights_path.string() + " was trained for site " +
                                      weights.meta.site_id + ", not " + site_id);
            }

            std::vector<AADTVector> directional;
            for (const auto& [dir, file] : directions) {
                const fs::path dir_out = site_out / to_string(dir);
                const auto features = aadt::build_features(
                    estimates.at(dir), file.meta.acquisition_timestamp, weights.minmax);
                json feature_doc = {
                    {"hour_of_day", features.hour_of_day},
                    {"day_of_week", features.day_of_week},
                    {"month_of_year", features.month_of_year},
                    {"speed_kmh", features.speed_kmh},
                    {"scaled_counts", features.scaled_counts},
                    {"scaled_total", features.scaled_total},
                };
                write_json_file(dir_out / ("features_" + slug + ".json"), feature_doc);

                const auto prediction = aadt::predict(weights, features);
                json aadt_doc = aadt_to_json(prediction.aadt);
                if (prediction.clamped_components > 0) {
                    aadt_doc["clamped_components"] = prediction.clamped_components;
                }
                write_json_file(dir_out / ("aadt_" + slug + ".json"), aadt_doc);
                manifest << site_id << ',' << to_string(dir) << ",predict," << slug
                         << '\n';
                directional.push_back(prediction.aadt);
            }

            const AADTVector mean = aadt::aggregate_directions(directional);
            write_json_file(site_out / ("aadt_mean_" + slug + ".json"),
                            aadt_to_json(mean));
            manifest << site_id << ",-,aggregate," << slug << '\n';

            AADTVector final_aadt = mean;
            if (config.no_vehicle_type) {
                const auto apportioned =
                    emissions::apportion_aadt(mean.total(), site_detections);
                final_aadt = apportioned.aadt;
                json doc = aadt_to_json(final_aadt);
                doc["unmappable_detections"] = apportioned.unmappable_detections;
                write_json_file(site_out / ("aadt_final_" + slug + ".json"), doc);
                manifest << site_id << ",-,apportion," << slug << '\n';
            } else {
                write_json_file(site_out / ("aadt_final_" + slug + ".json"),
                                aadt_to_json(final_aadt));
            }

            const std::string la = directions.begin()->second.meta.la_name;
            const auto report =
                emissions::compute_emissions(final_aadt, factors, la, road_type);
            emissions::write_emissions_csv(site_out / ("emissions_" + slug + ".csv"),
                                           report);
            emissions::write_emissions_text(site_out / ("emissions_" + slug + ".txt"),
                                            report);
            manifest << site_id << ",-,emissions," << slug << '\n';
            outcome.emissions_reports.push_back(site_out / ("emissions_" + slug + ".csv"));
        }
    }

    outcome.manifest = config.output_dir / "manifest.txt";
    std::ofstream mf(outcome.manifest, std::ios::binary);
    if (!mf) {
        throw ValidationError("cannot write " + outcome.manifest.string());
    }
    mf << manifest.str();
    return outcome;
}

EvaluateOutcome run_evaluate(const RunConfig& config) {
    if (config.detections.empty() || config.site_aadt.empty() ||
        config.eval_history.empty() || config.factors.empty()) {
        throw ValidationError(
            "evaluate needs 'detections', 'site_aadt', 'eval_history' and 'factors'");
    }
    const auto factors = ingest::parse_factors(config.factors);
    const auto aadt_rows = ingest::parse_site_aadt(config.site_aadt);
    const auto eval_records = ingest::parse_count_history(config.eval_history);

    struct SiteInfo {
        std::string la;
        std::vector<Direction> directions;
    };
    std::map<std::string, SiteInfo> sites;
    for (const auto& path : list_inputs(config.detections, ".json")) {
        const auto file = ingest::parse_detections(path);
        auto& info = sites[file.meta.site_id];
        info.la = file.meta.la_name;
        info.directions.push_back(file.meta.direction);
    }
    for (auto& [site, info] : sites) {
        std::sort(info.directions.begin(), info.directions.end());
    }

    // Key firewall: every predicted (la, road_type) must have truth rows and
    // vice versa (restricted to the road types under evaluation).
    std::set<std::pair<std::string, RoadType>> predicted_keys;
    for (const auto& [site, info] : sites) {
        for (const RoadType rt : config.road_types) {
            predicted_keys.insert({info.la, rt});
        }
    }
    std::set<std::pair<std::string, RoadType>> truth_keys;
    for (const auto& row : aadt_rows) {
        if (std::find(config.road_types.begin(), config.road_types.end(), row.road_type) !=
            config.road_types.end()) {
            truth_keys.insert({row.la_name, row.road_type});
        }
    }
    if (predicted_keys != truth_keys) {
        std::string diff;
        for (const auto& key : predicted_keys) {
            if (!truth_keys.contains(key)) {
                diff += " prediction-without-truth:" + key.first + "/" +
                        to_string(key.second);
            }
        }
        for (const auto& key : truth_keys) {
            if (!predicted_keys.contains(key)) {
                diff += " truth-without-prediction:" + key.first + "/" +
                        to_string(key.second);
            }
        }
        throw ValidationError("evaluate: prediction/truth keys differ:" + diff);
    }

    const fs::path eval_dir = config.output_dir / "evaluation";
    fs::create_directories(eval_dir);
    EvaluateOutcome outcome;

    // 15-minute count error per (site, direction), over the 4 length classes.
    std::vector<metrics::MetricsRow> count_rows;
    for (const auto& [site, info] : sites) {
        for (const Direction dir : info.directions) {
            const fs::path counts_path = config.output_dir / sanitize_for_path(site) /
                                         to_string(dir) / "counts.csv";
            const auto estimate = read_count_estimate(counts_path);
            const CountRecord* truth = nullptr;
            for (const auto& rec : eval_records) {
                if (rec.site_id == site && rec.direction == dir &&
                    rec.timestamp == estimate.timestamp) {
                    truth = &rec;
                    break;
                }
            }
            if (truth == nullptr || truth->has_missing()) {
                throw ValidationError("evaluate: no complete truth record for " + site +
                                      "/" + to_string(dir) + " at " +
                                      format_datetime(estimate.timestamp));
            }
            std::vector<metrics::EvalPair> pairs;
            for (std::size_t k = 0; k < 4; ++k) {
                pairs.push_back({estimate.counts[k],
                                 static_cast<double>(*truth->counts[k]),
                                 to_string(kLengthClasses[k])});
            }
            count_rows.push_back(
                {{site, to_string(dir)}, metrics::rmse(pairs), metrics::mape(pairs).value});
        }
    }
    outcome.counts_table = eval_dir / "counts_eval.csv";
    metrics::write_metrics_table(outcome.counts_table,
                                 {"site", "direction", "rmse", "mape"}, count_rows);

    // LA AADT and GHG error per (la, road_type), over the 4 vehicle types.
    std::vector<metrics::MetricsRow> aadt_table_rows;
    std::vector<metrics::MetricsRow> ghg_table_rows;
    std::vector<metrics::ScatterRow> scatter_rows;
    std::map<VehicleType, std::vector<metrics::EvalPair>> per_type_pairs;
    double buses_truth_share_sum = 0.0;
    std::size_t share_count = 0;

    for (const auto& [site, info] : sites) {
        for (const RoadType road_type : config.road_types) {
            const std::string slug = road_type_slug(road_type);
            std::vector<SiteAadt> la_rows;
            for (const auto& row : aadt_rows) {
                if (row.la_name == info.la && row.road_type == road_type) {
                    la_rows.push_back(row);
                }
            }
            const AADTVector truth_aadt = aadt::derive_la_target(la_rows);

            std::ifstream in(config.output_dir / sanitize_for_path(site) /
                             ("aadt_mean_" + slug + ".json"));
            if (!in) {
                throw ValidationError("evaluate: missing prediction for " + site + " (" +
                                      slug + "); run predict first");
            }
            json doc;
            in >> doc;
            const AADTVector pred_aadt = aadt_from_json(doc);

            std::vector<metrics::EvalPair> aadt_pairs;
            for (const auto vt : kVehicleTypes) {
                aadt_pairs.push_back({pred_aadt[vt], truth_aadt[vt], to_string(vt)});
                per_type_pairs[vt].push_back({pred_aadt[vt], truth_aadt[vt], info.la});
            }
            aadt_table_rows.push_back({{info.la, to_string(road_type)},
                                       metrics::rmse(aadt_pairs),
                                       metrics::mape(aadt_pairs).value});
            buses_truth_share_sum +=
                truth_aadt.total() > 0.0 ? truth_aadt.buses_coaches / truth_aadt.total()
                                         : 0.0;
            ++share_count;

            const auto truth_report =
                emissions::compute_emissions(truth_aadt, factors, info.la, road_type);
            const auto pred_per_type = read_emissions_per_type(
                config.output_dir / sanitize_for_path(site) /
                ("emissions_" + slug + ".csv"));
            std::vector<metrics::EvalPair> ghg_pairs;
            double pred_ghg_total = 0.0;
            for (const auto vt : kVehicleTypes) {
                const double pred = pred_per_type.contains(vt) ? pred_per_type.at(vt) : 0.0;
                ghg_pairs.push_back({pred, truth_report.per_type_kgco2e.at(vt),
                                     to_string(vt)});
                pred_ghg_total += pred;
            }
            ghg_table_rows.push_back({{info.la, to_string(road_type)},
                                      metrics::rmse(ghg_pairs),
                                      metrics::mape(ghg_pairs).value});

            scatter_rows.push_back({info.la, to_string(road_type), pred_aadt.total(),
                                    truth_aadt.total(), pred_ghg_total,
                                    truth_report.total_kgco2e});
        }
    }

    outcome.aadt_table = eval_dir / "aadt_eval.csv";
    metrics::write_metrics_table(outcome.aadt_table, {"la", "road_type", "rmse", "mape"},
                                 aadt_table_rows, 1);
    outcome.ghg_table = eval_dir / "ghg_eval.csv";
    metrics::write_metrics_table(outcome.ghg_table, {"la", "road_type", "rmse", "mape"},
                                 ghg_table_rows, 1);
    outcome.scatter_data = eval_dir / "scatter.csv";
    metrics::write_scatter_data(outcome.scatter_data, scatter_rows);

    // AADT MAPE by vehicle type; a sparse buses class is flagged excluded
    // rather than silently skewing the comparison.
    const double buses_share =
        share_count > 0 ? buses_truth_share_sum / static_cast<double>(share_count) : 0.0;
    outcome.mape_by_type = eval_dir / "mape_by_vehicle_type.csv";
    std::ofstream by_type(outcome.mape_by_type, std::ios::binary);
    by_type << "vehicle_type,mape,pairs,excluded_sparse\n";
    for (const auto vt : kVehicleTypes) {
        const auto result = metrics::mape(per_type_pairs.at(vt));
        const bool sparse = vt == VehicleType::BusesCoaches && buses_share < 0.02;
        by_type << to_string(vt) << ',' << metrics::format_value(result.value) << ','
                << per_type_pairs.at(vt).size() - result.excluded_zero_truth << ','
                << (sparse ? "yes" : "no") << '\n';
    }
    return outcome;
}

SpeedOutcome run_speed(const RunConfig& config) {
    const auto raster_paths = list_inputs(config.rasters, ".dbr");
    fs::create_directories(config.output_dir);

    SpeedOutcome outcome;
    std::size_t failures = 0;
    for (const auto& path : raster_paths) {
        SpeedRow row;
        row.raster = path.filename().string();
        std::size_t blob_count = 0;
        const auto estimate = estimate_from_raster(path, config, &blob_count);
        row.blob_count = blob_count;
        row.pair_count = estimate.pair_count;
        row.mean_speed_kmh = estimate.mean_speed_kmh;
        if (estimate.failed()) {
            ++failures;
        }
        outcome.rows.push_back(std::move(row));
    }
    outcome.all_failed = failures == outcome.rows.size();

    outcome.results_file = config.output_dir / "speed_results.csv";
    std::ofstream out(outcome.results_file, std::ios::binary);
    if (!out) {
        throw ValidationError("cannot write " + outcome.results_file.string());
    }
    out << "raster,blobs,pairs,mean_speed_kmh,status\n";
    double speed_sum = 0.0;
    std::size_t ok = 0;
    for (const auto& row : outcome.rows) {
        out << row.raster << ',' << row.blob_count << ',' << row.pair_count << ',';
        if (row.mean_speed_kmh.has_value()) {
            out << metrics::format_value(*row.mean_speed_kmh) << ",ok\n";
            speed_sum += *row.mean_speed_kmh;
            ++ok;
        } else {
            out << ",failed\n";
        }
    }
    out << "# summary: images=" << outcome.rows.size() << " ok=" << ok
        << " failed=" << failures;
    if (ok > 0) {
        out << " mean_speed_kmh=" << metrics::format_value(speed_sum / static_cast<double>(ok));
    }
    out << '\n';
    return outcome;
}

std::filesystem::path run_synth(const RunConfig& config) {
    synth::FixtureConfig fixture;
    fixture.history.seed = config.seed;
    fixture.history.n_sites = config.synth_sites;
    fixture.history.days = config.synth_days;
    fixture.history.base_flow_per_hour = config.synth_base_flow;
    fixture.history.speed_mean_kmh = config.synth_speed_mean;
    fixture.history.speed_stddev_kmh = config.synth_speed_stddev;
    fixture.acquisition = config.synth_acquisition;
    fixture.segment_length_km = config.segment_length_km;
    fixture.gsd_m_per_px = config.gsd_m_per_px;
    fixture.band_time_lag_s = config.band_time_lag_s;
    synth::gen_fixture(config.output_dir, fixture);
    return config.output_dir;
}

}  // namespace satemis::pipeline
