#include "satemis/config.hpp"
#include "satemis/errors.hpp"
#include "satemis/metrics.hpp"
#include "satemis/pipeline.hpp"

#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

namespace {

using satemis::config::KeyValueMap;

// Every config key doubles as a command-line flag; the flag wins over the
// file.
const std::vector<std::string>& config_keys() {
    static const std::vector<std::string> keys = {
        "history",          "eval_history",      "site_aadt",
        "factors",          "detections",        "rasters",
        "weights_dir",      "output_dir",        "speed_source",
        "speed_lookup",     "road_types",        "no_vehicle_type",
        "timezone",         "confidence_threshold", "min_area_px",
        "min_compactness",
        "min_rectangularity",   "intensity_quantile", "max_displacement_m",
        "hidden_layers",    "learning_rate",     "lr_decay",
        "batch_size",
        "patience",         "val_fraction",      "max_epochs",
        "optimizer",        "test_year_start",   "seed",
        "synth_sites",      "synth_days",        "synth_acquisition",
        "synth_base_flow",  "synth_speed_mean",  "synth_speed_stddev",
        "segment_length_km", "gsd_m_per_px",     "band_time_lag_s",
    };
    return keys;
}

std::string dashed(const std::string& key) {
    std::string out = key;
    for (auto& c : out) {
        if (c == '_') c = '-';
    }
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "satemis — road traffic counts, LA AADT and road-transport GHG emissions "
        "from satellite vehicle detections"};
    app.require_subcommand(1);

    std::string config_path;
    KeyValueMap overrides;

    app.add_option("--config", config_path, "flat key = value run configuration");
    for (const auto& key : config_keys()) {
        if (key == "no_vehicle_type") {
            // Flag semantics rather than key=value.
            app.add_flag(
                "--no-vehicle-type,--no_vehicle_type",
                [&overrides](std::int64_t) { overrides["no_vehicle_type"] = "true"; },
                "apportion a single AADT total across detected vehicle classes");
            continue;
        }
        std::string names = "--" + key;
        if (dashed(key) != key) {
            names += ",--" + dashed(key);
        }
        app.add_option(
            names,
            [&overrides, key](const std::vector<std::string>& values) {
                overrides[key] = values.back();
                return true;
            },
            "override config key " + key);
    }
    // Singular road-type spelling used in the examples.
    app.add_option(
        "--road-type",
        [&overrides](const std::vector<std::string>& values) {
            overrides["road_types"] = values.back();
            return true;
        },
        "road type(s) to run, comma separated");

    auto* cmd_train = app.add_subcommand(
        "train", "fit per-site AADT models from count history and LA ground truth");
    auto* cmd_predict = app.add_subcommand(
        "predict", "detections -> counts -> AADT -> emissions, persisting intermediates");
    auto* cmd_evaluate =
        app.add_subcommand("evaluate", "error tables and plot data against ground truth");
    auto* cmd_speed =
        app.add_subcommand("speed", "live speed estimates from dual-band rasters");
    auto* cmd_synth =
        app.add_subcommand("synth", "generate a deterministic synthetic fixture");
    for (auto* sub : {cmd_train, cmd_predict, cmd_evaluate, cmd_speed, cmd_synth}) {
        sub->fallthrough();
    }

    CLI11_PARSE(app, argc, argv);

    try {
        KeyValueMap kv;
        if (!config_path.empty()) {
            kv = satemis::config::parse_key_values(config_path);
        }
        for (const auto& [key, value] : overrides) {
            kv[key] = value;
        }
        const auto run_config = satemis::pipeline::make_run_config(kv);

        if (cmd_train->parsed()) {
            const auto outcome = satemis::pipeline::run_train(run_config);
            for (const auto& site : outcome.skipped_sites) {
                std::cout << "skipped " << site << ": more than 10% missing values\n";
            }
            for (const auto& path : outcome.weights_files) {
                std::cout << "wrote " << path.string() << '\n';
            }
        } else if (cmd_predict->parsed()) {
            const auto outcome = satemis::pipeline::run_predict(run_config);
            for (const auto& path : outcome.emissions_reports) {
                std::cout << "wrote " << path.string() << '\n';
            }
            std::cout << "manifest: " << outcome.manifest.string() << '\n';
        } else if (cmd_evaluate->parsed()) {
            const auto outcome = satemis::pipeline::run_evaluate(run_config);
            std::cout << "wrote " << outcome.counts_table.string() << '\n'
                      << "wrote " << outcome.aadt_table.string() << '\n'
                      << "wrote " << outcome.ghg_table.string() << '\n'
                      << "wrote " << outcome.scatter_data.string() << '\n'
                      << "wrote " << outcome.mape_by_type.string() << '\n';
        } else if (cmd_speed->parsed()) {
            const auto outcome = satemis::pipeline::run_speed(run_config);
            for (const auto& row : outcome.rows) {
                std::cout << row.raster << ": blobs=" << row.blob_count
                          << " pairs=" << row.pair_count;
                if (row.mean_speed_kmh.has_value()) {
                    std::cout << " speed_kmh="
                              << satemis::metrics::format_value(*row.mean_speed_kmh)
                              << '\n';
                } else {
                    std::cout << " status=failed\n";
                }
            }
            std::cout << "wrote " << outcome.results_file.string() << '\n';
            if (outcome.all_failed) {
                std::cerr << "speed estimation failed for every image\n";
                return satemis::kExitSpeedEstimation;
            }
        } else if (cmd_synth->parsed()) {
            const auto dir = satemis::pipeline::run_synth(run_config);
            std::cout << "fixture written to " << dir.string() << '\n';
        }
    } catch (const satemis::LeakageError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return satemis::kExitLeakageGuard;
    } catch (const satemis::SpeedEstimationError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return satemis::kExitSpeedEstimation;
    } catch (const satemis::ValidationError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return satemis::kExitValidation;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return satemis::kExitFailure;
    }
    return satemis::kExitOk;
}
