#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include "satemis/rng.hpp"
#include "satemis/traffic_counts.hpp"
#include "satemis/types.hpp"

namespace satemis::aadt {

// The five count features, in feature order after the time/speed block.
enum CountFeature : std::size_t {
    kSmall = 0,
    kMedium = 1,
    kLarge = 2,
    kVeryLarge = 3,
    kTotalVehicles = 4,
};

// Min-max ranges fitted on the training split and stored with the weights.
// A constant feature (max == min) scales to 0 by convention. Inference
// values above the training max scale past 1 and pass through un-clamped.
struct MinMaxParams {
    std::array<std::pair<double, double>, 5> ranges{};  // (min, max) per count feature

    double scale(std::size_t feature, double value) const;
    double unscale(std::size_t feature, double scaled) const;
};

// Fitted over the supplied rows; cells that are missing in a row do not
// contribute. Requires at least 2 records.
MinMaxParams fit_minmax(const std::vector<CountRecord>& history);

// Model input: hour of day, day of week (Mon=1), month, mean speed, then the
// five min-max scaled count features. Only counts are scaled; time and speed
// stay raw.
struct FeatureVector {
    double hour_of_day = 0.0;
    double day_of_week = 0.0;
    double month_of_year = 0.0;
    double speed_kmh = 0.0;
    std::array<double, 4> scaled_counts{};
    double scaled_total = 0.0;

    static constexpr std::size_t kSize = 9;
    std::array<double, kSize> as_array() const;
};

// Throws when the record has missing fields; imputation is not this layer's
// business.
FeatureVector build_features(const CountRecord& record, const MinMaxParams& params);
FeatureVector build_features(const counts::CountEstimate& estimate,
                             const DateTime& timestamp, const MinMaxParams& params);

// LA target = per vehicle type, the maximum site/direction AADT — a worst
// case that avoids systematic under-estimation downstream.
using SiteDirectionAadt = std::map<std::tuple<std::string, Direction, VehicleType>, double>;

AADTVector derive_la_target(const SiteDirectionAadt& site_aadt_by_direction);
AADTVector derive_la_target(const std::vector<SiteAadt>& rows);

enum class Activation { ReLU, Linear };

struct DenseLayer {
    std::size_t in_size = 0;
    std::size_t out_size = 0;
    std::vector<double> weights;  // row-major [out][in]
    std::vector<double> bias;
    Activation activation = Activation::Linear;
};

struct Network {
    std::vector<DenseLayer> layers;
    // Fixed per-input multipliers applied before the first layer (empty =
    // none). Not trained; they condition raw-unit features (hour, speed)
    // down to unit scale without changing the feature contract.
    std::vector<double> input_scale;

    std::size_t input_size() const { return layers.front().in_size; }
    std::size_t output_size() const { return layers.back().out_size; }
    std::size_t param_count() const;
    std::vector<double> params() const;
    void set_params(std::span<const double> flat);

    std::vector<double> forward(std::span<const double> input) const;
};

// Dense ReLU stack with a linear head; He-uniform init drawn from rng.
Network make_network(std::size_t input, const std::vector<std::size_t>& hidden,
                     std::size_t output, Rng& rng);

// Mean squared error over all rows and output components, equal weights.
double mse_loss(const Network& net, std::span<const std::vector<double>> inputs,
                std::span<const std::vector<double>> targets);

// Analytic gradient of mse_loss w.r.t. the flattened parameters.
std::vector<double> mse_loss_gradient(const Network& net,
                                      std::span<const std::vector<double>> inputs,
                                      std::span<const std::vector<double>> targets);

struct TrainConfig {
    std::vector<std::size_t> hidden_layers = {32, 32};
    double learning_rate = 1e-3;
    double lr_decay = 0.97;          // per-epoch multiplicative decay
    std::size_t batch_size = 32;
    std::size_t patience = 3;        // epochs without val-loss improvement
    double val_fraction = 0.1;       // final fraction of rows by time
    std::size_t max_epochs = 200;
    std::uint64_t seed = 42;
    int test_year_start = 2018;      // rows from this year on are refused
    bool use_adam = true;            // false = plain SGD
};

struct ModelMeta {
    std::string site_id;
    std::string la_name;
    RoadType road_type = RoadType::Motorways;
};

struct EpochStats {
    std::size_t epoch = 0;  // 1-based
    double train_loss = 0.0;
    double val_loss = 0.0;
    double val_mape = 0.0;
};

struct TrainingLog {
    std::vector<EpochStats> epochs;
    std::size_t best_epoch = 0;
    std::size_t train_rows = 0;
    std::size_t val_rows = 0;
    std::size_t skipped_incomplete = 0;
    int max_train_year = 0;  // firewall evidence: always < test_year_start
    int test_year_start = 0;
};

struct ModelWeights {
    Network network;
    ModelMeta meta;
    MinMaxParams minmax;
    // Scalar output normalisation fitted on the training targets; dividing
    // all four outputs by one constant keeps their relative MSE weights
    // intact while the optimiser works at unit scale.
    double target_scale = 1.0;
    DateTime train_start;
    DateTime train_end;
    std::uint64_t seed = 0;
};

struct TrainResult {
    ModelWeights weights;
    TrainingLog log;
};

// MSE regression of the 4 AADT outputs on the 9 features, minibatch gradient
// descent (Adam by default) with early stopping on validation loss: training
// halts after `patience` consecutive epochs without improvement and the
// best-epoch weights are restored. Rows with missing fields are skipped and
// counted. Rows dated in the test period abort with LeakageError.
TrainResult train(const std::vector<CountRecord>& history,
                  const std::vector<AADTVector>& targets, const TrainConfig& config,
                  const ModelMeta& meta);

struct Prediction {
    AADTVector aadt;
    int clamped_components = 0;  // negative raw outputs clamped to 0
};

Prediction predict(const ModelWeights& weights, const FeatureVector& features);

// Component-wise arithmetic mean of the directional predictions.
AADTVector aggregate_directions(const std::vector<AADTVector>& predictions);

// Guards against applying weights trained for one road type to another.
void require_road_type(const ModelWeights& weights, RoadType road_type);

// Versioned weights document: metadata block plus the layer list at full
// round-trip precision.
void save_weights(const std::filesystem::path& path, const ModelWeights& weights);
ModelWeights load_weights(const std::filesystem::path& path);

void write_training_log(const std::filesystem::path& path, const TrainingLog& log);

// Non-finite training loss; carries the last epoch that was still finite.
class TrainingDivergenceError : public std::runtime_error {
public:
    TrainingDivergenceError(const std::string& what, std::size_t last_stable_epoch)
        : std::runtime_error(what), last_stable_epoch(last_stable_epoch) {}
    std::size_t last_stable_epoch;
};

}  // namespace satemis::aadt
