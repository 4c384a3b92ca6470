#include "satemis/aadt_model.hpp"

#include "satemis/errors.hpp"
#include "satemis/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>

#include <json.hpp>

namespace satemis::aadt {
namespace {

using nlohmann::json;

constexpr std::size_t kOutputs = 4;

std::array<double, 5> count_features(const CountRecord& rec) {
    std::array<double, 5> out{};
    for (std::size_t i = 0; i < 4; ++i) {
        out[i] = static_cast<double>(rec.counts[i].value());
    }
    out[kTotalVehicles] = static_cast<double>(rec.total.value());
    return out;
}

std::array<double, kOutputs> to_target(const AADTVector& v) {
    return {v.cars_taxis, v.lgv, v.hgv, v.buses_coaches};
}

// Row MAPE over the 4 output components, zero-truth components excluded.
// Returns (sum of ratios, counted components).
std::pair<double, std::size_t> mape_terms(std::span<const double> pred,
                                          std::span<const double> truth) {
    double sum = 0.0;
    std::size_t used = 0;
    for (std::size_t k = 0; k < pred.size(); ++k) {
        if (truth[k] == 0.0) {
            continue;
        }
        sum += std::abs(pred[k] - truth[k]) / std::abs(truth[k]);
        ++used;
    }
    return {sum, used};
}

struct BackpropWorkspace {
    // Scaled network input plus, per layer, pre- and post-activation outputs.
    std::vector<double> scaled_input;
    std::vector<std::vector<double>> pre;
    std::vector<std::vector<double>> post;
};

std::vector<double> forward_traced(const Network& net, std::span<const double> input,
                                   BackpropWorkspace& ws) {
    ws.pre.resize(net.layers.size());
    ws.post.resize(net.layers.size());
    ws.scaled_input.assign(input.begin(), input.end());
    if (!net.input_scale.empty()) {
        for (std::size_t i = 0; i < ws.scaled_input.size(); ++i) {
            ws.scaled_input[i] *= net.input_scale[i];
        }
    }
    std::vector<double> current = ws.scaled_input;
    for (std::size_t l = 0; l < net.layers.size(); ++l) {
        const DenseLayer& layer = net.layers[l];
        std::vector<double> z(layer.out_size, 0.0);
        for (std::size_t o = 0; o < layer.out_size; ++o) {
            double acc = layer.bias[o];
            const double* w = layer.weights.data() + o * layer.in_size;
            for (std::size_t i = 0; i < layer.in_size; ++i) {
                acc += w[i] * current[i];
            }
            z[o] = acc;
        }
        ws.pre[l] = z;
        if (layer.activation == Activation::ReLU) {
            for (auto& v : z) {
                v = v > 0.0 ? v : 0.0;
            }
        }
        ws.post[l] = z;
        current = std::move(z);
    }
    return current;
}

// Accumulates d(loss)/d(params) for one row into grad (flattened layout
// matching Network::params). `out_grad` is d(loss)/d(prediction).
void backprop_row(const Network& net, const BackpropWorkspace& ws,
                  std::vector<double> out_grad, std::vector<double>& grad) {
    std::vector<double> delta = std::move(out_grad);
    std::size_t offset = grad.size();
    for (std::size_t l = net.layers.size(); l-- > 0;) {
        const DenseLayer& layer = net.layers[l];
        offset -= layer.out_size * layer.in_size + layer.out_size;

        if (layer.activation == Activation::ReLU) {
            for (std::size_t o = 0; o < layer.out_size; ++o) {
                if (ws.pre[l][o] <= 0.0) {
                    delta[o] = 0.0;
                }
            }
        }

        const double* layer_input = l == 0 ? ws.scaled_input.data() : ws.post[l - 1].data();
        double* gw = grad.data() + offset;
        double* gb = gw + layer.out_size * layer.in_size;
        for (std::size_t o = 0; o < layer.out_size; ++o) {
            for (std::size_t i = 0; i < layer.in_size; ++i) {
                gw[o * layer.in_size + i] += delta[o] * layer_input[i];
            }
            gb[o] += delta[o];
        }

        if (l > 0) {
            std::vector<double> prev(layer.in_size, 0.0);
            for (std::size_t o = 0; o < layer.out_size; ++o) {
                const double* w = layer.weights.data() + o * layer.in_size;
                for (std::size_t i = 0; i < layer.in_size; ++i) {
                    prev[i] += w[i] * delta[o];
                }
            }
            delta = std::move(prev);
        }
    }
}

std::string activation_name(Activation a) {
    return a == Activation::ReLU ? "relu" : "linear";
}

Activation parse_activation(const std::string& name) {
    if (name == "relu") return Activation::ReLU;
    if (name == "linear") return Activation::Linear;
    throw ValidationError("unknown activation '" + name + "'");
}

}  // namespace

double MinMaxParams::scale(std::size_t feature, double value) const {
    const auto& [lo, hi] = ranges.at(feature);
    if (hi <= lo) {
        return 0.0;
    }
    return (value - lo) / (hi - lo);
}

double MinMaxParams::unscale(std::size_t feature, double scaled) const {
    const auto& [lo, hi] = ranges.at(feature);
    if (hi <= lo) {
        return lo;
    }
    return lo + scaled * (hi - lo);
}

MinMaxParams fit_minmax(const std::vector<CountRecord>& history) {
    if (history.empty()) {
        throw ValidationError("fit_minmax: empty history");
    }
    if (history.size() < 2) {
        throw ValidationError("fit_minmax: need at least 2 records");
    }
    std::array<bool, 5> seen{};
    MinMaxParams params;
    const auto consider = [&](std::size_t feature, double value) {
        auto& [lo, hi] = params.ranges[feature];
        if (!seen[feature]) {
            lo = hi = value;
            seen[feature] = true;
        } else {
            lo = std::min(lo, value);
            hi = std::max(hi, value);
        }
    };
    for (const auto& rec : history) {
        for (std::size_t i = 0; i < 4; ++i) {
            if (rec.counts[i].has_value()) {
                consider(i, static_cast<double>(*rec.counts[i]));
            }
        }
        if (rec.total.has_value()) {
            consider(kTotalVehicles, static_cast<double>(*rec.total));
        }
    }
    return params;
}

std::array<double, FeatureVector::kSize> FeatureVector::as_array() const {
    return {hour_of_day,      day_of_week,      month_of_year,
            speed_kmh,        scaled_counts[0], scaled_counts[1],
            scaled_counts[2], scaled_counts[3], scaled_total};
}

FeatureVector build_features(const CountRecord& record, const MinMaxParams& params) {
    if (record.has_missing()) {
        throw ValidationError("build_features: record " + format_datetime(record.timestamp) +
                              " has missing fields");
    }
    FeatureVector f;
    f.hour_of_day = record.timestamp.hour;
    f.day_of_week = day_of_week(record.timestamp);
    f.month_of_year = record.timestamp.month;
    f.speed_kmh = *record.mean_speed_kmh;
    const auto raw = count_features(record);
    for (std::size_t i = 0; i < 4; ++i) {
        f.scaled_counts[i] = params.scale(i, raw[i]);
    }
    f.scaled_total = params.scale(kTotalVehicles, raw[kTotalVehicles]);
    return f;
}

FeatureVector build_features(const counts::CountEstimate& estimate,
                             const DateTime& timestamp, const MinMaxParams& params) {
    FeatureVector f;
    f.hour_of_day = timestamp.hour;
    f.day_of_week = day_of_week(timestamp);
    f.month_of_year = timestamp.month;
    f.speed_kmh = estimate.speed_used_kmh;
    for (std::size_t i = 0; i < 4; ++i) {
        f.scaled_counts[i] = params.scale(i, estimate.counts_15min[i]);
    }
    f.scaled_total = params.scale(kTotalVehicles, estimate.total_15min);
    return f;
}

AADTVector derive_la_target(const SiteDirectionAadt& site_aadt_by_direction) {
    std::array<bool, 4> seen{};
    AADTVector target;
    for (const auto& [key, value] : site_aadt_by_direction) {
        const VehicleType vt = std::get<2>(key);
        const auto idx = static_cast<std::size_t>(vt);
        if (!seen[idx] || value > target[vt]) {
            target[vt] = value;
            seen[idx] = true;
        }
    }
    for (std::size_t i = 0; i < 4; ++i) {
        if (!seen[i]) {
            throw ValidationError("derive_la_target: no entry for vehicle type " +
                                  to_string(kVehicleTypes[i]));
        }
    }
    return target;
}

AADTVector derive_la_target(const std::vector<SiteAadt>& rows) {
    SiteDirectionAadt map;
    for (const auto& row : rows) {
        for (const auto vt : kVehicleTypes) {
            map[{row.site_id, row.direction, vt}] = row.aadt[vt];
        }
    }
    return derive_la_target(map);
}

std::size_t Network::param_count() const {
    std::size_t n = 0;
    for (const auto& layer : layers) {
        n += layer.out_size * layer.in_size + layer.out_size;
    }
    return n;
}

std::vector<double> Network::params() const {
    std::vector<double> flat;
    flat.reserve(param_count());
    for (const auto& layer : layers) {
        flat.insert(flat.end(), layer.weights.begin(), layer.weights.end());
        flat.insert(flat.end(), layer.bias.begin(), layer.bias.end());
    }
    return flat;
}

void Network::set_params(std::span<const double> flat) {
    if (flat.size() != param_count()) {
        throw ValidationError("set_params: size mismatch");
    }
    std::size_t offset = 0;
    for (auto& layer : layers) {
        std::copy_n(flat.begin() + static_cast<std::ptrdiff_t>(offset),
                    layer.weights.size(), layer.weights.begin());
        offset += layer.weights.size();
        std::copy_n(flat.begin() + static_cast<std::ptrdiff_t>(offset), layer.bias.size(),
                    layer.bias.begin());
        offset += layer.bias.size();
    }
}

std::vector<double> Network::forward(std::span<const double> input) const {
    if (input.size() != input_size()) {
        throw ValidationError("forward: expected " + std::to_string(input_size()) +
                              " inputs, got " + std::to_string(input.size()));
    }
    BackpropWorkspace ws;
    return forward_traced(*this, input, ws);
}

Network make_network(std::size_t input, const std::vector<std::size_t>& hidden,
                     std::size_t output, Rng& rng) {
    if (input == 0 || output == 0) {
        throw ValidationError("make_network: zero-sized input or output");
    }
    Network net;
    std::size_t prev = input;
    const auto add_layer = [&](std::size_t out, Activation act) {
        DenseLayer layer;
        layer.in_size = prev;
        layer.out_size = out;
        layer.activation = act;
        const double bound = std::sqrt(6.0 / static_cast<double>(prev));
        layer.weights.resize(out * prev);
        for (auto& w : layer.weights) {
            w = rng.uniform(-bound, bound);
        }
        layer.bias.assign(out, 0.0);
        net.layers.push_back(std::move(layer));
        prev = out;
    };
    for (const std::size_t h : hidden) {
        if (h == 0) {
            throw ValidationError("make_network: zero-sized hidden layer");
        }
        add_layer(h, Activation::ReLU);
    }
    add_layer(output, Activation::Linear);
    return net;
}

double mse_loss(const Network& net, std::span<const std::vector<double>> inputs,
                std::span<const std::vector<double>> targets) {
    if (inputs.size() != targets.size() || inputs.empty()) {
        throw ValidationError("mse_loss: input/target size mismatch or empty");
    }
    double sum = 0.0;
    for (std::size_t r = 0; r < inputs.size(); ++r) {
        const auto pred = net.forward(inputs[r]);
        for (std::size_t k = 0; k < pred.size(); ++k) {
            const double e = pred[k] - targets[r][k];
            sum += e * e;
        }
    }
    return sum / (static_cast<double>(inputs.size()) *
                  static_cast<double>(net.output_size()));
}

std::vector<double> mse_loss_gradient(const Network& net,
                                      std::span<const std::vector<double>> inputs,
                                      std::span<const std::vector<double>> targets) {
    if (inputs.size() != targets.size() || inputs.empty()) {
        throw ValidationError("mse_loss_gradient: input/target size mismatch or empty");
    }
    std::vector<double> grad(net.param_count(), 0.0);
    const double scale =
        1.0 / (static_cast<double>(inputs.size()) * static_cast<double>(net.output_size()));
    BackpropWorkspace ws;
    for (std::size_t r = 0; r < inputs.size(); ++r) {
        const auto pred = forward_traced(net, inputs[r], ws);
        std::vector<double> out_grad(pred.size());
        for (std::size_t k = 0; k < pred.size(); ++k) {
            out_grad[k] = 2.0 * (pred[k] - targets[r][k]) * scale;
        }
        backprop_row(net, ws, std::move(out_grad), grad);
    }
    return grad;
}

TrainResult train(const std::vector<CountRecord>& history,
                  const std::vector<AADTVector>& targets, const TrainConfig& config,
                  const ModelMeta& meta) {
    if (history.size() != targets.size()) {
        throw ValidationError("train: history and targets differ in length");
    }
    if (history.empty()) {
        throw ValidationError("train: empty history");
    }
    if (config.val_fraction <= 0.0 || config.val_fraction >= 1.0) {
        throw ValidationError("train: val_fraction must be in (0, 1)");
    }

    for (const auto& rec : history) {
        if (rec.timestamp.year >= config.test_year_start) {
            throw LeakageError("train: row " + format_datetime(rec.timestamp) +
                               " is in the test period (year >= " +
                               std::to_string(config.test_year_start) + ")");
        }
    }

    // Complete rows only, ordered by time so the validation split is the tail.
    std::vector<std::size_t> order;
    std::size_t skipped = 0;
    for (std::size_t i = 0; i < history.size(); ++i) {
        if (history[i].has_missing()) {
            ++skipped;
        } else {
            order.push_back(i);
        }
    }
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return history[a].timestamp < history[b].timestamp;
    });
    if (order.size() < 3) {
        throw ValidationError("train: need at least 3 complete rows");
    }

    std::size_t n_val = static_cast<std::size_t>(
        std::floor(config.val_fraction * static_cast<double>(order.size()) + 0.5));
    n_val = std::clamp<std::size_t>(n_val, 1, order.size() - 2);
    const std::size_t n_train = order.size() - n_val;

    std::vector<CountRecord> train_rows;
    train_rows.reserve(n_train);
    for (std::size_t i = 0; i < n_train; ++i) {
        train_rows.push_back(history[order[i]]);
    }
    const MinMaxParams minmax = fit_minmax(train_rows);

    // Output scale from the training targets; the optimiser then works near
    // unit magnitude regardless of the AADT scale.
    double target_scale = 0.0;
    for (std::size_t i = 0; i < n_train; ++i) {
        for (const double t : to_target(targets[order[i]])) {
            target_scale = std::max(target_scale, std::abs(t));
        }
    }
    if (target_scale == 0.0) {
        target_scale = 1.0;
    }

    std::vector<std::vector<double>> x_train, y_train, x_val, y_val;
    for (std::size_t i = 0; i < order.size(); ++i) {
        const auto f = build_features(history[order[i]], minmax).as_array();
        auto t = to_target(targets[order[i]]);
        for (auto& v : t) {
            v /= target_scale;
        }
        auto& xs = i < n_train ? x_train : x_val;
        auto& ys = i < n_train ? y_train : y_val;
        xs.emplace_back(f.begin(), f.end());
        ys.emplace_back(t.begin(), t.end());
    }

    Rng rng(config.seed);
    Network net =
        make_network(FeatureVector::kSize, config.hidden_layers, kOutputs, rng);
    // Fixed conditioning for the raw-unit features: hour/24, day/7, month/12,
    // speed/130 (km/h); the already-scaled count features pass through.
    net.input_scale = {1.0 / 24.0, 1.0 / 7.0, 1.0 / 12.0, 1.0 / 130.0, 1.0,
                       1.0,        1.0,       1.0,        1.0};

    // Adam state (ignored when use_adam is off).
    std::vector<double> m(net.param_count(), 0.0);
    std::vector<double> v(net.param_count(), 0.0);
    constexpr double kBeta1 = 0.9;
    constexpr double kBeta2 = 0.999;
    constexpr double kEps = 1e-8;
    std::size_t adam_step = 0;

    TrainingLog log;
    log.train_rows = n_train;
    log.val_rows = n_val;
    log.skipped_incomplete = skipped;
    log.test_year_start = config.test_year_start;
    log.max_train_year = history[order.front()].timestamp.year;
    for (const std::size_t i : order) {
        log.max_train_year = std::max(log.max_train_year, history[i].timestamp.year);
    }

    std::vector<std::size_t> shuffle(n_train);
    std::iota(shuffle.begin(), shuffle.end(), 0);

    double best_val = std::numeric_limits<double>::infinity();
    std::vector<double> best_params = net.params();
    std::size_t best_epoch = 0;
    std::size_t epochs_without_improvement = 0;
    const std::size_t batch_size = std::max<std::size_t>(1, config.batch_size);

    for (std::size_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
        const double epoch_lr =
            config.learning_rate * std::pow(config.lr_decay, static_cast<double>(epoch - 1));

        // Deterministic Fisher-Yates reshuffle per epoch.
        for (std::size_t i = n_train - 1; i > 0; --i) {
            const std::size_t j = static_cast<std::size_t>(rng.next_below(i + 1));
            std::swap(shuffle[i], shuffle[j]);
        }

        double epoch_loss = 0.0;
        std::size_t batches = 0;
        for (std::size_t start = 0; start < n_train; start += batch_size) {
            const std::size_t end = std::min(start + batch_size, n_train);
            std::vector<std::vector<double>> bx, by;
            bx.reserve(end - start);
            by.reserve(end - start);
            for (std::size_t i = start; i < end; ++i) {
                bx.push_back(x_train[shuffle[i]]);
                by.push_back(y_train[shuffle[i]]);
            }
            const auto grad = mse_loss_gradient(net, bx, by);
            epoch_loss += mse_loss(net, bx, by);
            ++batches;

            auto params = net.params();
            if (config.use_adam) {
                ++adam_step;
                const double bc1 = 1.0 - std::pow(kBeta1, static_cast<double>(adam_step));
                const double bc2 = 1.0 - std::pow(kBeta2, static_cast<double>(adam_step));
                for (std::size_t p = 0; p < params.size(); ++p) {
                    m[p] = kBeta1 * m[p] + (1.0 - kBeta1) * grad[p];
                    v[p] = kBeta2 * v[p] + (1.0 - kBeta2) * grad[p] * grad[p];
                    params[p] -= epoch_lr * (m[p] / bc1) / (std::sqrt(v[p] / bc2) + kEps);
                }
            } else {
                for (std::size_t p = 0; p < params.size(); ++p) {
                    params[p] -= epoch_lr * grad[p];
                }
            }
            net.set_params(params);
        }
        epoch_loss /= static_cast<double>(batches);

        const double val_loss = mse_loss(net, x_val, y_val);
        double mape_sum = 0.0;
        std::size_t mape_n = 0;
        for (std::size_t r = 0; r < x_val.size(); ++r) {
            const auto pred = net.forward(x_val[r]);
            const auto [s, c] = mape_terms(pred, y_val[r]);
            mape_sum += s;
            mape_n += c;
        }
        const double val_mape =
            mape_n > 0 ? mape_sum / static_cast<double>(mape_n) : 0.0;

        if (!std::isfinite(epoch_loss) || !std::isfinite(val_loss)) {
            throw TrainingDivergenceError(
                "train: non-finite loss at epoch " + std::to_string(epoch) +
                    "; last stable epoch " + std::to_string(epoch - 1),
                epoch - 1);
        }

        log.epochs.push_back({epoch, epoch_loss, val_loss, val_mape});

        if (val_loss < best_val) {
            best_val = val_loss;
            best_params = net.params();
            best_epoch = epoch;
            epochs_without_improvement = 0;
        } else {
            ++epochs_without_improvement;
            if (epochs_without_improvement >= config.patience) {
                break;
            }
        }
    }

    net.set_params(best_params);
    log.best_epoch = best_epoch;

    TrainResult result;
    result.weights.network = std::move(net);
    result.weights.meta = meta;
    result.weights.minmax = minmax;
    result.weights.target_scale = target_scale;
    result.weights.seed = config.seed;
    result.weights.train_start = history[order.front()].timestamp;
    result.weights.train_end = history[order.back()].timestamp;
    result.log = std::move(log);
    return result;
}

Prediction predict(const ModelWeights& weights, const FeatureVector& features) {
    const auto input = features.as_array();
    const auto raw = weights.network.forward(input);
    if (raw.size() != kOutputs) {
        throw ValidationError("predict: network has " + std::to_string(raw.size()) +
                              " outputs, expected 4");
    }
    Prediction out;
    for (std::size_t k = 0; k < kOutputs; ++k) {
        double value = raw[k] * weights.target_scale;
        if (value < 0.0) {
            value = 0.0;
            ++out.clamped_components;
        }
        out.aadt[kVehicleTypes[k]] = value;
    }
    return out;
}

AADTVector aggregate_directions(const std::vector<AADTVector>& predictions) {
    if (predictions.empty()) {
        throw ValidationError("aggregate_directions: no predictions");
    }
    AADTVector mean;
    for (const auto& p : predictions) {
        for (const auto vt : kVehicleTypes) {
            mean[vt] += p[vt];
        }
    }
    for (const auto vt : kVehicleTypes) {
        mean[vt] /= static_cast<double>(predictions.size());
    }
    return mean;
}

void require_road_type(const ModelWeights& weights, RoadType road_type) {
    if (weights.meta.road_type != road_type) {
        throw ValidationError("weights for site " + weights.meta.site_id +
                              " target road type " + to_string(weights.meta.road_type) +
                              ", not " + to_string(road_type));
    }
}

void save_weights(const std::filesystem::path& path, const ModelWeights& weights) {
    json doc;
    doc["format_version"] = 1;
    json minmax = json::object();
    const std::array<const char*, 5> names = {"small", "medium", "large", "very_large",
                                              "total"};
    for (std::size_t i = 0; i < 5; ++i) {
        minmax[names[i]] = {weights.minmax.ranges[i].first,
                            weights.minmax.ranges[i].second};
    }
    doc["metadata"] = {
        {"site_id", weights.meta.site_id},
        {"la_name", weights.meta.la_name},
        {"road_type", to_string(weights.meta.road_type)},
        {"seed", weights.seed},
        {"train_start", format_datetime(weights.train_start)},
        {"train_end", format_datetime(weights.train_end)},
        {"target_scale", weights.target_scale},
        {"minmax", minmax},
    };
    doc["input_scale"] = weights.network.input_scale;
    doc["layers"] = json::array();
    for (const auto& layer : weights.network.layers) {
        doc["layers"].push_back({
            {"in", layer.in_size},
            {"out", layer.out_size},
            {"activation", activation_name(layer.activation)},
            {"weights", layer.weights},
            {"bias", layer.bias},
        });
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw ValidationError("cannot write " + path.string());
    }
    out << doc.dump(2) << '\n';
}

ModelWeights load_weights(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ValidationError("cannot open " + path.string());
    }
    json doc;
    try {
        in >> doc;
    } catch (const json::parse_error& e) {
        throw ValidationError(path.string() + ": " + e.what());
    }
    if (!doc.contains("format_version")) {
        throw ValidationError(path.string() + ": missing format_version");
    }
    if (doc["format_version"].get<int>() != 1) {
        throw ValidationError(path.string() + ": unsupported format_version");
    }

    ModelWeights weights;
    const json& meta = doc.at("metadata");
    weights.meta.site_id = meta.at("site_id").get<std::string>();
    weights.meta.la_name = meta.at("la_name").get<std::string>();
    weights.meta.road_type = parse_road_type(meta.at("road_type").get<std::string>());
    weights.seed = meta.at("seed").get<std::uint64_t>();
    weights.train_start = parse_datetime(meta.at("train_start").get<std::string>());
    weights.train_end = parse_datetime(meta.at("train_end").get<std::string>());
    weights.target_scale = meta.at("target_scale").get<double>();
    if (weights.target_scale <= 0.0) {
        throw ValidationError(path.string() + ": target_scale must be > 0");
    }
    const std::array<const char*, 5> names = {"small", "medium", "large", "very_large",
                                              "total"};
    for (std::size_t i = 0; i < 5; ++i) {
        const auto& range = meta.at("minmax").at(names[i]);
        weights.minmax.ranges[i] = {range.at(0).get<double>(), range.at(1).get<double>()};
        if (weights.minmax.ranges[i].second < weights.minmax.ranges[i].first) {
            throw ValidationError(path.string() + ": minmax max < min");
        }
    }

    if (doc.contains("input_scale")) {
        weights.network.input_scale = doc["input_scale"].get<std::vector<double>>();
    }
    for (const auto& item : doc.at("layers")) {
        DenseLayer layer;
        layer.in_size = item.at("in").get<std::size_t>();
        layer.out_size = item.at("out").get<std::size_t>();
        layer.activation = parse_activation(item.at("activation").get<std::string>());
        layer.weights = item.at("weights").get<std::vector<double>>();
        layer.bias = item.at("bias").get<std::vector<double>>();
        if (layer.weights.size() != layer.in_size * layer.out_size ||
            layer.bias.size() != layer.out_size) {
            throw ValidationError(path.string() + ": layer shape mismatch");
        }
        weights.network.layers.push_back(std::move(layer));
    }
    if (weights.network.layers.empty()) {
        throw ValidationError(path.string() + ": no layers");
    }
    if (weights.network.input_size() != FeatureVector::kSize ||
        weights.network.output_size() != kOutputs) {
        throw ValidationError(path.string() + ": network must map 9 inputs to 4 outputs");
    }
    if (!weights.network.input_scale.empty() &&
        weights.network.input_scale.size() != weights.network.input_size()) {
        throw ValidationError(path.string() + ": input_scale size mismatch");
    }
    for (std::size_t l = 1; l < weights.network.layers.size(); ++l) {
        if (weights.network.layers[l].in_size != weights.network.layers[l - 1].out_size) {
            throw ValidationError(path.string() + ": layer shapes do not chain");
        }
    }
    return weights;
}

void write_training_log(const std::filesystem::path& path, const TrainingLog& log) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw ValidationError("cannot write " + path.string());
    }
    out << "# train_rows=" << log.train_rows << " val_rows=" << log.val_rows
        << " skipped_incomplete=" << log.skipped_incomplete
        << " max_train_year=" << log.max_train_year
        << " test_year_start=" << log.test_year_start
        << " best_epoch=" << log.best_epoch << '\n';
    out << "epoch,train_loss,val_loss,val_mape\n";
    for (const auto& e : log.epochs) {
        out << e.epoch << ',' << metrics::format_value(e.train_loss) << ','
            << metrics::format_value(e.val_loss) << ','
            << metrics::format_value(e.val_mape) << '\n';
    }
}

}  // namespace satemis::aadt
