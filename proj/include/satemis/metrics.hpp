#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace satemis::metrics {

// One prediction/truth comparison; label identifies the site, LA or
// vehicle type the pair belongs to.
struct EvalPair {
    double predicted = 0.0;
    double truth = 0.0;
    std::string label;
};

// sqrt of the mean squared error. Throws ValidationError on empty input.
double rmse(std::span<const EvalPair> pairs);

struct MapeResult {
    double value = 0.0;
    std::size_t excluded_zero_truth = 0;  // pairs dropped because truth == 0
};

// Mean of |pred - truth| / |truth| over pairs with non-zero truth. The
// zero-truth exclusion count is reported, never hidden. Throws when no
// pair survives the exclusion.
MapeResult mape(std::span<const EvalPair> pairs);

// 1 - SS_res / SS_tot. Requires >= 2 pairs and non-zero truth variance.
double r_squared(std::span<const EvalPair> pairs);

// One row of an error table: free-form label columns plus the two metrics.
struct MetricsRow {
    std::vector<std::string> labels;
    double rmse = 0.0;
    double mape = 0.0;
};

// Writes "label columns..., rmse, mape" rows, appending one AVERAGE row
// (unweighted mean of the metric columns). When group_column is set, rows
// are grouped by that label column and one AVERAGE row is appended per
// group value instead.
void write_metrics_table(const std::filesystem::path& path,
                         const std::vector<std::string>& header,
                         const std::vector<MetricsRow>& rows,
                         std::optional<std::size_t> group_column = std::nullopt);

// Scatter-plot data pairing predicted and true totals per LA.
struct ScatterRow {
    std::string la;
    std::string road_type;
    double aadt_pred = 0.0;
    double aadt_true = 0.0;
    double ghg_pred = 0.0;
    double ghg_true = 0.0;
};

void write_scatter_data(const std::filesystem::path& path,
                        const std::vector<ScatterRow>& rows);

// Formats a double for report files: stable shortest round-trip form.
std::string format_value(double v);

}  // namespace satemis::metrics
