#include "satemis/metrics.hpp"

#include "satemis/errors.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>

namespace satemis::metrics {

double rmse(std::span<const EvalPair> pairs) {
    if (pairs.empty()) {
        throw ValidationError("rmse: no pairs");
    }
    double sum_sq = 0.0;
    for (const auto& p : pairs) {
        const double e = p.predicted - p.truth;
        sum_sq += e * e;
    }
    return std::sqrt(sum_sq / static_cast<double>(pairs.size()));
}

MapeResult mape(std::span<const EvalPair> pairs) {
    if (pairs.empty()) {
        throw ValidationError("mape: no pairs");
    }
    MapeResult out;
    double sum = 0.0;
    std::size_t used = 0;
    for (const auto& p : pairs) {
        if (p.truth == 0.0) {
            ++out.excluded_zero_truth;
            continue;
        }
        sum += std::abs(p.predicted - p.truth) / std::abs(p.truth);
        ++used;
    }
    if (used == 0) {
        throw ValidationError("mape: all truth values are zero");
    }
    out.value = sum / static_cast<double>(used);
    return out;
}

double r_squared(std::span<const EvalPair> pairs) {
    if (pairs.size() < 2) {
        throw ValidationError("r_squared: need at least 2 pairs");
    }
    double mean_truth = 0.0;
    for (const auto& p : pairs) {
        mean_truth += p.truth;
    }
    mean_truth /= static_cast<double>(pairs.size());

    double ss_res = 0.0;
    double ss_tot = 0.0;
    for (const auto& p : pairs) {
        ss_res += (p.predicted - p.truth) * (p.predicted - p.truth);
        ss_tot += (p.truth - mean_truth) * (p.truth - mean_truth);
    }
    if (ss_tot == 0.0) {
        throw ValidationError("r_squared: truth variance is zero");
    }
    return 1.0 - ss_res / ss_tot;
}

std::string format_value(double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    if (ec != std::errc{}) {
        return "nan";
    }
    return std::string(buf, ptr);
}

namespace {

void write_row(std::ofstream& out, const MetricsRow& row) {
    for (const auto& label : row.labels) {
        out << label << ',';
    }
    out << format_value(row.rmse) << ',' << format_value(row.mape) << '\n';
}

MetricsRow average_row(const std::vector<const MetricsRow*>& rows,
                       std::size_t label_count) {
    MetricsRow avg;
    avg.labels.assign(label_count, "");
    avg.labels.front() = "AVERAGE";
    for (const auto* row : rows) {
        avg.rmse += row->rmse;
        avg.mape += row->mape;
    }
    avg.rmse /= static_cast<double>(rows.size());
    avg.mape /= static_cast<double>(rows.size());
    return avg;
}

}  // namespace

void write_metrics_table(const std::filesystem::path& path,
                         const std::vector<std::string>& header,
                         const std::vector<MetricsRow>& rows,
                         std::optional<std::size_t> group_column) {
    std::ofstream out(path);
    if (!out) {
        throw ValidationError("cannot write " + path.string());
    }
    for (std::size_t i = 0; i < header.size(); ++i) {
        out << header[i] << (i + 1 < header.size() ? ',' : '\n');
    }
    for (const auto& row : rows) {
        write_row(out, row);
    }
    if (rows.empty()) {
        return;
    }

    const std::size_t label_count = rows.front().labels.size();
    if (!group_column.has_value()) {
        write_row(out, average_row([&] {
            std::vector<const MetricsRow*> all;
            for (const auto& r : rows) all.push_back(&r);
            return all;
        }(), label_count));
        return;
    }

    // One AVERAGE row per group value, in first-appearance order.
    std::vector<std::string> group_order;
    std::map<std::string, std::vector<const MetricsRow*>> groups;
    for (const auto& row : rows) {
        const std::string& key = row.labels.at(*group_column);
        if (!groups.contains(key)) {
            group_order.push_back(key);
        }
        groups[key].push_back(&row);
    }
    for (const auto& key : group_order) {
        MetricsRow avg = average_row(groups[key], label_count);
        avg.labels.at(*group_column) = key;
        write_row(out, avg);
    }
}

void write_scatter_data(const std::filesystem::path& path,
                        const std::vector<ScatterRow>& rows) {
    std::ofstream out(path);
    if (!out) {
        throw ValidationError("cannot write " + path.string());
    }
    out << "la,road_type,aadt_pred,aadt_true,ghg_pred,ghg_true\n";
    for (const auto& r : rows) {
        out << r.la << ',' << r.road_type << ',' << format_value(r.aadt_pred) << ','
            << format_value(r.aadt_true) << ',' << format_value(r.ghg_pred) << ','
            << format_value(r.ghg_true) << '\n';
    }
}

}  // namespace satemis::metrics
