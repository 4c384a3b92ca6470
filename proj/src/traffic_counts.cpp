#include "satemis/traffic_counts.hpp"

#include "satemis/errors.hpp"
#include "satemis/metrics.hpp"

#include <algorithm>
#include <fstream>

namespace satemis::counts {

double vehicle_length_cm(const Detection& d) {
    const double longer_px = std::max(d.x_max - d.x_min, d.y_max - d.y_min);
    return longer_px * d.gsd_m_per_px * 100.0;
}

LengthClass classify_length_cm(double length_cm) {
    if (length_cm <= 520.0) return LengthClass::Small;
    if (length_cm <= 660.0) return LengthClass::Medium;
    if (length_cm <= 1160.0) return LengthClass::Large;
    return LengthClass::VeryLarge;
}

LengthClass classify_length(const Detection& d) {
    return classify_length_cm(vehicle_length_cm(d));
}

CountEstimate estimate_counts(const std::vector<Detection>& detections,
                              double speed_kmh, double segment_length_km) {
    if (segment_length_km <= 0.0) {
        throw ValidationError("estimate_counts: segment_length_km must be > 0");
    }
    if (speed_kmh < 0.0) {
        throw ValidationError("estimate_counts: speed_kmh must be >= 0");
    }

    CountEstimate est;
    est.speed_used_kmh = speed_kmh;
    est.segment_length_km = segment_length_km;
    for (const auto& d : detections) {
        est.n_detected[static_cast<std::size_t>(classify_length(d))] += 1;
    }
    // km covered in 15 minutes, expressed in segment lengths.
    const double passes = speed_kmh * (15.0 / 60.0) / segment_length_km;
    for (std::size_t i = 0; i < 4; ++i) {
        est.counts_15min[i] = static_cast<double>(est.n_detected[i]) * passes;
        est.total_15min += est.counts_15min[i];
    }
    return est;
}

CountEstimate estimate_counts(const std::vector<Detection>& detections,
                              const std::optional<double>& speed_kmh,
                              double segment_length_km) {
    if (!speed_kmh.has_value()) {
        throw ValidationError(
            "estimate_counts: no speed estimate available; supply a historical speed");
    }
    return estimate_counts(detections, *speed_kmh, segment_length_km);
}

void write_count_estimate(const std::filesystem::path& path, const CountEstimate& est,
                          const std::string& site_id, Direction direction,
                          const DateTime& timestamp) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw ValidationError("cannot write " + path.string());
    }
    out << "timestamp,site_id,direction,small,medium,large,very_large,total,"
           "mean_speed_kmh\n";
    out << format_datetime(timestamp) << ',' << site_id << ',' << to_string(direction);
    for (const double c : est.counts_15min) {
        out << ',' << metrics::format_value(c);
    }
    out << ',' << metrics::format_value(est.total_15min) << ','
        << metrics::format_value(est.speed_used_kmh) << '\n';
}

}  // namespace satemis::counts
