#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <vector>

#include "satemis/types.hpp"

namespace satemis::counts {

// Vehicle length in cm from the longer bounding-box edge. Axis-aligned
// boxes on roughly axis-aligned road segments track vehicle orientation
// loosely; the longer edge is a known bias source but stays compatible
// with the length-class buckets.
double vehicle_length_cm(const Detection& d);

// Buckets: (0, 520] Small, (520, 660] Medium, (660, 1160] Large, above
// VeryLarge.
LengthClass classify_length_cm(double length_cm);
LengthClass classify_length(const Detection& d);

// Estimated 15-minute flow per length class. Values stay real; rounding is
// display-only so downstream features see no quantisation.
struct CountEstimate {
    std::array<double, 4> counts_15min{};  // indexed by LengthClass
    double total_15min = 0.0;
    double speed_used_kmh = 0.0;
    double segment_length_km = 0.0;
    std::array<long, 4> n_detected{};

    double count(LengthClass c) const {
        return counts_15min[static_cast<std::size_t>(c)];
    }
};

// Flow past a point in 15 minutes assuming the detected vehicles traverse
// the segment at constant speed: per class, detected * speed_kmh/60 * 15 /
// segment_length_km.
CountEstimate estimate_counts(const std::vector<Detection>& detections,
                              double speed_kmh, double segment_length_km);

// Overload for an optional speed source: an absent speed is an error telling
// the caller to supply a historical speed instead.
CountEstimate estimate_counts(const std::vector<Detection>& detections,
                              const std::optional<double>& speed_kmh,
                              double segment_length_km);

// Emits the estimate in the count-history schema so estimated and
// ground-truth counts are interchangeable downstream.
void write_count_estimate(const std::filesystem::path& path, const CountEstimate& est,
                          const std::string& site_id, Direction direction,
                          const DateTime& timestamp);

}  // namespace satemis::counts
