#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <vector>

namespace satemis::speed {

// Row-major 2-D grid of intensities.
struct Grid {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> values;

    static Grid zeros(std::size_t rows, std::size_t cols) {
        return Grid{rows, cols, std::vector<double>(rows * cols, 0.0)};
    }
    double& at(std::size_t r, std::size_t c) { return values[r * cols + c]; }
    double at(std::size_t r, std::size_t c) const { return values[r * cols + c]; }
};

// Two co-registered band composites of the same scene, exposed time_lag_s
// apart. Moving objects appear displaced between the bands.
struct DualBandRaster {
    Grid band_a;
    Grid band_b;
    double gsd_m_per_px = 0.0;
    double time_lag_s = 0.26;
};

// Binary grid file: magic "DBR1", then uint32 rows, cols, bands (= 2),
// then rows*cols float32 per band, row-major, little-endian. A sidecar
// "<path>.meta" of key=value lines carries gsd_m_per_px and time_lag_s.
DualBandRaster read_raster(const std::filesystem::path& path);
void write_raster(const std::filesystem::path& path, const DualBandRaster& raster);

// Treats each pixel as a 2-vector over the bands and projects the
// mean-centred ensemble onto its second principal component — the axis
// orthogonal to the static-scene component, where between-band change
// lives. Output has the input shape and zero mean. Throws on
// constant-valued (zero variance) bands.
Grid build_change_image(const DualBandRaster& raster);

enum class Polarity { Bright, Dark };

struct Blob {
    double centroid_row = 0.0;
    double centroid_col = 0.0;
    long area_px = 0;
    double compactness = 0.0;     // 4*pi*area / perimeter^2, exposed-edge perimeter
    double rectangularity = 0.0;  // area / min-area bounding rectangle
    Polarity polarity = Polarity::Bright;
};

struct BlobThresholds {
    long min_area_px = 4;
    double min_compactness = 0.3;
    double min_rectangularity = 0.5;
    double intensity_quantile = 0.995;  // of |change| over all pixels
};

// Connected components (8-connectivity) of |change| above the intensity
// quantile, split by sign into bright/dark, then filtered by the three
// geometric criteria. Returns blobs sorted by area descending. An empty
// result is valid.
std::vector<Blob> detect_moving_objects(const Grid& change_map,
                                        const BlobThresholds& thresholds = {});

struct BlobPair {
    Blob bright;
    Blob dark;
    double distance_px = 0.0;
};

// Greedy nearest-neighbour matching of opposite-polarity blobs whose
// centroid separation is at most max_displacement_m. Each blob is used at
// most once; candidates are taken in ascending distance order.
std::vector<BlobPair> pair_blobs(const std::vector<Blob>& blobs,
                                 double max_displacement_m, double gsd_m_per_px);

// Farthest a vehicle doing 70 mph travels in the band time lag; the default
// pairing radius.
double default_max_displacement_m(double time_lag_s);

struct SpeedEstimate {
    std::optional<double> mean_speed_kmh;  // absent when no pairs were formed
    std::size_t pair_count = 0;
    std::vector<double> pair_displacements_m;

    bool failed() const { return !mean_speed_kmh.has_value(); }
};

// Per-pair speed = centroid distance * gsd / time_lag_s; the estimate is the
// mean over pairs. Zero pairs yields a failed estimate, never a zero speed.
SpeedEstimate estimate_speed(const std::vector<BlobPair>& pairs, double gsd_m_per_px,
                             double time_lag_s);

// Convex-hull minimum-area enclosing rectangle of a set of points.
// Exposed for tests; blob rectangularity is computed against pixel corners.
double min_bounding_rect_area(const std::vector<std::pair<double, double>>& points);

}  // namespace satemis::speed
