#include "satemis/speed_estimation.hpp"

#include "satemis/errors.hpp"
#include "satemis/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <limits>
#include <map>
#include <string>

namespace satemis::speed {
namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kSeventyMphMps = 31.2928;  // 70 * 0.44704

void write_u32(std::ofstream& out, std::uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v & 0xFF),
                          static_cast<unsigned char>((v >> 8) & 0xFF),
                          static_cast<unsigned char>((v >> 16) & 0xFF),
                          static_cast<unsigned char>((v >> 24) & 0xFF)};
    out.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t read_u32(std::ifstream& in, const std::string& what) {
    unsigned char b[4];
    if (!in.read(reinterpret_cast<char*>(b), 4)) {
        throw ValidationError("raster: truncated " + what);
    }
    return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) |
           (static_cast<std::uint32_t>(b[3]) << 24);
}

void write_band(std::ofstream& out, const Grid& band) {
    for (const double v : band.values) {
        const float f = static_cast<float>(v);
        std::uint32_t bits;
        std::memcpy(&bits, &f, 4);
        write_u32(out, bits);
    }
}

Grid read_band(std::ifstream& in, std::size_t rows, std::size_t cols) {
    Grid band = Grid::zeros(rows, cols);
    for (auto& v : band.values) {
        const std::uint32_t bits = read_u32(in, "band data");
        float f;
        std::memcpy(&f, &bits, 4);
        v = static_cast<double>(f);
    }
    return band;
}

std::map<std::string, double> read_sidecar(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ValidationError("cannot open raster sidecar " + path.string());
    }
    std::map<std::string, double> values;
    std::string line;
    while (std::getline(in, line)) {
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            continue;
        }
        values[line.substr(0, eq)] = std::stod(line.substr(eq + 1));
    }
    return values;
}

struct Component {
    std::vector<std::pair<std::size_t, std::size_t>> pixels;  // (row, col)
};

// 8-connected components over mask (non-zero entries).
std::vector<Component> connected_components(const std::vector<char>& mask,
                                            std::size_t rows, std::size_t cols) {
    std::vector<Component> comps;
    std::vector<char> seen(mask.size(), 0);
    std::vector<std::size_t> stack;
    for (std::size_t start = 0; start < mask.size(); ++start) {
        if (!mask[start] || seen[start]) {
            continue;
        }
        Component comp;
        stack.push_back(start);
        seen[start] = 1;
        while (!stack.empty()) {
            const std::size_t idx = stack.back();
            stack.pop_back();
            const std::size_t r = idx / cols;
            const std::size_t c = idx % cols;
            comp.pixels.emplace_back(r, c);
            for (int dr = -1; dr <= 1; ++dr) {
                for (int dc = -1; dc <= 1; ++dc) {
                    if (dr == 0 && dc == 0) continue;
                    const std::int64_t nr = static_cast<std::int64_t>(r) + dr;
                    const std::int64_t nc = static_cast<std::int64_t>(c) + dc;
                    if (nr < 0 || nc < 0 || nr >= static_cast<std::int64_t>(rows) ||
                        nc >= static_cast<std::int64_t>(cols)) {
                        continue;
                    }
                    const std::size_t nidx =
                        static_cast<std::size_t>(nr) * cols + static_cast<std::size_t>(nc);
                    if (mask[nidx] && !seen[nidx]) {
                        seen[nidx] = 1;
                        stack.push_back(nidx);
                    }
                }
            }
        }
        comps.push_back(std::move(comp));
    }
    return comps;
}

// Exposed pixel edges against 4-neighbours outside the component.
long edge_perimeter(const Component& comp, const std::vector<char>& mask,
                    std::size_t rows, std::size_t cols) {
    long perimeter = 0;
    for (const auto& [r, c] : comp.pixels) {
        const auto outside = [&](std::int64_t nr, std::int64_t nc) {
            return nr < 0 || nc < 0 || nr >= static_cast<std::int64_t>(rows) ||
                   nc >= static_cast<std::int64_t>(cols) ||
                   !mask[static_cast<std::size_t>(nr) * cols + static_cast<std::size_t>(nc)];
        };
        const auto ri = static_cast<std::int64_t>(r);
        const auto ci = static_cast<std::int64_t>(c);
        perimeter += outside(ri - 1, ci) + outside(ri + 1, ci) + outside(ri, ci - 1) +
                     outside(ri, ci + 1);
    }
    return perimeter;
}

Blob make_blob(const Component& comp, const std::vector<char>& mask, std::size_t rows,
               std::size_t cols, Polarity polarity) {
    Blob blob;
    blob.polarity = polarity;
    blob.area_px = static_cast<long>(comp.pixels.size());

    double sum_r = 0.0;
    double sum_c = 0.0;
    std::vector<std::pair<double, double>> corners;
    corners.reserve(comp.pixels.size() * 4);
    for (const auto& [r, c] : comp.pixels) {
        sum_r += static_cast<double>(r) + 0.5;
        sum_c += static_cast<double>(c) + 0.5;
        const double rd = static_cast<double>(r);
        const double cd = static_cast<double>(c);
        corners.emplace_back(rd, cd);
        corners.emplace_back(rd, cd + 1.0);
        corners.emplace_back(rd + 1.0, cd);
        corners.emplace_back(rd + 1.0, cd + 1.0);
    }
    blob.centroid_row = sum_r / static_cast<double>(comp.pixels.size()) - 0.5;
    blob.centroid_col = sum_c / static_cast<double>(comp.pixels.size()) - 0.5;

    const long perimeter = edge_perimeter(comp, mask, rows, cols);
    blob.compactness = 4.0 * kPi * static_cast<double>(blob.area_px) /
                       (static_cast<double>(perimeter) * static_cast<double>(perimeter));

    const double rect_area = min_bounding_rect_area(corners);
    blob.rectangularity = static_cast<double>(blob.area_px) / rect_area;
    return blob;
}

}  // namespace

DualBandRaster read_raster(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ValidationError("cannot open raster " + path.string());
    }
    char magic[4];
    if (!in.read(magic, 4) || std::memcmp(magic, "DBR1", 4) != 0) {
        throw ValidationError(path.string() + ": not a DBR1 raster");
    }
    const std::uint32_t rows = read_u32(in, "rows");
    const std::uint32_t cols = read_u32(in, "cols");
    const std::uint32_t bands = read_u32(in, "band count");
    if (bands != 2) {
        throw ValidationError(path.string() + ": expected 2 bands, got " +
                              std::to_string(bands));
    }
    if (rows == 0 || cols == 0) {
        throw ValidationError(path.string() + ": empty raster");
    }

    DualBandRaster raster;
    raster.band_a = read_band(in, rows, cols);
    raster.band_b = read_band(in, rows, cols);

    const auto meta = read_sidecar(path.string() + ".meta");
    if (!meta.contains("gsd_m_per_px") || !meta.contains("time_lag_s")) {
        throw ValidationError(path.string() + ".meta: needs gsd_m_per_px and time_lag_s");
    }
    raster.gsd_m_per_px = meta.at("gsd_m_per_px");
    raster.time_lag_s = meta.at("time_lag_s");
    if (raster.gsd_m_per_px <= 0.0 || raster.time_lag_s <= 0.0) {
        throw ValidationError(path.string() + ".meta: gsd and time lag must be > 0");
    }
    return raster;
}

void write_raster(const std::filesystem::path& path, const DualBandRaster& raster) {
    if (raster.band_a.rows != raster.band_b.rows ||
        raster.band_a.cols != raster.band_b.cols) {
        throw ValidationError("write_raster: band shapes differ");
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw ValidationError("cannot write " + path.string());
    }
    out.write("DBR1", 4);
    write_u32(out, static_cast<std::uint32_t>(raster.band_a.rows));
    write_u32(out, static_cast<std::uint32_t>(raster.band_a.cols));
    write_u32(out, 2);
    write_band(out, raster.band_a);
    write_band(out, raster.band_b);

    std::ofstream meta(path.string() + ".meta", std::ios::binary);
    if (!meta) {
        throw ValidationError("cannot write " + path.string() + ".meta");
    }
    meta << "gsd_m_per_px=" << metrics::format_value(raster.gsd_m_per_px) << '\n'
         << "time_lag_s=" << metrics::format_value(raster.time_lag_s) << '\n';
}

Grid build_change_image(const DualBandRaster& raster) {
    const Grid& a = raster.band_a;
    const Grid& b = raster.band_b;
    if (a.rows != b.rows || a.cols != b.cols) {
        throw ValidationError("change image: band shapes differ");
    }
    const std::size_t n = a.values.size();
    if (n < 2) {
        throw ValidationError("change image: need at least 2 pixels");
    }

    double mean_a = 0.0;
    double mean_b = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mean_a += a.values[i];
        mean_b += b.values[i];
    }
    mean_a /= static_cast<double>(n);
    mean_b /= static_cast<double>(n);

    double caa = 0.0, cab = 0.0, cbb = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double da = a.values[i] - mean_a;
        const double db = b.values[i] - mean_b;
        caa += da * da;
        cab += da * db;
        cbb += db * db;
    }
    caa /= static_cast<double>(n);
    cab /= static_cast<double>(n);
    cbb /= static_cast<double>(n);

    const double total_var = caa + cbb;
    if (total_var <= 0.0) {
        throw ValidationError("change image: constant-valued bands (zero variance)");
    }

    // Second (minor) eigenvector of the 2x2 band covariance.
    const double half_trace = 0.5 * (caa + cbb);
    const double disc = std::sqrt(std::max(0.0, half_trace * half_trace - (caa * cbb - cab * cab)));
    const double lambda2 = half_trace - disc;

    double ux, uy;
    if (std::abs(cab) < 1e-300 * total_var || cab == 0.0) {
        // Diagonal covariance: minor axis is the lower-variance band.
        ux = caa <= cbb ? 1.0 : 0.0;
        uy = caa <= cbb ? 0.0 : 1.0;
    } else {
        // (cab, lambda2 - caa) and (lambda2 - cbb, cab) are parallel; pick the
        // larger for stability.
        const double v1x = cab, v1y = lambda2 - caa;
        const double v2x = lambda2 - cbb, v2y = cab;
        if (v1x * v1x + v1y * v1y >= v2x * v2x + v2y * v2y) {
            ux = v1x;
            uy = v1y;
        } else {
            ux = v2x;
            uy = v2y;
        }
        const double norm = std::sqrt(ux * ux + uy * uy);
        ux /= norm;
        uy /= norm;
    }
    // Deterministic sign: first non-zero component positive.
    if (ux < 0.0 || (ux == 0.0 && uy < 0.0)) {
        ux = -ux;
        uy = -uy;
    }

    Grid change = Grid::zeros(a.rows, a.cols);
    for (std::size_t i = 0; i < n; ++i) {
        change.values[i] = ux * (a.values[i] - mean_a) + uy * (b.values[i] - mean_b);
    }
    return change;
}

std::vector<Blob> detect_moving_objects(const Grid& change_map,
                                        const BlobThresholds& thresholds) {
    const std::size_t n = change_map.values.size();
    if (n == 0) {
        return {};
    }
    for (const double v : change_map.values) {
        if (!std::isfinite(v)) {
            throw ValidationError("detect_moving_objects: change map has non-finite values");
        }
    }
    if (thresholds.intensity_quantile < 0.0 || thresholds.intensity_quantile > 1.0) {
        throw ValidationError("detect_moving_objects: intensity_quantile must be in [0, 1]");
    }

    // Nearest-rank quantile of |change|.
    std::vector<double> magnitudes(n);
    for (std::size_t i = 0; i < n; ++i) {
        magnitudes[i] = std::abs(change_map.values[i]);
    }
    std::sort(magnitudes.begin(), magnitudes.end());
    const double rank = thresholds.intensity_quantile * static_cast<double>(n);
    std::size_t idx = static_cast<std::size_t>(std::ceil(rank));
    idx = idx > 0 ? idx - 1 : 0;
    idx = std::min(idx, n - 1);
    const double threshold = magnitudes[idx];

    std::vector<Blob> blobs;
    for (const Polarity polarity : {Polarity::Bright, Polarity::Dark}) {
        std::vector<char> mask(n, 0);
        for (std::size_t i = 0; i < n; ++i) {
            const double v = change_map.values[i];
            const double signed_v = polarity == Polarity::Bright ? v : -v;
            mask[i] = signed_v > 0.0 && signed_v >= threshold;
        }
        for (const auto& comp :
             connected_components(mask, change_map.rows, change_map.cols)) {
            Blob blob = make_blob(comp, mask, change_map.rows, change_map.cols, polarity);
            if (blob.area_px >= thresholds.min_area_px &&
                blob.compactness >= thresholds.min_compactness &&
                blob.rectangularity >= thresholds.min_rectangularity) {
                blobs.push_back(blob);
            }
        }
    }

    std::sort(blobs.begin(), blobs.end(), [](const Blob& x, const Blob& y) {
        if (x.area_px != y.area_px) return x.area_px > y.area_px;
        if (x.centroid_row != y.centroid_row) return x.centroid_row < y.centroid_row;
        if (x.centroid_col != y.centroid_col) return x.centroid_col < y.centroid_col;
        return x.polarity == Polarity::Bright && y.polarity == Polarity::Dark;
    });
    return blobs;
}

double default_max_displacement_m(double time_lag_s) {
    return kSeventyMphMps * time_lag_s;
}

std::vector<BlobPair> pair_blobs(const std::vector<Blob>& blobs,
                                 double max_displacement_m, double gsd_m_per_px) {
    if (max_displacement_m <= 0.0) {
        throw ValidationError("pair_blobs: max_displacement_m must be > 0");
    }
    if (gsd_m_per_px <= 0.0) {
        throw ValidationError("pair_blobs: gsd must be > 0");
    }

    std::vector<std::size_t> bright_idx;
    std::vector<std::size_t> dark_idx;
    for (std::size_t i = 0; i < blobs.size(); ++i) {
        (blobs[i].polarity == Polarity::Bright ? bright_idx : dark_idx).push_back(i);
    }

    struct Candidate {
        double distance_px;
        std::size_t bright;
        std::size_t dark;
    };
    std::vector<Candidate> candidates;
    for (const std::size_t bi : bright_idx) {
        for (const std::size_t di : dark_idx) {
            const double dr = blobs[bi].centroid_row - blobs[di].centroid_row;
            const double dc = blobs[bi].centroid_col - blobs[di].centroid_col;
            const double dist = std::sqrt(dr * dr + dc * dc);
            if (dist * gsd_m_per_px <= max_displacement_m) {
                candidates.push_back({dist, bi, di});
            }
        }
    }
    std::sort(candidates.begin(), candidates.end(), [](const Candidate& x, const Candidate& y) {
        if (x.distance_px != y.distance_px) return x.distance_px < y.distance_px;
        if (x.bright != y.bright) return x.bright < y.bright;
        return x.dark < y.dark;
    });

    std::vector<char> used(blobs.size(), 0);
    std::vector<BlobPair> pairs;
    for (const auto& cand : candidates) {
        if (used[cand.bright] || used[cand.dark]) {
            continue;
        }
        used[cand.bright] = 1;
        used[cand.dark] = 1;
        pairs.push_back({blobs[cand.bright], blobs[cand.dark], cand.distance_px});
    }
    return pairs;
}

SpeedEstimate estimate_speed(const std::vector<BlobPair>& pairs, double gsd_m_per_px,
                             double time_lag_s) {
    if (time_lag_s <= 0.0) {
        throw ValidationError("estimate_speed: time_lag_s must be > 0");
    }
    SpeedEstimate est;
    est.pair_count = pairs.size();
    if (pairs.empty()) {
        return est;  // failed: no speed available
    }
    double sum_kmh = 0.0;
    for (const auto& pair : pairs) {
        const double displacement_m = pair.distance_px * gsd_m_per_px;
        est.pair_displacements_m.push_back(displacement_m);
        sum_kmh += displacement_m / time_lag_s * 3.6;
    }
    est.mean_speed_kmh = sum_kmh / static_cast<double>(pairs.size());
    return est;
}

double min_bounding_rect_area(const std::vector<std::pair<double, double>>& points) {
    if (points.empty()) {
        throw ValidationError("min_bounding_rect_area: no points");
    }

    // Monotone-chain convex hull.
    std::vector<std::pair<double, double>> pts = points;
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    const auto cross = [](const std::pair<double, double>& o,
                          const std::pair<double, double>& a,
                          const std::pair<double, double>& b) {
        return (a.first - o.first) * (b.second - o.second) -
               (a.second - o.second) * (b.first - o.first);
    };
    std::vector<std::pair<double, double>> hull;
    if (pts.size() < 3) {
        hull = pts;
    } else {
        hull.resize(2 * pts.size());
        std::size_t k = 0;
        for (std::size_t i = 0; i < pts.size(); ++i) {
            while (k >= 2 && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0.0) --k;
            hull[k++] = pts[i];
        }
        const std::size_t lower = k + 1;
        for (std::size_t i = pts.size() - 1; i-- > 0;) {
            while (k >= lower && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0.0) --k;
            hull[k++] = pts[i];
        }
        hull.resize(k - 1);
    }

    if (hull.size() < 3) {
        return 0.0;  // degenerate: all points collinear
    }

    // Rotating calipers: the minimum-area rectangle shares a side with a
    // hull edge. O(h^2) projection scan; hulls here are tiny.
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < hull.size(); ++i) {
        const auto& p0 = hull[i];
        const auto& p1 = hull[(i + 1) % hull.size()];
        double ex = p1.first - p0.first;
        double ey = p1.second - p0.second;
        const double len = std::sqrt(ex * ex + ey * ey);
        if (len == 0.0) {
            continue;
        }
        ex /= len;
        ey /= len;
        double min_u = std::numeric_limits<double>::infinity(), max_u = -min_u;
        double min_v = min_u, max_v = -min_u;
        for (const auto& p : hull) {
            const double u = p.first * ex + p.second * ey;
            const double v = -p.first * ey + p.second * ex;
            min_u = std::min(min_u, u);
            max_u = std::max(max_u, u);
            min_v = std::min(min_v, v);
            max_v = std::max(max_v, v);
        }
        best = std::min(best, (max_u - min_u) * (max_v - min_v));
    }
    return best;
}

}  // namespace satemis::speed
