#include "satemis/ingest.hpp"

#include "satemis/errors.hpp"
#include "satemis/metrics.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace satemis::ingest {
namespace {

using nlohmann::json;

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ValidationError("cannot open " + path.string());
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

double require_number(const json& obj, const std::string& key, const std::string& ctx) {
    if (!obj.contains(key)) {
        throw ValidationError(ctx + ": missing field '" + key + "'");
    }
    if (!obj[key].is_number()) {
        throw ValidationError(ctx + ": field '" + key + "' must be a number");
    }
    return obj[key].get<double>();
}

std::string require_string(const json& obj, const std::string& key,
                           const std::string& ctx) {
    if (!obj.contains(key) || !obj[key].is_string()) {
        throw ValidationError(ctx + ": missing field '" + key + "'");
    }
    return obj[key].get<std::string>();
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    for (char c : line) {
        if (c == ',') {
            cells.push_back(cell);
            cell.clear();
        } else if (c != '\r') {
            cell += c;
        }
    }
    cells.push_back(cell);
    return cells;
}

double parse_double_cell(const std::string& cell, std::size_t line_no,
                         const std::string& what) {
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
    if (ec != std::errc{} || ptr != cell.data() + cell.size()) {
        throw ValidationError("line " + std::to_string(line_no) + ": bad " + what +
                              " '" + cell + "'");
    }
    return value;
}

long parse_count_cell(const std::string& cell, std::size_t line_no,
                      const std::string& what) {
    long value = 0;
    auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
    if (ec != std::errc{} || ptr != cell.data() + cell.size()) {
        throw ValidationError("line " + std::to_string(line_no) + ": bad " + what +
                              " '" + cell + "'");
    }
    if (value < 0) {
        throw ValidationError("line " + std::to_string(line_no) + ": " + what +
                              " must be non-negative");
    }
    return value;
}

constexpr const char* kCountHeader =
    "timestamp,site_id,direction,small,medium,large,very_large,total,mean_speed_kmh";

}  // namespace

DetectionsFile parse_detections(const std::filesystem::path& path) {
    json doc;
    try {
        doc = json::parse(read_file(path));
    } catch (const json::parse_error& e) {
        throw ValidationError(path.string() + ": " + e.what());
    }
    if (!doc.is_object() || !doc.contains("meta") || !doc.contains("detections")) {
        throw ValidationError(path.string() +
                              ": expected top-level 'meta' and 'detections'");
    }

    DetectionsFile out;
    const json& meta = doc["meta"];
    out.meta.site_id = require_string(meta, "site_id", "meta");
    out.meta.la_name = require_string(meta, "la_name", "meta");
    out.meta.direction = parse_direction(require_string(meta, "direction", "meta"));
    out.meta.acquisition_timestamp =
        parse_datetime(require_string(meta, "acquisition_timestamp", "meta"));
    out.meta.segment_length_km = require_number(meta, "segment_length_km", "meta");
    out.meta.gsd_m_per_px = require_number(meta, "gsd_m_per_px", "meta");
    out.meta.band_time_lag_s =
        meta.contains("band_time_lag_s") ? require_number(meta, "band_time_lag_s", "meta")
                                         : 0.26;
    if (out.meta.segment_length_km <= 0.0) {
        throw ValidationError("meta: segment_length_km must be > 0");
    }
    if (out.meta.gsd_m_per_px <= 0.0) {
        throw ValidationError("meta: gsd_m_per_px must be > 0");
    }
    if (out.meta.band_time_lag_s <= 0.0) {
        throw ValidationError("meta: band_time_lag_s must be > 0");
    }

    const json& dets = doc["detections"];
    if (!dets.is_array()) {
        throw ValidationError("detections must be an array");
    }
    std::size_t index = 0;
    for (const auto& rec : dets) {
        const std::string ctx = "detections[" + std::to_string(index) + "]";
        if (!rec.contains("bbox") || !rec["bbox"].is_array() || rec["bbox"].size() != 4) {
            throw ValidationError(ctx + ": bbox must be [x_min, x_max, y_min, y_max]");
        }
        for (const auto& v : rec["bbox"]) {
            if (!v.is_number()) {
                throw ValidationError(ctx + ": bbox values must be numbers");
            }
        }
        Detection d;
        d.x_min = rec["bbox"][0].get<double>();
        d.x_max = rec["bbox"][1].get<double>();
        d.y_min = rec["bbox"][2].get<double>();
        d.y_max = rec["bbox"][3].get<double>();
        d.source_class = require_string(rec, "class", ctx);
        d.confidence = require_number(rec, "confidence", ctx);
        d.gsd_m_per_px = out.meta.gsd_m_per_px;
        if (!(d.x_min < d.x_max)) {
            throw ValidationError(ctx + ": invariant violated: x_min < x_max");
        }
        if (!(d.y_min < d.y_max)) {
            throw ValidationError(ctx + ": invariant violated: y_min < y_max");
        }
        if (d.confidence < 0.0 || d.confidence > 1.0) {
            throw ValidationError(ctx + ": invariant violated: 0 <= confidence <= 1");
        }
        out.detections.push_back(std::move(d));
        ++index;
    }
    return out;
}

void write_detections(const std::filesystem::path& path, const DetectionsFile& file) {
    json doc;
    doc["meta"] = {
        {"site_id", file.meta.site_id},
        {"la_name", file.meta.la_name},
        {"direction", to_string(file.meta.direction)},
        {"acquisition_timestamp", format_datetime(file.meta.acquisition_timestamp)},
        {"segment_length_km", file.meta.segment_length_km},
        {"gsd_m_per_px", file.meta.gsd_m_per_px},
        {"band_time_lag_s", file.meta.band_time_lag_s},
    };
    doc["detections"] = json::array();
    for (const auto& d : file.detections) {
        doc["detections"].push_back({
            {"bbox", {d.x_min, d.x_max, d.y_min, d.y_max}},
            {"class", d.source_class},
            {"confidence", d.confidence},
        });
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw ValidationError("cannot write " + path.string());
    }
    out << doc.dump(2) << '\n';
}

std::vector<Detection> filter_by_confidence(const std::vector<Detection>& detections,
                                            double min_confidence) {
    std::vector<Detection> kept;
    for (const auto& d : detections) {
        if (d.confidence >= min_confidence) {
            kept.push_back(d);
        }
    }
    return kept;
}

std::vector<CountRecord> parse_count_history(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ValidationError("cannot open " + path.string());
    }
    std::string line;
    if (!std::getline(in, line)) {
        throw ValidationError(path.string() + ": empty file");
    }
    if (split_csv(line) != split_csv(kCountHeader)) {
        throw ValidationError(path.string() + ": unexpected header '" + line + "'");
    }

    std::vector<CountRecord> records;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") {
            continue;
        }
        const auto cells = split_csv(line);
        if (cells.size() != 9) {
            throw ValidationError("line " + std::to_string(line_no) + ": expected 9 cells, got " +
                                  std::to_string(cells.size()));
        }
        CountRecord rec;
        rec.timestamp = parse_datetime(cells[0]);
        if (rec.timestamp.minute % 15 != 0 || rec.timestamp.second != 0) {
            throw ValidationError("line " + std::to_string(line_no) +
                                  ": timestamp not on a 15-minute boundary");
        }
        rec.site_id = cells[1];
        rec.direction = parse_direction(cells[2]);
        for (std::size_t i = 0; i < 4; ++i) {
            if (!cells[3 + i].empty()) {
                rec.counts[i] = parse_count_cell(cells[3 + i], line_no,
                                                 to_string(kLengthClasses[i]) + " count");
            }
        }
        if (!cells[7].empty()) {
            rec.total = parse_count_cell(cells[7], line_no, "total");
        }
        if (!cells[8].empty()) {
            const double speed = parse_double_cell(cells[8], line_no, "mean_speed_kmh");
            if (speed < 0.0) {
                throw ValidationError("line " + std::to_string(line_no) +
                                      ": mean_speed_kmh must be >= 0");
            }
            rec.mean_speed_kmh = speed;
        }

        // Count/total consistency is checkable only when all five cells are present.
        bool all_counts = rec.total.has_value();
        long sum = 0;
        for (const auto& c : rec.counts) {
            if (!c.has_value()) {
                all_counts = false;
                break;
            }
            sum += *c;
        }
        if (all_counts && sum != *rec.total) {
            throw ValidationError("line " + std::to_string(line_no) + ": counts sum to " +
                                  std::to_string(sum) + " but total is " +
                                  std::to_string(*rec.total));
        }
        records.push_back(std::move(rec));
    }

    std::stable_sort(records.begin(), records.end(),
                     [](const CountRecord& a, const CountRecord& b) {
                         return a.timestamp < b.timestamp;
                     });
    return records;
}

void write_count_history(const std::filesystem::path& path,
                         const std::vector<CountRecord>& records) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw ValidationError("cannot write " + path.string());
    }
    out << kCountHeader << '\n';
    for (const auto& rec : records) {
        out << format_datetime(rec.timestamp) << ',' << rec.site_id << ','
            << to_string(rec.direction);
        for (const auto& c : rec.counts) {
            out << ',';
            if (c.has_value()) out << *c;
        }
        out << ',';
        if (rec.total.has_value()) out << *rec.total;
        out << ',';
        if (rec.mean_speed_kmh.has_value()) out << metrics::format_value(*rec.mean_speed_kmh);
        out << '\n';
    }
}

SiteValidationReport validate_site(const std::vector<CountRecord>& records) {
    if (records.empty()) {
        throw ValidationError("validate_site: no records");
    }
    SiteValidationReport report;
    report.record_count = records.size();
    for (const auto& rec : records) {
        if (rec.has_missing()) {
            ++report.missing_count;
        }
    }
    report.missing_fraction = static_cast<double>(report.missing_count) /
                              static_cast<double>(report.record_count);
    report.usable = report.missing_fraction <= 0.10;
    return report;
}

EmissionsFactors parse_factors(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ValidationError("cannot open " + path.string());
    }
    std::string line;
    if (!std::getline(in, line) || split_csv(line) != split_csv("table,key,subkey,value,vintage")) {
        throw ValidationError(path.string() + ": expected header table,key,subkey,value,vintage");
    }

    EmissionsFactors factors;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r" || line[0] == '#') {
            continue;
        }
        const auto cells = split_csv(line);
        if (cells.size() != 5) {
            throw ValidationError("line " + std::to_string(line_no) + ": expected 5 cells");
        }
        const std::string& table = cells[0];
        const std::string& key = cells[1];
        const std::string& subkey = cells[2];
        const double value = parse_double_cell(cells[3], line_no, "value");
        if (value <= 0.0) {
            throw ValidationError("line " + std::to_string(line_no) + ": factor '" + table +
                                  "/" + key + "' must be positive");
        }
        const FactorValue fv{value, cells[4]};

        if (table == "road_length_km") {
            factors.road_length_km[{key, parse_road_type(subkey)}] = fv;
        } else if (table == "conversion_kgco2e_per_litre") {
            factors.conversion_kgco2e_per_litre[parse_fuel(key)] = fv;
        } else if (table == "fuel_km_per_litre") {
            factors.fuel_km_per_litre[{parse_vehicle_type(key), parse_fuel(subkey)}] = fv;
        } else if (table == "fuel_mix") {
            factors.fuel_mix[parse_fuel(key)] = fv;
        } else {
            throw ValidationError("line " + std::to_string(line_no) + ": unknown table '" +
                                  table + "'");
        }
    }

    double mix_sum = 0.0;
    for (const auto& [fuel, frac] : factors.fuel_mix) {
        mix_sum += frac.value;
    }
    if (mix_sum > 1.0 + 1e-9) {
        throw ValidationError("fuel_mix fractions sum to " + std::to_string(mix_sum) +
                              ", must be <= 1");
    }
    return factors;
}

void write_factors(const std::filesystem::path& path, const EmissionsFactors& factors) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw ValidationError("cannot write " + path.string());
    }
    out << "table,key,subkey,value,vintage\n";
    for (const auto& [key, fv] : factors.road_length_km) {
        out << "road_length_km," << key.first << ',' << to_string(key.second) << ','
            << metrics::format_value(fv.value) << ',' << fv.vintage << '\n';
    }
    for (const auto& [fuel, fv] : factors.conversion_kgco2e_per_litre) {
        out << "conversion_kgco2e_per_litre," << to_string(fuel) << ",,"
            << metrics::format_value(fv.value) << ',' << fv.vintage << '\n';
    }
    for (const auto& [key, fv] : factors.fuel_km_per_litre) {
        out << "fuel_km_per_litre," << to_string(key.first) << ',' << to_string(key.second)
            << ',' << metrics::format_value(fv.value) << ',' << fv.vintage << '\n';
    }
    for (const auto& [fuel, fv] : factors.fuel_mix) {
        out << "fuel_mix," << to_string(fuel) << ",," << metrics::format_value(fv.value)
            << ',' << fv.vintage << '\n';
    }
}

std::vector<SiteAadt> parse_site_aadt(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ValidationError("cannot open " + path.string());
    }
    std::string line;
    constexpr const char* kHeader =
        "la,road_type,site_id,direction,cars_taxis,lgv,hgv,buses_coaches";
    if (!std::getline(in, line) || split_csv(line) != split_csv(kHeader)) {
        throw ValidationError(path.string() + ": expected header " + kHeader);
    }
    std::vector<SiteAadt> rows;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") {
            continue;
        }
        const auto cells = split_csv(line);
        if (cells.size() != 8) {
            throw ValidationError("line " + std::to_string(line_no) + ": expected 8 cells");
        }
        SiteAadt row;
        row.la_name = cells[0];
        row.road_type = parse_road_type(cells[1]);
        row.site_id = cells[2];
        row.direction = parse_direction(cells[3]);
        for (std::size_t i = 0; i < 4; ++i) {
            const double v = parse_double_cell(cells[4 + i], line_no,
                                               to_string(kVehicleTypes[i]) + " aadt");
            if (v < 0.0) {
                throw ValidationError("line " + std::to_string(line_no) +
                                      ": aadt must be >= 0");
            }
            row.aadt[kVehicleTypes[i]] = v;
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

void write_site_aadt(const std::filesystem::path& path,
                     const std::vector<SiteAadt>& rows) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw ValidationError("cannot write " + path.string());
    }
    out << "la,road_type,site_id,direction,cars_taxis,lgv,hgv,buses_coaches\n";
    for (const auto& row : rows) {
        out << row.la_name << ',' << to_string(row.road_type) << ',' << row.site_id << ','
            << to_string(row.direction);
        for (const auto vt : kVehicleTypes) {
            out << ',' << metrics::format_value(row.aadt[vt]);
        }
        out << '\n';
    }
}

}  // namespace satemis::ingest
