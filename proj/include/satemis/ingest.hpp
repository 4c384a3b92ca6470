#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "satemis/types.hpp"

namespace satemis::ingest {

struct DetectionsFile {
    ImageMeta meta;
    std::vector<Detection> detections;
};

// Detections document: top-level "meta" object and "detections" array of
// {bbox: [x_min, x_max, y_min, y_max], class, confidence}. Every record is
// checked against the bbox/confidence invariants; errors name the offending
// record and invariant.
DetectionsFile parse_detections(const std::filesystem::path& path);
void write_detections(const std::filesystem::path& path, const DetectionsFile& file);

std::vector<Detection> filter_by_confidence(const std::vector<Detection>& detections,
                                            double min_confidence);

// Count history: comma-delimited with header
//   timestamp,site_id,direction,small,medium,large,very_large,total,mean_speed_kmh
// An empty cell marks a missing value; rows with missing cells are kept and
// flagged, never dropped or imputed. Records come back sorted by timestamp.
std::vector<CountRecord> parse_count_history(const std::filesystem::path& path);
void write_count_history(const std::filesystem::path& path,
                         const std::vector<CountRecord>& records);

struct SiteValidationReport {
    std::size_t record_count = 0;
    std::size_t missing_count = 0;
    double missing_fraction = 0.0;
    bool usable = false;  // missing_fraction <= 0.10
};

// A site is unusable when more than 10% of its records carry missing values.
SiteValidationReport validate_site(const std::vector<CountRecord>& records);

// Factor file: comma-delimited with header table,key,subkey,value,vintage.
// Tables: road_length_km (key = LA, subkey = road type),
// conversion_kgco2e_per_litre (key = fuel), fuel_km_per_litre (key = vehicle
// type, subkey = fuel), fuel_mix (key = fuel). All values must be positive;
// fuel_mix fractions must sum to <= 1 (residual is the zero-emission share).
EmissionsFactors parse_factors(const std::filesystem::path& path);
void write_factors(const std::filesystem::path& path, const EmissionsFactors& factors);

// Site AADT table: comma-delimited with header
//   la,road_type,site_id,direction,cars_taxis,lgv,hgv,buses_coaches
std::vector<SiteAadt> parse_site_aadt(const std::filesystem::path& path);
void write_site_aadt(const std::filesystem::path& path,
                     const std::vector<SiteAadt>& rows);

}  // namespace satemis::ingest
