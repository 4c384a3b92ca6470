#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "satemis/datetime.hpp"

namespace satemis {

// Directions of travel at a count site. Each direction is an independent
// pipeline run; results merge only when directional predictions are averaged.
enum class Direction { A, B };

Direction parse_direction(const std::string& text);
std::string to_string(Direction d);

enum class RoadType { Motorways, ARoads, MinorRoads };

RoadType parse_road_type(const std::string& text);
std::string to_string(RoadType r);

// Vehicle categories used by the UK count and licensing datasets.
enum class VehicleType { CarsTaxis, LGV, HGV, BusesCoaches };

inline constexpr std::array<VehicleType, 4> kVehicleTypes = {
    VehicleType::CarsTaxis, VehicleType::LGV, VehicleType::HGV,
    VehicleType::BusesCoaches};

VehicleType parse_vehicle_type(const std::string& text);
std::string to_string(VehicleType v);

enum class Fuel { Petrol, Diesel };

Fuel parse_fuel(const std::string& text);
std::string to_string(Fuel f);

// Length buckets of the UK count dataset, in cm of vehicle length:
// Small 0-520, Medium 521-660, Large 661-1160, VeryLarge > 1160.
enum class LengthClass { Small, Medium, Large, VeryLarge };

inline constexpr std::array<LengthClass, 4> kLengthClasses = {
    LengthClass::Small, LengthClass::Medium, LengthClass::Large,
    LengthClass::VeryLarge};

std::string to_string(LengthClass c);

// Annual average daily traffic split into the four vehicle types,
// vehicles/day per component.
struct AADTVector {
    double cars_taxis = 0.0;
    double lgv = 0.0;
    double hgv = 0.0;
    double buses_coaches = 0.0;

    double& operator[](VehicleType v);
    double operator[](VehicleType v) const;
    double total() const { return cars_taxis + lgv + hgv + buses_coaches; }

    bool operator==(const AADTVector&) const = default;
};

// One detected road vehicle: pixel bounding box plus the detector's class
// label. gsd converts pixel extents to metres.
struct Detection {
    double x_min = 0.0;
    double x_max = 0.0;
    double y_min = 0.0;
    double y_max = 0.0;
    std::string source_class;
    double confidence = 0.0;      // [0, 1]
    double gsd_m_per_px = 0.0;    // > 0
};

// Acquisition metadata shared by all detections from one image.
struct ImageMeta {
    DateTime acquisition_timestamp;
    std::string site_id;
    std::string la_name;
    Direction direction = Direction::A;
    double segment_length_km = 0.0;  // masked road segment covered, > 0
    double gsd_m_per_px = 0.0;
    double band_time_lag_s = 0.26;   // MS1/MS2 exposure gap
};

// One 15-minute observation at a count site. Missing cells stay absent;
// nothing is imputed at ingest.
struct CountRecord {
    DateTime timestamp;  // minute in {0, 15, 30, 45}
    std::string site_id;
    Direction direction = Direction::A;
    std::array<std::optional<long>, 4> counts;  // indexed by LengthClass
    std::optional<long> total;
    std::optional<double> mean_speed_kmh;

    bool has_missing() const;
};

// Published factor tables feeding the emissions calculation. Every value
// carries the vintage of its source table; vintages are stored, not
// reconciled.
struct FactorValue {
    double value = 0.0;
    std::string vintage;
};

struct EmissionsFactors {
    std::map<std::pair<std::string, RoadType>, FactorValue> road_length_km;
    std::map<Fuel, FactorValue> conversion_kgco2e_per_litre;
    std::map<std::pair<VehicleType, Fuel>, FactorValue> fuel_km_per_litre;
    std::map<Fuel, FactorValue> fuel_mix;  // fractions, sum <= 1; residual is zero-emission

    double fuel_mix_residual() const;
};

// Per-direction AADT ground truth at one count site, used both to derive
// training targets and as evaluation truth.
struct SiteAadt {
    std::string la_name;
    RoadType road_type = RoadType::Motorways;
    std::string site_id;
    Direction direction = Direction::A;
    AADTVector aadt;
};

}  // namespace satemis
