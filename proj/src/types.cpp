#include "satemis/types.hpp"

#include "satemis/errors.hpp"

#include <algorithm>
#include <cctype>

namespace satemis {
namespace {

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

}  // namespace

Direction parse_direction(const std::string& text) {
    if (text == "A" || text == "a") return Direction::A;
    if (text == "B" || text == "b") return Direction::B;
    throw ValidationError("unknown direction '" + text + "' (expected A or B)");
}

std::string to_string(Direction d) {
    return d == Direction::A ? "A" : "B";
}

RoadType parse_road_type(const std::string& text) {
    const std::string t = lower(text);
    if (t == "motorways") return RoadType::Motorways;
    if (t == "a-roads" || t == "a roads") return RoadType::ARoads;
    if (t == "minor roads" || t == "minor-roads") return RoadType::MinorRoads;
    throw ValidationError("unknown road type '" + text +
                          "' (expected Motorways, A-Roads or Minor Roads)");
}

std::string to_string(RoadType r) {
    switch (r) {
        case RoadType::Motorways: return "Motorways";
        case RoadType::ARoads: return "A-Roads";
        case RoadType::MinorRoads: return "Minor Roads";
    }
    return "?";
}

VehicleType parse_vehicle_type(const std::string& text) {
    const std::string t = lower(text);
    if (t == "cars_taxis") return VehicleType::CarsTaxis;
    if (t == "lgv") return VehicleType::LGV;
    if (t == "hgv") return VehicleType::HGV;
    if (t == "buses_coaches") return VehicleType::BusesCoaches;
    throw ValidationError("unknown vehicle type '" + text +
                          "' (expected cars_taxis, lgv, hgv or buses_coaches)");
}

std::string to_string(VehicleType v) {
    switch (v) {
        case VehicleType::CarsTaxis: return "cars_taxis";
        case VehicleType::LGV: return "lgv";
        case VehicleType::HGV: return "hgv";
        case VehicleType::BusesCoaches: return "buses_coaches";
    }
    return "?";
}

Fuel parse_fuel(const std::string& text) {
    const std::string t = lower(text);
    if (t == "petrol") return Fuel::Petrol;
    if (t == "diesel") return Fuel::Diesel;
    throw ValidationError("unknown fuel '" + text + "' (expected petrol or diesel)");
}

std::string to_string(Fuel f) {
    return f == Fuel::Petrol ? "petrol" : "diesel";
}

std::string to_string(LengthClass c) {
    switch (c) {
        case LengthClass::Small: return "small";
        case LengthClass::Medium: return "medium";
        case LengthClass::Large: return "large";
        case LengthClass::VeryLarge: return "very_large";
    }
    return "?";
}

double& AADTVector::operator[](VehicleType v) {
    switch (v) {
        case VehicleType::CarsTaxis: return cars_taxis;
        case VehicleType::LGV: return lgv;
        case VehicleType::HGV: return hgv;
        case VehicleType::BusesCoaches: break;
    }
    return buses_coaches;
}

double AADTVector::operator[](VehicleType v) const {
    switch (v) {
        case VehicleType::CarsTaxis: return cars_taxis;
        case VehicleType::LGV: return lgv;
        case VehicleType::HGV: return hgv;
        case VehicleType::BusesCoaches: break;
    }
    return buses_coaches;
}

bool CountRecord::has_missing() const {
    for (const auto& c : counts) {
        if (!c.has_value()) return true;
    }
    return !total.has_value() || !mean_speed_kmh.has_value();
}

double EmissionsFactors::fuel_mix_residual() const {
    double share = 0.0;
    for (const auto& [fuel, frac] : fuel_mix) {
        share += frac.value;
    }
    return 1.0 - share;
}

}  // namespace satemis
