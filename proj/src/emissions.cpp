#include "satemis/emissions.hpp"

#include "satemis/errors.hpp"
#include "satemis/metrics.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace satemis::emissions {
namespace {

constexpr double kDaysPerYear = 365.0;

std::string normalize_label(const std::string& label) {
    std::string out;
    bool pending_space = false;
    for (const char ch : label) {
        if (std::isspace(static_cast<unsigned char>(ch))) {
            pending_space = !out.empty();
            continue;
        }
        if (pending_space) {
            out += ' ';
            pending_space = false;
        }
        out += static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    }
    return out;
}

const std::map<std::string, VehicleType>& label_map() {
    static const std::map<std::string, VehicleType> map = {
        {"passenger vehicle", VehicleType::CarsTaxis},
        {"small car", VehicleType::CarsTaxis},
        {"passenger car", VehicleType::CarsTaxis},
        {"pickup truck", VehicleType::LGV},
        {"utility truck", VehicleType::LGV},
        {"truck", VehicleType::LGV},
        {"trailer", VehicleType::LGV},
        {"truck w/ box", VehicleType::LGV},
        {"cargo car", VehicleType::LGV},
        {"cargo truck", VehicleType::HGV},
        {"truck tractor", VehicleType::HGV},
        {"truck w/ flatbed", VehicleType::HGV},
        {"truck w/liquid", VehicleType::HGV},
        {"bus", VehicleType::BusesCoaches},
    };
    return map;
}

double require_factor(const std::map<std::pair<VehicleType, Fuel>, FactorValue>& table,
                      VehicleType vt, Fuel fuel, const std::string& table_name) {
    const auto it = table.find({vt, fuel});
    if (it == table.end()) {
        throw ValidationError("missing factor " + table_name + "[" + to_string(vt) + "," +
                              to_string(fuel) + "]");
    }
    return it->second.value;
}

}  // namespace

const std::vector<std::string>& xview_labels() {
    static const std::vector<std::string> labels = [] {
        std::vector<std::string> out;
        for (const auto& [label, vt] : label_map()) {
            out.push_back(label);
        }
        return out;
    }();
    return labels;
}

std::optional<VehicleType> try_map_xview_to_uk(const std::string& label) {
    const auto it = label_map().find(normalize_label(label));
    if (it == label_map().end()) {
        return std::nullopt;
    }
    return it->second;
}

VehicleType map_xview_to_uk(const std::string& label) {
    if (const auto vt = try_map_xview_to_uk(label)) {
        return *vt;
    }
    std::string valid;
    for (const auto& l : xview_labels()) {
        valid += valid.empty() ? l : ", " + l;
    }
    throw ValidationError("unknown vehicle class '" + label + "'; valid labels: " + valid);
}

ApportionResult apportion_aadt(double total_aadt,
                               const std::vector<Detection>& detections) {
    if (total_aadt < 0.0) {
        throw ValidationError("apportion_aadt: total_aadt must be >= 0");
    }
    if (detections.empty()) {
        throw ValidationError("apportion_aadt: no detections");
    }
    ApportionResult result;
    std::array<long, 4> per_type{};
    long mappable = 0;
    for (const auto& d : detections) {
        if (const auto vt = try_map_xview_to_uk(d.source_class)) {
            per_type[static_cast<std::size_t>(*vt)] += 1;
            ++mappable;
        } else {
            ++result.unmappable_detections;
        }
    }
    if (mappable == 0) {
        throw ValidationError("apportion_aadt: no detection maps to a UK vehicle type");
    }
    for (const auto vt : kVehicleTypes) {
        result.aadt[vt] = total_aadt *
                          static_cast<double>(per_type[static_cast<std::size_t>(vt)]) /
                          static_cast<double>(mappable);
    }
    return result;
}

EmissionsReport compute_emissions(const AADTVector& aadt,
                                  const EmissionsFactors& factors,
                                  const std::string& la_name, RoadType road_type) {
    const auto length_it = factors.road_length_km.find({la_name, road_type});
    if (length_it == factors.road_length_km.end()) {
        throw ValidationError("missing factor road_length_km[" + la_name + "," +
                              to_string(road_type) + "]");
    }
    const double length_km = length_it->second.value;

    const auto conversion = [&](Fuel fuel) {
        const auto it = factors.conversion_kgco2e_per_litre.find(fuel);
        if (it == factors.conversion_kgco2e_per_litre.end()) {
            throw ValidationError("missing factor conversion_kgco2e_per_litre[" +
                                  to_string(fuel) + "]");
        }
        return it->second.value;
    };

    if (factors.fuel_mix.empty()) {
        throw ValidationError("missing factor fuel_mix");
    }

    EmissionsReport report;
    report.la_name = la_name;
    report.road_type = road_type;
    report.zero_emission_share = factors.fuel_mix_residual();

    for (const auto vt : kVehicleTypes) {
        const double vkt = aadt[vt] * length_km * kDaysPerYear;
        report.vkt_per_type[vt] = vkt;
        double kgco2e = 0.0;

        if (vt == VehicleType::CarsTaxis || vt == VehicleType::LGV) {
            for (const auto& [fuel, mix] : factors.fuel_mix) {
                const double km_per_litre =
                    require_factor(factors.fuel_km_per_litre, vt, fuel, "fuel_km_per_litre");
                const double litres = mix.value * vkt / km_per_litre;
                const double fuel_kgco2e = litres * conversion(fuel);
                report.litres_per_type_fuel[{vt, fuel}] = litres;
                report.kgco2e_per_type_fuel[{vt, fuel}] = fuel_kgco2e;
                kgco2e += fuel_kgco2e;
            }
        } else {
            // Single-consumption diesel fleet. Buses without their own figure
            // borrow the HGV one.
            double km_per_litre;
            const auto own = factors.fuel_km_per_litre.find({vt, Fuel::Diesel});
            if (own != factors.fuel_km_per_litre.end()) {
                km_per_litre = own->second.value;
            } else if (vt == VehicleType::BusesCoaches) {
                km_per_litre = require_factor(factors.fuel_km_per_litre, VehicleType::HGV,
                                              Fuel::Diesel, "fuel_km_per_litre");
                report.assumptions.push_back(
                    "buses_coaches consumption not provided; using the hgv km/litre figure");
            } else {
                km_per_litre = require_factor(factors.fuel_km_per_litre, vt, Fuel::Diesel,
                                              "fuel_km_per_litre");
            }
            const double litres = vkt / km_per_litre;
            kgco2e = litres * conversion(Fuel::Diesel);
            report.litres_per_type_fuel[{vt, Fuel::Diesel}] = litres;
            report.kgco2e_per_type_fuel[{vt, Fuel::Diesel}] = kgco2e;
        }

        report.per_type_kgco2e[vt] = kgco2e;
        report.total_kgco2e += kgco2e;
    }
    return report;
}

void write_emissions_csv(const std::filesystem::path& path,
                         const EmissionsReport& report) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw ValidationError("cannot write " + path.string());
    }
    out << "la,road_type,vehicle_type,fuel,vkt_km,litres,kgco2e\n";
    for (const auto& [key, litres] : report.litres_per_type_fuel) {
        const auto& [vt, fuel] = key;
        out << report.la_name << ',' << to_string(report.road_type) << ','
            << to_string(vt) << ',' << to_string(fuel) << ','
            << metrics::format_value(report.vkt_per_type.at(vt)) << ','
            << metrics::format_value(litres) << ','
            << metrics::format_value(report.kgco2e_per_type_fuel.at(key)) << '\n';
    }
}

void write_emissions_text(const std::filesystem::path& path,
                          const EmissionsReport& report) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw ValidationError("cannot write " + path.string());
    }
    out << "Annual GHG emissions - " << report.la_name << " ("
        << to_string(report.road_type) << ")\n\n";
    out << std::left << std::setw(16) << "vehicle type" << std::right << std::setw(22)
        << "vkt (km/yr)" << std::setw(22) << "kg CO2e/yr" << '\n';
    for (const auto vt : kVehicleTypes) {
        out << std::left << std::setw(16) << to_string(vt) << std::right << std::setw(22)
            << metrics::format_value(report.vkt_per_type.at(vt)) << std::setw(22)
            << metrics::format_value(report.per_type_kgco2e.at(vt)) << '\n';
    }
    out << std::left << std::setw(16) << "TOTAL" << std::right << std::setw(44)
        << metrics::format_value(report.total_kgco2e) << '\n';
    out << "\nzero-emission fuel-mix residual: "
        << metrics::format_value(report.zero_emission_share) << '\n';
    for (const auto& note : report.assumptions) {
        out << "assumption: " << note << '\n';
    }
}

}  // namespace satemis::emissions
