#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "satemis/types.hpp"

namespace satemis::emissions {

// Annual GHG emissions per vehicle type for one LA and road type, with the
// intermediate quantities kept for audit.
struct EmissionsReport {
    std::string la_name;
    RoadType road_type = RoadType::Motorways;
    std::map<VehicleType, double> per_type_kgco2e;
    double total_kgco2e = 0.0;
    std::map<VehicleType, double> vkt_per_type;                     // km/year
    std::map<std::pair<VehicleType, Fuel>, double> litres_per_type_fuel;  // litres/year
    std::map<std::pair<VehicleType, Fuel>, double> kgco2e_per_type_fuel;
    double zero_emission_share = 0.0;  // fuel-mix residual, contributes nothing
    std::vector<std::string> assumptions;
};

// Per type: VKT = AADT * road length * 365. Cars and LGVs split across the
// fuel mix (litres = mix * VKT / km-per-litre per fuel); HGVs and buses burn
// diesel at a single consumption figure. A missing buses consumption entry
// falls back to the HGV figure and is flagged as an assumption. Missing
// factor entries raise an error naming the key.
EmissionsReport compute_emissions(const AADTVector& aadt,
                                  const EmissionsFactors& factors,
                                  const std::string& la_name, RoadType road_type);

// Detector taxonomy -> UK vehicle category. Labels are matched
// case-insensitively with collapsed whitespace; anything outside the mapping
// raises an error listing the valid labels.
VehicleType map_xview_to_uk(const std::string& label);
std::optional<VehicleType> try_map_xview_to_uk(const std::string& label);
const std::vector<std::string>& xview_labels();

struct ApportionResult {
    AADTVector aadt;
    std::size_t unmappable_detections = 0;  // excluded from the shares
};

// Fallback when per-type AADT is unavailable: split a single AADT total
// across vehicle types in proportion to the detected class mix.
ApportionResult apportion_aadt(double total_aadt,
                               const std::vector<Detection>& detections);

// Delimited rows: la,road_type,vehicle_type,fuel,vkt_km,litres,kgco2e.
void write_emissions_csv(const std::filesystem::path& path,
                         const EmissionsReport& report);
// Human-readable table with totals and any assumptions noted.
void write_emissions_text(const std::filesystem::path& path,
                          const EmissionsReport& report);

}  // namespace satemis::emissions
