#include "satemis/emissions.hpp"

#include "satemis/errors.hpp"
#include "satemis/ingest.hpp"
#include "satemis/rng.hpp"
#include "test_util.hpp"

#include <cmath>

#include <doctest.h>

using namespace satemis;
using namespace satemis::emissions;

namespace {

EmissionsFactors uk_factors() {
    return ingest::parse_factors(SATEMIS_DATA_DIR "/uk_factors.csv");
}

Detection labelled(const std::string& source_class) {
    Detection d;
    d.x_min = 0.0;
    d.x_max = 10.0;
    d.y_min = 0.0;
    d.y_max = 4.0;
    d.source_class = source_class;
    d.confidence = 0.9;
    d.gsd_m_per_px = 0.5;
    return d;
}

}  // namespace

TEST_CASE("compute_emissions matches the hand-computed Luton case") {
    const auto factors = uk_factors();
    AADTVector aadt;
    aadt.cars_taxis = 10000.0;

    const auto report = compute_emissions(aadt, factors, "Luton", RoadType::Motorways);

    // VKT = 10000 * 4.18 * 365 = 15,257,000 km
    CHECK(report.vkt_per_type.at(VehicleType::CarsTaxis) ==
          doctest::Approx(15257000.0).epsilon(1e-12));
    // petrol: 0.59 * VKT / 20 = 450,081.5 l -> * 2.16 = 972,176.04 kg
    CHECK(report.litres_per_type_fuel.at({VehicleType::CarsTaxis, Fuel::Petrol}) ==
          doctest::Approx(450081.5).epsilon(1e-9));
    CHECK(report.kgco2e_per_type_fuel.at({VehicleType::CarsTaxis, Fuel::Petrol}) ==
          doctest::Approx(972176.04).epsilon(1e-9));
    // diesel: 0.40 * VKT / 23 = 265,339.1304... l -> * 2.56 = 679,268.1739... kg
    CHECK(report.litres_per_type_fuel.at({VehicleType::CarsTaxis, Fuel::Diesel}) ==
          doctest::Approx(265339.13043478262).epsilon(1e-9));
    CHECK(report.per_type_kgco2e.at(VehicleType::CarsTaxis) ==
          doctest::Approx(1651444.2139130435).epsilon(1e-9));
    CHECK(report.total_kgco2e ==
          doctest::Approx(1651444.2139130435).epsilon(1e-9));
    CHECK(report.zero_emission_share == doctest::Approx(0.01).epsilon(1e-9));
}

TEST_CASE("HGVs and buses burn diesel at a single consumption figure") {
    const auto factors = uk_factors();
    AADTVector aadt;
    aadt.hgv = 1000.0;
    aadt.buses_coaches = 100.0;

    const auto report = compute_emissions(aadt, factors, "Luton", RoadType::Motorways);

    // HGV: VKT = 1000 * 4.18 * 365 = 1,525,700; litres = VKT / 3.6; kg = * 2.56
    CHECK(report.litres_per_type_fuel.at({VehicleType::HGV, Fuel::Diesel}) ==
          doctest::Approx(1525700.0 / 3.6).epsilon(1e-12));
    CHECK(report.per_type_kgco2e.at(VehicleType::HGV) ==
          doctest::Approx(1525700.0 / 3.6 * 2.56).epsilon(1e-12));

    // Buses borrow the HGV figure and the assumption is flagged.
    CHECK(report.per_type_kgco2e.at(VehicleType::BusesCoaches) ==
          doctest::Approx(152570.0 / 3.6 * 2.56).epsilon(1e-12));
    REQUIRE(report.assumptions.size() == 1);
    CHECK(report.assumptions[0].find("hgv") != std::string::npos);
}

TEST_CASE("zero AADT gives a zero report; halving AADT halves everything") {
    const auto factors = uk_factors();

    const auto zero = compute_emissions(AADTVector{}, factors, "Trafford",
                                        RoadType::Motorways);
    CHECK(zero.total_kgco2e == 0.0);
    for (const auto vt : kVehicleTypes) {
        CHECK(zero.per_type_kgco2e.at(vt) == 0.0);
        CHECK(zero.vkt_per_type.at(vt) == 0.0);
    }

    const AADTVector aadt{24680.0, 4242.0, 5050.0, 808.0};
    AADTVector half = aadt;
    for (const auto vt : kVehicleTypes) {
        half[vt] /= 2.0;
    }
    const auto full_report =
        compute_emissions(aadt, factors, "Havering", RoadType::Motorways);
    const auto half_report =
        compute_emissions(half, factors, "Havering", RoadType::Motorways);
    for (const auto vt : kVehicleTypes) {
        CHECK(half_report.per_type_kgco2e.at(vt) ==
              doctest::Approx(full_report.per_type_kgco2e.at(vt) / 2.0).epsilon(1e-12));
    }
    CHECK(half_report.total_kgco2e ==
          doctest::Approx(full_report.total_kgco2e / 2.0).epsilon(1e-12));
}

TEST_CASE("emissions grow with road length") {
    const auto factors = uk_factors();
    const AADTVector aadt{10000.0, 2000.0, 3000.0, 500.0};
    // Luton 4.18 km < Trafford 9.98 km < Havering 19 km
    const double luton =
        compute_emissions(aadt, factors, "Luton", RoadType::Motorways).total_kgco2e;
    const double trafford =
        compute_emissions(aadt, factors, "Trafford", RoadType::Motorways).total_kgco2e;
    const double havering =
        compute_emissions(aadt, factors, "Havering", RoadType::Motorways).total_kgco2e;
    CHECK(luton < trafford);
    CHECK(trafford < havering);
}

TEST_CASE("missing factor entries name the key") {
    auto factors = uk_factors();
    factors.fuel_km_per_litre.erase({VehicleType::LGV, Fuel::Petrol});
    AADTVector aadt;
    aadt.lgv = 100.0;
    CHECK_THROWS_WITH_AS(
        compute_emissions(aadt, factors, "Luton", RoadType::Motorways),
        doctest::Contains("fuel_km_per_litre[lgv,petrol]"), ValidationError);

    const auto intact = uk_factors();
    CHECK_THROWS_WITH_AS(
        compute_emissions(aadt, intact, "Atlantis", RoadType::Motorways),
        doctest::Contains("road_length_km[Atlantis"), ValidationError);
    CHECK_THROWS_AS(compute_emissions(aadt, intact, "Luton", RoadType::ARoads),
                    ValidationError);

    auto no_mix = uk_factors();
    no_mix.fuel_mix.clear();
    CHECK_THROWS_WITH_AS(compute_emissions(aadt, no_mix, "Luton", RoadType::Motorways),
                         doctest::Contains("fuel_mix"), ValidationError);
}

TEST_CASE("per-type litres reproduce VKT times the mix-weighted consumption") {
    const auto factors = uk_factors();
    const AADTVector aadt{31245.0, 5120.0, 6444.0, 512.0};
    const auto report = compute_emissions(aadt, factors, "Blackburn", RoadType::Motorways);

    for (const auto vt : {VehicleType::CarsTaxis, VehicleType::LGV}) {
        double litres = 0.0;
        double expected = 0.0;
        for (const auto fuel : {Fuel::Petrol, Fuel::Diesel}) {
            litres += report.litres_per_type_fuel.at({vt, fuel});
            expected += factors.fuel_mix.at(fuel).value /
                        factors.fuel_km_per_litre.at({vt, fuel}).value;
        }
        expected *= report.vkt_per_type.at(vt);
        CHECK(std::abs(litres - expected) <= 1e-9 * std::max(1.0, std::abs(expected)));
    }
}

TEST_CASE("xView labels map per the class table") {
    CHECK(map_xview_to_uk("Bus") == VehicleType::BusesCoaches);
    CHECK(map_xview_to_uk("Pickup Truck") == VehicleType::LGV);
    CHECK(map_xview_to_uk("Cargo Truck") == VehicleType::HGV);
    CHECK(map_xview_to_uk("Passenger vehicle") == VehicleType::CarsTaxis);

    // Case-insensitive, whitespace-normalised matching.
    CHECK(map_xview_to_uk("PASSENGER VEHICLE") == VehicleType::CarsTaxis);
    CHECK(map_xview_to_uk("  truck   w/ box  ") == VehicleType::LGV);

    SUBCASE("every table label maps") {
        const std::vector<std::pair<std::string, VehicleType>> table = {
            {"Passenger vehicle", VehicleType::CarsTaxis},
            {"Small car", VehicleType::CarsTaxis},
            {"Passenger car", VehicleType::CarsTaxis},
            {"Pickup Truck", VehicleType::LGV},
            {"Utility Truck", VehicleType::LGV},
            {"Truck", VehicleType::LGV},
            {"Trailer", VehicleType::LGV},
            {"Truck w/ Box", VehicleType::LGV},
            {"Cargo car", VehicleType::LGV},
            {"Cargo Truck", VehicleType::HGV},
            {"Truck Tractor", VehicleType::HGV},
            {"Truck w/ Flatbed", VehicleType::HGV},
            {"Truck w/Liquid", VehicleType::HGV},
            {"Bus", VehicleType::BusesCoaches},
        };
        for (const auto& [label, expected] : table) {
            CHECK(map_xview_to_uk(label) == expected);
        }
    }

    SUBCASE("unknown labels error with the valid alternatives") {
        CHECK_THROWS_WITH_AS(map_xview_to_uk("Helicopter"),
                             doctest::Contains("pickup truck"), ValidationError);
        CHECK_FALSE(try_map_xview_to_uk("Helicopter").has_value());
    }
}

TEST_CASE("apportion_aadt splits the total by detected class mix") {
    std::vector<Detection> detections;
    for (int i = 0; i < 8; ++i) detections.push_back(labelled("Small car"));
    for (int i = 0; i < 2; ++i) detections.push_back(labelled("Bus"));

    const auto result = apportion_aadt(50000.0, detections);
    CHECK(result.aadt.cars_taxis == doctest::Approx(40000.0).epsilon(1e-12));
    CHECK(result.aadt.buses_coaches == doctest::Approx(10000.0).epsilon(1e-12));
    CHECK(result.aadt.lgv == 0.0);
    CHECK(result.unmappable_detections == 0);

    SUBCASE("single detected class takes the whole total") {
        const std::vector<Detection> only_cars(5, labelled("Passenger car"));
        const auto all = apportion_aadt(12345.0, only_cars);
        CHECK(all.aadt.cars_taxis == 12345.0);
        CHECK(all.aadt.total() == 12345.0);
    }

    SUBCASE("zero total becomes a zero vector") {
        const auto zero = apportion_aadt(0.0, detections);
        CHECK(zero.aadt.total() == 0.0);
    }

    SUBCASE("unmappable labels are excluded and counted") {
        auto noisy = detections;
        noisy.push_back(labelled("Helicopter"));
        const auto result2 = apportion_aadt(50000.0, noisy);
        CHECK(result2.unmappable_detections == 1);
        CHECK(result2.aadt.cars_taxis == doctest::Approx(40000.0).epsilon(1e-12));
    }

    SUBCASE("nothing mappable is an error") {
        const std::vector<Detection> junk(3, labelled("Helicopter"));
        CHECK_THROWS_AS(apportion_aadt(100.0, junk), ValidationError);
        CHECK_THROWS_AS(apportion_aadt(100.0, {}), ValidationError);
    }
}

TEST_CASE("apportioned components conserve the total") {
    Rng rng(31);
    const std::array<const char*, 4> labels = {"Small car", "Truck", "Cargo Truck", "Bus"};
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<Detection> detections;
        for (const auto* label : labels) {
            const auto n = rng.next_below(20);
            for (std::uint64_t i = 0; i < n; ++i) {
                detections.push_back(labelled(label));
            }
        }
        if (detections.empty()) {
            detections.push_back(labelled("Small car"));
        }
        const double total = rng.uniform(0.0, 80000.0);
        const auto result = apportion_aadt(total, detections);
        CHECK(std::abs(result.aadt.total() - total) <= 1e-9 * std::max(1.0, total));
    }
}

TEST_CASE("emissions reports serialise as CSV and text") {
    testutil::TempDir tmp("emis");
    const auto factors = uk_factors();
    const AADTVector aadt{10000.0, 2000.0, 1500.0, 300.0};
    const auto report = compute_emissions(aadt, factors, "Luton", RoadType::Motorways);

    write_emissions_csv(tmp / "report.csv", report);
    const auto csv = testutil::read_file(tmp / "report.csv");
    CHECK(csv.find("la,road_type,vehicle_type,fuel,vkt_km,litres,kgco2e") == 0);
    CHECK(csv.find("Luton,Motorways,cars_taxis,petrol,") != std::string::npos);
    CHECK(csv.find("Luton,Motorways,hgv,diesel,") != std::string::npos);

    write_emissions_text(tmp / "report.txt", report);
    const auto text = testutil::read_file(tmp / "report.txt");
    CHECK(text.find("Luton") != std::string::npos);
    CHECK(text.find("TOTAL") != std::string::npos);
    CHECK(text.find("assumption:") != std::string::npos);
}
