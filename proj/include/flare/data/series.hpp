#pragma once

// Monthly rollups of detections and well reports per state, county or
// oilfield, and their conversion into model inputs.
//
// Series CSV: entity,month,viirs_bcm,ndic_bcm,flared_mcf,gas_mcf,oil_bbl,
// wells,flaring_wells,detections,gor

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "flare/data/records.hpp"
#include "flare/models/gp_series.hpp"
#include "flare/models/regression.hpp"

namespace flare::data {

// 1 mcf = 1000 ft^3 = 28.316846592 m^3.
inline constexpr double kBcmPerMcf = 28.316846592e-9;

struct GeocodedDetection {
    FlareDetection detection;
    std::string county;    // empty when outside every county polygon
    std::string oilfield;  // empty when outside every oilfield polygon
    std::string section;
};

inline constexpr std::string_view kGeocodedHeader = "month,lat,lon,volume_bcm,county,oilfield,section";
std::string geocoded_csv(std::span<const GeocodedDetection> rows);
std::vector<GeocodedDetection> parse_geocoded(std::string_view text, std::string_view source = "geocoded VIIRS");

struct SeriesRow {
    std::string entity;
    MonthStamp month;
    double viirs_bcm = 0.0;
    double ndic_bcm = 0.0;
    double flared_mcf = 0.0;
    double gas_mcf = 0.0;
    double oil_bbl = 0.0;
    long wells = 0;
    long flaring_wells = 0;
    long detections = 0;

    // Gas-oil ratio in mcf per barrel; empty without oil.
    std::optional<double> gor() const;
};

enum class Level { state, county, oilfield };
Level parse_level(std::string_view s);

struct Rollup {
    std::vector<SeriesRow> rows;  // by entity, then month
    std::size_t unassigned_detections = 0;
    std::size_t unassigned_wells = 0;
};

// Every entity gets every month from the earliest to the latest record of
// either source; months without records are zero. The state level puts all
// records under state_name.
Rollup rollup(Level level, std::span<const GeocodedDetection> detections, std::span<const WellRecord> wells,
              std::string_view state_name = "ND");

std::string series_csv(std::span<const SeriesRow> rows);
std::vector<SeriesRow> parse_series(std::string_view text, std::string_view source = "series");

std::vector<std::string> entities(std::span<const SeriesRow> rows);

// Rows of one entity in month order. Throws ValidationError when the entity
// is absent or its months have gaps (the gaps are listed).
std::vector<SeriesRow> entity_rows(std::span<const SeriesRow> rows, std::string_view entity);

std::vector<models::StateMonthly> state_monthly(std::span<const SeriesRow> entity);

struct CountyData {
    std::vector<models::CountyMonthly> rows;
    models::CountyRegistry registry;  // counties present, in registry order
};
// Every entity must be a registry code.
CountyData county_monthly(std::span<const SeriesRow> rows, const models::CountyRegistry& registry);

// Month indices from zero; flared is the NDIC volume in bcm for the scale
// factor and mcf otherwise; oil in barrels doubles as boe.
models::EntitySeries entity_series(std::span<const SeriesRow> entity, models::GpKind kind);

// Values of one named column, each finite and non-negative.
std::vector<double> parse_numeric_column(std::string_view text, std::string_view column,
                                         std::string_view source = "data");

}  // namespace flare::data
