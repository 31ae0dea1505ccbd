#pragma once

// Monthly VIIRS detections and NDIC well reports, with their CSV schemas:
//   VIIRS  month,lat,lon,volume_bcm
//   NDIC   month,well_id,operator,oilfield,county,lat,lon,oil_bbl,gas_mcf,flared_mcf
// Months are written YYYY-MM. Columns are matched by header name; extra
// columns are ignored.

#include <compare>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "flare/models/regression.hpp"

namespace flare::data {

class MonthStamp {
  public:
    MonthStamp() = default;
    // Throws ValidationError for a month outside 1..12.
    MonthStamp(int year, int month);

    // "YYYY-MM"
    static MonthStamp parse(std::string_view text);

    int year() const { return year_; }
    int month() const { return month_; }
    // Months since January of year 0; differences give month offsets.
    int serial() const { return year_ * 12 + (month_ - 1); }
    int index_since(const MonthStamp& start) const { return serial() - start.serial(); }
    MonthStamp plus(int months) const;
    std::string str() const;

    auto operator<=>(const MonthStamp&) const = default;

  private:
    int year_ = 1970;
    int month_ = 1;
};

// Missing stamps in [first, last] when the list should be a contiguous grid.
std::vector<MonthStamp> missing_months(std::span<const MonthStamp> months);

struct FlareDetection {
    std::size_t line = 0;
    MonthStamp month;
    double lat = 0.0;
    double lon = 0.0;
    double volume_bcm = 0.0;
};

struct WellRecord {
    std::size_t line = 0;
    MonthStamp month;
    std::string well_id;
    std::string operator_name;
    std::string oilfield;
    std::string county;  // registry code such as MCK
    double lat = 0.0;
    double lon = 0.0;
    double oil_bbl = 0.0;
    double gas_mcf = 0.0;
    double flared_mcf = 0.0;
};

inline constexpr std::string_view kViirsHeader = "month,lat,lon,volume_bcm";
inline constexpr std::string_view kNdicHeader = "month,well_id,operator,oilfield,county,lat,lon,oil_bbl,gas_mcf,flared_mcf";

// Errors name the source, line and column.
std::vector<FlareDetection> parse_viirs(std::string_view text, std::string_view source = "VIIRS");
std::vector<FlareDetection> parse_viirs_csv(const std::filesystem::path& path);
std::vector<WellRecord> parse_ndic(std::string_view text, const models::CountyRegistry& registry,
                                   std::string_view source = "NDIC");
std::vector<WellRecord> parse_ndic_csv(const std::filesystem::path& path,
                                       const models::CountyRegistry& registry = models::CountyRegistry::north_dakota());

std::string viirs_csv(std::span<const FlareDetection> rows);
std::string ndic_csv(std::span<const WellRecord> rows);

}  // namespace flare::data
