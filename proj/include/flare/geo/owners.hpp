#pragma once

// Matching VIIRS flare detections to the operator of the nearest well.

#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "flare/geo/geo.hpp"

namespace flare::geo {

struct Detection {
    std::string id;
    int month = 0;
    GeoPoint location;
};

struct Well {
    std::string id;
    std::string operator_name;
    int month = 0;
    GeoPoint location;
};

enum class OwnerDecision { kept_secure, kept_section_match, dropped_far, dropped_section_mismatch };

std::string_view to_string(OwnerDecision d);

struct OwnerAssignment {
    std::string detection_id;
    std::optional<std::string> operator_name;  // set only when kept
    std::optional<std::string> well_id;        // nearest well, when any exist
    double distance_m = std::numeric_limits<double>::infinity();
    OwnerDecision decision = OwnerDecision::dropped_far;

    bool kept() const {
        return decision == OwnerDecision::kept_secure || decision == OwnerDecision::kept_section_match;
    }
};

// Granularity of the mid-range agreement test.
enum class TrsLevel { township, township_range, section };

TrsLevel parse_trs_level(std::string_view s);

struct OwnerOptions {
    double d_secure_m = 300.0;
    double d_cutoff_m = 800.0;
    double radius_m = kEarthRadiusM;
    TrsLevel level = TrsLevel::section;
};

// The decision for a nearest-well distance; `same_section` is only consulted in
// the middle range d_secure <= d <= d_cutoff.
OwnerDecision classify_distance(double distance_m, bool same_section, const OwnerOptions& options = {});

// Whether a and b fall in agreeing section polygons at the given level. A point
// outside every section never agrees.
bool sections_agree(const GeoPoint& a, const GeoPoint& b, std::span<const GeoPolygon> sections, TrsLevel level);

// One month. Throws ValidationError when d_secure >= d_cutoff or when the
// detections and wells span more than one month. With no wells, every
// detection is dropped_far at infinite distance. Output follows detection order.
std::vector<OwnerAssignment> assign_flare_owners(std::span<const Detection> detections, std::span<const Well> wells,
                                                 std::span<const GeoPolygon> sections,
                                                 const OwnerOptions& options = {});

// Groups by month and runs each month independently (in parallel when
// `parallel`); output is ordered by month, then input order.
std::vector<OwnerAssignment> assign_flare_owners_by_month(std::span<const Detection> detections,
                                                          std::span<const Well> wells,
                                                          std::span<const GeoPolygon> sections,
                                                          const OwnerOptions& options = {}, bool parallel = true);

// header detection_id,operator,distance_m,decision
std::string owners_csv(std::span<const OwnerAssignment> rows);

}  // namespace flare::geo
