#include "flare/geo/owners.hpp"

#include <cmath>
#include <cstdio>
#include <future>
#include <map>

#include "flare/error.hpp"
#include "flare/geo/knn.hpp"

namespace flare::geo {

namespace {

// First containing section by id order, or null.
const GeoPolygon* containing_section(const GeoPoint& p, std::span<const GeoPolygon> sections) {
    const GeoPolygon* best = nullptr;
    for (const auto& s : sections) {
        if (s.kind != PolygonKind::trs_section) continue;
        if ((!best || s.id < best->id) && point_in_polygon(p, s)) best = &s;
    }
    return best;
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + '"';
}

bool same_key(const GeoPolygon& a, const GeoPolygon& b, TrsLevel level) {
    const bool labelled = !a.township.empty() && !b.township.empty();
    switch (level) {
        case TrsLevel::township:
            return labelled ? a.township == b.township : a.id == b.id;
        case TrsLevel::township_range:
            return labelled ? a.township == b.township && a.range == b.range : a.id == b.id;
        case TrsLevel::section:
            if (labelled && !a.section.empty() && !b.section.empty()) {
                return a.township == b.township && a.range == b.range && a.section == b.section;
            }
            return a.id == b.id;
    }
    return false;
}

}  // namespace

std::string_view to_string(OwnerDecision d) {
    switch (d) {
        case OwnerDecision::kept_secure: return "kept_secure";
        case OwnerDecision::kept_section_match: return "kept_section_match";
        case OwnerDecision::dropped_far: return "dropped_far";
        case OwnerDecision::dropped_section_mismatch: return "dropped_section_mismatch";
    }
    return "dropped_far";
}

TrsLevel parse_trs_level(std::string_view s) {
    if (s == "township") return TrsLevel::township;
    if (s == "range" || s == "township_range" || s == "township-range") return TrsLevel::township_range;
    if (s == "section") return TrsLevel::section;
    throw ValidationError("unknown TRS level '" + std::string(s) + "'");
}

OwnerDecision classify_distance(double distance_m, bool same_section, const OwnerOptions& options) {
    if (distance_m < options.d_secure_m) return OwnerDecision::kept_secure;
    if (distance_m > options.d_cutoff_m) return OwnerDecision::dropped_far;
    return same_section ? OwnerDecision::kept_section_match : OwnerDecision::dropped_section_mismatch;
}

bool sections_agree(const GeoPoint& a, const GeoPoint& b, std::span<const GeoPolygon> sections, TrsLevel level) {
    const GeoPolygon* sa = containing_section(a, sections);
    if (!sa) return false;
    const GeoPolygon* sb = containing_section(b, sections);
    if (!sb) return false;
    return same_key(*sa, *sb, level);
}

std::vector<OwnerAssignment> assign_flare_owners(std::span<const Detection> detections, std::span<const Well> wells,
                                                 std::span<const GeoPolygon> sections, const OwnerOptions& options) {
    if (!(options.d_secure_m < options.d_cutoff_m)) throw ValidationError("d_secure must be less than d_cutoff");
    std::optional<int> month;
    auto check_month = [&](int m) {
        if (month && *month != m) throw ValidationError("detections and wells must come from one month");
        month = m;
    };
    for (const auto& d : detections) check_month(d.month);
    for (const auto& w : wells) check_month(w.month);

    std::vector<OwnerAssignment> out;
    out.reserve(detections.size());
    if (wells.empty()) {
        for (const auto& d : detections) {
            OwnerAssignment a;
            a.detection_id = d.id;
            out.push_back(a);
        }
        return out;
    }
    std::vector<GeoPoint> locations;
    locations.reserve(wells.size());
    for (const auto& w : wells) locations.push_back(w.location);
    const SpatialIndex index(locations, options.radius_m);
    for (const auto& d : detections) {
        const Neighbor nb = index.nearest(d.location);
        const Well& w = wells[nb.id];
        OwnerAssignment a;
        a.detection_id = d.id;
        a.well_id = w.id;
        a.distance_m = nb.distance_m;
        const bool mid = nb.distance_m >= options.d_secure_m && nb.distance_m <= options.d_cutoff_m;
        const bool agree = mid && sections_agree(d.location, w.location, sections, options.level);
        a.decision = classify_distance(nb.distance_m, agree, options);
        if (a.kept()) a.operator_name = w.operator_name;
        out.push_back(std::move(a));
    }
    return out;
}

std::vector<OwnerAssignment> assign_flare_owners_by_month(std::span<const Detection> detections,
                                                          std::span<const Well> wells,
                                                          std::span<const GeoPolygon> sections,
                                                          const OwnerOptions& options, bool parallel) {
    std::map<int, std::pair<std::vector<Detection>, std::vector<Well>>> months;
    for (const auto& d : detections) months[d.month].first.push_back(d);
    for (const auto& w : wells) months[w.month].second.push_back(w);
    std::vector<std::future<std::vector<OwnerAssignment>>> jobs;
    for (const auto& [m, group] : months) {
        const auto* g = &group;
        jobs.push_back(std::async(parallel ? std::launch::async : std::launch::deferred, [g, sections, &options] {
            return assign_flare_owners(g->first, g->second, sections, options);
        }));
    }
    std::vector<OwnerAssignment> out;
    for (auto& j : jobs) {
        auto part = j.get();
        out.insert(out.end(), std::make_move_iterator(part.begin()), std::make_move_iterator(part.end()));
    }
    return out;
}

std::string owners_csv(std::span<const OwnerAssignment> rows) {
    std::string out = "detection_id,operator,distance_m,decision\n";
    char buf[64];
    for (const auto& r : rows) {
        out += csv_field(r.detection_id);
        out += ',';
        if (r.operator_name) out += csv_field(*r.operator_name);
        out += ',';
        if (std::isinf(r.distance_m)) {
            out += "inf";
        } else {
            std::snprintf(buf, sizeof buf, "%.3f", r.distance_m);
            out += buf;
        }
        out += ',';
        out += to_string(r.decision);
        out += '\n';
    }
    return out;
}

}  // namespace flare::geo
