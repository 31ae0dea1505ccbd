#include "flare/data/series.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "flare/data/csv.hpp"
#include "flare/error.hpp"
#include "row_reader.hpp"

namespace flare::data {

namespace {

constexpr std::string_view kGeocodedColumns[] = {"month", "lat", "lon", "volume_bcm", "county", "oilfield", "section"};
constexpr std::string_view kSeriesColumns[] = {"entity", "month",   "viirs_bcm", "ndic_bcm",      "flared_mcf",
                                               "gas_mcf", "oil_bbl", "wells",     "flaring_wells", "detections"};

std::string join_months(std::span<const MonthStamp> months) {
    std::string out;
    for (std::size_t i = 0; i < months.size(); ++i) {
        if (i) out += ", ";
        out += months[i].str();
    }
    return out;
}

}  // namespace

std::string geocoded_csv(std::span<const GeocodedDetection> rows) {
    std::string out(kGeocodedHeader);
    out += '\n';
    for (const auto& g : rows) {
        const auto& d = g.detection;
        out += d.month.str() + ',' + format_double(d.lat) + ',' + format_double(d.lon) + ',' +
               format_double(d.volume_bcm) + ',' + csv_escape(g.county) + ',' + csv_escape(g.oilfield) + ',' +
               csv_escape(g.section) + '\n';
    }
    return out;
}

std::vector<GeocodedDetection> parse_geocoded(std::string_view text, std::string_view source) {
    const CsvTable table = detail::table_or_error(text, source);
    detail::RowReader row(table, source, kGeocodedColumns);
    std::vector<GeocodedDetection> out;
    for (const auto& r : table.records) {
        row.start(r);
        GeocodedDetection g;
        g.detection.line = r.line;
        g.detection.month = row.month(0);
        g.detection.lat = row.in_range(1, -90.0, 90.0);
        g.detection.lon = row.in_range(2, -180.0, 180.0);
        g.detection.volume_bcm = row.nonnegative(3);
        g.county = row.text(4);
        g.oilfield = row.text(5);
        g.section = row.text(6);
        out.push_back(std::move(g));
    }
    return out;
}

std::optional<double> SeriesRow::gor() const {
    if (!(oil_bbl > 0.0)) return std::nullopt;
    return gas_mcf / oil_bbl;
}

Level parse_level(std::string_view s) {
    if (s == "state") return Level::state;
    if (s == "county") return Level::county;
    if (s == "oilfield") return Level::oilfield;
    throw ValidationError("unknown level '" + std::string(s) + "' (state, county or oilfield)");
}

Rollup rollup(Level level, std::span<const GeocodedDetection> detections, std::span<const WellRecord> wells,
              std::string_view state_name) {
    Rollup out;
    if (detections.empty() && wells.empty()) return out;
    MonthStamp first = detections.empty() ? wells.front().month : detections.front().detection.month;
    MonthStamp last = first;
    for (const auto& d : detections) {
        first = std::min(first, d.detection.month);
        last = std::max(last, d.detection.month);
    }
    for (const auto& w : wells) {
        first = std::min(first, w.month);
        last = std::max(last, w.month);
    }
    const int span = last.index_since(first) + 1;

    std::map<std::string, std::vector<SeriesRow>> table;
    auto slot = [&](const std::string& entity, const MonthStamp& m) -> SeriesRow& {
        auto it = table.find(entity);
        if (it == table.end()) {
            std::vector<SeriesRow> grid(static_cast<std::size_t>(span));
            for (int k = 0; k < span; ++k) {
                grid[static_cast<std::size_t>(k)].entity = entity;
                grid[static_cast<std::size_t>(k)].month = first.plus(k);
            }
            it = table.emplace(entity, std::move(grid)).first;
        }
        return it->second[static_cast<std::size_t>(m.index_since(first))];
    };
    auto entity_of = [&](const std::string& county, const std::string& oilfield) -> const std::string* {
        static const std::string none;
        switch (level) {
            case Level::state: return nullptr;
            case Level::county: return county.empty() ? &none : &county;
            case Level::oilfield: return oilfield.empty() ? &none : &oilfield;
        }
        return &none;
    };
    const std::string state(state_name);

    for (const auto& d : detections) {
        const std::string* e = entity_of(d.county, d.oilfield);
        if (e && e->empty()) {
            ++out.unassigned_detections;
            continue;
        }
        SeriesRow& r = slot(e ? *e : state, d.detection.month);
        r.viirs_bcm += d.detection.volume_bcm;
        ++r.detections;
    }
    // Wells are counted once per entity and month even if reported twice.
    std::set<std::tuple<std::string, int, std::string>> seen;
    std::set<std::tuple<std::string, int, std::string>> flaring;
    for (const auto& w : wells) {
        const std::string* e = entity_of(w.county, w.oilfield);
        if (e && e->empty()) {
            ++out.unassigned_wells;
            continue;
        }
        const std::string& name = e ? *e : state;
        SeriesRow& r = slot(name, w.month);
        r.flared_mcf += w.flared_mcf;
        r.ndic_bcm += w.flared_mcf * kBcmPerMcf;
        r.gas_mcf += w.gas_mcf;
        r.oil_bbl += w.oil_bbl;
        const auto key = std::make_tuple(name, w.month.serial(), w.well_id);
        if (seen.insert(key).second) ++r.wells;
        if (w.flared_mcf > 0.0 && flaring.insert(key).second) ++r.flaring_wells;
    }
    for (auto& [name, grid] : table) {
        for (auto& r : grid) out.rows.push_back(std::move(r));
    }
    return out;
}

std::string series_csv(std::span<const SeriesRow> rows) {
    std::string out = "entity,month,viirs_bcm,ndic_bcm,flared_mcf,gas_mcf,oil_bbl,wells,flaring_wells,detections,gor\n";
    for (const auto& r : rows) {
        out += csv_escape(r.entity) + ',' + r.month.str() + ',' + format_double(r.viirs_bcm) + ',' +
               format_double(r.ndic_bcm) + ',' + format_double(r.flared_mcf) + ',' + format_double(r.gas_mcf) + ',' +
               format_double(r.oil_bbl) + ',' + std::to_string(r.wells) + ',' + std::to_string(r.flaring_wells) + ',' +
               std::to_string(r.detections) + ',';
        if (const auto g = r.gor()) out += format_double(*g);
        out += '\n';
    }
    return out;
}

std::vector<SeriesRow> parse_series(std::string_view text, std::string_view source) {
    const CsvTable table = detail::table_or_error(text, source);
    detail::RowReader row(table, source, kSeriesColumns);
    std::vector<SeriesRow> out;
    for (const auto& rec : table.records) {
        row.start(rec);
        SeriesRow r;
        r.entity = row.nonempty(0);
        r.month = row.month(1);
        r.viirs_bcm = row.nonnegative(2);
        r.ndic_bcm = row.nonnegative(3);
        r.flared_mcf = row.nonnegative(4);
        r.gas_mcf = row.nonnegative(5);
        r.oil_bbl = row.nonnegative(6);
        r.wells = row.count(7);
        r.flaring_wells = row.count(8);
        r.detections = row.count(9);
        if (r.flaring_wells > r.wells) row.fail(8, "more flaring wells than wells");
        out.push_back(std::move(r));
    }
    return out;
}

std::vector<std::string> entities(std::span<const SeriesRow> rows) {
    std::vector<std::string> out;
    for (const auto& r : rows) {
        if (std::find(out.begin(), out.end(), r.entity) == out.end()) out.push_back(r.entity);
    }
    return out;
}

std::vector<SeriesRow> entity_rows(std::span<const SeriesRow> rows, std::string_view entity) {
    std::vector<SeriesRow> out;
    for (const auto& r : rows) {
        if (r.entity == entity) out.push_back(r);
    }
    if (out.empty()) throw ValidationError("no rows for entity '" + std::string(entity) + "'");
    std::sort(out.begin(), out.end(), [](const SeriesRow& a, const SeriesRow& b) { return a.month < b.month; });
    for (std::size_t i = 1; i < out.size(); ++i) {
        if (out[i].month == out[i - 1].month) {
            throw ValidationError("entity '" + std::string(entity) + "' repeats month " + out[i].month.str());
        }
    }
    std::vector<MonthStamp> months;
    for (const auto& r : out) months.push_back(r.month);
    const auto gaps = missing_months(months);
    if (!gaps.empty()) {
        throw ValidationError("entity '" + std::string(entity) + "' is missing months: " + join_months(gaps));
    }
    return out;
}

std::vector<models::StateMonthly> state_monthly(std::span<const SeriesRow> entity) {
    std::vector<models::StateMonthly> out;
    if (entity.empty()) return out;
    for (const auto& r : entity) out.push_back({r.month.index_since(entity.front().month), r.viirs_bcm, r.ndic_bcm});
    return out;
}

CountyData county_monthly(std::span<const SeriesRow> rows, const models::CountyRegistry& registry) {
    CountyData out;
    if (rows.empty()) return out;
    std::vector<bool> present(registry.size(), false);
    MonthStamp first = rows.front().month;
    for (const auto& r : rows) {
        if (!registry.contains(r.entity)) throw ValidationError("entity '" + r.entity + "' is not a county code");
        present[registry.index_of(r.entity)] = true;
        first = std::min(first, r.month);
    }
    std::vector<std::size_t> remap(registry.size(), 0);
    for (std::size_t i = 0; i < registry.size(); ++i) {
        if (present[i]) remap[i] = out.registry.add(registry.code(i), registry.name(i));
    }
    for (const auto& r : rows) {
        out.rows.push_back({remap[registry.index_of(r.entity)], r.month.index_since(first), r.viirs_bcm, r.ndic_bcm});
    }
    return out;
}

models::EntitySeries entity_series(std::span<const SeriesRow> entity, models::GpKind kind) {
    models::EntitySeries s;
    if (entity.empty()) return s;
    for (const auto& r : entity) {
        s.months.push_back(r.month.index_since(entity.front().month));
        s.flared.push_back(kind == models::GpKind::scale_factor ? r.ndic_bcm : r.flared_mcf);
        s.gas.push_back(r.gas_mcf);
        s.oil.push_back(r.oil_bbl);
        s.wells.push_back(r.wells);
        s.flaring_wells.push_back(r.flaring_wells);
        s.detections.push_back(r.detections);
        s.viirs.push_back(r.viirs_bcm);
    }
    return s;
}

std::vector<double> parse_numeric_column(std::string_view text, std::string_view column, std::string_view source) {
    const CsvTable table = detail::table_or_error(text, source);
    const std::string_view cols[] = {column};
    detail::RowReader row(table, source, cols);
    std::vector<double> out;
    out.reserve(table.records.size());
    for (const auto& r : table.records) {
        row.start(r);
        out.push_back(row.nonnegative(0));
    }
    return out;
}

}  // namespace flare::data
