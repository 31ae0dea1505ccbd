#include "flare/data/records.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>

#include "flare/data/csv.hpp"
#include "flare/error.hpp"
#include "row_reader.hpp"

namespace flare::data {

namespace {
using detail::RowReader;
using detail::table_or_error;

constexpr std::string_view kViirsColumns[] = {"month", "lat", "lon", "volume_bcm"};
constexpr std::string_view kNdicColumns[] = {"month", "well_id", "operator", "oilfield", "county",
                                             "lat",   "lon",     "oil_bbl",  "gas_mcf",  "flared_mcf"};

}  // namespace

MonthStamp::MonthStamp(int year, int month) : year_(year), month_(month) {
    if (month < 1 || month > 12) throw ValidationError("month must be in 1..12, got " + std::to_string(month));
    if (year < 0 || year > 9999) throw ValidationError("year out of range: " + std::to_string(year));
}

MonthStamp MonthStamp::parse(std::string_view s) {
    auto digits = [&](std::size_t from, std::size_t count) {
        int v = 0;
        for (std::size_t i = from; i < from + count; ++i) {
            if (s[i] < '0' || s[i] > '9') throw ValidationError("month '" + std::string(s) + "' is not YYYY-MM");
            v = v * 10 + (s[i] - '0');
        }
        return v;
    };
    if (s.size() != 7 || s[4] != '-') throw ValidationError("month '" + std::string(s) + "' is not YYYY-MM");
    return MonthStamp(digits(0, 4), digits(5, 2));
}

MonthStamp MonthStamp::plus(int months) const {
    const int s = serial() + months;
    return MonthStamp(s / 12, s % 12 + 1);
}

std::string MonthStamp::str() const {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02d", year_, month_);
    return buf;
}

std::vector<MonthStamp> missing_months(std::span<const MonthStamp> months) {
    std::vector<MonthStamp> out;
    if (months.empty()) return out;
    std::vector<MonthStamp> sorted(months.begin(), months.end());
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 1; i < sorted.size(); ++i) {
        for (int k = sorted[i - 1].serial() + 1; k < sorted[i].serial(); ++k) out.push_back(MonthStamp(k / 12, k % 12 + 1));
    }
    return out;
}

std::vector<FlareDetection> parse_viirs(std::string_view text, std::string_view source) {
    const CsvTable table = table_or_error(text, source);
    RowReader row(table, source, kViirsColumns);
    std::vector<FlareDetection> out;
    out.reserve(table.records.size());
    for (const auto& r : table.records) {
        row.start(r);
        FlareDetection d;
        d.line = r.line;
        d.month = row.month(0);
        d.lat = row.in_range(1, -90.0, 90.0);
        d.lon = row.in_range(2, -180.0, 180.0);
        d.volume_bcm = row.nonnegative(3);
        out.push_back(d);
    }
    return out;
}

std::vector<FlareDetection> parse_viirs_csv(const std::filesystem::path& path) {
    return parse_viirs(read_text_file(path), path.string());
}

std::vector<WellRecord> parse_ndic(std::string_view text, const models::CountyRegistry& registry,
                                   std::string_view source) {
    const CsvTable table = table_or_error(text, source);
    RowReader row(table, source, kNdicColumns);
    std::vector<WellRecord> out;
    out.reserve(table.records.size());
    for (const auto& r : table.records) {
        row.start(r);
        WellRecord w;
        w.line = r.line;
        w.month = row.month(0);
        w.well_id = row.nonempty(1);
        w.operator_name = row.text(2);
        w.oilfield = row.text(3);
        w.county = row.nonempty(4);
        if (!registry.contains(w.county)) row.fail(4, "unknown county code '" + w.county + "'");
        w.lat = row.in_range(5, -90.0, 90.0);
        w.lon = row.in_range(6, -180.0, 180.0);
        w.oil_bbl = row.nonnegative(7);
        w.gas_mcf = row.nonnegative(8);
        w.flared_mcf = row.nonnegative(9);
        out.push_back(std::move(w));
    }
    return out;
}

std::vector<WellRecord> parse_ndic_csv(const std::filesystem::path& path, const models::CountyRegistry& registry) {
    return parse_ndic(read_text_file(path), registry, path.string());
}

std::string viirs_csv(std::span<const FlareDetection> rows) {
    std::string out(kViirsHeader);
    out += '\n';
    for (const auto& d : rows) {
        out += d.month.str() + ',' + format_double(d.lat) + ',' + format_double(d.lon) + ',' +
               format_double(d.volume_bcm) + '\n';
    }
    return out;
}

std::string ndic_csv(std::span<const WellRecord> rows) {
    std::string out(kNdicHeader);
    out += '\n';
    for (const auto& w : rows) {
        out += w.month.str() + ',' + csv_escape(w.well_id) + ',' + csv_escape(w.operator_name) + ',' +
               csv_escape(w.oilfield) + ',' + csv_escape(w.county) + ',' + format_double(w.lat) + ',' +
               format_double(w.lon) + ',' + format_double(w.oil_bbl) + ',' + format_double(w.gas_mcf) + ',' +
               format_double(w.flared_mcf) + '\n';
    }
    return out;
}

}  // namespace flare::data
