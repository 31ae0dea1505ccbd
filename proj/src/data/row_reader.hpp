#pragma once

// Column lookup and typed field access with line/column error messages.

#include <charconv>
#include <cmath>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "flare/data/csv.hpp"
#include "flare/data/records.hpp"
#include "flare/error.hpp"

namespace flare::data::detail {

class RowReader {
  public:
    RowReader(const CsvTable& table, std::string_view source, std::span<const std::string_view> required)
        : table_(table), source_(source) {
        for (auto name : required) {
            const std::size_t c = table.column(name);
            if (c == std::string_view::npos) {
                throw ValidationError(std::string(source) + ": header is missing column '" + std::string(name) + "'");
            }
            columns_.push_back(c);
        }
        names_.assign(required.begin(), required.end());
    }

    void start(const CsvRecord& r) {
        record_ = &r;
        if (r.fields.size() != table_.header.size()) {
            fail_row("expected " + std::to_string(table_.header.size()) + " fields, found " +
                     std::to_string(r.fields.size()));
        }
    }

    const std::string& text(std::size_t k) const { return record_->fields[columns_[k]]; }

    double number(std::size_t k) const {
        const std::string& s = text(k);
        double v = 0.0;
        const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
        if (s.empty() || r.ec != std::errc() || r.ptr != s.data() + s.size() || !std::isfinite(v)) {
            fail(k, "'" + s + "' is not a finite number");
        }
        return v;
    }

    double nonnegative(std::size_t k) const {
        const double v = number(k);
        if (v < 0.0) fail(k, "negative value " + text(k));
        return v;
    }

    double in_range(std::size_t k, double lo, double hi) const {
        const double v = number(k);
        if (v < lo || v > hi) fail(k, text(k) + " is outside [" + format_double(lo) + ", " + format_double(hi) + "]");
        return v;
    }

    long count(std::size_t k) const {
        const std::string& s = text(k);
        long v = 0;
        const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
        if (s.empty() || r.ec != std::errc() || r.ptr != s.data() + s.size()) fail(k, "'" + s + "' is not an integer");
        if (v < 0) fail(k, "negative value " + s);
        return v;
    }

    MonthStamp month(std::size_t k) const {
        try {
            return MonthStamp::parse(text(k));
        } catch (const ValidationError& e) {
            fail(k, e.what());
        }
    }

    std::string nonempty(std::size_t k) const {
        if (text(k).empty()) fail(k, "empty value");
        return text(k);
    }

    [[noreturn]] void fail(std::size_t k, const std::string& what) const {
        throw ValidationError(std::string(source_) + ": line " + std::to_string(record_->line) + ", column '" +
                              std::string(names_[k]) + "': " + what);
    }

    [[noreturn]] void fail_row(const std::string& what) const {
        throw ValidationError(std::string(source_) + ": line " + std::to_string(record_->line) + ": " + what);
    }

    std::size_t line() const { return record_->line; }

  private:
    const CsvTable& table_;
    std::string_view source_;
    std::vector<std::size_t> columns_;
    std::vector<std::string_view> names_;
    const CsvRecord* record_ = nullptr;
};

inline CsvTable table_or_error(std::string_view text, std::string_view source) {
    try {
        auto t = parse_csv(text);
        if (t.header.empty()) throw ValidationError("missing header row");
        return t;
    } catch (const ValidationError& e) {
        throw ValidationError(std::string(source) + ": " + e.what());
    }
}

}  // namespace flare::data::detail
