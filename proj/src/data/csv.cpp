#include "flare/data/csv.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "flare/error.hpp"

namespace flare::data {

std::size_t CsvTable::column(std::string_view name) const {
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == name) return i;
    }
    return std::string_view::npos;
}

CsvTable parse_csv(std::string_view text) {
    std::vector<CsvRecord> all;
    CsvRecord current;
    std::string field;
    std::size_t line = 1;
    current.line = 1;
    bool quoted = false;
    bool any = false;  // current record has content
    if (text.size() >= 3 && text.substr(0, 3) == "\xEF\xBB\xBF") text.remove_prefix(3);
    auto end_record = [&] {
        if (any) {
            current.fields.push_back(std::move(field));
            all.push_back(std::move(current));
        }
        current = CsvRecord{};
        field.clear();
        any = false;
    };
    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                if (c == '\n') ++line;
                field += c;
            }
            continue;
        }
        if (!any) current.line = line;
        switch (c) {
            case '"':
                quoted = true;
                any = true;
                break;
            case ',':
                current.fields.push_back(std::move(field));
                field.clear();
                any = true;
                break;
            case '\r':
                break;
            case '\n':
                end_record();
                ++line;
                break;
            default:
                field += c;
                any = true;
        }
    }
    if (quoted) throw ValidationError("unterminated quoted field starting before line " + std::to_string(line));
    end_record();

    CsvTable table;
    if (all.empty()) return table;
    table.header = std::move(all.front().fields);
    for (std::size_t i = 1; i < all.size(); ++i) table.records.push_back(std::move(all[i]));
    return table;
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot write " + path.string());
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) throw ValidationError("failed writing " + path.string());
}

std::string csv_escape(std::string_view s) {
    if (s.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(s);
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + '"';
}

std::string format_double(double v) {
    char buf[32];
    const auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

}  // namespace flare::data
