#include "flare/geo/geo.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include <json.hpp>

#include "flare/error.hpp"

namespace flare::geo {

using nlohmann::json;

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

std::string lower(std::string_view s) {
    std::string out(s);
    for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

void require_same_datum(Datum a, Datum b) {
    if (a != b) {
        throw ValidationError("datum mismatch: " + std::string(to_string(a)) + " vs " + std::string(to_string(b)));
    }
}

double wrap_lon(double lon) {
    while (lon > 180.0) lon -= 360.0;
    while (lon < -180.0) lon += 360.0;
    return lon;
}

// (dlat, dlon) in degrees for a point on the source ellipsoid at height 0.
std::array<double, 2> molodensky_delta(double lat_deg, double lon_deg, const MolodenskyShift& s) {
    const double phi = lat_deg * kDeg;
    const double lam = lon_deg * kDeg;
    const double a = s.source_a;
    const double f = s.source_f;
    const double b = a * (1.0 - f);
    const double e2 = f * (2.0 - f);
    const double sp = std::sin(phi);
    const double cp = std::cos(phi);
    const double sl = std::sin(lam);
    const double cl = std::cos(lam);
    const double w = std::sqrt(1.0 - e2 * sp * sp);
    const double rn = a / w;
    const double rm = a * (1.0 - e2) / (w * w * w);
    const double dphi = (-s.dx * sp * cl - s.dy * sp * sl + s.dz * cp + s.da * (rn * e2 * sp * cp) / a +
                         s.df * (rm * a / b + rn * b / a) * sp * cp) /
                        rm;
    const double dlam = std::fabs(cp) < 1e-12 ? 0.0 : (-s.dx * sl + s.dy * cl) / (rn * cp);
    return {dphi / kDeg, dlam / kDeg};
}

double segment_distance(double px, double py, double ax, double ay, double bx, double by) {
    const double dx = bx - ax;
    const double dy = by - ay;
    const double len2 = dx * dx + dy * dy;
    double t = len2 > 0.0 ? ((px - ax) * dx + (py - ay) * dy) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    return std::hypot(px - (ax + t * dx), py - (ay + t * dy));
}

bool on_ring(double x, double y, const Ring& r) {
    for (std::size_t i = 0; i + 1 < r.size(); ++i) {
        if (segment_distance(x, y, r[i][0], r[i][1], r[i + 1][0], r[i + 1][1]) <= kEdgeTolerance) return true;
    }
    return false;
}

// Crossing-number test, boundary excluded.
bool inside_ring(double x, double y, const Ring& r) {
    bool in = false;
    for (std::size_t i = 0, j = r.size() - 1; i < r.size(); j = i++) {
        const double xi = r[i][0], yi = r[i][1];
        const double xj = r[j][0], yj = r[j][1];
        if ((yi > y) != (yj > y) && x < (xj - xi) * (y - yi) / (yj - yi) + xi) in = !in;
    }
    return in;
}

Ring parse_ring(const json& j, const std::string& id) {
    if (!j.is_array()) throw ValidationError("polygon '" + id + "': ring is not an array");
    Ring r;
    for (const auto& c : j) {
        if (!c.is_array() || c.size() < 2 || !c[0].is_number() || !c[1].is_number()) {
            throw ValidationError("polygon '" + id + "': bad coordinate");
        }
        r.push_back({c[0].get<double>(), c[1].get<double>()});
    }
    return r;
}

GeoPolygon parse_polygon_rings(const json& rings, const std::string& id) {
    if (!rings.is_array() || rings.empty()) throw ValidationError("polygon '" + id + "' has no rings");
    GeoPolygon p;
    p.id = id;
    p.outer = parse_ring(rings[0], id);
    for (std::size_t i = 1; i < rings.size(); ++i) p.holes.push_back(parse_ring(rings[i], id));
    return p;
}

std::string text_of(const json& j) {
    if (j.is_string()) return j.get<std::string>();
    if (j.is_number_integer()) return std::to_string(j.get<long long>());
    if (j.is_number()) {
        std::ostringstream os;
        os << j.get<double>();
        return os.str();
    }
    return {};
}

}  // namespace

std::string_view to_string(Datum d) { return d == Datum::wgs84 ? "WGS84" : "NAD27"; }

Datum parse_datum(std::string_view s) {
    const std::string l = lower(s);
    if (l == "wgs84" || l == "wgs 84" || l == "epsg:4326") return Datum::wgs84;
    if (l == "nad27" || l == "nad 27" || l == "epsg:4267") return Datum::nad27;
    throw ValidationError("unknown datum '" + std::string(s) + "'");
}

GeoPoint::GeoPoint(double lat, double lon, Datum datum) : lat_(lat), lon_(lon), datum_(datum) {
    if (!(lat >= -90.0 && lat <= 90.0)) throw ValidationError("latitude out of range: " + std::to_string(lat));
    if (!(lon >= -180.0 && lon <= 180.0)) throw ValidationError("longitude out of range: " + std::to_string(lon));
}

double haversine(const GeoPoint& a, const GeoPoint& b, double radius_m) {
    require_same_datum(a.datum(), b.datum());
    const double p1 = a.lat() * kDeg;
    const double p2 = b.lat() * kDeg;
    const double sdp = std::sin(0.5 * (p2 - p1));
    const double sdl = std::sin(0.5 * (b.lon() - a.lon()) * kDeg);
    const double h = std::clamp(sdp * sdp + std::cos(p1) * std::cos(p2) * sdl * sdl, 0.0, 1.0);
    return 2.0 * radius_m * std::asin(std::sqrt(h));
}

std::vector<double> haversine(std::span<const GeoPoint> from, const GeoPoint& to, double radius_m) {
    std::vector<double> out(from.size());
    for (std::size_t i = 0; i < from.size(); ++i) out[i] = haversine(from[i], to, radius_m);
    return out;
}

std::array<double, 3> unit_vector(const GeoPoint& p) {
    const double phi = p.lat() * kDeg;
    const double lam = p.lon() * kDeg;
    return {std::cos(phi) * std::cos(lam), std::cos(phi) * std::sin(lam), std::sin(phi)};
}

MolodenskyShift MolodenskyShift::zero() {
    MolodenskyShift s;
    s.dx = s.dy = s.dz = 0.0;
    s.da = s.df = 0.0;
    return s;
}

GeoPoint nad27_to_wgs84(const GeoPoint& p, const MolodenskyShift& shift) {
    if (p.datum() == Datum::wgs84) return p;
    const auto d = molodensky_delta(p.lat(), p.lon(), shift);
    return GeoPoint(std::clamp(p.lat() + d[0], -90.0, 90.0), wrap_lon(p.lon() + d[1]), Datum::wgs84);
}

GeoPoint wgs84_to_nad27(const GeoPoint& p, const MolodenskyShift& shift) {
    if (p.datum() == Datum::nad27) return p;
    double lat = p.lat();
    double lon = p.lon();
    for (int it = 0; it < 50; ++it) {
        const auto d = molodensky_delta(lat, lon, shift);
        const double next_lat = p.lat() - d[0];
        const double next_lon = wrap_lon(p.lon() - d[1]);
        const bool done = std::fabs(next_lat - lat) < 1e-13 && std::fabs(next_lon - lon) < 1e-13;
        lat = next_lat;
        lon = next_lon;
        if (done) break;
    }
    return GeoPoint(std::clamp(lat, -90.0, 90.0), lon, Datum::nad27);
}

std::string_view to_string(PolygonKind k) {
    switch (k) {
        case PolygonKind::county: return "county";
        case PolygonKind::oilfield: return "oilfield";
        case PolygonKind::trs_section: return "trs-section";
    }
    return "county";
}

PolygonKind parse_polygon_kind(std::string_view s) {
    const std::string l = lower(s);
    if (l == "county") return PolygonKind::county;
    if (l == "oilfield" || l == "field") return PolygonKind::oilfield;
    if (l == "trs-section" || l == "trs_section" || l == "section") return PolygonKind::trs_section;
    throw ValidationError("unknown polygon kind '" + std::string(s) + "'");
}

void GeoPolygon::validate() const {
    auto check = [&](const Ring& r) {
        if (r.size() < 4) throw ValidationError("polygon '" + id + "': ring needs at least 4 vertices");
        if (r.front() != r.back()) throw ValidationError("polygon '" + id + "': ring is not closed");
    };
    check(outer);
    for (const auto& h : holes) check(h);
}

std::array<double, 4> GeoPolygon::bbox() const {
    std::array<double, 4> b{outer[0][0], outer[0][1], outer[0][0], outer[0][1]};
    for (const auto& v : outer) {
        b[0] = std::min(b[0], v[0]);
        b[1] = std::min(b[1], v[1]);
        b[2] = std::max(b[2], v[0]);
        b[3] = std::max(b[3], v[1]);
    }
    return b;
}

bool point_in_polygon(const GeoPoint& p, const GeoPolygon& poly) {
    require_same_datum(p.datum(), poly.datum);
    const double x = p.lon();
    const double y = p.lat();
    if (on_ring(x, y, poly.outer)) return true;
    for (const auto& h : poly.holes) {
        if (on_ring(x, y, h)) return true;
    }
    if (!inside_ring(x, y, poly.outer)) return false;
    for (const auto& h : poly.holes) {
        if (inside_ring(x, y, h)) return false;
    }
    return true;
}

GeoPolygon to_wgs84(const GeoPolygon& poly, const MolodenskyShift& shift) {
    if (poly.datum == Datum::wgs84) return poly;
    GeoPolygon out = poly;
    auto convert = [&](Ring& r) {
        for (auto& v : r) {
            const GeoPoint q = nad27_to_wgs84(GeoPoint(v[1], v[0], Datum::nad27), shift);
            v = {q.lon(), q.lat()};
        }
    };
    convert(out.outer);
    for (auto& h : out.holes) convert(h);
    out.datum = Datum::wgs84;
    return out;
}

std::vector<GeoPolygon> parse_geojson(std::string_view text, PolygonKind default_kind) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw ValidationError(std::string("GeoJSON parse error: ") + e.what());
    }
    if (!doc.is_object() || doc.value("type", "") != "FeatureCollection" || !doc.contains("features") ||
        !doc["features"].is_array()) {
        throw ValidationError("GeoJSON input must be a FeatureCollection");
    }
    const Datum collection_datum = doc.contains("datum") ? parse_datum(doc["datum"].get<std::string>()) : Datum::wgs84;
    std::vector<GeoPolygon> out;
    std::size_t index = 0;
    for (const auto& f : doc["features"]) {
        ++index;
        if (!f.is_object() || !f.contains("geometry") || !f["geometry"].is_object()) {
            throw ValidationError("feature " + std::to_string(index) + " has no geometry");
        }
        const json props = f.contains("properties") && f["properties"].is_object() ? f["properties"] : json::object();
        std::string id;
        if (f.contains("id")) id = text_of(f["id"]);
        if (id.empty() && props.contains("id")) id = text_of(props["id"]);
        if (id.empty() && props.contains("name")) id = text_of(props["name"]);
        if (id.empty()) id = "feature-" + std::to_string(index);
        const Datum datum = f.contains("datum") ? parse_datum(f["datum"].get<std::string>()) : collection_datum;
        const PolygonKind kind =
            props.contains("kind") && props["kind"].is_string() ? parse_polygon_kind(props["kind"].get<std::string>())
                                                                 : default_kind;
        const json& g = f["geometry"];
        const std::string type = g.value("type", "");
        std::vector<GeoPolygon> parts;
        if (type == "Polygon") {
            parts.push_back(parse_polygon_rings(g["coordinates"], id));
        } else if (type == "MultiPolygon") {
            for (const auto& rings : g["coordinates"]) parts.push_back(parse_polygon_rings(rings, id));
        } else {
            throw ValidationError("feature '" + id + "': unsupported geometry type '" + type + "'");
        }
        for (auto& p : parts) {
            p.kind = kind;
            p.datum = datum;
            if (props.contains("township")) p.township = text_of(props["township"]);
            if (props.contains("range")) p.range = text_of(props["range"]);
            if (props.contains("section")) p.section = text_of(props["section"]);
            p.validate();
            out.push_back(std::move(p));
        }
    }
    return out;
}

std::vector<GeoPolygon> read_geojson(const std::string& path, PolygonKind default_kind) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open " + path);
    std::ostringstream os;
    os << in.rdbuf();
    return parse_geojson(os.str(), default_kind);
}

std::string to_geojson(std::span<const GeoPolygon> polygons) {
    json doc;
    doc["type"] = "FeatureCollection";
    Datum datum = Datum::wgs84;
    if (!polygons.empty()) datum = polygons.front().datum;
    doc["datum"] = std::string(to_string(datum));
    json features = json::array();
    for (const auto& p : polygons) {
        json f;
        f["type"] = "Feature";
        f["id"] = p.id;
        if (p.datum != datum) f["datum"] = std::string(to_string(p.datum));
        json props;
        props["kind"] = std::string(to_string(p.kind));
        if (!p.township.empty()) props["township"] = p.township;
        if (!p.range.empty()) props["range"] = p.range;
        if (!p.section.empty()) props["section"] = p.section;
        f["properties"] = props;
        json rings = json::array();
        rings.push_back(p.outer);
        for (const auto& h : p.holes) rings.push_back(h);
        f["geometry"] = {{"type", "Polygon"}, {"coordinates", rings}};
        features.push_back(f);
    }
    doc["features"] = features;
    return doc.dump(1);
}

std::vector<GeocodeLabel> reverse_geocode(std::span<const GeoPoint> points, std::span<const GeoPolygon> layers) {
    std::vector<std::array<double, 4>> boxes;
    boxes.reserve(layers.size());
    for (const auto& l : layers) {
        if (l.datum != Datum::wgs84) throw ValidationError("layer '" + l.id + "' is not in WGS84; transform it first");
        boxes.push_back(l.bbox());
    }
    std::vector<GeocodeLabel> out(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) {
        const GeoPoint& p = points[i];
        GeocodeLabel& label = out[i];
        auto take = [](std::optional<std::string>& slot, const std::string& id) {
            if (!slot || id < *slot) slot = id;
        };
        for (std::size_t k = 0; k < layers.size(); ++k) {
            const auto& b = boxes[k];
            if (p.lon() < b[0] - kEdgeTolerance || p.lon() > b[2] + kEdgeTolerance || p.lat() < b[1] - kEdgeTolerance ||
                p.lat() > b[3] + kEdgeTolerance) {
                continue;
            }
            if (!point_in_polygon(p, layers[k])) continue;
            label.matches.push_back(layers[k].id);
            switch (layers[k].kind) {
                case PolygonKind::county: take(label.county, layers[k].id); break;
                case PolygonKind::oilfield: take(label.oilfield, layers[k].id); break;
                case PolygonKind::trs_section: take(label.section, layers[k].id); break;
            }
        }
        std::sort(label.matches.begin(), label.matches.end());
        label.matches.erase(std::unique(label.matches.begin(), label.matches.end()), label.matches.end());
    }
    return out;
}

}  // namespace flare::geo
