#pragma once

// Points, datums, great-circle distance, polygons and reverse geocoding.

#include <array>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace flare::geo {

enum class Datum { wgs84, nad27 };

std::string_view to_string(Datum d);
Datum parse_datum(std::string_view s);  // "WGS84", "NAD27" (case-insensitive)

inline constexpr double kEarthRadiusM = 6371000.0;

// Latitude and longitude in degrees; bounds are checked on construction.
class GeoPoint {
  public:
    GeoPoint() = default;
    GeoPoint(double lat, double lon, Datum datum = Datum::wgs84);

    double lat() const { return lat_; }
    double lon() const { return lon_; }
    Datum datum() const { return datum_; }

    bool operator==(const GeoPoint&) const = default;

  private:
    double lat_ = 0.0;
    double lon_ = 0.0;
    Datum datum_ = Datum::wgs84;
};

// Great-circle distance in meters. Throws ValidationError on datum mismatch.
double haversine(const GeoPoint& a, const GeoPoint& b, double radius_m = kEarthRadiusM);

// Distances from every point in `from` to `to`.
std::vector<double> haversine(std::span<const GeoPoint> from, const GeoPoint& to, double radius_m = kEarthRadiusM);

// Unit-sphere embedding (x, y, z).
std::array<double, 3> unit_vector(const GeoPoint& p);

// -- datum shift --------------------------------------------------------------------

// Standard 3-parameter Molodensky shift from the Clarke 1866 ellipsoid to
// WGS84. da and df are the ellipsoid differences (target - source); setting all
// five to zero makes the transform the identity.
struct MolodenskyShift {
    double dx = -8.0;
    double dy = 160.0;
    double dz = 176.0;
    double da = 6378137.0 - 6378206.4;
    double df = 1.0 / 298.257223563 - 1.0 / 294.9786982;
    double source_a = 6378206.4;
    double source_f = 1.0 / 294.9786982;

    static MolodenskyShift zero();
};

// WGS84 input is returned unchanged.
GeoPoint nad27_to_wgs84(const GeoPoint& p, const MolodenskyShift& shift = {});

// Inverse by fixed-point iteration on the forward shift. NAD27 input is
// returned unchanged.
GeoPoint wgs84_to_nad27(const GeoPoint& p, const MolodenskyShift& shift = {});

// -- polygons -----------------------------------------------------------------------

enum class PolygonKind { county, oilfield, trs_section };

std::string_view to_string(PolygonKind k);
PolygonKind parse_polygon_kind(std::string_view s);

// Closed ring of (lon, lat) vertices, first == last.
using Ring = std::vector<std::array<double, 2>>;

struct GeoPolygon {
    std::string id;
    PolygonKind kind = PolygonKind::county;
    Ring outer;
    std::vector<Ring> holes;
    Datum datum = Datum::wgs84;
    // Township / range / section labels for trs_section polygons (may be empty).
    std::string township;
    std::string range;
    std::string section;

    // Throws ValidationError for open rings or rings with fewer than 4 vertices.
    void validate() const;
    // lon_min, lat_min, lon_max, lat_max of the outer ring
    std::array<double, 4> bbox() const;
};

inline constexpr double kEdgeTolerance = 1e-12;

// Inclusive: boundary points (within kEdgeTolerance degrees of an edge) are
// inside, including the boundary of a hole. Throws on datum mismatch.
bool point_in_polygon(const GeoPoint& p, const GeoPolygon& poly);

// Every vertex shifted to WGS84.
GeoPolygon to_wgs84(const GeoPolygon& poly, const MolodenskyShift& shift = {});

// GeoJSON FeatureCollection of Polygon / MultiPolygon features. The datum comes
// from a "datum" member on the feature or the collection (default WGS84). The
// id is the feature "id" or properties.id, then properties.name. The kind is
// properties.kind when present, else `default_kind`. MultiPolygon parts share
// the feature id. Throws ValidationError on malformed input.
std::vector<GeoPolygon> parse_geojson(std::string_view text, PolygonKind default_kind = PolygonKind::county);
std::vector<GeoPolygon> read_geojson(const std::string& path, PolygonKind default_kind = PolygonKind::county);
std::string to_geojson(std::span<const GeoPolygon> polygons);

struct GeocodeLabel {
    std::optional<std::string> county;
    std::optional<std::string> oilfield;
    std::optional<std::string> section;
    std::vector<std::string> matches;  // every containing polygon id, sorted
};

// Points in no polygon get empty labels. Where polygons of one kind overlap
// (shared borders), the smallest id wins. Layers must already be WGS84.
std::vector<GeocodeLabel> reverse_geocode(std::span<const GeoPoint> points, std::span<const GeoPolygon> layers);

}  // namespace flare::geo
