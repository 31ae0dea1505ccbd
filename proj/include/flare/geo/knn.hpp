#pragma once

// Exact nearest-neighbour search under great-circle distance.
//
// Points are embedded on the unit sphere and stored in a 3-d tree. Chord
// length is monotone in arc length, so the chord nearest neighbour is the
// great-circle nearest neighbour.

#include <cstdint>
#include <span>
#include <vector>

#include "flare/geo/geo.hpp"

namespace flare::geo {

struct Neighbor {
    std::size_t id = 0;  // position in the indexed point list
    double distance_m = 0.0;
};

class SpatialIndex {
  public:
    // Throws ValidationError for an empty point set or mixed datums.
    explicit SpatialIndex(std::span<const GeoPoint> points, double radius_m = kEarthRadiusM);

    // Ties go to the smallest id.
    Neighbor nearest(const GeoPoint& q) const;
    std::vector<Neighbor> nearest(std::span<const GeoPoint> queries) const;

    std::size_t size() const { return points_.size(); }
    const GeoPoint& point(std::size_t id) const { return points_[id]; }

  private:
    struct Node {
        std::uint32_t begin = 0;
        std::uint32_t end = 0;
        std::int32_t left = -1;
        std::int32_t right = -1;
        int axis = 0;
        double split = 0.0;
    };

    void search(std::int32_t node, const double q[3], double& best, std::size_t& best_id,
                std::vector<double>& scratch) const;

    std::vector<GeoPoint> points_;
    double radius_m_;
    Datum datum_;
    // Structure-of-arrays coordinates in tree order, with original ids.
    std::vector<double> xs_, ys_, zs_;
    std::vector<std::uint32_t> ids_;
    std::vector<Node> nodes_;
};

// Linear scan, for checking the index.
Neighbor nearest_brute_force(std::span<const GeoPoint> points, const GeoPoint& q, double radius_m = kEarthRadiusM);

}  // namespace flare::geo
