#pragma once

// Density clustering of detections under great-circle distance.

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "flare/geo/geo.hpp"

namespace flare::nightfire {

inline constexpr int kNoise = -1;

struct Clustering {
    std::vector<int> labels;  // per point, kNoise or 0..clusters-1
    std::size_t clusters = 0;
    std::size_t noise = 0;
    std::map<std::size_t, std::size_t> size_histogram;  // cluster size -> number of clusters
};

// DBSCAN: a point with at least min_pts points (itself included) within eps_m
// is a core point; linked core points form clusters. A border point joins the
// cluster of its nearest core neighbour, ties going to the lexicographically
// smallest (lat, lon), so the partition does not depend on input order.
// Clusters are numbered by their first member in input order.
// Throws ValidationError for eps_m <= 0 or min_pts == 0.
Clustering cluster_detections(std::span<const geo::GeoPoint> points, double eps_m, std::size_t min_pts,
                              double radius_m = geo::kEarthRadiusM);

// size,clusters
std::string size_histogram_csv(const Clustering& c);

}  // namespace flare::nightfire
