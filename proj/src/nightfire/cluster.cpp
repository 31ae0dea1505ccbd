#include "flare/nightfire/cluster.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <utility>

#include "flare/error.hpp"

namespace flare::nightfire {

namespace {

struct DisjointSets {
    std::vector<std::size_t> parent;
    explicit DisjointSets(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
    std::size_t find(std::size_t x) {
        while (parent[x] != x) {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        return x;
    }
    void unite(std::size_t a, std::size_t b) {
        a = find(a);
        b = find(b);
        if (a != b) parent[std::max(a, b)] = std::min(a, b);
    }
};

}  // namespace

Clustering cluster_detections(std::span<const geo::GeoPoint> points, double eps_m, std::size_t min_pts,
                              double radius_m) {
    if (!(eps_m > 0.0)) throw ValidationError("eps must be positive");
    if (min_pts == 0) throw ValidationError("min_pts must be at least 1");
    const std::size_t n = points.size();
    Clustering out;
    out.labels.assign(n, kNoise);
    if (n == 0) return out;
    const geo::Datum datum = points.front().datum();
    for (const auto& p : points) {
        if (p.datum() != datum) throw ValidationError("cluster points must share one datum");
    }

    // Arc length is at least R |dlat|, so a latitude window bounds the search.
    std::vector<std::size_t> by_lat(n);
    std::iota(by_lat.begin(), by_lat.end(), 0);
    std::sort(by_lat.begin(), by_lat.end(), [&](std::size_t a, std::size_t b) {
        return std::make_pair(points[a].lat(), a) < std::make_pair(points[b].lat(), b);
    });
    std::vector<double> lats(n);
    for (std::size_t k = 0; k < n; ++k) lats[k] = points[by_lat[k]].lat();
    const double window = eps_m / radius_m * 180.0 / M_PI * (1.0 + 1e-9);

    std::vector<std::vector<std::pair<std::size_t, double>>> nbrs(n);
    for (std::size_t k = 0; k < n; ++k) {
        const std::size_t i = by_lat[k];
        const auto lo = std::lower_bound(lats.begin(), lats.end(), lats[k] - window) - lats.begin();
        for (auto m = static_cast<std::size_t>(lo); m < n && lats[m] <= lats[k] + window; ++m) {
            const std::size_t j = by_lat[m];
            const double d = geo::haversine(points[i], points[j], radius_m);
            if (d <= eps_m) nbrs[i].emplace_back(j, d);
        }
    }

    std::vector<char> core(n, 0);
    for (std::size_t i = 0; i < n; ++i) core[i] = nbrs[i].size() >= min_pts;
    DisjointSets sets(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (!core[i]) continue;
        for (const auto& [j, d] : nbrs[i]) {
            if (core[j]) sets.unite(i, j);
        }
    }

    // Root of the component each point belongs to, or n for noise.
    std::vector<std::size_t> root(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        if (core[i]) {
            root[i] = sets.find(i);
            continue;
        }
        std::size_t best = n;
        double best_d = 0.0;
        for (const auto& [j, d] : nbrs[i]) {
            if (!core[j]) continue;
            const bool better = best == n || d < best_d ||
                                (d == best_d && std::make_pair(points[j].lat(), points[j].lon()) <
                                                    std::make_pair(points[best].lat(), points[best].lon()));
            if (better) {
                best = j;
                best_d = d;
            }
        }
        if (best != n) root[i] = sets.find(best);
    }

    std::vector<int> label_of(n, kNoise);
    std::vector<std::size_t> sizes;
    for (std::size_t i = 0; i < n; ++i) {
        if (root[i] == n) {
            ++out.noise;
            continue;
        }
        if (label_of[root[i]] == kNoise) {
            label_of[root[i]] = static_cast<int>(sizes.size());
            sizes.push_back(0);
        }
        out.labels[i] = label_of[root[i]];
        ++sizes[static_cast<std::size_t>(out.labels[i])];
    }
    out.clusters = sizes.size();
    for (std::size_t s : sizes) ++out.size_histogram[s];
    return out;
}

std::string size_histogram_csv(const Clustering& c) {
    std::string out = "size,clusters\n";
    for (const auto& [size, count] : c.size_histogram) {
        out += std::to_string(size) + ',' + std::to_string(count) + '\n';
    }
    return out;
}

}  // namespace flare::nightfire
