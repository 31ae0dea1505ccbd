#include "flare/geo/knn.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

#include "flare/error.hpp"
#include "flare/simd/kernels.hpp"

namespace flare::geo {

namespace {
constexpr std::uint32_t kLeafSize = 16;
}  // namespace

SpatialIndex::SpatialIndex(std::span<const GeoPoint> points, double radius_m)
    : points_(points.begin(), points.end()), radius_m_(radius_m) {
    if (points_.empty()) throw ValidationError("spatial index needs at least one point");
    datum_ = points_.front().datum();
    for (const auto& p : points_) {
        if (p.datum() != datum_) throw ValidationError("spatial index points must share one datum");
    }
    const std::size_t n = points_.size();
    ids_.resize(n);
    std::iota(ids_.begin(), ids_.end(), 0u);
    std::vector<std::array<double, 3>> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = unit_vector(points_[i]);
    // Build over ids, then lay the coordinates out in tree order.
    struct Builder {
        std::vector<std::array<double, 3>>& v;
        std::vector<std::uint32_t>& ids;
        std::vector<Node>& nodes;
        std::int32_t operator()(std::uint32_t begin, std::uint32_t end) {
            const auto index = static_cast<std::int32_t>(nodes.size());
            nodes.push_back(Node{begin, end, -1, -1, 0, 0.0});
            if (end - begin <= kLeafSize) return index;
            double lo[3] = {2, 2, 2};
            double hi[3] = {-2, -2, -2};
            for (std::uint32_t i = begin; i < end; ++i) {
                for (int a = 0; a < 3; ++a) {
                    lo[a] = std::min(lo[a], v[ids[i]][a]);
                    hi[a] = std::max(hi[a], v[ids[i]][a]);
                }
            }
            int axis = 0;
            for (int a = 1; a < 3; ++a) {
                if (hi[a] - lo[a] > hi[axis] - lo[axis]) axis = a;
            }
            const std::uint32_t mid = begin + (end - begin) / 2;
            std::nth_element(ids.begin() + begin, ids.begin() + mid, ids.begin() + end,
                             [&](std::uint32_t a, std::uint32_t b) { return v[a][axis] < v[b][axis]; });
            const double split = v[ids[mid]][axis];
            const std::int32_t left = (*this)(begin, mid);
            const std::int32_t right = (*this)(mid, end);
            nodes[index].axis = axis;
            nodes[index].split = split;
            nodes[index].left = left;
            nodes[index].right = right;
            return index;
        }
    };
    Builder{v, ids_, nodes_}(0, static_cast<std::uint32_t>(n));
    xs_.resize(n);
    ys_.resize(n);
    zs_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        xs_[i] = v[ids_[i]][0];
        ys_[i] = v[ids_[i]][1];
        zs_[i] = v[ids_[i]][2];
    }
}

void SpatialIndex::search(std::int32_t node, const double q[3], double& best, std::size_t& best_id,
                          std::vector<double>& scratch) const {
    const Node& nd = nodes_[static_cast<std::size_t>(node)];
    if (nd.left < 0) {
        const std::size_t count = nd.end - nd.begin;
        scratch.resize(count);
        simd::kernels().chord2(xs_.data() + nd.begin, ys_.data() + nd.begin, zs_.data() + nd.begin, count, q[0], q[1],
                               q[2], scratch.data());
        for (std::size_t i = 0; i < count; ++i) {
            const std::size_t id = ids_[nd.begin + i];
            if (scratch[i] < best || (scratch[i] == best && id < best_id)) {
                best = scratch[i];
                best_id = id;
            }
        }
        return;
    }
    const double diff = q[nd.axis] - nd.split;
    const std::int32_t near = diff < 0.0 ? nd.left : nd.right;
    const std::int32_t far = diff < 0.0 ? nd.right : nd.left;
    search(near, q, best, best_id, scratch);
    if (diff * diff <= best) search(far, q, best, best_id, scratch);
}

Neighbor SpatialIndex::nearest(const GeoPoint& q) const {
    if (q.datum() != datum_) throw ValidationError("query datum differs from the indexed points");
    const auto u = unit_vector(q);
    const double qv[3] = {u[0], u[1], u[2]};
    double best = std::numeric_limits<double>::infinity();
    std::size_t best_id = std::numeric_limits<std::size_t>::max();
    std::vector<double> scratch;
    scratch.reserve(kLeafSize);
    search(0, qv, best, best_id, scratch);
    return {best_id, haversine(points_[best_id], q, radius_m_)};
}

std::vector<Neighbor> SpatialIndex::nearest(std::span<const GeoPoint> queries) const {
    std::vector<Neighbor> out;
    out.reserve(queries.size());
    for (const auto& q : queries) out.push_back(nearest(q));
    return out;
}

Neighbor nearest_brute_force(std::span<const GeoPoint> points, const GeoPoint& q, double radius_m) {
    if (points.empty()) throw ValidationError("nearest-neighbour search needs at least one point");
    Neighbor best{0, std::numeric_limits<double>::infinity()};
    for (std::size_t i = 0; i < points.size(); ++i) {
        const double d = haversine(points[i], q, radius_m);
        if (d < best.distance_m) best = {i, d};
    }
    return best;
}

}  // namespace flare::geo
