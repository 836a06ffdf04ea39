#include "pdn/bvh.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace pdn {

void TriSurface::add_tri(const Vec3& a, const Vec3& b, const Vec3& c, int facet) {
    const int base = static_cast<int>(points.size());
    points.push_back(a);
    points.push_back(b);
    points.push_back(c);
    tris.push_back({base, base + 1, base + 2});
    normals.push_back(normalized(cross(b - a, c - a)));
    source_facet.push_back(facet);
}

void TriSurface::add_quad(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d,
                          int facet) {
    add_tri(a, b, c, facet);
    add_tri(a, c, d, facet);
}

Vec3 closest_point_triangle(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c) {
    const Vec3 ab = b - a, ac = c - a, ap = p - a;
    const double d1 = dot(ab, ap), d2 = dot(ac, ap);
    if (d1 <= 0.0 && d2 <= 0.0) return a;

    const Vec3 bp = p - b;
    const double d3 = dot(ab, bp), d4 = dot(ac, bp);
    if (d3 >= 0.0 && d4 <= d3) return b;

    const double vc = d1 * d4 - d3 * d2;
    if (vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0) return a + (d1 / (d1 - d3)) * ab;

    const Vec3 cp = p - c;
    const double d5 = dot(ab, cp), d6 = dot(ac, cp);
    if (d6 >= 0.0 && d5 <= d6) return c;

    const double vb = d5 * d2 - d1 * d6;
    if (vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0) return a + (d2 / (d2 - d6)) * ac;

    const double va = d3 * d6 - d5 * d4;
    if (va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0)
        return b + ((d4 - d3) / ((d4 - d3) + (d5 - d6))) * (c - b);

    const double denom = 1.0 / (va + vb + vc);
    return a + (vb * denom) * ab + (vc * denom) * ac;
}

FacetBvh::FacetBvh(TriSurface surface) : surface_(std::move(surface)) {
    const int n = static_cast<int>(surface_.tris.size());
    order_.resize(n);
    std::iota(order_.begin(), order_.end(), 0);
    nodes_.reserve(2 * n);
    if (n > 0) root_ = build(order_, 0, n);

    double per = 0.0;
    for (const auto& t : surface_.tris) {
        per += norm(surface_.points[t[1]] - surface_.points[t[0]]);
    }
    typical_size_ = n > 0 ? per / n : 0.0;
}

int FacetBvh::build(std::vector<int>& ids, int begin, int end) {
    Node node;
    node.lo = Vec3{1e300, 1e300, 1e300};
    node.hi = Vec3{-1e300, -1e300, -1e300};
    for (int k = begin; k < end; ++k)
        for (int v : surface_.tris[ids[k]]) {
            const Vec3& p = surface_.points[v];
            for (int i = 0; i < 3; ++i) {
                node.lo[i] = std::min(node.lo[i], p[i]);
                node.hi[i] = std::max(node.hi[i], p[i]);
            }
        }
    const int idx = static_cast<int>(nodes_.size());
    nodes_.push_back(node);
    if (end - begin <= 4) {
        nodes_[idx].begin = begin;
        nodes_[idx].end = end;
        return idx;
    }
    const Vec3 ext = node.hi - node.lo;
    int axis = 0;
    if (ext.y > ext.x) axis = 1;
    if (ext.z > ext[axis]) axis = 2;
    const int mid = (begin + end) / 2;
    std::nth_element(ids.begin() + begin, ids.begin() + mid, ids.begin() + end,
                     [&](int a, int b) {
                         const auto ca = surface_.points[surface_.tris[a][0]][axis] +
                                         surface_.points[surface_.tris[a][1]][axis] +
                                         surface_.points[surface_.tris[a][2]][axis];
                         const auto cb = surface_.points[surface_.tris[b][0]][axis] +
                                         surface_.points[surface_.tris[b][1]][axis] +
                                         surface_.points[surface_.tris[b][2]][axis];
                         return ca < cb;
                     });
    const int l = build(ids, begin, mid);
    const int r = build(ids, mid, end);
    nodes_[idx].left = l;
    nodes_[idx].right = r;
    return idx;
}

namespace {

double box_dist2(const Vec3& q, const Vec3& lo, const Vec3& hi) {
    double d2 = 0.0;
    for (int i = 0; i < 3; ++i) {
        const double v = q[i] < lo[i] ? lo[i] - q[i] : (q[i] > hi[i] ? q[i] - hi[i] : 0.0);
        d2 += v * v;
    }
    return d2;
}

}  // namespace

FacetBvh::Hit FacetBvh::closest(const Vec3& q) const {
    Hit best;
    best.distance = std::numeric_limits<double>::infinity();
    if (root_ < 0) return best;

    // second-best candidate kept to detect opposing-normal ties
    double second_dist = std::numeric_limits<double>::infinity();
    Vec3 second_normal;

    int stack[128];
    int top = 0;
    stack[top++] = root_;
    while (top > 0) {
        const Node& node = nodes_[stack[--top]];
        if (box_dist2(q, node.lo, node.hi) > best.distance * best.distance + 1e-30) continue;
        if (node.left < 0) {
            for (int k = node.begin; k < node.end; ++k) {
                const int t = order_[k];
                const auto& tri = surface_.tris[t];
                const Vec3 p = closest_point_triangle(q, surface_.points[tri[0]],
                                                      surface_.points[tri[1]],
                                                      surface_.points[tri[2]]);
                const double dist = norm(q - p);
                if (dist < best.distance - 1e-12 ||
                    (std::abs(dist - best.distance) <= 1e-12 && t < best.tri)) {
                    if (best.tri >= 0 && std::abs(dist - best.distance) <= 1e-12) {
                        second_dist = best.distance;
                        second_normal = best.normal;
                    }
                    best.point = p;
                    best.normal = surface_.normals[t];
                    best.distance = dist;
                    best.tri = t;
                } else if (std::abs(dist - best.distance) <= 1e-12 && dist < second_dist) {
                    second_dist = dist;
                    second_normal = surface_.normals[t];
                }
            }
        } else {
            stack[top++] = node.left;
            stack[top++] = node.right;
        }
    }
    best.signed_gap = dot(q - best.point, best.normal);
    if (std::isfinite(second_dist) && std::abs(second_dist - best.distance) <= 1e-12 &&
        dot(second_normal, best.normal) < 0.0)
        best.ambiguous = true;
    return best;
}

} // namespace pdn
