#pragma once

#include <array>
#include <vector>

#include "pdn/common.hpp"

namespace pdn {

/// Triangulated surface in its own (body-local) frame. Quads are split on
/// construction; facet ids refer back to the source facets.
struct TriSurface {
    std::vector<Vec3> points;
    std::vector<std::array<int, 3>> tris;
    std::vector<Vec3> normals;     // per triangle, outward
    std::vector<int> source_facet; // per triangle

    void add_tri(const Vec3& a, const Vec3& b, const Vec3& c, int facet);
    void add_quad(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d, int facet);
};

/// Static bounding-volume hierarchy for closest-point projection. The rigid
/// body moves by translation, applied as a query-time transform, so the tree
/// is never rebuilt during a run.
class FacetBvh {
public:
    explicit FacetBvh(TriSurface surface);

    struct Hit {
        Vec3 point;        // closest point on the surface
        Vec3 normal;       // outward normal of the owning triangle
        double distance = 0.0;
        double signed_gap = 0.0;  // (q - point) . normal
        int tri = -1;
        bool ambiguous = false;   // equidistant facets with opposing normals
    };

    Hit closest(const Vec3& q) const;

    const TriSurface& surface() const { return surface_; }
    double typical_facet_size() const { return typical_size_; }

private:
    struct Node {
        Vec3 lo, hi;
        int left = -1, right = -1;  // children, or leaf range below
        int begin = 0, end = 0;
    };

    int build(std::vector<int>& ids, int begin, int end);

    TriSurface surface_;
    std::vector<Node> nodes_;
    std::vector<int> order_;
    int root_ = -1;
    double typical_size_ = 0.0;
};

/// Closest point on triangle abc to p (Ericson, Real-Time Collision Detection).
Vec3 closest_point_triangle(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c);

} // namespace pdn
