#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "pdn/common.hpp"
#include "pdn/errors.hpp"

namespace pdn {

/// Element taxonomy. ELINT8 is the 8-node zero-thickness interface element:
/// nodes 0-3 are the bottom facet, nodes 4-7 the top facet, and node k
/// coincides with node k+4 in the reference configuration.
enum class ElementKind : std::uint8_t { HEX8, TET4, ELINT8, QUAD4, TRI3 };

int node_count(ElementKind k);
bool is_bulk(ElementKind k);
bool is_boundary(ElementKind k);
const char* kind_name(ElementKind k);
ElementKind kind_from_name(const std::string& name);

/// Orthonormal material frame; rows a1 (fiber), a2, a3 (stacking).
struct MaterialFrame {
    Vec3 a1{1, 0, 0}, a2{0, 1, 0}, a3{0, 0, 1};
};

struct ElementBlock {
    ElementKind kind = ElementKind::HEX8;
    int material_id = 0;
    std::vector<Index> connectivity;  // node_count(kind) entries per element

    Index size() const { return static_cast<Index>(connectivity.size()) / node_count(kind); }
    const Index* nodes_of(Index e) const { return connectivity.data() + e * node_count(kind); }
};

/// Boundary facet reference: a local face of a volume element.
struct FacetRef {
    Index element = 0;   // global element id
    int local_face = 0;  // 0-based local face index
};

struct BoundarySet {
    std::string name;
    std::vector<FacetRef> facets;
};

struct NodeSet {
    std::string name;
    std::vector<Index> nodes;
};

/// Hybrid bulk/interface mesh. Immutable after load/build; all ids are
/// 0-based in memory and 1-based in files.
struct MeshModel {
    std::vector<Vec3> nodes;           // coordinates in mm
    std::vector<ElementBlock> blocks;
    std::vector<BoundarySet> bsets;
    std::vector<NodeSet> nsets;

    // optional per-element fields, keyed by global element id
    std::map<Index, MaterialFrame> frames;
    std::map<Index, double> ply_angles;   // degrees
    std::map<Index, Vec3> stacking;       // unit vector, required for ELINT8

    Index node_count_total() const { return static_cast<Index>(nodes.size()); }
    Index element_count() const;
    Index boundary_facet_count() const;

    /// Global element id -> (block index, element-in-block index).
    std::pair<int, Index> locate(Index element) const;
    ElementKind kind_of(Index element) const;
    const Index* nodes_of(Index element) const;

    const BoundarySet& bset(const std::string& name) const;
    const NodeSet& nset(const std::string& name) const;
    bool has_bset(const std::string& name) const;

    MaterialFrame frame_of(Index element) const;  // identity if unset
    double ply_angle_of(Index element) const;     // 0 if unset
};

/// Local faces of a HEX8 in reference node order; each row is a
/// counterclockwise quad seen from outside the element.
extern const int kHexFaces[6][4];
/// Local faces of a TET4 (outward triangles).
extern const int kTetFaces[4][3];
/// Local edges of a HEX8.
extern const int kHexEdges[12][2];

struct SurfaceFacet {
    Index element = 0;
    int local_face = 0;
    int n_nodes = 0;
    std::array<Index, 4> nodes{};  // global node ids (n_nodes valid)
    Vec3 normal;                   // outward unit normal at rest
    double area = 0.0;
};

MeshModel load_mesh(const std::string& path);
void save_mesh(const MeshModel& model, const std::string& path);

/// Full invariant check (connectivity ranges, ELINT coincidence, Jacobians,
/// frame orthonormality). Throws ValidationError naming the offender.
void validate_mesh(const MeshModel& model);

/// Gauss-quadrature volume of a bulk element (HEX8: 2x2x2, TET4: 1 point).
double element_volume(const MeshModel& model, Index element);

/// Facets of a named boundary set with outward unit normals at rest.
std::vector<SurfaceFacet> extract_surface(const MeshModel& model, const std::string& bset_name);

/// Facet list for facets given directly as surface blocks (QUAD4/TRI3
/// element blocks, used for rigid master surfaces).
std::vector<SurfaceFacet> surface_from_blocks(const MeshModel& model);

} // namespace pdn
