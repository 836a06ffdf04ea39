#pragma once

#include <array>
#include <map>
#include <vector>

#include "pdn/mesh.hpp"

namespace pdn {

/// Predicted post-division mesh dimensions.
struct RefineDims {
    Index n_e = 0;  // elements
    Index n_n = 0;  // nodes
    Index n_b = 0;  // boundary facets
};

/// One level of the multiplication plan: the unique edge/face tables with
/// their interface (non-dividing) flags, plus the predicted dimensions.
///
/// Interface edges are the through-thickness (zero-length) edges of ELINT8
/// elements; interface faces are their lateral (zero-area) faces. Neither
/// receives a new node, which is exactly what the interface corrections in
/// the node-count prediction subtract.
struct RefinementPlan {
    int ndivi = 1;
    std::map<std::array<Index, 2>, bool> edges;  // sorted node pair -> is_interface
    std::map<std::array<Index, 4>, bool> faces;  // sorted node quad -> is_interface
    RefineDims predicted;
};

/// Builds the single-level plan for a hybrid HEX8 + ELINT8 mesh.
/// Throws UnsupportedKindError if any other element kind is present.
RefinementPlan make_refinement_plan(const MeshModel& model);

/// Exact post-division counts for one level of multiplication.
RefineDims get_dimensions(const MeshModel& model);

/// Uniform subdivision applied recursively ndivi times. Each HEX8 splits
/// into 8, each ELINT8 into 4 (planes parallel to the stacking direction
/// only), boundary facets into 4 (2 on ELINT lateral faces). Children
/// inherit material id, frame, ply angle and stacking direction. Node sets
/// gain a new node when every parent node of its edge/face/cell belongs to
/// the set. Realized counts are checked against the prediction and a
/// mismatch throws.
MeshModel divide_mesh(const MeshModel& model, int ndivi);

/// Characteristic length after ndivi levels: lc / 2^ndivi.
double child_length_scale(double parent_lc, int ndivi);

} // namespace pdn
