#include "pdn/mesh.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

namespace pdn {

const int kHexFaces[6][4] = {
    {0, 3, 2, 1}, {4, 5, 6, 7}, {0, 1, 5, 4}, {1, 2, 6, 5}, {2, 3, 7, 6}, {3, 0, 4, 7}};
const int kTetFaces[4][3] = {{0, 2, 1}, {0, 1, 3}, {1, 2, 3}, {0, 3, 2}};
const int kHexEdges[12][2] = {{0, 1}, {1, 2}, {2, 3}, {3, 0}, {4, 5}, {5, 6},
                              {6, 7}, {7, 4}, {0, 4}, {1, 5}, {2, 6}, {3, 7}};

int node_count(ElementKind k) {
    switch (k) {
        case ElementKind::HEX8: return 8;
        case ElementKind::TET4: return 4;
        case ElementKind::ELINT8: return 8;
        case ElementKind::QUAD4: return 4;
        case ElementKind::TRI3: return 3;
    }
    return 0;
}

bool is_bulk(ElementKind k) { return k == ElementKind::HEX8 || k == ElementKind::TET4; }
bool is_boundary(ElementKind k) { return k == ElementKind::QUAD4 || k == ElementKind::TRI3; }

const char* kind_name(ElementKind k) {
    switch (k) {
        case ElementKind::HEX8: return "HEX8";
        case ElementKind::TET4: return "TET4";
        case ElementKind::ELINT8: return "ELINT8";
        case ElementKind::QUAD4: return "QUAD4";
        case ElementKind::TRI3: return "TRI3";
    }
    return "?";
}

ElementKind kind_from_name(const std::string& name) {
    if (name == "HEX8") return ElementKind::HEX8;
    if (name == "TET4") return ElementKind::TET4;
    if (name == "ELINT8") return ElementKind::ELINT8;
    if (name == "QUAD4") return ElementKind::QUAD4;
    if (name == "TRI3") return ElementKind::TRI3;
    throw ParseError("unknown element kind '" + name + "'");
}

Index MeshModel::element_count() const {
    Index n = 0;
    for (const auto& b : blocks) n += b.size();
    return n;
}

Index MeshModel::boundary_facet_count() const {
    Index n = 0;
    for (const auto& s : bsets) n += static_cast<Index>(s.facets.size());
    return n;
}

std::pair<int, Index> MeshModel::locate(Index element) const {
    Index off = 0;
    for (int b = 0; b < static_cast<int>(blocks.size()); ++b) {
        const Index n = blocks[b].size();
        if (element < off + n) return {b, element - off};
        off += n;
    }
    throw ValidationError("element id " + std::to_string(element) + " out of range");
}

ElementKind MeshModel::kind_of(Index element) const {
    auto [b, e] = locate(element);
    return blocks[b].kind;
}

const Index* MeshModel::nodes_of(Index element) const {
    auto [b, e] = locate(element);
    return blocks[b].nodes_of(e);
}

const BoundarySet& MeshModel::bset(const std::string& name) const {
    for (const auto& s : bsets)
        if (s.name == name) return s;
    throw UnknownSetError("boundary set '" + name + "' not found");
}

const NodeSet& MeshModel::nset(const std::string& name) const {
    for (const auto& s : nsets)
        if (s.name == name) return s;
    throw UnknownSetError("node set '" + name + "' not found");
}

bool MeshModel::has_bset(const std::string& name) const {
    for (const auto& s : bsets)
        if (s.name == name) return true;
    return false;
}

MaterialFrame MeshModel::frame_of(Index element) const {
    auto it = frames.find(element);
    return it == frames.end() ? MaterialFrame{} : it->second;
}

double MeshModel::ply_angle_of(Index element) const {
    auto it = ply_angles.find(element);
    return it == ply_angles.end() ? 0.0 : it->second;
}

// ---------------------------------------------------------------------------
// Quadrature helpers
// ---------------------------------------------------------------------------

namespace {

void hex_shape_deriv(double xi, double eta, double zeta, double dN[8][3]) {
    const double sx[8] = {-1, 1, 1, -1, -1, 1, 1, -1};
    const double sy[8] = {-1, -1, 1, 1, -1, -1, 1, 1};
    const double sz[8] = {-1, -1, -1, -1, 1, 1, 1, 1};
    for (int a = 0; a < 8; ++a) {
        dN[a][0] = 0.125 * sx[a] * (1 + sy[a] * eta) * (1 + sz[a] * zeta);
        dN[a][1] = 0.125 * sy[a] * (1 + sx[a] * xi) * (1 + sz[a] * zeta);
        dN[a][2] = 0.125 * sz[a] * (1 + sx[a] * xi) * (1 + sy[a] * eta);
    }
}

Mat3 hex_jacobian(const Vec3* x, double xi, double eta, double zeta) {
    double dN[8][3];
    hex_shape_deriv(xi, eta, zeta, dN);
    Mat3 J;  // J(i,j) = dx_i/dxi_j
    for (int a = 0; a < 8; ++a)
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) J(i, j) += x[a][i] * dN[a][j];
    return J;
}

constexpr double kGaussPt = 0.5773502691896257;  // 1/sqrt(3)

double bbox_diagonal(const MeshModel& m) {
    if (m.nodes.empty()) return 0.0;
    Vec3 lo = m.nodes[0], hi = m.nodes[0];
    for (const auto& p : m.nodes) {
        for (int i = 0; i < 3; ++i) {
            lo[i] = std::min(lo[i], p[i]);
            hi[i] = std::max(hi[i], p[i]);
        }
    }
    return norm(hi - lo);
}

}  // namespace

double element_volume(const MeshModel& model, Index element) {
    auto [b, e] = model.locate(element);
    const ElementBlock& blk = model.blocks[b];
    const Index* conn = blk.nodes_of(e);
    if (blk.kind == ElementKind::HEX8) {
        Vec3 x[8];
        for (int a = 0; a < 8; ++a) x[a] = model.nodes[conn[a]];
        double vol = 0.0;
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j)
                for (int k = 0; k < 2; ++k) {
                    const Mat3 J = hex_jacobian(x, (i ? kGaussPt : -kGaussPt),
                                                (j ? kGaussPt : -kGaussPt),
                                                (k ? kGaussPt : -kGaussPt));
                    vol += det(J);
                }
        return vol;
    }
    if (blk.kind == ElementKind::TET4) {
        const Vec3 x0 = model.nodes[conn[0]];
        Mat3 D;
        for (int c = 1; c < 4; ++c) {
            const Vec3 d = model.nodes[conn[c]] - x0;
            for (int i = 0; i < 3; ++i) D(i, c - 1) = d[i];
        }
        return det(D) / 6.0;
    }
    throw KindError("element_volume: element " + std::to_string(element) + " has kind " +
                    kind_name(blk.kind) + "; only bulk elements have a volume");
}

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

void validate_mesh(const MeshModel& model) {
    const Index nn = model.node_count_total();
    const double diag = bbox_diagonal(model);
    const double coincide_tol = 1e-9 * (diag > 0 ? diag : 1.0);

    Index gid = 0;
    for (const auto& blk : model.blocks) {
        const int npe = node_count(blk.kind);
        for (Index e = 0; e < blk.size(); ++e, ++gid) {
            const Index* conn = blk.nodes_of(e);
            for (int a = 0; a < npe; ++a) {
                if (conn[a] < 0 || conn[a] >= nn)
                    throw ValidationError("element " + std::to_string(gid + 1) +
                                          " references node " + std::to_string(conn[a] + 1) +
                                          " of " + std::to_string(nn));
                for (int b2 = a + 1; b2 < npe; ++b2)
                    if (conn[a] == conn[b2])
                        throw ValidationError("element " + std::to_string(gid + 1) +
                                              " references node " + std::to_string(conn[a] + 1) +
                                              " twice");
            }
            if (blk.kind == ElementKind::ELINT8) {
                for (int a = 0; a < 4; ++a) {
                    const double gap = norm(model.nodes[conn[a]] - model.nodes[conn[a + 4]]);
                    if (gap > coincide_tol)
                        throw ValidationError("ELINT8 element " + std::to_string(gid + 1) +
                                              " facets not coincident at rest (gap " +
                                              std::to_string(gap) + " mm)");
                }
                if (model.stacking.find(gid) == model.stacking.end())
                    throw ValidationError("ELINT8 element " + std::to_string(gid + 1) +
                                          " is missing its stacking direction field");
            }
            if (blk.kind == ElementKind::HEX8) {
                Vec3 x[8];
                for (int a = 0; a < 8; ++a) x[a] = model.nodes[conn[a]];
                for (int i = 0; i < 2; ++i)
                    for (int j = 0; j < 2; ++j)
                        for (int k = 0; k < 2; ++k) {
                            const double dj = det(hex_jacobian(
                                x, (i ? kGaussPt : -kGaussPt), (j ? kGaussPt : -kGaussPt),
                                (k ? kGaussPt : -kGaussPt)));
                            if (dj <= 0.0)
                                throw ValidationError("element " + std::to_string(gid + 1) +
                                                      " has non-positive Jacobian " +
                                                      std::to_string(dj));
                        }
            }
            if (blk.kind == ElementKind::TET4) {
                if (element_volume(model, gid) <= 0.0)
                    throw ValidationError("element " + std::to_string(gid + 1) +
                                          " has non-positive volume");
            }
        }
    }

    for (const auto& [eid, fr] : model.frames) {
        const Vec3 v[3] = {fr.a1, fr.a2, fr.a3};
        for (int i = 0; i < 3; ++i) {
            if (std::abs(norm(v[i]) - 1.0) > 1e-12)
                throw ValidationError("material frame of element " + std::to_string(eid + 1) +
                                      " is not unit length");
            for (int j = i + 1; j < 3; ++j)
                if (std::abs(dot(v[i], v[j])) > 1e-12)
                    throw ValidationError("material frame of element " + std::to_string(eid + 1) +
                                          " is not orthogonal");
        }
    }

    for (const auto& s : model.bsets)
        for (const auto& f : s.facets) {
            model.locate(f.element);  // throws if out of range
            const ElementKind k = model.kind_of(f.element);
            const int nf = (k == ElementKind::HEX8 || k == ElementKind::ELINT8) ? 6
                           : (k == ElementKind::TET4)                           ? 4
                                                                                : 0;
            if (f.local_face < 0 || f.local_face >= nf)
                throw ValidationError("boundary set '" + s.name + "' references face " +
                                      std::to_string(f.local_face + 1) + " of element " +
                                      std::to_string(f.element + 1));
        }

    for (const auto& s : model.nsets)
        for (Index n : s.nodes)
            if (n < 0 || n >= nn)
                throw ValidationError("node set '" + s.name + "' references node " +
                                      std::to_string(n + 1) + " of " + std::to_string(nn));
}

// ---------------------------------------------------------------------------
// Surface extraction
// ---------------------------------------------------------------------------

namespace {

SurfaceFacet make_facet(const MeshModel& model, Index element, int local_face) {
    const ElementKind k = model.kind_of(element);
    const Index* conn = model.nodes_of(element);
    SurfaceFacet f;
    f.element = element;
    f.local_face = local_face;
    if (k == ElementKind::HEX8 || k == ElementKind::ELINT8) {
        f.n_nodes = 4;
        for (int i = 0; i < 4; ++i) f.nodes[i] = conn[kHexFaces[local_face][i]];
        const Vec3 d1 = model.nodes[f.nodes[2]] - model.nodes[f.nodes[0]];
        const Vec3 d2 = model.nodes[f.nodes[3]] - model.nodes[f.nodes[1]];
        const Vec3 c = cross(d1, d2);
        f.area = 0.5 * norm(c);
        f.normal = f.area > 0 ? normalized(c) : Vec3{};
    } else if (k == ElementKind::TET4) {
        f.n_nodes = 3;
        for (int i = 0; i < 3; ++i) f.nodes[i] = conn[kTetFaces[local_face][i]];
        const Vec3 c = cross(model.nodes[f.nodes[1]] - model.nodes[f.nodes[0]],
                             model.nodes[f.nodes[2]] - model.nodes[f.nodes[0]]);
        f.area = 0.5 * norm(c);
        f.normal = f.area > 0 ? normalized(c) : Vec3{};
    } else {
        throw KindError("cannot extract a face of a boundary element");
    }
    return f;
}

}  // namespace

std::vector<SurfaceFacet> extract_surface(const MeshModel& model, const std::string& bset_name) {
    const BoundarySet& s = model.bset(bset_name);
    std::vector<SurfaceFacet> out;
    out.reserve(s.facets.size());
    for (const auto& fr : s.facets) out.push_back(make_facet(model, fr.element, fr.local_face));
    return out;
}

std::vector<SurfaceFacet> surface_from_blocks(const MeshModel& model) {
    std::vector<SurfaceFacet> out;
    Index gid = 0;
    for (const auto& blk : model.blocks) {
        if (is_boundary(blk.kind)) {
            for (Index e = 0; e < blk.size(); ++e) {
                const Index* conn = blk.nodes_of(e);
                SurfaceFacet f;
                f.element = gid + e;
                f.local_face = 0;
                f.n_nodes = node_count(blk.kind);
                for (int i = 0; i < f.n_nodes; ++i) f.nodes[i] = conn[i];
                if (f.n_nodes == 4) {
                    const Vec3 c = cross(model.nodes[f.nodes[2]] - model.nodes[f.nodes[0]],
                                         model.nodes[f.nodes[3]] - model.nodes[f.nodes[1]]);
                    f.area = 0.5 * norm(c);
                    f.normal = normalized(c);
                } else {
                    const Vec3 c = cross(model.nodes[f.nodes[1]] - model.nodes[f.nodes[0]],
                                         model.nodes[f.nodes[2]] - model.nodes[f.nodes[0]]);
                    f.area = 0.5 * norm(c);
                    f.normal = normalized(c);
                }
                out.push_back(f);
            }
        }
        gid += blk.size();
    }
    return out;
}

// ---------------------------------------------------------------------------
// File I/O. Line-oriented text format, '#' comments, ids 1-based on disk.
// ---------------------------------------------------------------------------

namespace {

class TokenStream {
public:
    explicit TokenStream(std::istream& in) : in_(in) {}

    bool next(std::string& tok) {
        for (;;) {
            if (pos_ >= line_.size()) {
                if (!std::getline(in_, line_)) return false;
                ++lineno_;
                pos_ = 0;
                continue;
            }
            while (pos_ < line_.size() && std::isspace(static_cast<unsigned char>(line_[pos_])))
                ++pos_;
            if (pos_ >= line_.size()) continue;
            if (line_[pos_] == '#') {
                pos_ = line_.size();
                continue;
            }
            std::size_t start = pos_;
            while (pos_ < line_.size() && !std::isspace(static_cast<unsigned char>(line_[pos_])))
                ++pos_;
            tok = line_.substr(start, pos_ - start);
            return true;
        }
    }

    std::string require(const char* what) {
        std::string tok;
        if (!next(tok))
            throw ParseError(std::string("unexpected end of file, expected ") + what +
                             " near line " + std::to_string(lineno_));
        return tok;
    }

    long long require_int(const char* what) {
        const std::string tok = require(what);
        try {
            std::size_t used = 0;
            const long long v = std::stoll(tok, &used);
            if (used != tok.size()) throw std::invalid_argument(tok);
            return v;
        } catch (const std::exception&) {
            throw ParseError("expected integer for " + std::string(what) + ", got '" + tok +
                             "' near line " + std::to_string(lineno_));
        }
    }

    double require_double(const char* what) {
        const std::string tok = require(what);
        try {
            std::size_t used = 0;
            const double v = std::stod(tok, &used);
            if (used != tok.size()) throw std::invalid_argument(tok);
            return v;
        } catch (const std::exception&) {
            throw ParseError("expected number for " + std::string(what) + ", got '" + tok +
                             "' near line " + std::to_string(lineno_));
        }
    }

    int lineno() const { return lineno_; }

private:
    std::istream& in_;
    std::string line_;
    std::size_t pos_ = 0;
    int lineno_ = 0;
};

}  // namespace

MeshModel load_mesh(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open mesh file '" + path + "'");
    TokenStream ts(in);

    if (ts.require("header") != "MESH") throw ParseError("missing MESH header in " + path);
    if (ts.require("version") != "v1") throw ParseError("unsupported mesh version in " + path);

    MeshModel m;
    std::string tok;
    while (ts.next(tok)) {
        if (tok == "NODES") {
            const long long n = ts.require_int("node count");
            m.nodes.resize(n);
            for (long long i = 0; i < n; ++i) {
                const long long id = ts.require_int("node id");
                if (id < 1 || id > n)
                    throw ParseError("node id " + std::to_string(id) + " out of range");
                Vec3& p = m.nodes[id - 1];
                p.x = ts.require_double("x");
                p.y = ts.require_double("y");
                p.z = ts.require_double("z");
            }
        } else if (tok == "BLOCK") {
            ElementBlock blk;
            blk.kind = kind_from_name(ts.require("element kind"));
            blk.material_id = static_cast<int>(ts.require_int("material id"));
            const long long count = ts.require_int("element count");
            const int npe = node_count(blk.kind);
            blk.connectivity.resize(count * npe);
            for (long long e = 0; e < count; ++e)
                for (int a = 0; a < npe; ++a)
                    blk.connectivity[e * npe + a] = ts.require_int("connectivity") - 1;
            m.blocks.push_back(std::move(blk));
        } else if (tok == "BSET") {
            BoundarySet s;
            s.name = ts.require("set name");
            const long long count = ts.require_int("facet count");
            s.facets.resize(count);
            for (long long i = 0; i < count; ++i) {
                s.facets[i].element = ts.require_int("element id") - 1;
                s.facets[i].local_face = static_cast<int>(ts.require_int("local face id")) - 1;
            }
            m.bsets.push_back(std::move(s));
        } else if (tok == "NSET") {
            NodeSet s;
            s.name = ts.require("set name");
            const long long count = ts.require_int("node count");
            s.nodes.resize(count);
            for (long long i = 0; i < count; ++i) s.nodes[i] = ts.require_int("node id") - 1;
            m.nsets.push_back(std::move(s));
        } else if (tok == "FIELD") {
            const std::string field = ts.require("field name");
            const long long count = ts.require_int("field count");
            for (long long i = 0; i < count; ++i) {
                const Index eid = ts.require_int("element id") - 1;
                if (field == "frame") {
                    MaterialFrame fr;
                    for (Vec3* v : {&fr.a1, &fr.a2, &fr.a3}) {
                        v->x = ts.require_double("frame component");
                        v->y = ts.require_double("frame component");
                        v->z = ts.require_double("frame component");
                    }
                    m.frames[eid] = fr;
                } else if (field == "ply_angle") {
                    m.ply_angles[eid] = ts.require_double("ply angle");
                } else if (field == "stacking") {
                    Vec3 s;
                    s.x = ts.require_double("stacking component");
                    s.y = ts.require_double("stacking component");
                    s.z = ts.require_double("stacking component");
                    m.stacking[eid] = s;
                } else {
                    throw ParseError("unknown FIELD '" + field + "' near line " +
                                     std::to_string(ts.lineno()));
                }
            }
        } else {
            throw ParseError("unexpected token '" + tok + "' near line " +
                             std::to_string(ts.lineno()));
        }
    }

    validate_mesh(m);
    return m;
}

void save_mesh(const MeshModel& model, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot open '" + path + "' for writing");
    char buf[256];
    out << "MESH v1\n";
    out << "NODES " << model.nodes.size() << "\n";
    for (std::size_t i = 0; i < model.nodes.size(); ++i) {
        const Vec3& p = model.nodes[i];
        std::snprintf(buf, sizeof buf, "%zu %.17g %.17g %.17g\n", i + 1, p.x, p.y, p.z);
        out << buf;
    }
    for (const auto& blk : model.blocks) {
        out << "BLOCK " << kind_name(blk.kind) << " " << blk.material_id << " " << blk.size()
            << "\n";
        const int npe = node_count(blk.kind);
        for (Index e = 0; e < blk.size(); ++e) {
            const Index* conn = blk.nodes_of(e);
            for (int a = 0; a < npe; ++a) out << conn[a] + 1 << (a + 1 == npe ? '\n' : ' ');
        }
    }
    for (const auto& s : model.bsets) {
        out << "BSET " << s.name << " " << s.facets.size() << "\n";
        for (const auto& f : s.facets) out << f.element + 1 << " " << f.local_face + 1 << "\n";
    }
    for (const auto& s : model.nsets) {
        out << "NSET " << s.name << " " << s.nodes.size() << "\n";
        for (Index n : s.nodes) out << n + 1 << "\n";
    }
    if (!model.frames.empty()) {
        out << "FIELD frame " << model.frames.size() << "\n";
        for (const auto& [eid, fr] : model.frames) {
            std::snprintf(buf, sizeof buf, "%lld %.17g %.17g %.17g %.17g %.17g %.17g %.17g %.17g %.17g\n",
                          static_cast<long long>(eid + 1), fr.a1.x, fr.a1.y, fr.a1.z, fr.a2.x,
                          fr.a2.y, fr.a2.z, fr.a3.x, fr.a3.y, fr.a3.z);
            out << buf;
        }
    }
    if (!model.ply_angles.empty()) {
        out << "FIELD ply_angle " << model.ply_angles.size() << "\n";
        for (const auto& [eid, a] : model.ply_angles) {
            std::snprintf(buf, sizeof buf, "%lld %.17g\n", static_cast<long long>(eid + 1), a);
            out << buf;
        }
    }
    if (!model.stacking.empty()) {
        out << "FIELD stacking " << model.stacking.size() << "\n";
        for (const auto& [eid, s] : model.stacking) {
            std::snprintf(buf, sizeof buf, "%lld %.17g %.17g %.17g\n",
                          static_cast<long long>(eid + 1), s.x, s.y, s.z);
            out << buf;
        }
    }
}

} // namespace pdn
