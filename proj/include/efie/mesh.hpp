#pragma once

#include "geometry.hpp"

#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace efie {

struct MeshError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Closed, consistently oriented triangle surface mesh.
//
// Triangles are stored counter-clockwise as seen from outside, so
// Triangle::normal() points outward.  Each interior edge keeps the two
// incident triangles: `left` traverses a->b in its boundary cycle, `right`
// traverses b->a.  (For a closed orientable mesh both always exist.)
struct Mesh {
    std::vector<Vec3> vertices;
    std::vector<std::array<int, 3>> triangles;

    struct Edge {
        int a = -1, b = -1;     // vertex ids, a < b
        int left = -1, right = -1;
    };
    std::vector<Edge> edges;
    std::vector<std::array<int, 3>> tri_edges; // edge ids per triangle (opposite v0,v1,v2? no: edge i is (v_i, v_{i+1}))

    Triangle tri(int t) const {
        const auto& f = triangles[t];
        return Triangle{vertices[f[0]], vertices[f[1]], vertices[f[2]]};
    }

    int num_vertices() const { return static_cast<int>(vertices.size()); }
    int num_triangles() const { return static_cast<int>(triangles.size()); }
    int num_edges() const { return static_cast<int>(edges.size()); }

    int euler_characteristic() const {
        return num_vertices() - num_edges() + num_triangles();
    }
};

// Builds edge topology and checks that the mesh is a closed oriented
// 2-manifold: every undirected edge is used by exactly two triangles, once in
// each direction.  Throws MeshError otherwise.
inline void build_topology(Mesh& m) {
    m.edges.clear();
    m.tri_edges.assign(m.triangles.size(), {-1, -1, -1});
    std::map<std::pair<int, int>, int> index; // (min,max) -> edge id

    const int nv = m.num_vertices();
    for (int t = 0; t < m.num_triangles(); ++t) {
        const auto& f = m.triangles[t];
        for (int i = 0; i < 3; ++i) {
            if (f[i] < 0 || f[i] >= nv)
                throw MeshError("triangle " + std::to_string(t) +
                                " references vertex " + std::to_string(f[i]) +
                                " out of range");
        }
        if (f[0] == f[1] || f[1] == f[2] || f[2] == f[0])
            throw MeshError("triangle " + std::to_string(t) +
                            " has a repeated vertex");
        for (int i = 0; i < 3; ++i) {
            int u = f[i], v = f[(i + 1) % 3]; // directed u->v
            auto key = std::minmax(u, v);
            auto it = index.find(key);
            if (it == index.end()) {
                Mesh::Edge e;
                e.a = key.first;
                e.b = key.second;
                index.emplace(key, static_cast<int>(m.edges.size()));
                it = index.find(key);
                m.edges.push_back(e);
            }
            Mesh::Edge& e = m.edges[it->second];
            bool forward = (u == e.a); // triangle traverses a->b
            int& slot = forward ? e.left : e.right;
            if (slot != -1)
                throw MeshError("edge (" + std::to_string(e.a) + "," +
                                std::to_string(e.b) +
                                ") traversed twice in the same direction; "
                                "inconsistent orientation");
            slot = t;
            m.tri_edges[t][i] = it->second;
        }
    }
    for (const auto& e : m.edges)
        if (e.left == -1 || e.right == -1)
            throw MeshError("edge (" + std::to_string(e.a) + "," +
                            std::to_string(e.b) +
                            ") has fewer than two incident triangles; "
                            "surface is not closed");
}

// Maximum triangle diameter (longest edge in the mesh).
inline double mesh_h(const Mesh& m) {
    double h = 0.0;
    for (int t = 0; t < m.num_triangles(); ++t)
        h = std::max(h, m.tri(t).diameter());
    return h;
}

inline double mesh_area(const Mesh& m) {
    double a = 0.0;
    for (int t = 0; t < m.num_triangles(); ++t) a += m.tri(t).area();
    return a;
}

// ----------------------------------------------------------------------------
// Icosphere: subdivided icosahedron with all vertices projected to radius r.
// level 0 = plain icosahedron (20 faces); each level quadruples the faces.
// ----------------------------------------------------------------------------
inline Mesh make_sphere(double radius, int level) {
    if (radius <= 0.0) throw MeshError("sphere radius must be positive");
    if (level < 0 || level > 7) throw MeshError("sphere level must be in [0,7]");

    Mesh m;
    const double t = (1.0 + std::sqrt(5.0)) / 2.0;
    const Vec3 base[12] = {
        {-1, t, 0}, {1, t, 0},   {-1, -t, 0}, {1, -t, 0},
        {0, -1, t}, {0, 1, t},   {0, -1, -t}, {0, 1, -t},
        {t, 0, -1}, {t, 0, 1},   {-t, 0, -1}, {-t, 0, 1}};
    for (const auto& v : base) m.vertices.push_back(v.normalized() * radius);

    m.triangles = {{0, 11, 5},  {0, 5, 1},   {0, 1, 7},   {0, 7, 10},
                   {0, 10, 11}, {1, 5, 9},   {5, 11, 4},  {11, 10, 2},
                   {10, 7, 6},  {7, 1, 8},   {3, 9, 4},   {3, 4, 2},
                   {3, 2, 6},   {3, 6, 8},   {3, 8, 9},   {4, 9, 5},
                   {2, 4, 11},  {6, 2, 10},  {8, 6, 7},   {9, 8, 1}};
    // enforce outward orientation
    for (auto& f : m.triangles) {
        Triangle tr{m.vertices[f[0]], m.vertices[f[1]], m.vertices[f[2]]};
        if (tr.normal().dot(tr.centroid()) < 0.0) std::swap(f[1], f[2]);
    }

    for (int l = 0; l < level; ++l) {
        std::map<std::pair<int, int>, int> mid;
        auto midpoint = [&](int a, int b) {
            auto key = std::minmax(a, b);
            auto it = mid.find(key);
            if (it != mid.end()) return it->second;
            Vec3 p = (m.vertices[a] + m.vertices[b]).normalized() * radius;
            int id = static_cast<int>(m.vertices.size());
            m.vertices.push_back(p);
            mid.emplace(key, id);
            return id;
        };
        std::vector<std::array<int, 3>> next;
        next.reserve(m.triangles.size() * 4);
        for (const auto& f : m.triangles) {
            int a = midpoint(f[0], f[1]);
            int b = midpoint(f[1], f[2]);
            int c = midpoint(f[2], f[0]);
            next.push_back({f[0], a, c});
            next.push_back({f[1], b, a});
            next.push_back({f[2], c, b});
            next.push_back({a, b, c});
        }
        m.triangles = std::move(next);
    }
    build_topology(m);
    return m;
}

// ----------------------------------------------------------------------------
// Barycentric refinement: each triangle split into 6 around its barycenter
// and edge midpoints.  Geometry stays on the original faceted surface.
// ----------------------------------------------------------------------------
struct RefinedMesh {
    Mesh mesh;
    // bookkeeping relative to the parent mesh
    int parent_vertex_count = 0;
    std::vector<int> edge_midpoint;             // parent edge id -> refined vertex id
    std::vector<int> face_center;               // parent tri id  -> refined vertex id
    std::vector<std::array<int, 6>> children;   // parent tri id  -> refined tri ids
    std::vector<int> parent_tri;                // refined tri id -> parent tri id
};

inline RefinedMesh barycentric_refine(const Mesh& parent) {
    RefinedMesh r;
    Mesh& m = r.mesh;
    m.vertices = parent.vertices;
    r.parent_vertex_count = parent.num_vertices();

    r.edge_midpoint.resize(parent.num_edges());
    for (int e = 0; e < parent.num_edges(); ++e) {
        const auto& pe = parent.edges[e];
        r.edge_midpoint[e] = static_cast<int>(m.vertices.size());
        m.vertices.push_back(0.5 * (parent.vertices[pe.a] + parent.vertices[pe.b]));
    }
    r.face_center.resize(parent.num_triangles());
    for (int t = 0; t < parent.num_triangles(); ++t) {
        r.face_center[t] = static_cast<int>(m.vertices.size());
        m.vertices.push_back(parent.tri(t).centroid());
    }

    r.children.resize(parent.num_triangles());
    for (int t = 0; t < parent.num_triangles(); ++t) {
        const auto& f = parent.triangles[t];
        int g = r.face_center[t];
        int mid[3]; // midpoint of edge (v_i, v_{i+1})
        for (int i = 0; i < 3; ++i) mid[i] = r.edge_midpoint[parent.tri_edges[t][i]];
        int c = 0;
        for (int i = 0; i < 3; ++i) {
            int v0 = f[i], v1 = f[(i + 1) % 3];
            r.children[t][c++] = static_cast<int>(m.triangles.size());
            m.triangles.push_back({v0, mid[i], g});
            r.children[t][c++] = static_cast<int>(m.triangles.size());
            m.triangles.push_back({mid[i], v1, g});
        }
    }
    r.parent_tri.resize(m.triangles.size());
    for (int t = 0; t < parent.num_triangles(); ++t)
        for (int c : r.children[t]) r.parent_tri[c] = t;

    build_topology(m);
    return r;
}

// ----------------------------------------------------------------------------
// Text format: lines "v x y z" and "f i j k" with 1-based vertex indices.
// ----------------------------------------------------------------------------
inline Mesh load_mesh(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw MeshError("cannot open mesh file: " + path);
    Mesh m;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::istringstream ss(line);
        std::string tag;
        if (!(ss >> tag)) continue; // blank line
        if (tag == "#") continue;
        if (tag == "v") {
            Vec3 p;
            if (!(ss >> p.x() >> p.y() >> p.z()))
                throw MeshError(path + ":" + std::to_string(lineno) +
                                ": malformed vertex line");
            m.vertices.push_back(p);
        } else if (tag == "f") {
            std::array<int, 3> f;
            if (!(ss >> f[0] >> f[1] >> f[2]))
                throw MeshError(path + ":" + std::to_string(lineno) +
                                ": malformed face line");
            for (int& i : f) i -= 1; // 1-based on disk
            m.triangles.push_back(f);
        } else {
            throw MeshError(path + ":" + std::to_string(lineno) +
                            ": unknown record '" + tag + "'");
        }
    }
    build_topology(m);
    return m;
}

inline void save_mesh(const Mesh& m, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw MeshError("cannot open mesh file for writing: " + path);
    char buf[128];
    for (const auto& v : m.vertices) {
        std::snprintf(buf, sizeof buf, "v %.17g %.17g %.17g\n", v.x(), v.y(), v.z());
        out << buf;
    }
    for (const auto& f : m.triangles)
        out << "f " << f[0] + 1 << ' ' << f[1] + 1 << ' ' << f[2] + 1 << '\n';
}

} // namespace efie
