#pragma once

#include "geometry.hpp"
#include "mesh.hpp"

#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <unordered_map>
#include <vector>

namespace efie {

// ----------------------------------------------------------------------------
// Surface vector functions are stored panelwise. On each supporting panel a
// function is affine, f(x) = beta x + w, with surface divergence 2 beta; this
// covers lowest-order edge elements and every linear combination of them that
// shares panels. Normal continuity across edges is a property of how the
// traces are built, not of the storage.
// ----------------------------------------------------------------------------

struct Trace {
    int tri = -1;
    double beta = 0.0;
    Vec3 w = Vec3::Zero();

    Vec3 value(const Vec3& x) const { return beta * x + w; }
    double div() const { return 2.0 * beta; }
};

struct FunctionFamily {
    const Mesh* mesh = nullptr;
    std::vector<std::vector<Trace>> fns;

    struct PanelTerm {
        int fn;
        double beta;
        Vec3 w;
    };
    std::vector<std::vector<PanelTerm>> panel_terms;

    int size() const { return int(fns.size()); }

    void finalize() {
        panel_terms.assign(mesh->num_triangles(), {});
        for (int f = 0; f < size(); ++f)
            for (const Trace& t : fns[f])
                panel_terms[t.tri].push_back({f, t.beta, t.w});
    }

    const Trace* trace_on(int f, int tri) const {
        for (const Trace& t : fns[f])
            if (t.tri == tri) return &t;
        return nullptr;
    }

    Vec3 value(int f, int tri, const Vec3& x) const {
        const Trace* t = trace_on(f, tri);
        return t ? t->value(x) : Vec3::Zero();
    }

    double divergence(int f, int tri) const {
        const Trace* t = trace_on(f, tri);
        return t ? t->div() : 0.0;
    }

    // Largest pointwise magnitude over the support; affine per panel, so the
    // maximum is attained at panel vertices.
    double sup_norm(int f) const {
        double s = 0.0;
        for (const Trace& t : fns[f]) {
            const Triangle T = mesh->tri(t.tri);
            for (const Vec3& v : {T.q0, T.q1, T.q2})
                s = std::max(s, t.value(v).norm());
        }
        return s;
    }
};

// ----------------------------------------------------------------------------
// Edge functions: one per interior edge, normal flux continuous across it,
// linear on the two adjacent panels, zero normal flux on the remaining
// boundary. Scaled so the pointwise maximum is 1; `edge_flux` records the
// current carried across the defining edge from its left to its right panel.
// ----------------------------------------------------------------------------

struct EdgeFunctionFamily {
    FunctionFamily fam;
    std::vector<double> edge_flux;
};

inline EdgeFunctionFamily build_edge_functions(const Mesh& mesh) {
    EdgeFunctionFamily out;
    out.fam.mesh = &mesh;
    out.fam.fns.resize(mesh.num_edges());
    out.edge_flux.resize(mesh.num_edges());

    auto free_vertex = [&](int tri, int va, int vb) -> Vec3 {
        for (int v : mesh.triangles[tri])
            if (v != va && v != vb) return mesh.vertices[v];
        throw MeshError("degenerate panel in edge function construction");
    };

    for (int e = 0; e < mesh.num_edges(); ++e) {
        const auto& ed = mesh.edges[e];
        const double l = (mesh.vertices[ed.a] - mesh.vertices[ed.b]).norm();

        const Vec3 pL = free_vertex(ed.left, ed.a, ed.b);
        const Vec3 pR = free_vertex(ed.right, ed.a, ed.b);
        const double bL = l / (2.0 * mesh.tri(ed.left).area());
        const double bR = -l / (2.0 * mesh.tri(ed.right).area());

        std::vector<Trace> tr = {{ed.left, bL, -bL * pL}, {ed.right, bR, -bR * pR}};
        out.fam.fns[e] = std::move(tr);

        double s = 0.0;
        for (const Trace& t : out.fam.fns[e]) {
            const Triangle T = mesh.tri(t.tri);
            for (const Vec3& v : {T.q0, T.q1, T.q2})
                s = std::max(s, t.value(v).norm());
        }
        for (Trace& t : out.fam.fns[e]) {
            t.beta /= s;
            t.w /= s;
        }
        out.edge_flux[e] = l / s;
    }
    out.fam.finalize();
    return out;
}

// Re-express a family on the barycentric refinement of its mesh. Children are
// flat sub-panels of flat parents, so each affine trace restricts verbatim.
inline FunctionFamily restrict_to_children(const FunctionFamily& base,
                                           const RefinedMesh& rm) {
    FunctionFamily out;
    out.mesh = &rm.mesh;
    out.fns.resize(base.fns.size());
    for (size_t f = 0; f < base.fns.size(); ++f)
        for (const Trace& t : base.fns[f])
            for (int c : rm.children[t.tri])
                out.fns[f].push_back({c, t.beta, t.w});
    out.finalize();
    return out;
}

// ----------------------------------------------------------------------------
// Dual-cell functions on the barycentric refinement: one per primal edge.
// The function carries one unit of current from the barycentric cell around
// one edge endpoint to the cell around the other, with
//   * constant surface divergence +1/|C_a| on cell C_a and -1/|C_b| on C_b,
//   * the unit current crossing the two refined edges that join the primal
//     edge midpoint to the adjacent face centers, half through each,
//   * zero normal flux through the remaining cell boundary.
// Fluxes on the internal fan edges around each endpoint follow from panelwise
// flux balance, fixed uniquely by giving the fan fluxes zero mean (the
// symmetric gauge). The result is assembled from refined edge functions, so
// normal continuity is automatic; columns are scaled to unit sup norm and
// `transfer` records the cell-to-cell current after scaling.
// ----------------------------------------------------------------------------

struct DualFunctionFamily {
    FunctionFamily fam;
    std::vector<double> transfer;
};

namespace detail {

struct FanWalk {
    std::vector<int> edges;    // fan edges around v, cyclic
    std::vector<int> children; // children[i] lies between edges[i] and edges[i+1]
};

inline FanWalk walk_fan(const Mesh& m, int v, int start_edge) {
    FanWalk fw;
    auto other_v_edge = [&](int tri, int edge) {
        for (int s = 0; s < 3; ++s) {
            const int e = m.tri_edges[tri][s];
            if (e == edge) continue;
            if (m.edges[e].a == v || m.edges[e].b == v) return e;
        }
        throw MeshError("fan walk left the vertex star");
    };
    int e = start_edge;
    int t = m.edges[e].right;
    do {
        fw.edges.push_back(e);
        fw.children.push_back(t);
        e = other_v_edge(t, e);
        t = (m.edges[e].left == t) ? m.edges[e].right : m.edges[e].left;
    } while (e != start_edge);
    return fw;
}

} // namespace detail

inline DualFunctionFamily build_dual_functions(const Mesh& base,
                                               const RefinedMesh& rm) {
    const Mesh& m = rm.mesh;
    DualFunctionFamily out;
    out.fam.mesh = &m;
    out.fam.fns.resize(base.num_edges());
    out.transfer.resize(base.num_edges());

    EdgeFunctionFamily fine = build_edge_functions(m);

    std::unordered_map<std::int64_t, int> edge_lut;
    edge_lut.reserve(m.num_edges() * 2);
    for (int e = 0; e < m.num_edges(); ++e)
        edge_lut[std::int64_t(m.edges[e].a) * m.num_vertices() + m.edges[e].b] =
            e;
    auto lookup_edge = [&](int va, int vb) {
        const int a = std::min(va, vb), b = std::max(va, vb);
        auto it = edge_lut.find(std::int64_t(a) * m.num_vertices() + b);
        if (it == edge_lut.end())
            throw MeshError("refined edge lookup failed in dual construction");
        return it->second;
    };

    for (int be = 0; be < base.num_edges(); ++be) {
        const auto& ed = base.edges[be];
        const int mid = rm.edge_midpoint[be];
        const int gA = rm.face_center[ed.left];
        const int gB = rm.face_center[ed.right];
        const int gateA = lookup_edge(mid, gA);
        const int gateB = lookup_edge(mid, gB);

        // refined-edge id -> crossing current (left panel to right panel)
        std::unordered_map<int, double> cross;

        auto run_fan = [&](int v, double cell_sign) {
            const int e0 = lookup_edge(v, mid);
            detail::FanWalk fw = detail::walk_fan(m, v, e0);
            const int n = int(fw.children.size());
            double cell_area = 0.0;
            for (int t : fw.children) cell_area += m.tri(t).area();
            const double sigma = cell_sign / cell_area;

            std::vector<double> phi(n, 0.0); // current across edges[i] into children[i]
            double acc = 0.0;
            std::vector<double> gate_out(n, 0.0);
            for (int i = 0; i < n; ++i) {
                const int outer = [&] {
                    for (int s = 0; s < 3; ++s) {
                        const int e = m.tri_edges[fw.children[i]][s];
                        if (m.edges[e].a != v && m.edges[e].b != v) return e;
                    }
                    throw MeshError("fan child without outer edge");
                }();
                if (outer == gateA || outer == gateB)
                    gate_out[i] = 0.5 * cell_sign;
            }
            for (int i = 0; i < n; ++i) {
                phi[i] = acc;
                acc += sigma * m.tri(fw.children[i]).area() - gate_out[i];
            }
            if (std::abs(acc) > 1e-12)
                throw MeshError("dual-cell flux balance failed to close");
            double mean = 0.0;
            for (double p : phi) mean += p;
            mean /= n;
            for (int i = 0; i < n; ++i) {
                const int e = fw.edges[i];
                const int from = fw.children[(i + n - 1) % n];
                const double q = phi[i] - mean;
                cross[e] += (m.edges[e].left == from) ? q : -q;
            }
        };

        run_fan(ed.a, +1.0);
        run_fan(ed.b, -1.0);

        // gates: half the unit current each, from the cell around ed.a into
        // the cell around ed.b
        for (int gate : {gateA, gateB}) {
            const int lt = m.edges[gate].left;
            bool left_in_a = false;
            for (int vv : m.triangles[lt])
                if (vv == ed.a) left_in_a = true;
            cross[gate] += left_in_a ? 0.5 : -0.5;
        }

        // combine refined edge functions with the prescribed crossings
        std::unordered_map<int, Trace> combined; // panel -> accumulated trace
        for (const auto& [e, q] : cross) {
            if (q == 0.0) continue;
            const double c = q / fine.edge_flux[e];
            for (const Trace& t : fine.fam.fns[e]) {
                Trace& acc = combined[t.tri];
                acc.tri = t.tri;
                acc.beta += c * t.beta;
                acc.w += c * t.w;
            }
        }
        std::vector<Trace>& fn = out.fam.fns[be];
        for (auto& [tri, t] : combined) fn.push_back(t);
        std::sort(fn.begin(), fn.end(),
                  [](const Trace& a, const Trace& b) { return a.tri < b.tri; });

        double s = 0.0;
        for (const Trace& t : fn) {
            const Triangle T = m.tri(t.tri);
            for (const Vec3& v : {T.q0, T.q1, T.q2})
                s = std::max(s, t.value(v).norm());
        }
        for (Trace& t : fn) {
            t.beta /= s;
            t.w /= s;
        }
        out.transfer[be] = 1.0 / s;
    }
    out.fam.finalize();
    return out;
}

} // namespace efie
