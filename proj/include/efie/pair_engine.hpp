#pragma once

#include "geometry.hpp"
#include "mesh.hpp"
#include "quadrature.hpp"
#include "singular.hpp"

#include <array>

namespace efie {

// ----------------------------------------------------------------------------
// For a pair of panels (Tx test side, Ty trial side) all bilinear forms used
// here contract onto a small set of kernel moments, because every basis trace
// on a single panel is affine with gradient proportional to the identity:
//
//   SG   = int int G                     XG   = int int x G
//   YG   = int int y G                   XYG  = int int (x . y) G
//   XYxG = int int (x cross y) G
//   Vg   = int int grad_x G              Yg   = int int grad_x G cross y
//
// The engine picks an evaluation scheme per pair class: plain product Gauss
// for well separated panels, analytic-in-y statics plus smooth remainders for
// near and touching panels, and an exact contour reduction of the gradient
// moments for coincident panels.
// ----------------------------------------------------------------------------

enum class PairCase { separated, near_field, shared_vertex, shared_edge, coincident };

struct QuadConfig {
    int outer_degree = 4;        // outer rule degree for near pairs
    int inner_degree = 6;        // smooth-remainder rule on the inner panel
    int separated_degree = 3;    // product Gauss degree for separated pairs
    double near_threshold = 2.0; // centroid gap vs. max diameter
    int clustered_nodes = 0;     // per-axis nodes for touching pairs (0: auto)
    int line_nodes = 12;         // Gauss nodes per contour segment
};

struct PairMoments {
    cplx SG{0, 0}, XYG{0, 0};
    Vec3c XG = Vec3c::Zero(), YG = Vec3c::Zero(), XYxG = Vec3c::Zero();
    Vec3c Vg = Vec3c::Zero(), Yg = Vec3c::Zero();
};

namespace detail {

inline double sign0(double d) { return double((d > 0) - (d < 0)); }

} // namespace detail

struct PairRules {
    TriangleRule sep, outer_near, outer_sing, inner;
    Rule1D line;
    QuadConfig cfg;

    explicit PairRules(const QuadConfig& c = QuadConfig{})
        : sep(triangle_rule(c.separated_degree)),
          outer_near(triangle_rule(c.outer_degree)),
          outer_sing(detail::clustered_triangle_rule(
              c.clustered_nodes > 0 ? c.clustered_nodes : c.outer_degree + 4)),
          inner(triangle_rule(c.inner_degree)),
          line(gauss_legendre(c.line_nodes)),
          cfg(c) {}
};

inline PairCase classify_pair(const Mesh& mesh, int tx, int ty,
                              const QuadConfig& cfg) {
    if (tx == ty) return PairCase::coincident;
    const auto& fa = mesh.triangles[tx];
    const auto& fb = mesh.triangles[ty];
    int shared = 0;
    for (int a : fa)
        for (int b : fb)
            if (a == b) ++shared;
    if (shared == 2) return PairCase::shared_edge;
    if (shared == 1) return PairCase::shared_vertex;
    const Triangle A = mesh.tri(tx), B = mesh.tri(ty);
    const double gap = (A.centroid() - B.centroid()).norm();
    const double diam = std::max(A.diameter(), B.diameter());
    return gap < cfg.near_threshold * diam ? PairCase::near_field
                                           : PairCase::separated;
}

namespace detail {

// Inner-panel potentials at a fixed observation point x:
//   P0 = int_Ty G dS,  P1 = int_Ty G y dS,
//   Q0 = int_Ty grad_x G dS,  Q1 = int_Ty grad_x G cross y dS.
struct InnerPotentials {
    cplx P0{0, 0};
    Vec3c P1 = Vec3c::Zero();
    Vec3c Q0 = Vec3c::Zero(), Q1 = Vec3c::Zero();
};

// Static parts in closed form, remainders by Gauss on the (premapped) inner
// rule. `in_plane` forces the principal value of the gradient statics; pass
// it whenever x lies in the plane of Ty by construction (coincident panels),
// where the one-sided jump of the double layer must not be picked up.
inline InnerPotentials inner_analytic(const Triangle& Ty, const Vec3& ny,
                                      double area, const Vec3& centroid,
                                      const MappedRule& rem, const Vec3& x,
                                      double k, bool need_grad,
                                      bool in_plane = false) {
    InnerPotentials ip;
    const StaticMoments sm = static_moments(Ty, ny, x, in_plane);
    const double k2 = k * k;
    const double c0 = 1.0 / (4.0 * pi);
    const cplx c1 = iu * k / (4.0 * pi);
    const double c2 = -k2 / (8.0 * pi);
    const double c4 = k2 * k2 / (96.0 * pi);  // R^3 term of G
    const double c4g = k2 * k2 / (32.0 * pi); // R term of the gradient scalar

    const Vec3 Iy_over_R = sm.Irho + sm.x0 * sm.I0; // int y/R
    const Vec3 Iy = area * centroid;                // int y
    const Vec3 IRy = sm.IRrho + sm.x0 * sm.IR;      // int R y
    const Vec3 IR3y = sm.IR3rho + sm.x0 * sm.IR3;   // int R^3 y

    ip.P0 = c0 * sm.I0 + c1 * area + c2 * sm.IR + c4 * sm.IR3;
    ip.P1 = (c0 * Iy_over_R + c2 * IRy + c4 * IR3y).cast<cplx>() +
            c1 * Iy.cast<cplx>();
    if (need_grad) {
        const Vec3 g_static = c0 * sm.gradI0(ny) +
                              c2 * (sm.d * sm.I0 * ny - sm.Irho) +
                              c4g * (sm.d * sm.IR * ny - sm.IRrho);
        const Vec3 g1_static =
            c0 * (x.cross(sm.sumNuF) - sign0(sm.d) * sm.Ubeta * ny.cross(sm.x0)) +
            c2 * x.cross(Iy_over_R) + c4g * x.cross(IRy);
        ip.Q0 = g_static.cast<cplx>();
        ip.Q1 = g1_static.cast<cplx>();
    }
    for (size_t q = 0; q < rem.x.size(); ++q) {
        const Vec3& y = rem.x[q];
        const Vec3 rxy = x - y;
        const double R = rxy.norm();
        const double w = rem.w[q];
        const cplx g = w * kernel_G_rem(R, k);
        ip.P0 += g;
        ip.P1 += g * y.cast<cplx>();
        if (need_grad) {
            const cplx h = w * kernel_gradG_rem(R, k);
            ip.Q0 += h * rxy.cast<cplx>();
            ip.Q1 += h * x.cross(y).cast<cplx>();
        }
    }
    return ip;
}

// Independent route to the in-plane gradient potentials: for x in the plane
// of Ty the principal-value moments reduce exactly to contour integrals of
// the full kernel (integration by parts on the punctured panel; the small
// circle around x contributes nothing by symmetry),
//   Q0 = - sum_edges nu int_edge G dl,   Q1 = - sum_edges nu cross int_edge G y dl.
// Used to cross-check the principal-value statics; not a production path.
inline InnerPotentials inner_gradient_contour(const Triangle& Ty,
                                              const Vec3& ny,
                                              const Rule1D& line, const Vec3& x,
                                              double k) {
    InnerPotentials ip;
    const Vec3 v[3] = {Ty.q0, Ty.q1, Ty.q2};
    for (int j = 0; j < 3; ++j) {
        const Vec3 a = v[j], b = v[(j + 1) % 3];
        const Vec3 tau = (b - a).normalized();
        const Vec3 nu = tau.cross(ny);
        const LineMoments lm = line_moments(x, a, b, k, line);
        ip.Q0 -= nu.cast<cplx>() * lm.m0;
        ip.Q1 -= cross_rc(nu, lm.m1);
    }
    return ip;
}

} // namespace detail

inline PairMoments pair_moments(const Triangle& Tx, const Triangle& Ty,
                                PairCase pc, double k, const PairRules& rules,
                                bool need_grad) {
    PairMoments pm;

    if (pc == PairCase::separated) {
        const MappedRule rx = map_rule(rules.sep, Tx);
        const MappedRule ry = map_rule(rules.sep, Ty);
        for (size_t p = 0; p < rx.x.size(); ++p) {
            const Vec3& x = rx.x[p];
            for (size_t q = 0; q < ry.x.size(); ++q) {
                const Vec3& y = ry.x[q];
                const Vec3 rxy = x - y;
                const double R = rxy.norm();
                const double w = rx.w[p] * ry.w[q];
                const cplx e = std::exp(iu * (k * R));
                const cplx G = w * e / (4.0 * pi * R);
                pm.SG += G;
                pm.XG += G * x.cast<cplx>();
                pm.YG += G * y.cast<cplx>();
                pm.XYG += G * x.dot(y);
                pm.XYxG += G * x.cross(y).cast<cplx>();
                if (need_grad) {
                    const cplx g1 =
                        w * e * (iu * (k * R) - 1.0) / (4.0 * pi * R * R * R);
                    pm.Vg += g1 * rxy.cast<cplx>();
                    pm.Yg += g1 * x.cross(y).cast<cplx>();
                }
            }
        }
        return pm;
    }

    const Vec3 ny = Ty.normal();
    const double area = Ty.area();
    const Vec3 centroid = Ty.centroid();
    const MappedRule rem = map_rule(rules.inner, Ty);
    const TriangleRule& outer =
        (pc == PairCase::near_field) ? rules.outer_near : rules.outer_sing;
    const MappedRule rx = map_rule(outer, Tx);

    for (size_t p = 0; p < rx.x.size(); ++p) {
        const Vec3& x = rx.x[p];
        const double wx = rx.w[p];
        const detail::InnerPotentials ip = detail::inner_analytic(
            Ty, ny, area, centroid, rem, x, k, need_grad,
            /*in_plane=*/pc == PairCase::coincident);
        pm.SG += wx * ip.P0;
        pm.XG += (wx * ip.P0) * x.cast<cplx>();
        pm.YG += wx * ip.P1;
        pm.XYG += wx * (x(0) * ip.P1(0) + x(1) * ip.P1(1) + x(2) * ip.P1(2));
        pm.XYxG += wx * detail::cross_rc(x, ip.P1);
        if (need_grad) {
            pm.Vg += wx * ip.Q0;
            pm.Yg += wx * ip.Q1;
        }
    }
    return pm;
}

inline PairMoments pair_moments(const Mesh& mesh, int tx, int ty, double k,
                                const PairRules& rules, bool need_grad) {
    const PairCase pc = classify_pair(mesh, tx, ty, rules.cfg);
    return pair_moments(mesh.tri(tx), mesh.tri(ty), pc, k, rules, need_grad);
}

} // namespace efie
