#pragma once

#include "geometry.hpp"
#include "quadrature.hpp"

#include <cmath>

namespace efie {

// ----------------------------------------------------------------------------
// Helmholtz kernel G(R) = exp(ikR)/(4 pi R) split into closed-form parts and
// smooth remainders.
//
//   G        = 1/(4 pi R) + ik/(4 pi) - k^2 R/(8 pi) + k^4 R^3/(96 pi) + g_rem
//   grad_x G = (x-y) * g1(R),   g1 = exp(ikR)(ikR - 1)/(4 pi R^3)
//            = (x-y) * [ -1/(4 pi R^3) - k^2/(8 pi R) + k^4 R/(32 pi) + h_rem ]
//
// Every odd power of R in the expansions is integrated in closed form over
// flat triangles below: those terms have unbounded high derivatives at R = 0,
// which an observation point close to the panel plane turns into slowly
// converging quadrature even though the integrand itself looks tame. What the
// Gauss rules see is g_rem = O(R^2) and h_rem = O(1), whose low-order terms
// are even powers of R -- polynomials in y that the inner rule integrates
// exactly -- so the first term a rule actually has to work for carries k^6.
// ----------------------------------------------------------------------------

inline cplx kernel_G(double R, double k) {
    return std::exp(iu * (k * R)) / (4.0 * pi * R);
}

// (e^{ikR}-1)/(4 pi R); the R -> 0 limit is ik/(4 pi).
inline cplx kernel_G_minus_static(double R, double k) {
    if (R == 0.0) return iu * k / (4.0 * pi);
    double s = std::sin(k * R), s2 = std::sin(0.5 * k * R);
    return cplx(-2.0 * s2 * s2, s) / (4.0 * pi * R);
}

// g_rem(R) = G - 1/(4piR) - ik/4pi + k^2 R/(8pi) - k^4 R^3/(96pi)
//          = sum_{n>=3, n!=4} (ik)^n R^{n-1}/(4pi n!)
inline cplx kernel_G_rem(double R, double k) {
    double kR = k * R;
    if (kR < 0.5) {
        cplx z = iu * kR, term = z * z * z / 6.0, sum = term;
        for (int n = 4; n <= 24; ++n) {
            term *= z / double(n);
            if (n != 4) sum += term;
            if (std::abs(term) < 1e-18 * (1.0 + std::abs(sum))) break;
        }
        return (R == 0.0) ? cplx(0, 0) : sum / (4.0 * pi * R);
    }
    const double k2R2 = k * k * R * R;
    return kernel_G_minus_static(R, k) - iu * k / (4.0 * pi) +
           k * k * R * (1.0 - k2R2 / 12.0) / (8.0 * pi);
}

// h_rem(R) = g1(R) + 1/(4piR^3) + k^2/(8piR) - k^4 R/(32pi)
//          = sum_{n>=3, n!=4} (n-1)(ik)^n R^{n-3}/(4pi n!)
inline cplx kernel_gradG_rem(double R, double k) {
    double kR = k * R;
    if (kR < 0.5) {
        cplx z = iu * k; // accumulate (n-1) (ik)^n R^{n-3} / n!
        cplx zR = iu * kR;
        cplx term = z * z * z / 3.0; // n = 3 : 2/3! = 1/3
        cplx sum = term;
        double fact = 6.0;
        cplx zpow = z * z * z;
        for (int n = 4; n <= 24; ++n) {
            fact *= n;
            zpow *= zR;
            term = (n - 1.0) * zpow / fact;
            if (n != 4) sum += term;
            if (std::abs(term) < 1e-18 * (1.0 + std::abs(sum))) break;
        }
        return sum / (4.0 * pi);
    }
    cplx e = std::exp(iu * kR);
    const double kR2 = kR * kR;
    return (e * (iu * kR - 1.0) + 1.0 + 0.5 * kR2 - 0.125 * kR2 * kR2) /
           (4.0 * pi * R * R * R);
}

// ----------------------------------------------------------------------------
// Closed-form potential integrals of the static kernels over a flat triangle.
// Observation x is split as x = x0 + d n with x0 in the triangle plane.
// Standard per-edge construction: for each (counter-clockwise) edge with unit
// tangent tau and in-plane outward normal nu = tau x n,
//   F    = int_edge dl / R
//   K    = int_edge R dl
//   K3   = int_edge R^3 dl
//   beta = the arctan pair entering the solid-angle term
// ----------------------------------------------------------------------------
struct StaticMoments {
    double I0 = 0;        // int 1/R dS
    Vec3 Irho{0, 0, 0};   // int (y - x0)/R dS
    Vec3 sumNuF{0, 0, 0}; // contour integral of nu/R  ( = int (x0-y)/R^3 dS )
    double Ubeta = 0;     // sign(d) * Ubeta = int d/R^3 dS   (0 at d = 0: PV)
    double IR = 0;        // int R dS
    Vec3 IRrho{0, 0, 0};  // int R (y - x0) dS
    double IR3 = 0;       // int R^3 dS
    Vec3 IR3rho{0, 0, 0}; // int R^3 (y - x0) dS
    Vec3 x0{0, 0, 0};
    double d = 0;

    // int grad_x (1/R) dS  (principal value for x in the plane)
    Vec3 gradI0(const Vec3& n) const {
        double sd = (d > 0) - (d < 0);
        return -(sd * Ubeta) * n - sumNuF;
    }
};

// `in_plane` pins d = 0 exactly, selecting the principal value of the
// double-layer terms. Needed when x lies in the panel plane by construction:
// the computed d would otherwise round to +-1e-16 and sign(d)*Ubeta would
// flip between the two one-sided jump limits instead of vanishing.
inline StaticMoments static_moments(const Triangle& T, const Vec3& n,
                                    const Vec3& x, bool in_plane = false) {
    StaticMoments sm;
    sm.d = in_plane ? 0.0 : (x - T.q0).dot(n);
    sm.x0 = x - sm.d * n;
    const double ad = std::abs(sm.d);
    const Vec3 v[3] = {T.q0, T.q1, T.q2};
    const double scale = T.diameter();

    double sumPK = 0.0;   // sum P0_j K_j   (for int R dS)
    double sumPK3 = 0.0;  // sum P0_j K3_j  (for int R^3 dS)
    Vec3 sumNuK3 = Vec3::Zero();
    Vec3 sumNuK5 = Vec3::Zero();

    for (int j = 0; j < 3; ++j) {
        const Vec3 a = v[j], b = v[(j + 1) % 3];
        const double l = (b - a).norm();
        const Vec3 tau = (b - a) / l;
        const Vec3 nu = tau.cross(n);
        const double Lm = (a - sm.x0).dot(tau), Lp = (b - sm.x0).dot(tau);
        const double P0 = (a - sm.x0).dot(nu);
        const double Rm = (x - a).norm(), Rp = (x - b).norm();
        const double R02 = P0 * P0 + sm.d * sm.d;

        // Edge log integral with the cancellation-free form in every branch;
        // the on-edge case is genuinely divergent and only ever multiplied by
        // a vanishing P0, so it is clamped to zero.
        double F;
        if (Lm >= 0.0) {
            const double den = Rm + Lm;
            F = den > 0.0 ? std::log((Rp + Lp) / den) : 0.0;
        } else if (Lp <= 0.0) {
            const double num = Rp - Lp;
            F = num > 0.0 ? std::log((Rm - Lm) / num) : 0.0;
        } else {
            F = R02 > 1e-28 * scale * scale
                    ? std::log((Rp + Lp) * (Rm - Lm) / R02)
                    : 0.0;
        }
        const double K = 0.5 * (Lp * Rp - Lm * Rm + R02 * F);
        const double Rp3 = Rp * Rp * Rp, Rm3 = Rm * Rm * Rm;
        const double K3 = 0.25 * (Lp * Rp3 - Lm * Rm3) + 0.75 * R02 * K;
        const double K5 =
            (Lp * Rp3 * Rp * Rp - Lm * Rm3 * Rm * Rm) / 6.0 + R02 * K3 * (5.0 / 6.0);
        double beta = 0.0;
        if (P0 != 0.0) {
            beta = std::atan(P0 * Lp / (R02 + ad * Rp)) -
                   std::atan(P0 * Lm / (R02 + ad * Rm));
        }

        sm.I0 += P0 * F - ad * beta;
        sm.Ubeta += beta;
        sm.Irho += nu * K;
        sm.sumNuF += nu * F;
        sumPK += P0 * K;
        sumPK3 += P0 * K3;
        sumNuK3 += nu * K3;
        sumNuK5 += nu * K5;
    }
    // Divergence-theorem recursions on the panel: div_S of rho R^q integrates
    // to (2+q) int R^q - q d^2 int R^{q-2}, and grad_S of R^{q+2} to
    // (q+2) rho R^q, which turn the edge integrals into the area moments.
    const double d2 = sm.d * sm.d;
    sm.IR = (sumPK + d2 * sm.I0) / 3.0;
    sm.IRrho = sumNuK3 / 3.0;  // int R (y - x0) dS
    sm.IR3 = (sumPK3 + 3.0 * d2 * sm.IR) / 5.0;
    sm.IR3rho = sumNuK5 / 5.0; // int R^3 (y - x0) dS
    return sm;
}

// ----------------------------------------------------------------------------
// Line moments int_edge G(|x-y|) {1, y} dl with adaptive splitting near the
// closest point; used for the coincident-panel gradient-kernel reduction.
// ----------------------------------------------------------------------------
struct LineMoments {
    cplx m0{0, 0};
    Vec3c m1 = Vec3c::Zero();
};

namespace detail {

inline double point_segment_dist(const Vec3& x, const Vec3& a, const Vec3& b) {
    Vec3 ab = b - a;
    double t = (x - a).dot(ab) / ab.squaredNorm();
    t = std::clamp(t, 0.0, 1.0);
    return (x - (a + t * ab)).norm();
}

inline void line_moments_rec(const Vec3& x, const Vec3& a, const Vec3& b,
                             double k, const Rule1D& gl, int depth,
                             LineMoments& out) {
    const double len = (b - a).norm();
    if (depth < 24 && len > 1.5 * point_segment_dist(x, a, b)) {
        Vec3 mid = 0.5 * (a + b);
        line_moments_rec(x, a, mid, k, gl, depth + 1, out);
        line_moments_rec(x, mid, b, k, gl, depth + 1, out);
        return;
    }
    for (size_t q = 0; q < gl.x.size(); ++q) {
        Vec3 y = a + gl.x[q] * (b - a);
        cplx g = kernel_G((x - y).norm(), k) * (gl.w[q] * len);
        out.m0 += g;
        out.m1 += g * y.cast<cplx>();
    }
}

} // namespace detail

inline LineMoments line_moments(const Vec3& x, const Vec3& a, const Vec3& b,
                                double k, const Rule1D& gl) {
    LineMoments out;
    detail::line_moments_rec(x, a, b, k, gl, 0, out);
    return out;
}

} // namespace efie
