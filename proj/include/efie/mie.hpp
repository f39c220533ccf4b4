#pragma once

#include "basis.hpp"
#include "geometry.hpp"
#include "quadrature.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace efie {

// ----------------------------------------------------------------------------
// Scattering of a unit-amplitude, x-polarized plane wave travelling along +z
// off a perfectly conducting sphere centred at the origin. Units match the
// rest of the library (permittivity = permeability = 1, so omega = k), and
// the time convention is exp(-i omega t), so the radiating radial function is
// the first-kind spherical Hankel function.
// ----------------------------------------------------------------------------

struct MieSeries {
    double k = 0.0;
    double radius = 0.0;
    int n_max = 0;
    // Riccati-Bessel values at x = k * radius; index n in [1, n_max], slot 0
    // unused. psi_n(x) = x j_n(x), xi_n(x) = x (j_n(x) + i y_n(x)).
    std::vector<cplx> psi, xi, dpsi, dxi;
    // scattering coefficients a_n = psi_n'/xi_n', b_n = psi_n/xi_n
    std::vector<cplx> a, b;
};

namespace detail {

// Radial tables for degree 0..n_max: z_n(rho) and D_n(rho) = [rho z_n]'/rho,
// where z is the spherical Bessel function j (regular) or the first-kind
// Hankel function h1 (radiating).
inline void radial_table(double rho, int n_max, bool radiating,
                         std::vector<cplx>& z, std::vector<cplx>& D) {
    if (!(rho > 0.0))
        throw std::invalid_argument("radial_table: rho must be positive");
    z.assign(n_max + 1, cplx(0.0, 0.0));
    D.assign(n_max + 1, cplx(0.0, 0.0));
    for (int n = 0; n <= n_max; ++n) {
        const double jn = std::sph_bessel(unsigned(n), rho);
        const double yn = radiating ? std::sph_neumann(unsigned(n), rho) : 0.0;
        z[n] = cplx(jn, yn);
    }
    for (int n = 1; n <= n_max; ++n)
        D[n] = z[n - 1] - double(n) * z[n] / rho; // (rho z_n)' / rho
}

// First-order angular functions pi_n = P_n^1(mu)/sin(theta) and
// tau_n = dP_n^1/dtheta; both are polynomials in mu = cos(theta).
inline void mie_angular(double mu, int n_max, std::vector<double>& pi_n,
                        std::vector<double>& tau_n) {
    pi_n.assign(n_max + 1, 0.0);
    tau_n.assign(n_max + 1, 0.0);
    if (n_max < 1) return;
    pi_n[1] = 1.0;
    tau_n[1] = mu;
    for (int n = 2; n <= n_max; ++n) {
        pi_n[n] =
            ((2.0 * n - 1.0) * mu * pi_n[n - 1] - double(n) * pi_n[n - 2]) /
            double(n - 1);
        tau_n[n] = double(n) * mu * pi_n[n] - (n + 1.0) * pi_n[n - 1];
    }
}

struct SphericalFrame {
    double r = 0.0, mu = 0.0, sin_theta = 0.0, phi = 0.0;
    Vec3 er, et, ep;
};

inline SphericalFrame spherical_frame(const Vec3& p) {
    SphericalFrame f;
    f.r = p.norm();
    if (!(f.r > 0.0))
        throw std::invalid_argument("spherical_frame: point at origin");
    f.mu = p(2) / f.r;
    f.phi = std::atan2(p(1), p(0));
    f.sin_theta = std::sqrt(std::max(0.0, 1.0 - f.mu * f.mu));
    const double cphi = std::cos(f.phi), sphi = std::sin(f.phi);
    f.er = p / f.r;
    f.et = Vec3(f.mu * cphi, f.mu * sphi, -f.sin_theta);
    f.ep = Vec3(-sphi, cphi, 0.0);
    return f;
}

enum class MieField {
    electric_incident,
    electric_scattered,
    magnetic_incident,
    magnetic_scattered
};

// Truncated multipole expansion of the chosen field at an arbitrary point
// away from the origin (for scattered fields: outside the sphere).
inline Vec3c mie_field_eval(const MieSeries& s, const Vec3& p, MieField which) {
    const SphericalFrame f = spherical_frame(p);
    const double rho = s.k * f.r;
    const bool radiating = (which == MieField::electric_scattered ||
                            which == MieField::magnetic_scattered);
    std::vector<cplx> z, D;
    radial_table(rho, s.n_max, radiating, z, D);
    std::vector<double> pi_n, tau_n;
    mie_angular(f.mu, s.n_max, pi_n, tau_n);

    const double cphi = std::cos(f.phi), sphi = std::sin(f.phi);
    cplx Fr = 0.0, Ft = 0.0, Fp = 0.0;
    cplx ipow = iu; // i^n starting at n = 1
    for (int n = 1; n <= s.n_max; ++n) {
        const double nn1 = double(n) * (n + 1.0);
        const cplx En = ipow * ((2.0 * n + 1.0) / nn1);
        // spherical (r, theta, phi) components of the degree-n first-order
        // vector spherical harmonics
        const cplx Mo_t = cphi * pi_n[n] * z[n], Mo_p = -sphi * tau_n[n] * z[n];
        const cplx Me_t = -sphi * pi_n[n] * z[n], Me_p = -cphi * tau_n[n] * z[n];
        const cplx Ne_r = nn1 * cphi * f.sin_theta * pi_n[n] * z[n] / rho;
        const cplx Ne_t = cphi * tau_n[n] * D[n], Ne_p = -sphi * pi_n[n] * D[n];
        const cplx No_r = nn1 * sphi * f.sin_theta * pi_n[n] * z[n] / rho;
        const cplx No_t = sphi * tau_n[n] * D[n], No_p = cphi * pi_n[n] * D[n];

        switch (which) {
        case MieField::electric_incident:
            Fr += En * (-iu * Ne_r);
            Ft += En * (Mo_t - iu * Ne_t);
            Fp += En * (Mo_p - iu * Ne_p);
            break;
        case MieField::electric_scattered:
            Fr += En * (iu * s.a[n] * Ne_r);
            Ft += En * (iu * s.a[n] * Ne_t - s.b[n] * Mo_t);
            Fp += En * (iu * s.a[n] * Ne_p - s.b[n] * Mo_p);
            break;
        case MieField::magnetic_incident:
            Fr += -En * (iu * No_r);
            Ft += -En * (Me_t + iu * No_t);
            Fp += -En * (Me_p + iu * No_p);
            break;
        case MieField::magnetic_scattered:
            Fr += En * (iu * s.b[n] * No_r);
            Ft += En * (s.a[n] * Me_t + iu * s.b[n] * No_t);
            Fp += En * (s.a[n] * Me_p + iu * s.b[n] * No_p);
            break;
        }
        ipow *= iu;
    }
    return Fr * f.er.cast<cplx>() + Ft * f.et.cast<cplx>() +
           Fp * f.ep.cast<cplx>();
}

} // namespace detail

inline MieSeries mie_series(double k, double radius, int n_max = 0) {
    if (!(k > 0.0) || !(radius > 0.0))
        throw std::invalid_argument("mie_series: k and radius must be positive");
    const double x = k * radius;
    if (n_max <= 0) n_max = std::max(10, int(std::ceil(x)) + 15);

    MieSeries s;
    s.k = k;
    s.radius = radius;
    s.n_max = n_max;
    s.psi.assign(n_max + 1, cplx(0.0, 0.0));
    s.xi = s.dpsi = s.dxi = s.a = s.b = s.psi;

    std::vector<double> jn(n_max + 1), yn(n_max + 1);
    for (int n = 0; n <= n_max; ++n) {
        jn[n] = std::sph_bessel(unsigned(n), x);
        yn[n] = std::sph_neumann(unsigned(n), x);
    }
    for (int n = 1; n <= n_max; ++n) {
        s.psi[n] = x * jn[n];
        s.xi[n] = x * cplx(jn[n], yn[n]);
        s.dpsi[n] = x * jn[n - 1] - double(n) * jn[n];
        s.dxi[n] = x * cplx(jn[n - 1], yn[n - 1]) - double(n) * cplx(jn[n], yn[n]);
        s.a[n] = s.dpsi[n] / s.dxi[n];
        s.b[n] = s.psi[n] / s.xi[n];
    }
    return s;
}

// Induced surface current n x H_total on the sphere, evaluated for the
// direction of p (the radial distance of p is ignored, so points on a faceted
// approximation of the sphere are fine).
inline Vec3c mie_surface_current(const MieSeries& s, const Vec3& p) {
    const detail::SphericalFrame f = detail::spherical_frame(p);
    std::vector<double> pi_n, tau_n;
    detail::mie_angular(f.mu, s.n_max, pi_n, tau_n);

    const double x = s.k * s.radius;
    cplx sum_theta = 0.0, sum_phi = 0.0;
    cplx ipow = iu;
    for (int n = 1; n <= s.n_max; ++n) {
        const cplx En = ipow * ((2.0 * n + 1.0) / (double(n) * (n + 1.0)));
        sum_theta += En * (iu * tau_n[n] / s.dxi[n] - pi_n[n] / s.xi[n]);
        sum_phi += En * (iu * pi_n[n] / s.dxi[n] - tau_n[n] / s.xi[n]);
        ipow *= iu;
    }
    const cplx Kt = -(std::cos(f.phi) / x) * sum_theta;
    const cplx Kp = (std::sin(f.phi) / x) * sum_phi;
    return Kt * f.et.cast<cplx>() + Kp * f.ep.cast<cplx>();
}

// Series form of the incident plane wave x_hat exp(ikz); converges to the
// exact wave everywhere, which makes it a self-contained consistency check of
// the expansion machinery.
inline Vec3c mie_incident_series(const MieSeries& s, const Vec3& p) {
    return detail::mie_field_eval(s, p, detail::MieField::electric_incident);
}

inline Vec3c mie_scattered_field(const MieSeries& s, const Vec3& p) {
    return detail::mie_field_eval(s, p, detail::MieField::electric_scattered);
}

inline Vec3c mie_incident_magnetic_series(const MieSeries& s, const Vec3& p) {
    return detail::mie_field_eval(s, p, detail::MieField::magnetic_incident);
}

inline Vec3c mie_scattered_magnetic(const MieSeries& s, const Vec3& p) {
    return detail::mie_field_eval(s, p, detail::MieField::magnetic_scattered);
}

// Tangential part of the total electric field on the sphere surface in the
// given direction; identically zero for a perfect conductor.
inline double mie_boundary_residual(const MieSeries& s, const Vec3& direction) {
    const Vec3 n = direction.normalized();
    const Vec3 p = s.radius * n;
    const Vec3c E = mie_incident_series(s, p) + mie_scattered_field(s, p);
    const Vec3c nc = n.cast<cplx>();
    const Vec3c Et = E - nc.dot(E) * nc;
    return Et.norm();
}

// L2-relative error of a panelwise-affine expansion against the analytic
// surface current: sqrt(int |j - j_mie|^2) / sqrt(int |j_mie|^2), integrated
// with a fixed-degree rule on each panel.
inline double mie_relative_error(const FunctionFamily& fam,
                                 const Eigen::VectorXcd& coeffs,
                                 const MieSeries& s, int degree = 4) {
    if (coeffs.size() != fam.size())
        throw std::invalid_argument("mie_relative_error: coefficient size");
    const TriangleRule rule = triangle_rule(degree);
    double num = 0.0, den = 0.0;
    for (int t = 0; t < fam.mesh->num_triangles(); ++t) {
        const MappedRule mr = map_rule(rule, fam.mesh->tri(t));
        for (size_t q = 0; q < mr.x.size(); ++q) {
            Vec3c jc = Vec3c::Zero();
            for (const auto& pt : fam.panel_terms[t])
                jc += coeffs[pt.fn] * (pt.beta * mr.x[q] + pt.w).cast<cplx>();
            const Vec3c ja = mie_surface_current(s, mr.x[q]);
            num += mr.w[q] * (jc - ja).squaredNorm();
            den += mr.w[q] * ja.squaredNorm();
        }
    }
    return std::sqrt(num / den);
}

} // namespace efie
