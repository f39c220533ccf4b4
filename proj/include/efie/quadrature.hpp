#pragma once

#include "geometry.hpp"

#include <array>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace efie {

// ----------------------------------------------------------------------------
// 1D Gauss rules on [0,1], nodes/weights via Golub-Welsch on the Jacobi matrix.
// ----------------------------------------------------------------------------

struct Rule1D {
    std::vector<double> x, w;
};

namespace detail {

inline Rule1D golub_welsch(const std::vector<double>& alpha,
                           const std::vector<double>& beta_sq, double mu0) {
    const int n = static_cast<int>(alpha.size());
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        J(i, i) = alpha[i];
        if (i + 1 < n) J(i, i + 1) = J(i + 1, i) = std::sqrt(beta_sq[i + 1]);
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
    Rule1D r;
    r.x.resize(n);
    r.w.resize(n);
    for (int i = 0; i < n; ++i) {
        r.x[i] = es.eigenvalues()(i);
        double v0 = es.eigenvectors()(0, i);
        r.w[i] = mu0 * v0 * v0;
    }
    return r;
}

} // namespace detail

// n-point Gauss-Legendre on [0,1]; exact through degree 2n-1.
inline Rule1D gauss_legendre(int n) {
    if (n < 1) throw std::invalid_argument("gauss_legendre: n must be >= 1");
    std::vector<double> a(n, 0.0), b(n, 0.0);
    for (int i = 1; i < n; ++i) b[i] = double(i) * i / (4.0 * i * i - 1.0);
    Rule1D r = detail::golub_welsch(a, b, 2.0);
    for (int i = 0; i < n; ++i) {
        r.x[i] = 0.5 * (r.x[i] + 1.0);
        r.w[i] *= 0.5;
    }
    return r;
}

// n-point Gauss-Jacobi on [0,1] with weight (1-x); exact for
// int_0^1 p(x)(1-x) dx with deg p <= 2n-1.
inline Rule1D gauss_jacobi10(int n) {
    if (n < 1) throw std::invalid_argument("gauss_jacobi10: n must be >= 1");
    // Jacobi(a=1, b=0) recurrence on [-1,1].
    std::vector<double> a(n), b(n, 0.0);
    for (int i = 0; i < n; ++i)
        a[i] = -1.0 / ((2.0 * i + 1.0) * (2.0 * i + 3.0));
    for (int i = 1; i < n; ++i)
        b[i] = double(i) * (i + 1.0) / ((2.0 * i + 1.0) * (2.0 * i + 1.0));
    Rule1D r = detail::golub_welsch(a, b, 2.0);
    for (int i = 0; i < n; ++i) {
        r.x[i] = 0.5 * (r.x[i] + 1.0);
        r.w[i] *= 0.25; // dx/2 times (1-x) -> (1-t)/2 scaling
    }
    return r;
}

// ----------------------------------------------------------------------------
// Symmetric rules on the reference triangle {(0,0),(1,0),(0,1)}.
// Points stored barycentric, weights sum to the reference area 1/2.
// All weights positive.
// ----------------------------------------------------------------------------

struct TriangleRule {
    std::vector<std::array<double, 3>> bary; // (l0, l1, l2)
    std::vector<double> w;
    int degree = 0;
};

namespace detail {

inline void push_sym3(TriangleRule& r, double a, double b, double w) {
    // all distinct permutations of (a, b, b)
    r.bary.push_back({a, b, b});
    r.bary.push_back({b, a, b});
    r.bary.push_back({b, b, a});
    r.w.insert(r.w.end(), 3, w);
}

// Conical product rule: Gauss-Jacobi in xi, Gauss-Legendre in eta.
// Exact for total degree <= 2n-1.
inline TriangleRule conical_rule(int n) {
    Rule1D gj = gauss_jacobi10(n), gl = gauss_legendre(n);
    TriangleRule r;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            double x = gj.x[i];
            double y = gl.x[j] * (1.0 - x);
            r.bary.push_back({1.0 - x - y, x, y});
            r.w.push_back(gj.w[i] * gl.w[j]);
        }
    return r;
}

} // namespace detail

// degree in [1,10]
inline TriangleRule triangle_rule(int degree) {
    TriangleRule r;
    r.degree = degree;
    switch (degree) {
    case 1:
        r.bary.push_back({1.0 / 3, 1.0 / 3, 1.0 / 3});
        r.w.push_back(0.5);
        return r;
    case 2:
        detail::push_sym3(r, 2.0 / 3, 1.0 / 6, 1.0 / 6);
        return r;
    case 3:
    case 4:
        // 6-point rule, exact through degree 4
        detail::push_sym3(r, 0.816847572980459, 0.091576213509771,
                          0.109951743655322 / 2.0);
        detail::push_sym3(r, 0.108103018168070, 0.445948490915965,
                          0.223381589678011 / 2.0);
        return r;
    case 5:
        r.bary.push_back({1.0 / 3, 1.0 / 3, 1.0 / 3});
        r.w.push_back(9.0 / 80.0);
        detail::push_sym3(r, 0.059715871789770, 0.470142064105115,
                          0.132394152788506 / 2.0);
        detail::push_sym3(r, 0.797426985353087, 0.101286507323456,
                          0.125939180544827 / 2.0);
        return r;
    case 6:
    case 7:
    case 8:
    case 9:
    case 10: {
        TriangleRule c = detail::conical_rule((degree + 2) / 2);
        c.degree = degree;
        return c;
    }
    default:
        throw std::invalid_argument("triangle_rule: degree must be in [1,10]");
    }
}

namespace detail {

// Square-to-triangle rule with points clustered toward all three edges:
// a quintic smoothstep on each axis of a Duffy-style map, so the composite
// integrand of an edge-logarithmic factor stays Gauss-friendly.
inline TriangleRule clustered_triangle_rule(int n) {
    const Rule1D gl = gauss_legendre(n);
    auto m = [](double t) { return t * t * t * (10.0 + t * (-15.0 + 6.0 * t)); };
    auto dm = [](double t) { return 30.0 * t * t * (1.0 - t) * (1.0 - t); };
    TriangleRule r;
    r.degree = 0;
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            const double u = gl.x[i], v = gl.x[j];
            const double mu = m(u), mv = m(v);
            const double l1 = mu, l2 = mv * (1.0 - mu);
            r.bary.push_back({l1, l2, 1.0 - l1 - l2});
            r.w.push_back(gl.w[i] * gl.w[j] * dm(u) * dm(v) * (1.0 - mu));
        }
    }
    return r;
}

} // namespace detail

// Quadrature points mapped onto a physical triangle; weights include the
// area Jacobian, i.e. sum(w) == area(T).
struct MappedRule {
    std::vector<Vec3> x;
    std::vector<double> w;
};

inline MappedRule map_rule(const TriangleRule& r, const Triangle& t) {
    MappedRule m;
    const double jac = 2.0 * t.area();
    m.x.reserve(r.bary.size());
    m.w.reserve(r.bary.size());
    for (size_t q = 0; q < r.bary.size(); ++q) {
        m.x.push_back(t.point(r.bary[q][0], r.bary[q][1], r.bary[q][2]));
        m.w.push_back(r.w[q] * jac);
    }
    return m;
}

} // namespace efie
