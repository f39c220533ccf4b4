#pragma once

#include <Eigen/Dense>
#include <complex>

namespace efie {

using cplx  = std::complex<double>;
using Vec3  = Eigen::Vector3d;
using Vec3c = Eigen::Vector3cd;

constexpr double pi = 3.14159265358979323846;
constexpr cplx   iu = cplx(0.0, 1.0);

namespace detail {

// Componentwise cross product of a real and a complex vector. Eigen's
// cross() conjugates complex operands (it is sesquilinear, like dot()),
// which is never what the kernel algebra here wants.
inline Vec3c cross_rc(const Vec3& a, const Vec3c& b) {
    return Vec3c(a(1) * b(2) - a(2) * b(1), a(2) * b(0) - a(0) * b(2),
                 a(0) * b(1) - a(1) * b(0));
}

} // namespace detail

// Flat triangle with cached derived quantities.
struct Triangle {
    Vec3 q0, q1, q2;

    Vec3 centroid() const { return (q0 + q1 + q2) / 3.0; }

    // Unit normal consistent with vertex order (right-hand rule).
    Vec3 normal() const {
        Vec3 c = (q1 - q0).cross(q2 - q0);
        return c / c.norm();
    }

    double area() const { return 0.5 * (q1 - q0).cross(q2 - q0).norm(); }

    // longest edge
    double diameter() const {
        return std::max({(q1 - q0).norm(), (q2 - q1).norm(), (q0 - q2).norm()});
    }

    Vec3 point(double l0, double l1, double l2) const {
        return l0 * q0 + l1 * q1 + l2 * q2;
    }
};

} // namespace efie
