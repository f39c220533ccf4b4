#pragma once

#include "loop_star.hpp"
#include "solver.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace efie {

// ----------------------------------------------------------------------------
// Offline instrumentation: loop/star block magnitudes and their frequency
// exponents, Gram conditioning, dense preconditioned spectra, and the 2x2
// plane symbols of the preconditioned composite. Nothing here participates in
// the solve paths.
// ----------------------------------------------------------------------------

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
};

// Least-squares line through (log x, log y); r2 is the usual goodness of fit.
inline LineFit loglog_fit(const std::vector<double>& x,
                          const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2)
        throw std::invalid_argument("loglog_fit: need two or more points");
    const int n = int(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
    for (int i = 0; i < n; ++i) {
        if (!(x[i] > 0.0) || !(y[i] > 0.0))
            throw std::invalid_argument("loglog_fit: data must be positive");
        const double lx = std::log(x[i]), ly = std::log(y[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
        syy += ly * ly;
    }
    LineFit f;
    const double vx = sxx - sx * sx / n;
    const double vy = syy - sy * sy / n;
    const double cxy = sxy - sx * sy / n;
    f.slope = cxy / vx;
    f.intercept = (sy - f.slope * sx) / n;
    f.r2 = vy > 0.0 ? (cxy * cxy) / (vx * vy) : 1.0;
    return f;
}

// ----------------------------------------------------------------------------
// Loop/star block magnitudes.
// ----------------------------------------------------------------------------

struct BlockMagnitudes {
    double LL = 0.0, LS = 0.0, SL = 0.0, SS = 0.0;
};

inline BlockMagnitudes block_magnitudes(const Eigen::MatrixXcd& A,
                                        const LoopStar& test,
                                        const LoopStar& trial) {
    if (test.loops.rows() != A.rows() || trial.loops.rows() != A.cols())
        throw std::invalid_argument("block_magnitudes: size mismatch");
    const Eigen::MatrixXcd tl = test.loops.cast<cplx>().transpose() * A;
    const Eigen::MatrixXcd ts = test.stars.cast<cplx>().transpose() * A;
    BlockMagnitudes b;
    b.LL = (tl * trial.loops.cast<cplx>()).cwiseAbs().maxCoeff();
    b.LS = (tl * trial.stars.cast<cplx>()).cwiseAbs().maxCoeff();
    b.SL = (ts * trial.loops.cast<cplx>()).cwiseAbs().maxCoeff();
    b.SS = (ts * trial.stars.cast<cplx>()).cwiseAbs().maxCoeff();
    return b;
}

struct VectorBlockMagnitudes {
    double L = 0.0, S = 0.0;
};

inline VectorBlockMagnitudes vector_block_magnitudes(const Eigen::VectorXcd& b,
                                                     const LoopStar& test) {
    if (test.loops.rows() != b.size())
        throw std::invalid_argument("vector_block_magnitudes: size mismatch");
    VectorBlockMagnitudes v;
    v.L = (test.loops.cast<cplx>().transpose() * b).cwiseAbs().maxCoeff();
    v.S = (test.stars.cast<cplx>().transpose() * b).cwiseAbs().maxCoeff();
    return v;
}

// ----------------------------------------------------------------------------
// Conditioning.
// ----------------------------------------------------------------------------

inline double condition_number(const Eigen::MatrixXd& A) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(A);
    const auto& s = svd.singularValues();
    if (s.size() == 0 || s(s.size() - 1) <= 0.0)
        return std::numeric_limits<double>::infinity();
    return s(0) / s(s.size() - 1);
}

// ----------------------------------------------------------------------------
// Dense spectra of the right-preconditioned systems.
// ----------------------------------------------------------------------------

// The preconditioner of approaches 1-3 as an explicit matrix
// G1^{-1} M G2^{-1}, for eigenvalue studies only.
inline Eigen::MatrixXcd preconditioner_matrix(int approach,
                                              const ApproachMatrices& m) {
    std::shared_ptr<const Eigen::MatrixXcd> g1, mid, g2;
    switch (approach) {
    case 1:
        g1 = m.gram_dual_edge;
        mid = m.single_layer_dual;
        g2 = m.gram_dual;
        break;
    case 2:
        g1 = m.gram_hdiv_edge;
        mid = m.efio_edge_dual;
        g2 = m.gram_hdiv_dual;
        break;
    case 3:
        g1 = m.gram_dual_edge;
        mid = m.efie_dual;
        g2 = m.gram_edge_dual;
        break;
    default:
        throw std::invalid_argument("preconditioner_matrix: approach must be 1-3");
    }
    if (!g1 || !mid || !g2)
        throw std::invalid_argument("preconditioner_matrix: missing matrix");
    const Eigen::Index n = g2->rows();
    const Eigen::MatrixXcd right =
        g2->partialPivLu().solve(Eigen::MatrixXcd::Identity(n, n));
    return g1->partialPivLu().solve((*mid) * right);
}

inline Eigen::VectorXcd preconditioned_spectrum(int approach,
                                                const ApproachMatrices& m) {
    const auto& system = (approach == 3) ? m.system_l2 : m.system_hdiv;
    if (!system)
        throw std::invalid_argument("preconditioned_spectrum: missing system");
    const Eigen::MatrixXcd AP = (*system) * preconditioner_matrix(approach, m);
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> eig(AP, false);
    return eig.eigenvalues();
}

// Fraction of eigenvalues within `radius` of the closest listed center.
inline double cluster_fraction(const Eigen::VectorXcd& eigs,
                               const std::vector<cplx>& centers, double radius) {
    if (eigs.size() == 0) return 0.0;
    int inside = 0;
    for (Eigen::Index i = 0; i < eigs.size(); ++i)
        for (const cplx& c : centers)
            if (std::abs(eigs(i) - c) <= radius) {
                ++inside;
                break;
            }
    return double(inside) / double(eigs.size());
}

// ----------------------------------------------------------------------------
// Plane symbols of the preconditioned composite on the tangent frequency
// variable xi. The high-frequency form has eigenvalues {c k^2/4, -1/4} for
// every nonzero xi; the exact form has {k^2 (1 + c |xi|^2) / (4 (|xi|^2-k^2)),
// -1/4} and needs |xi| > k.
// ----------------------------------------------------------------------------

inline Eigen::Matrix2cd symbol_asymptotic_matrix(double k, double c,
                                                 const Eigen::Vector2d& xi) {
    const double n2 = xi.squaredNorm();
    if (!(n2 > 0.0))
        throw std::invalid_argument("symbol_asymptotic_matrix: xi must be nonzero");
    const Eigen::Vector2d perp(-xi(1), xi(0));
    const Eigen::Matrix2d outer_perp = perp * perp.transpose();
    const Eigen::Matrix2d outer_xi = xi * xi.transpose();
    const Eigen::Matrix2d M =
        (-k * k / (4.0 * n2)) * (outer_perp / (k * k) - c * outer_xi);
    return M.cast<cplx>();
}

inline Eigen::Matrix2cd symbol_exact_matrix(double k, double c,
                                            const Eigen::Vector2d& xi) {
    const double n2 = xi.squaredNorm();
    const double rho2 = n2 - k * k;
    if (!(rho2 > 0.0))
        throw std::invalid_argument("symbol_exact_matrix: need |xi| > k");
    const Eigen::Vector2d perp(-xi(1), xi(0));
    const Eigen::Matrix2d outer_perp = perp * perp.transpose();
    const Eigen::Matrix2d outer_xi = xi * xi.transpose();
    const Eigen::Matrix2d M =
        (k * k / (4.0 * rho2)) *
        (Eigen::Matrix2d::Identity() - outer_perp / (k * k) + c * outer_xi);
    return M.cast<cplx>();
}

struct SymbolEigs {
    double plus = 0.0, minus = 0.0;
};

inline SymbolEigs symbol_asymptotic_eigs(double k, double c) {
    return {c * k * k / 4.0, -0.25};
}

inline SymbolEigs symbol_exact_eigs(double k, double c,
                                    const Eigen::Vector2d& xi) {
    const double n2 = xi.squaredNorm();
    const double rho2 = n2 - k * k;
    if (!(rho2 > 0.0))
        throw std::invalid_argument("symbol_exact_eigs: need |xi| > k");
    return {k * k * (1.0 + c * n2) / (4.0 * rho2), -0.25};
}

} // namespace efie
