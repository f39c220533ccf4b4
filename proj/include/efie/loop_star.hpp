#pragma once

#include "basis.hpp"
#include "mesh.hpp"

#include <Eigen/Dense>

namespace efie {

// ----------------------------------------------------------------------------
// Loop-star splitting of the two function families. Loops span the
// divergence-free subspace, stars a complement carrying all the charge;
// together they resolve the two very different low-frequency scalings of the
// operator blocks. Columns are coefficient vectors in the family's own
// numbering, scaled to unit Euclidean norm.
//
// Edge functions (one per edge):
//   loop around vertex v:  coeff(e) = (delta_{v,a} - delta_{v,b}) / flux(e)
//   star on face f:        coeff(e) = +-1 / flux(e), + where f is left of e
// Dual-cell functions (one per primal edge):
//   loop around face f:    coeff(e) = +-1 / transfer(e), + where f is left
//   star on vertex v:      coeff(e) = (delta_{v,a} - delta_{v,b}) / transfer(e)
// One loop and one star are dropped (the highest-indexed) to make the
// combined set a basis: (V-1) + (F-1) = E on a genus-0 closed surface.
// ----------------------------------------------------------------------------

struct LoopStar {
    Eigen::MatrixXd loops; // E x (V-1) or E x (F-1)
    Eigen::MatrixXd stars;
};

namespace detail {

inline void normalize_columns(Eigen::MatrixXd& m) {
    for (int j = 0; j < m.cols(); ++j) {
        const double n = m.col(j).norm();
        if (n > 0.0) m.col(j) /= n;
    }
}

} // namespace detail

// Loop-star coefficients for the edge-function family on its mesh.
inline LoopStar loop_star_edge(const Mesh& mesh,
                               const std::vector<double>& edge_flux) {
    const int E = mesh.num_edges();
    LoopStar ls;
    ls.loops = Eigen::MatrixXd::Zero(E, mesh.num_vertices() - 1);
    ls.stars = Eigen::MatrixXd::Zero(E, mesh.num_triangles() - 1);

    for (int e = 0; e < E; ++e) {
        const auto& ed = mesh.edges[e];
        if (ed.a < mesh.num_vertices() - 1) ls.loops(e, ed.a) += 1.0 / edge_flux[e];
        if (ed.b < mesh.num_vertices() - 1) ls.loops(e, ed.b) -= 1.0 / edge_flux[e];
        if (ed.left < mesh.num_triangles() - 1)
            ls.stars(e, ed.left) += 1.0 / edge_flux[e];
        if (ed.right < mesh.num_triangles() - 1)
            ls.stars(e, ed.right) -= 1.0 / edge_flux[e];
    }
    detail::normalize_columns(ls.loops);
    detail::normalize_columns(ls.stars);
    return ls;
}

// Loop-star coefficients for the dual-cell family: indexed by primal edges,
// loops attached to primal faces, stars to primal vertices.
inline LoopStar loop_star_dual(const Mesh& base,
                               const std::vector<double>& transfer) {
    const int E = base.num_edges();
    LoopStar ls;
    ls.loops = Eigen::MatrixXd::Zero(E, base.num_triangles() - 1);
    ls.stars = Eigen::MatrixXd::Zero(E, base.num_vertices() - 1);

    for (int e = 0; e < E; ++e) {
        const auto& ed = base.edges[e];
        if (ed.left < base.num_triangles() - 1)
            ls.loops(e, ed.left) += 1.0 / transfer[e];
        if (ed.right < base.num_triangles() - 1)
            ls.loops(e, ed.right) -= 1.0 / transfer[e];
        if (ed.a < base.num_vertices() - 1) ls.stars(e, ed.a) += 1.0 / transfer[e];
        if (ed.b < base.num_vertices() - 1) ls.stars(e, ed.b) -= 1.0 / transfer[e];
    }
    detail::normalize_columns(ls.loops);
    detail::normalize_columns(ls.stars);
    return ls;
}

} // namespace efie
