#pragma once

#include "geometry.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace efie {

// ----------------------------------------------------------------------------
// Dense complex Krylov solver layer: full-memory GMRES with optional restart
// and right preconditioning, an LU oracle, and the sandwich preconditioners
// that realize every Gram inverse as an inner GMRES solve (counted per
// matrix, so ill-conditioned Grams show up as inner-iteration totals).
// ----------------------------------------------------------------------------

struct LinearOperator {
    Eigen::Index n = 0;
    std::function<Eigen::VectorXcd(const Eigen::VectorXcd&)> apply;
};

// Non-owning view; keep the matrix alive for the operator's lifetime.
inline LinearOperator matrix_operator(const Eigen::MatrixXcd& A) {
    if (A.rows() != A.cols())
        throw std::invalid_argument("matrix_operator: square matrix required");
    return {A.rows(), [&A](const Eigen::VectorXcd& x) -> Eigen::VectorXcd {
                return A * x;
            }};
}

struct SolveReport {
    Eigen::VectorXcd x;
    int iterations = 0;
    bool converged = false;
    std::vector<double> residual_history; // relative to the right-hand side
    std::map<std::string, long> inner_iterations;
};

struct GmresOptions {
    double tol = 1e-5;
    int max_iter = 3000;
    int restart = 0; // 0: no restart
};

struct SolverError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace detail {

// One non-restarted GMRES cycle on op (right-preconditioned if P is given),
// starting from residual r. Appends |residual|/bnorm per step to history and
// returns the coefficient update u with op(P u) ~= r.
struct GmresCycle {
    Eigen::VectorXcd update;
    int steps = 0;
    bool converged = false;
};

inline GmresCycle gmres_cycle(const LinearOperator& op, const LinearOperator* P,
                              const Eigen::VectorXcd& r, double bnorm,
                              double tol, int max_steps,
                              std::vector<double>& history) {
    const Eigen::Index n = op.n;
    const double beta = r.norm();

    // Each Givens rotation i acts on rows (i, i+1) as
    //   [u; v] -> [conj(c_i) u + conj(s_i) v; -s_i u + c_i v]
    // with (c_i, s_i) built from the column it annihilates.
    std::vector<Eigen::VectorXcd> V;
    V.push_back(r / beta);
    std::vector<std::vector<cplx>> R; // rotated upper-triangular columns
    std::vector<cplx> cs, sn;
    std::vector<cplx> g{cplx(beta, 0.0)};

    GmresCycle out;
    for (int j = 0; j < max_steps; ++j) {
        Eigen::VectorXcd w = op.apply(P ? P->apply(V[j]) : V[j]);
        if (w.size() != n) throw SolverError("gmres: operator size mismatch");
        std::vector<cplx> h(j + 1);
        for (int i = 0; i <= j; ++i) { // modified Gram-Schmidt
            h[i] = V[i].dot(w);
            w -= h[i] * V[i];
        }
        const double hlast = w.norm();

        for (int i = 0; i < j; ++i) {
            const cplx t = std::conj(cs[i]) * h[i] + std::conj(sn[i]) * h[i + 1];
            h[i + 1] = -sn[i] * h[i] + cs[i] * h[i + 1];
            h[i] = t;
        }
        const double denom = std::sqrt(std::norm(h[j]) + hlast * hlast);
        if (denom == 0.0) {
            // The operator mapped V[j] into the current space with no pivot:
            // the cycle is stagnant and the residual cannot improve.
            history.push_back(std::abs(g[j]) / bnorm);
            break;
        }
        cs.push_back(h[j] / denom);
        sn.push_back(cplx(hlast, 0.0) / denom);
        h[j] = denom;
        R.push_back(std::move(h));
        g.push_back(-sn[j] * g[j]);
        g[j] = std::conj(cs[j]) * g[j];

        const double rel = std::abs(g[j + 1]) / bnorm;
        history.push_back(rel);
        if (rel < tol) { // covers happy breakdown: hlast = 0 forces rel = 0
            out.converged = true;
            break;
        }
        if (j + 1 < max_steps) V.push_back(w / hlast);
    }

    // Back-substitute R y = g and expand in the Krylov vectors.
    const int m = int(R.size());
    std::vector<cplx> y(m);
    for (int i = m - 1; i >= 0; --i) {
        cplx s = g[i];
        for (int l = i + 1; l < m; ++l) s -= R[l][i] * y[l];
        // A vanished pivot means the step contributed nothing (degenerate
        // operator); drop it rather than divide by zero.
        y[i] = R[i][i] == cplx(0.0, 0.0) ? cplx(0.0, 0.0) : s / R[i][i];
    }
    out.update = Eigen::VectorXcd::Zero(n);
    for (int i = 0; i < m; ++i) out.update += y[i] * V[i];
    out.steps = m;
    return out;
}

} // namespace detail

inline SolveReport gmres(const LinearOperator& op, const Eigen::VectorXcd& b,
                         const GmresOptions& opt = {},
                         const LinearOperator* right_precond = nullptr) {
    SolveReport rep;
    rep.x = Eigen::VectorXcd::Zero(op.n);
    const double bnorm = b.norm();
    if (bnorm == 0.0) {
        rep.converged = true;
        rep.residual_history = {0.0};
        return rep;
    }

    Eigen::VectorXcd r = b;
    while (rep.iterations < opt.max_iter) {
        const int remaining = opt.max_iter - rep.iterations;
        const int cycle_len =
            opt.restart > 0 ? std::min(opt.restart, remaining) : remaining;
        detail::GmresCycle cyc = detail::gmres_cycle(
            op, right_precond, r, bnorm, opt.tol, cycle_len, rep.residual_history);
        rep.iterations += cyc.steps;
        rep.x += right_precond ? right_precond->apply(cyc.update) : cyc.update;
        if (cyc.converged) {
            rep.converged = true;
            break;
        }
        if (cyc.steps == 0) break; // stagnant cycle: give up
        r = b - op.apply(rep.x);
        if (r.norm() / bnorm < opt.tol) {
            rep.converged = true;
            break;
        }
    }
    return rep;
}

inline Eigen::VectorXcd lu_solve(const Eigen::MatrixXcd& A,
                                 const Eigen::VectorXcd& b) {
    if (A.rows() != A.cols() || A.rows() != b.size())
        throw std::invalid_argument("lu_solve: dimension mismatch");
    Eigen::PartialPivLU<Eigen::MatrixXcd> lu(A);
    Eigen::VectorXcd x = lu.solve(b);
    if (!x.allFinite())
        throw SolverError("lu_solve: matrix singular to working precision");
    return x;
}

// ----------------------------------------------------------------------------
// Inner-solve accounting and the sandwich preconditioner G1^{-1} M G2^{-1}.
// ----------------------------------------------------------------------------

struct InnerCounter {
    std::map<std::string, long> totals;
    void add(const std::string& label, long it) { totals[label] += it; }
    long total(const std::string& label) const {
        const auto it = totals.find(label);
        return it == totals.end() ? 0 : it->second;
    }
};

struct InnerSolveOptions {
    double tol = 1e-8;
    int max_iter = 3000;
};

// Applies y -> G1^{-1} (M (G2^{-1} y)); each inverse is an inner GMRES solve
// recorded in the counter under that matrix's label.
inline LinearOperator sandwich_preconditioner(
    std::shared_ptr<const Eigen::MatrixXcd> g1, std::string label1,
    std::shared_ptr<const Eigen::MatrixXcd> middle,
    std::shared_ptr<const Eigen::MatrixXcd> g2, std::string label2,
    InnerCounter* counter, const InnerSolveOptions& opt = {}) {
    if (!g1 || !middle || !g2)
        throw std::invalid_argument("sandwich_preconditioner: missing matrix");
    const Eigen::Index n = g1->rows();
    auto inner = [counter, opt](const Eigen::MatrixXcd& G,
                                const std::string& label,
                                const Eigen::VectorXcd& rhs) {
        GmresOptions io;
        io.tol = opt.tol;
        io.max_iter = opt.max_iter;
        const LinearOperator gop = matrix_operator(G);
        SolveReport rep = gmres(gop, rhs, io);
        if (counter) counter->add(label, rep.iterations);
        if (!rep.converged)
            throw SolverError("inner solve on " + label + " did not converge");
        return rep.x;
    };
    return {n, [=](const Eigen::VectorXcd& y) -> Eigen::VectorXcd {
                const Eigen::VectorXcd u = inner(*g2, label2, y);
                const Eigen::VectorXcd v = (*middle) * u;
                return inner(*g1, label1, v);
            }};
}

// ----------------------------------------------------------------------------
// The five solution strategies. 1, 2 and 4 solve the div-conforming-tested
// system; 3 and 5 the plain one. 1-3 use right sandwich preconditioners whose
// outer Gram inverses run as counted inner solves:
//   1:  gram_dual_edge^-1  . single_layer_dual . gram_dual^-1
//   2:  gram_hdiv_edge^-1  . efio_edge_dual    . gram_hdiv_dual^-1
//   3:  gram_dual_edge^-1  . efie_dual         . gram_edge_dual^-1
// The unknowns of every approach are edge-function coefficients.
// ----------------------------------------------------------------------------

struct ApproachMatrices {
    // Systems and right-hand sides.
    std::shared_ptr<const Eigen::MatrixXcd> system_hdiv, system_l2;
    Eigen::VectorXcd rhs_hdiv, rhs_l2;
    // Preconditioner middles.
    std::shared_ptr<const Eigen::MatrixXcd> single_layer_dual; // dual x dual
    std::shared_ptr<const Eigen::MatrixXcd> efio_edge_dual;    // edge-tested, dual trial
    std::shared_ptr<const Eigen::MatrixXcd> efie_dual;         // plain form on duals
    // Gram matrices.
    std::shared_ptr<const Eigen::MatrixXcd> gram_dual_edge; // (n x s_i, t_j)
    std::shared_ptr<const Eigen::MatrixXcd> gram_edge_dual; // (n x t_i, s_j)
    std::shared_ptr<const Eigen::MatrixXcd> gram_dual;      // (s_i, s_j)
    std::shared_ptr<const Eigen::MatrixXcd> gram_hdiv_edge; // div-augmented, edges
    std::shared_ptr<const Eigen::MatrixXcd> gram_hdiv_dual; // div-augmented, duals
};

// Labels under which inner iterations are recorded.
inline const char* gram_label_dual_edge() { return "gram_dual_edge"; }
inline const char* gram_label_edge_dual() { return "gram_edge_dual"; }
inline const char* gram_label_dual() { return "gram_dual"; }
inline const char* gram_label_hdiv_edge() { return "gram_hdiv_edge"; }
inline const char* gram_label_hdiv_dual() { return "gram_hdiv_dual"; }

inline LinearOperator build_preconditioner(int approach,
                                           const ApproachMatrices& m,
                                           InnerCounter* counter,
                                           const InnerSolveOptions& opt = {}) {
    switch (approach) {
    case 1:
        return sandwich_preconditioner(m.gram_dual_edge, gram_label_dual_edge(),
                                       m.single_layer_dual, m.gram_dual,
                                       gram_label_dual(), counter, opt);
    case 2:
        return sandwich_preconditioner(m.gram_hdiv_edge, gram_label_hdiv_edge(),
                                       m.efio_edge_dual, m.gram_hdiv_dual,
                                       gram_label_hdiv_dual(), counter, opt);
    case 3:
        return sandwich_preconditioner(m.gram_dual_edge, gram_label_dual_edge(),
                                       m.efie_dual, m.gram_edge_dual,
                                       gram_label_edge_dual(), counter, opt);
    default:
        throw std::invalid_argument("build_preconditioner: approach must be 1-3");
    }
}

inline SolveReport solve_approach(int approach, const ApproachMatrices& m,
                                  const GmresOptions& outer = {},
                                  const InnerSolveOptions& inner = {}) {
    if (approach < 1 || approach > 5)
        throw std::invalid_argument("solve_approach: approach must be 1-5");
    const bool hdiv = approach == 1 || approach == 2 || approach == 4;
    const auto& system = hdiv ? m.system_hdiv : m.system_l2;
    const auto& rhs = hdiv ? m.rhs_hdiv : m.rhs_l2;
    if (!system) throw std::invalid_argument("solve_approach: missing system");

    const LinearOperator op = matrix_operator(*system);
    InnerCounter counter;
    SolveReport rep;
    if (approach <= 3) {
        const LinearOperator P = build_preconditioner(approach, m, &counter, inner);
        rep = gmres(op, rhs, outer, &P);
    } else {
        rep = gmres(op, rhs, outer);
    }
    rep.inner_iterations = counter.totals;
    return rep;
}

} // namespace efie
