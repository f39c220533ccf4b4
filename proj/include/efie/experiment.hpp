#pragma once

#include "assembly.hpp"
#include "basis.hpp"
#include "config.hpp"
#include "mesh.hpp"
#include "mie.hpp"
#include "solver.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <memory>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace efie {

// ----------------------------------------------------------------------------
// One body + one wavenumber -> every matrix the five approaches can ask for.
// The kernel matrices that live on the refined mesh are produced in a single
// shared pass so each panel pair is integrated once.
// ----------------------------------------------------------------------------

struct OperatorParts {
    bool system_hdiv = false;        // dual-tested system and right-hand side
    bool system_l2 = false;          // edge-tested system and right-hand side
    bool middle_single_layer = false; // approach 1 middle
    bool middle_efio_swapped = false; // approach 2 middle
    bool middle_efie_dual = false;    // approach 3 middle
};

inline OperatorParts parts_for_approaches(const std::vector<int>& approaches) {
    OperatorParts p;
    for (int a : approaches) {
        switch (a) {
        case 1:
            p.system_hdiv = p.middle_single_layer = true;
            break;
        case 2:
            p.system_hdiv = p.middle_efio_swapped = true;
            break;
        case 3:
            p.system_l2 = p.middle_efie_dual = true;
            break;
        case 4:
            p.system_hdiv = true;
            break;
        case 5:
            p.system_l2 = true;
            break;
        default:
            throw std::invalid_argument("approach must be in 1..5");
        }
    }
    return p;
}

struct OperatorSet {
    std::unique_ptr<Mesh> base;
    std::unique_ptr<RefinedMesh> refined; // only when a refined part is needed
    EdgeFunctionFamily edges;             // on *base
    FunctionFamily edges_refined;         // edge functions restricted to children
    DualFunctionFamily duals;             // on refined->mesh
    double k = 0.0, c = 0.0;
    ApproachMatrices matrices;
};

inline OperatorSet build_operator_set(Mesh base_mesh, double k, double c,
                                      const OperatorParts& parts,
                                      const QuadConfig& quad = {}) {
    OperatorSet set;
    set.k = k;
    set.c = c;
    set.base = std::make_unique<Mesh>(std::move(base_mesh));
    set.edges = build_edge_functions(*set.base);

    const PlaneWave wave{Vec3(0.0, 0.0, k), Vec3(1.0, 0.0, 0.0)};
    auto shared = [](Eigen::MatrixXcd&& A) {
        return std::make_shared<const Eigen::MatrixXcd>(std::move(A));
    };
    auto shared_real = [](const Eigen::MatrixXd& A) {
        return std::make_shared<const Eigen::MatrixXcd>(A.cast<cplx>());
    };

    const bool need_refined = parts.system_hdiv || parts.middle_single_layer ||
                              parts.middle_efio_swapped || parts.middle_efie_dual;
    if (need_refined) {
        set.refined = std::make_unique<RefinedMesh>(barycentric_refine(*set.base));
        set.edges_refined = restrict_to_children(set.edges.fam, *set.refined);
        set.duals = build_dual_functions(*set.base, *set.refined);
        const FunctionFamily& s = set.duals.fam;
        const FunctionFamily& t = set.edges_refined;

        // Pairing grams between the two families and the div-augmented grams
        // used as preconditioner brackets; all single-panel integrals.
        set.matrices.gram_dual_edge = shared_real(assemble_gram_mixed(s, t));
        set.matrices.gram_edge_dual = shared_real(assemble_gram_mixed(t, s));
        set.matrices.gram_dual = shared_real(assemble_gram_dot(s));
        set.matrices.gram_hdiv_edge = shared_real(assemble_gram_hdiv(t, c));
        set.matrices.gram_hdiv_dual = shared_real(assemble_gram_hdiv(s, c));

        // Kernel matrices on the refined mesh share one pair-moment pass.
        Eigen::MatrixXcd a_hdiv, a_hdiv_swapped, single_layer, efie_dual;
        std::vector<FormRequest> forms;
        if (parts.system_hdiv)
            forms.push_back({&s, &t, efie_hdiv_spec(k, c), &a_hdiv});
        if (parts.middle_efio_swapped)
            forms.push_back({&t, &s, efie_hdiv_spec(k, c), &a_hdiv_swapped});
        if (parts.middle_single_layer) {
            BilinearSpec sl;
            sl.dot = iu * k;
            forms.push_back({&s, &s, sl, &single_layer});
        }
        if (parts.middle_efie_dual) {
            BilinearSpec ef;
            ef.dot = iu * k;
            ef.div_div = -iu / k;
            forms.push_back({&s, &s, ef, &efie_dual});
        }
        assemble_forms(k, forms, quad);

        if (parts.system_hdiv) {
            set.matrices.system_hdiv = shared(std::move(a_hdiv));
            set.matrices.rhs_hdiv = assemble_rhs_hdiv(s, wave, c);
        }
        if (parts.middle_efio_swapped)
            set.matrices.efio_edge_dual = shared(std::move(a_hdiv_swapped));
        if (parts.middle_single_layer)
            set.matrices.single_layer_dual = shared(std::move(single_layer));
        if (parts.middle_efie_dual)
            set.matrices.efie_dual = shared(std::move(efie_dual));
    }

    if (parts.system_l2) {
        set.matrices.system_l2 = shared(assemble_efie_l2(set.edges.fam, k, quad));
        set.matrices.rhs_l2 = assemble_rhs_l2(set.edges.fam, wave);
    }
    return set;
}

// ----------------------------------------------------------------------------
// Frequency sweep on the sphere with analytic reference currents.
// ----------------------------------------------------------------------------

struct ResultRow {
    int approach = 0;
    double k = 0.0;
    double h = 0.0;
    int N = 0;
    double rel_error = std::numeric_limits<double>::quiet_NaN();
    int outer_iters = 0;
    long inner_iters = 0;
    bool converged = false;
    double seconds = 0.0;
};

struct SweepRequest {
    double radius = 0.25;
    int level = 2;
    std::vector<double> ks;
    std::vector<int> approaches;
    bool deterministic = false; // write zero in the seconds column
};

inline std::vector<ResultRow> run_sweep(const SweepRequest& req,
                                        const Config& cfg = {}) {
    const QuadConfig quad = quadrature_config(cfg);
    const GmresOptions outer = solver_options(cfg);
    const InnerSolveOptions inner = inner_solve_options(cfg);
    const OperatorParts parts = parts_for_approaches(req.approaches);

    std::vector<ResultRow> rows;
    for (double k : req.ks) {
        const double c = divergence_weight(cfg, k);
        OperatorSet set = build_operator_set(make_sphere(req.radius, req.level),
                                             k, c, parts, quad);
        const MieSeries series = mie_series(k, req.radius);
        const double h = mesh_h(*set.base);

        for (int approach : req.approaches) {
            ResultRow row;
            row.approach = approach;
            row.k = k;
            row.h = h;
            row.N = set.edges.fam.size();
            const auto t0 = std::chrono::steady_clock::now();
            SolveReport rep;
            bool failed = false;
            try {
                rep = solve_approach(approach, set.matrices, outer, inner);
            } catch (const SolverError&) {
                failed = true; // inner solve exhausted: counts as non-converged
            }
            row.seconds =
                req.deterministic
                    ? 0.0
                    : std::chrono::duration<double>(
                          std::chrono::steady_clock::now() - t0)
                          .count();
            row.converged = !failed && rep.converged;
            row.outer_iters = rep.iterations;
            for (const auto& kv : rep.inner_iterations)
                row.inner_iters += kv.second;
            if (row.converged)
                row.rel_error = mie_relative_error(set.edges.fam, rep.x, series);
            rows.push_back(row);
        }
    }
    return rows;
}

inline std::string results_csv(const std::vector<ResultRow>& rows) {
    std::ostringstream out;
    out << "approach,k,h,N,rel_error,outer_iters,inner_iters,converged,seconds\n";
    out << std::setprecision(12);
    for (const ResultRow& r : rows) {
        out << r.approach << ',' << r.k << ',' << r.h << ',' << r.N << ',';
        if (r.converged) out << r.rel_error;
        out << ',' << r.outer_iters << ',' << r.inner_iters << ','
            << (r.converged ? "true" : "false") << ',' << r.seconds << '\n';
    }
    return out.str();
}

inline void write_results_csv(const std::string& path,
                              const std::vector<ResultRow>& rows) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open output file: " + path);
    out << results_csv(rows);
}

} // namespace efie
