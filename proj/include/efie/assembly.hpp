#pragma once

#include "basis.hpp"
#include "pair_engine.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace efie {

// ----------------------------------------------------------------------------
// Galerkin assembly. Every kernel matrix here is a linear combination of five
// pair contractions; with the panelwise-affine traces f = beta_x x + w_x
// (test, on the panel with outward normal n) and g = beta_y y + w_y (trial),
// each contraction collapses onto the pair moments:
//
//   dot       int int f.g G               rot_dot   int int (n x f).g G
//   div_div   int int (div f)(div g) G
//   rot_grad  int int (n x f).grad_x G (div g)
//   div_cross int int (div f) n.(grad_x G x g)
//
// using x x grad_x G = -grad_x G x y pointwise (grad_x G is parallel to x-y).
// ----------------------------------------------------------------------------

struct BilinearSpec {
    cplx dot{0.0, 0.0};
    cplx rot_dot{0.0, 0.0};
    cplx div_div{0.0, 0.0};
    cplx rot_grad{0.0, 0.0};
    cplx div_cross{0.0, 0.0};

    bool needs_gradient() const {
        return rot_grad != cplx{0.0, 0.0} || div_cross != cplx{0.0, 0.0};
    }
};

namespace detail {

inline cplx vdot(const Vec3c& a, const Vec3& b) {
    return a(0) * b(0) + a(1) * b(1) + a(2) * b(2);
}

} // namespace detail

inline cplx contract_pair(const PairMoments& pm, const BilinearSpec& s,
                          const Vec3& nx, double bx, const Vec3& wx, double by,
                          const Vec3& wy) {
    using detail::cross_rc;
    using detail::vdot;
    cplx v{0.0, 0.0};
    if (s.dot != cplx{0.0, 0.0})
        v += s.dot * (bx * by * pm.XYG + bx * vdot(pm.XG, wy) +
                      by * vdot(pm.YG, wx) + wx.dot(wy) * pm.SG);
    if (s.rot_dot != cplx{0.0, 0.0}) {
        const Vec3 nwx = nx.cross(wx);
        v += s.rot_dot * (bx * by * vdot(pm.XYxG, nx) +
                          bx * vdot(pm.XG, wy.cross(nx)) +
                          by * vdot(pm.YG, nwx) + nwx.dot(wy) * pm.SG);
    }
    if (s.div_div != cplx{0.0, 0.0}) v += s.div_div * (4.0 * bx * by * pm.SG);
    if (s.rot_grad != cplx{0.0, 0.0})
        v += s.rot_grad *
             (2.0 * by * (vdot(cross_rc(wx, pm.Vg), nx) - bx * vdot(pm.Yg, nx)));
    if (s.div_cross != cplx{0.0, 0.0})
        v += s.div_cross *
             (2.0 * bx * (by * vdot(pm.Yg, nx) - vdot(cross_rc(wy, pm.Vg), nx)));
    return v;
}

// One request per matrix; all requests in a batch share the panel-pair sweep
// (and therefore the pair moments, the expensive part).
struct FormRequest {
    const FunctionFamily* test = nullptr;
    const FunctionFamily* trial = nullptr;
    BilinearSpec spec;
    Eigen::MatrixXcd* out = nullptr;
};

inline void assemble_forms(double k, const std::vector<FormRequest>& forms,
                           const QuadConfig& cfg = {}) {
    if (forms.empty()) return;
    const Mesh* mesh = forms[0].test->mesh;
    bool need_grad = false;
    for (const FormRequest& fr : forms) {
        if (fr.test->mesh != mesh || fr.trial->mesh != mesh)
            throw std::invalid_argument(
                "assemble_forms: all families must share one mesh");
        fr.out->setZero(fr.test->size(), fr.trial->size());
        need_grad = need_grad || fr.spec.needs_gradient();
    }

    const PairRules rules(cfg);
    const int F = mesh->num_triangles();
    for (int tx = 0; tx < F; ++tx) {
        const Vec3 nx = mesh->tri(tx).normal();
        bool test_active = false;
        for (const FormRequest& fr : forms)
            test_active = test_active || !fr.test->panel_terms[tx].empty();
        if (!test_active) continue;

        for (int ty = 0; ty < F; ++ty) {
            bool active = false;
            for (const FormRequest& fr : forms)
                active = active || (!fr.test->panel_terms[tx].empty() &&
                                    !fr.trial->panel_terms[ty].empty());
            if (!active) continue;

            const PairMoments pm = pair_moments(*mesh, tx, ty, k, rules, need_grad);
            for (const FormRequest& fr : forms)
                for (const auto& pt : fr.test->panel_terms[tx])
                    for (const auto& qt : fr.trial->panel_terms[ty])
                        (*fr.out)(pt.fn, qt.fn) +=
                            contract_pair(pm, fr.spec, nx, pt.beta, pt.w, qt.beta,
                                          qt.w);
        }
    }
}

// ----------------------------------------------------------------------------
// Named kernel matrices. omega = k and epsilon = mu = 1 throughout, so the
// prefactors are i*k on the vector-potential part and -i/k on the scalar
// part, and i*k*c on the charge coupling of the div-conforming-tested form.
// ----------------------------------------------------------------------------

// (n x f_i, n x EFIO f_j): the plain Galerkin electric-field form. Used with
// the edge family on its own mesh, or with the dual family for the
// preconditioner middle matrix.
inline Eigen::MatrixXcd assemble_efie_l2(const FunctionFamily& fam, double k,
                                         const QuadConfig& cfg = {}) {
    BilinearSpec s;
    s.dot = iu * k;
    s.div_div = -iu / k;
    Eigen::MatrixXcd A;
    assemble_forms(k, {{&fam, &fam, s, &A}}, cfg);
    return A;
}

// (test_i, n x EFIO trial_j) + c (div test_i, div of the rotated trace): the
// div-conforming-tested form. The divergence of the rotated electric trace is
// the normal magnetic field, div_S (n x E) = -n.curl E = -ik n.H with
// H(x) = int grad_x G x trial_j, so the charge coupling carries -ikc. Pass
// (dual, restricted edge) for the system matrix and (restricted edge, dual)
// for the preconditioner middle matrix.
inline BilinearSpec efie_hdiv_spec(double k, double c) {
    BilinearSpec s;
    s.rot_dot = -iu * k;
    s.rot_grad = -iu / k;
    s.div_cross = -iu * k * c;
    return s;
}

inline Eigen::MatrixXcd assemble_efie_hdiv(const FunctionFamily& test,
                                           const FunctionFamily& trial, double k,
                                           double c, const QuadConfig& cfg = {}) {
    Eigen::MatrixXcd A;
    assemble_forms(k, {{&test, &trial, efie_hdiv_spec(k, c), &A}}, cfg);
    return A;
}

// (n x f_i, i k n x int G f_j): the scaled single-layer map on a family.
inline Eigen::MatrixXcd assemble_single_layer(const FunctionFamily& fam, double k,
                                              const QuadConfig& cfg = {}) {
    BilinearSpec s;
    s.dot = iu * k;
    Eigen::MatrixXcd A;
    assemble_forms(k, {{&fam, &fam, s, &A}}, cfg);
    return A;
}

// ----------------------------------------------------------------------------
// Local (single-panel) matrices: Gram variants. Integrands are at most
// quadratic per panel, so the degree-2 rule is exact.
// ----------------------------------------------------------------------------

struct LocalSpec {
    double dot = 0.0;
    double rot_dot = 0.0; // (n x f).g
    double div_div = 0.0;
};

inline Eigen::MatrixXd assemble_local(const FunctionFamily& test,
                                      const FunctionFamily& trial,
                                      const LocalSpec& s) {
    if (test.mesh != trial.mesh)
        throw std::invalid_argument("assemble_local: families must share a mesh");
    const Mesh& mesh = *test.mesh;
    Eigen::MatrixXd G = Eigen::MatrixXd::Zero(test.size(), trial.size());
    const TriangleRule rule = triangle_rule(2);

    for (int t = 0; t < mesh.num_triangles(); ++t) {
        if (test.panel_terms[t].empty() || trial.panel_terms[t].empty()) continue;
        const Triangle T = mesh.tri(t);
        const Vec3 n = T.normal();
        const MappedRule mr = map_rule(rule, T);
        const double area = T.area();
        for (const auto& pt : test.panel_terms[t])
            for (const auto& qt : trial.panel_terms[t]) {
                double v = 0.0;
                if (s.dot != 0.0 || s.rot_dot != 0.0) {
                    for (size_t q = 0; q < mr.x.size(); ++q) {
                        const Vec3 f = pt.beta * mr.x[q] + pt.w;
                        const Vec3 g = qt.beta * mr.x[q] + qt.w;
                        if (s.dot != 0.0) v += s.dot * mr.w[q] * f.dot(g);
                        if (s.rot_dot != 0.0)
                            v += s.rot_dot * mr.w[q] * n.cross(f).dot(g);
                    }
                }
                if (s.div_div != 0.0)
                    v += s.div_div * area * (2.0 * pt.beta) * (2.0 * qt.beta);
                G(pt.fn, qt.fn) += v;
            }
    }
    return G;
}

// int (n x f_i).g_j : the mixed pairing between the two families.
inline Eigen::MatrixXd assemble_gram_mixed(const FunctionFamily& test,
                                           const FunctionFamily& trial) {
    LocalSpec s;
    s.rot_dot = 1.0;
    return assemble_local(test, trial, s);
}

// int f_i.f_j : the plain product Gram of one family.
inline Eigen::MatrixXd assemble_gram_dot(const FunctionFamily& fam) {
    LocalSpec s;
    s.dot = 1.0;
    return assemble_local(fam, fam, s);
}

// int f_i.f_j + c int (div f_i)(div f_j) : the div-augmented product Gram.
inline Eigen::MatrixXd assemble_gram_hdiv(const FunctionFamily& fam, double c) {
    LocalSpec s;
    s.dot = 1.0;
    s.div_div = c;
    return assemble_local(fam, fam, s);
}

// ----------------------------------------------------------------------------
// Incident plane wave and right-hand sides. H = (k_vec x E0)/(omega mu) e^{ikx}
// with omega mu = |k_vec| here.
// ----------------------------------------------------------------------------

struct PlaneWave {
    Vec3 k_vec = Vec3(0.0, 0.0, 1.0);
    Vec3 E0 = Vec3(1.0, 0.0, 0.0);

    double k() const { return k_vec.norm(); }
    cplx phase(const Vec3& x) const { return std::exp(iu * k_vec.dot(x)); }
    Vec3c E(const Vec3& x) const { return E0.cast<cplx>() * phase(x); }
    Vec3c H(const Vec3& x) const {
        return (k_vec.cross(E0) / k_vec.norm()).cast<cplx>() * phase(x);
    }
};

namespace detail {

template <class Fn>
inline Eigen::VectorXcd assemble_functional(const FunctionFamily& fam, int degree,
                                            Fn&& panel_term_value) {
    const Mesh& mesh = *fam.mesh;
    Eigen::VectorXcd b = Eigen::VectorXcd::Zero(fam.size());
    const TriangleRule rule = triangle_rule(degree);
    for (int t = 0; t < mesh.num_triangles(); ++t) {
        if (fam.panel_terms[t].empty()) continue;
        const Triangle T = mesh.tri(t);
        const Vec3 n = T.normal();
        const MappedRule mr = map_rule(rule, T);
        for (const auto& pt : fam.panel_terms[t])
            for (size_t q = 0; q < mr.x.size(); ++q)
                b(pt.fn) += mr.w[q] * panel_term_value(pt, n, mr.x[q]);
    }
    return b;
}

} // namespace detail

// b_i = -int f_i . E^inc : pairs with the plain Galerkin form.
inline Eigen::VectorXcd assemble_rhs_l2(const FunctionFamily& fam,
                                        const PlaneWave& wave, int degree = 8) {
    return detail::assemble_functional(
        fam, degree,
        [&](const FunctionFamily::PanelTerm& pt, const Vec3&, const Vec3& x) {
            const Vec3 f = pt.beta * x + pt.w;
            return -detail::vdot(wave.E(x), f);
        });
}

// b_i = int (n x f_i) . E^inc + i k c int (div f_i) (n . H^inc) : pairs with
// the div-conforming-tested form.
inline Eigen::VectorXcd assemble_rhs_hdiv(const FunctionFamily& fam,
                                          const PlaneWave& wave, double c,
                                          int degree = 8) {
    const double k = wave.k();
    return detail::assemble_functional(
        fam, degree,
        [&](const FunctionFamily::PanelTerm& pt, const Vec3& n, const Vec3& x) {
            const Vec3 f = pt.beta * x + pt.w;
            return detail::vdot(wave.E(x), n.cross(f)) +
                   iu * k * c * (2.0 * pt.beta) * detail::vdot(wave.H(x), n);
        });
}

// ----------------------------------------------------------------------------
// Debug dumps: text "i j re im" per nonzero entry, and a raw little-endian
// image (rows, cols, then row-major re/im pairs, all as 64-bit floats).
// ----------------------------------------------------------------------------

inline void dump_matrix_text(const Eigen::MatrixXcd& A, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("dump_matrix_text: cannot open " + path);
    out.precision(17);
    for (int i = 0; i < A.rows(); ++i)
        for (int j = 0; j < A.cols(); ++j)
            if (A(i, j) != cplx{0.0, 0.0})
                out << i << ' ' << j << ' ' << A(i, j).real() << ' '
                    << A(i, j).imag() << '\n';
    if (!out) throw std::runtime_error("dump_matrix_text: write failed " + path);
}

namespace detail {

inline void put_f64le(std::ofstream& out, double v) {
    std::uint64_t u;
    std::memcpy(&u, &v, sizeof u);
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = (u >> (8 * i)) & 0xff;
    out.write(reinterpret_cast<const char*>(b), 8);
}

inline double get_f64le(std::ifstream& in) {
    unsigned char b[8];
    in.read(reinterpret_cast<char*>(b), 8);
    std::uint64_t u = 0;
    for (int i = 0; i < 8; ++i) u |= std::uint64_t(b[i]) << (8 * i);
    double v;
    std::memcpy(&v, &u, sizeof v);
    return v;
}

} // namespace detail

inline void dump_matrix_binary(const Eigen::MatrixXcd& A,
                               const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("dump_matrix_binary: cannot open " + path);
    detail::put_f64le(out, double(A.rows()));
    detail::put_f64le(out, double(A.cols()));
    for (int i = 0; i < A.rows(); ++i)
        for (int j = 0; j < A.cols(); ++j) {
            detail::put_f64le(out, A(i, j).real());
            detail::put_f64le(out, A(i, j).imag());
        }
    if (!out) throw std::runtime_error("dump_matrix_binary: write failed " + path);
}

inline Eigen::MatrixXcd load_matrix_binary(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("load_matrix_binary: cannot open " + path);
    const double rows = detail::get_f64le(in);
    const double cols = detail::get_f64le(in);
    if (!in || rows < 0 || cols < 0 || rows != std::floor(rows) ||
        cols != std::floor(cols))
        throw std::runtime_error("load_matrix_binary: bad header in " + path);
    const Eigen::Index nr = Eigen::Index(rows), nc = Eigen::Index(cols);
    Eigen::MatrixXcd A(nr, nc);
    for (int i = 0; i < A.rows(); ++i)
        for (int j = 0; j < A.cols(); ++j) {
            const double re = detail::get_f64le(in);
            const double im = detail::get_f64le(in);
            A(i, j) = cplx(re, im);
        }
    if (!in) throw std::runtime_error("load_matrix_binary: truncated " + path);
    return A;
}

} // namespace efie
