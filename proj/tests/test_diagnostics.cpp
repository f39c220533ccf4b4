#include <efie/diagnostics.hpp>
#include <efie/experiment.hpp>

#include <catch_amalgamated.hpp>

#include <algorithm>
#include <random>

using namespace efie;

namespace {

// Sorted-by-real-part eigenvalues of a 2x2 complex matrix.
std::array<cplx, 2> eigs2(const Eigen::Matrix2cd& M) {
    Eigen::ComplexEigenSolver<Eigen::Matrix2cd> eig(M, false);
    std::array<cplx, 2> out{eig.eigenvalues()(0), eig.eigenvalues()(1)};
    if (out[0].real() > out[1].real()) std::swap(out[0], out[1]);
    return out;
}

} // namespace

TEST_CASE("log-log fit recovers power laws") {
    std::vector<double> x = {0.5, 1.0, 2.0, 4.0, 8.0};
    std::vector<double> y;
    for (double xi : x) y.push_back(3.5 * std::pow(xi, -2.0));
    LineFit f = loglog_fit(x, y);
    CHECK_THAT(f.slope, Catch::Matchers::WithinAbs(-2.0, 1e-12));
    CHECK_THAT(f.intercept, Catch::Matchers::WithinAbs(std::log(3.5), 1e-12));
    CHECK_THAT(f.r2, Catch::Matchers::WithinAbs(1.0, 1e-12));

    // Noisy data still fits well but with r2 < 1.
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> u(-0.05, 0.05);
    std::vector<double> noisy;
    for (double yi : y) noisy.push_back(yi * std::exp(u(rng)));
    LineFit g = loglog_fit(x, noisy);
    CHECK_THAT(g.slope, Catch::Matchers::WithinAbs(-2.0, 0.05));
    CHECK(g.r2 > 0.99);
    CHECK(g.r2 < 1.0);

    CHECK_THROWS(loglog_fit({1.0, 2.0}, {1.0, -1.0}));
    CHECK_THROWS(loglog_fit({1.0, 0.0}, {1.0, 1.0}));
    CHECK_THROWS(loglog_fit({1.0}, {1.0}));
    CHECK_THROWS(loglog_fit({1.0, 2.0}, {1.0}));
}

TEST_CASE("plane symbol eigenvalues match closed forms") {
    std::mt19937 rng(23);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 100; ++trial) {
        const double k = 0.01 * std::pow(200.0, u(rng)); // 0.01 .. 2
        const double c = std::pow(10.0, 4.0 * u(rng) - 1.0);
        const double angle = 2.0 * pi * u(rng);
        const double len = k * (1.1 + 50.0 * u(rng));
        const Eigen::Vector2d xi(len * std::cos(angle), len * std::sin(angle));

        auto asym = eigs2(symbol_asymptotic_matrix(k, c, xi));
        SymbolEigs want = symbol_asymptotic_eigs(k, c);
        CHECK_THAT(asym[0].real(), Catch::Matchers::WithinRel(want.minus, 1e-12));
        CHECK_THAT(asym[1].real(), Catch::Matchers::WithinRel(want.plus, 1e-12));
        CHECK_THAT(std::abs(asym[0].imag()), Catch::Matchers::WithinAbs(0.0, 1e-12));
        CHECK_THAT(std::abs(asym[1].imag()),
                   Catch::Matchers::WithinAbs(0.0, 1e-12 * std::abs(want.plus)));

        auto exact = eigs2(symbol_exact_matrix(k, c, xi));
        SymbolEigs wexact = symbol_exact_eigs(k, c, xi);
        CHECK_THAT(exact[0].real(), Catch::Matchers::WithinRel(wexact.minus, 1e-12));
        CHECK_THAT(exact[1].real(), Catch::Matchers::WithinRel(wexact.plus, 1e-12));
    }

    // The -1/4 branch is frequency-independent; the other branch equals c k^2/4
    // asymptotically and is approached by the exact form as |xi| grows.
    const double k = 0.3, c = 1.0 / (k * k);
    const Eigen::Vector2d far_xi(400.0 * k, 130.0 * k);
    SymbolEigs exact = symbol_exact_eigs(k, c, far_xi);
    SymbolEigs asym = symbol_asymptotic_eigs(k, c);
    CHECK_THAT(exact.plus, Catch::Matchers::WithinRel(asym.plus, 1e-4));
    CHECK(asym.minus == -0.25);
    CHECK(exact.minus == -0.25);

    // With c = 1/k^2 both asymptotic eigenvalues sit at +-1/4.
    CHECK_THAT(asym.plus, Catch::Matchers::WithinAbs(0.25, 1e-15));

    CHECK_THROWS(symbol_asymptotic_matrix(k, c, Eigen::Vector2d(0.0, 0.0)));
    CHECK_THROWS(symbol_exact_matrix(k, c, Eigen::Vector2d(0.5 * k, 0.0)));
    CHECK_THROWS(symbol_exact_eigs(k, c, Eigen::Vector2d(0.5 * k, 0.0)));
}

TEST_CASE("cluster fraction counts eigenvalues near listed centers") {
    Eigen::VectorXcd eigs(5);
    eigs << cplx(0.25, 0.01), cplx(-0.24, 0.0), cplx(0.3, 0.0), cplx(1.0, 1.0),
        cplx(-0.25, -0.1);
    const std::vector<cplx> centers = {cplx(0.25, 0.0), cplx(-0.25, 0.0)};
    CHECK_THAT(cluster_fraction(eigs, centers, 0.15),
               Catch::Matchers::WithinAbs(0.8, 1e-15));
    CHECK_THAT(cluster_fraction(eigs, centers, 0.02),
               Catch::Matchers::WithinAbs(0.4, 1e-15));
    CHECK(cluster_fraction(Eigen::VectorXcd(), centers, 1.0) == 0.0);
}

TEST_CASE("loop and star columns complete the edge space") {
    Mesh mesh = make_sphere(0.25, 1);
    EdgeFunctionFamily edges = build_edge_functions(mesh);
    LoopStar ls = loop_star_edge(mesh, edges.edge_flux);
    const int E = mesh.num_edges();
    REQUIRE(ls.loops.rows() == E);
    REQUIRE(ls.stars.rows() == E);
    CHECK(ls.loops.cols() == mesh.num_vertices() - 1);
    CHECK(ls.stars.cols() == mesh.num_triangles() - 1);
    CHECK(ls.loops.cols() + ls.stars.cols() == E);

    Eigen::MatrixXd T(E, E);
    T << ls.loops, ls.stars;
    Eigen::FullPivLU<Eigen::MatrixXd> lu(T);
    CHECK(lu.rank() == E);

    // Loop columns are divergence-free: they vanish against the charge part
    // of the div-augmented Gram matrix.
    Eigen::MatrixXd div_gram =
        assemble_gram_hdiv(edges.fam, 1.0) - assemble_gram_dot(edges.fam);
    const double scale = div_gram.cwiseAbs().maxCoeff();
    CHECK((div_gram * ls.loops).cwiseAbs().maxCoeff() <= 1e-12 * scale);

    // Same on the dual side.
    RefinedMesh refined = barycentric_refine(mesh);
    DualFunctionFamily duals = build_dual_functions(mesh, refined);
    LoopStar dls = loop_star_dual(mesh, duals.transfer);
    REQUIRE(dls.loops.rows() == E);
    CHECK(dls.loops.cols() == mesh.num_triangles() - 1);
    CHECK(dls.stars.cols() == mesh.num_vertices() - 1);
    Eigen::MatrixXd Td(E, E);
    Td << dls.loops, dls.stars;
    Eigen::FullPivLU<Eigen::MatrixXd> lud(Td);
    CHECK(lud.rank() == E);

    Eigen::MatrixXd dual_div_gram =
        assemble_gram_hdiv(duals.fam, 1.0) - assemble_gram_dot(duals.fam);
    const double dscale = dual_div_gram.cwiseAbs().maxCoeff();
    CHECK((dual_div_gram * dls.loops).cwiseAbs().maxCoeff() <= 1e-12 * dscale);
}

TEST_CASE("low-frequency block scaling on the level-1 sphere") {
    const std::vector<double> ks = {1e-3, 1e-2, 1e-1};
    std::vector<double> ll2, ss2, llh, lsh, slh, ssh, rhs_l, rhs_s, cond_h;
    OperatorParts parts;
    parts.system_hdiv = parts.system_l2 = true;
    double cond_l2_min = 1e300, cond_l2_max = 0.0;
    for (double k : ks) {
        const double c = 1.0 / (k * k);
        OperatorSet set = build_operator_set(make_sphere(0.25, 1), k, c, parts);
        LoopStar edge_ls = loop_star_edge(*set.base, set.edges.edge_flux);
        LoopStar dual_ls = loop_star_dual(*set.base, set.duals.transfer);

        BlockMagnitudes b2 = block_magnitudes(*set.matrices.system_l2, edge_ls, edge_ls);
        BlockMagnitudes bh =
            block_magnitudes(*set.matrices.system_hdiv, dual_ls, edge_ls);
        ll2.push_back(b2.LL);
        ss2.push_back(b2.SS);
        llh.push_back(bh.LL);
        lsh.push_back(bh.LS);
        slh.push_back(bh.SL);
        ssh.push_back(bh.SS);

        VectorBlockMagnitudes vb =
            vector_block_magnitudes(set.matrices.rhs_l2, edge_ls);
        rhs_l.push_back(vb.L);
        rhs_s.push_back(vb.S);

        cond_h.push_back(condition_number(set.matrices.gram_hdiv_edge->real()));
        const double cl2 = condition_number(set.matrices.gram_dual_edge->real());
        cond_l2_min = std::min(cond_l2_min, cl2);
        cond_l2_max = std::max(cond_l2_max, cl2);
    }

    auto slope_of = [&](const std::vector<double>& v) {
        LineFit f = loglog_fit(ks, v);
        CHECK(f.r2 > 0.95);
        return f.slope;
    };
    // Edge-tested system: currents couple through k G, charges through -1/k.
    CHECK_THAT(slope_of(ll2), Catch::Matchers::WithinAbs(1.0, 0.2));
    CHECK_THAT(slope_of(ss2), Catch::Matchers::WithinAbs(-1.0, 0.2));
    // Dual-tested system with c = 1/k^2: every charge coupling grows as 1/k.
    CHECK_THAT(slope_of(llh), Catch::Matchers::WithinAbs(1.0, 0.2));
    CHECK_THAT(slope_of(lsh), Catch::Matchers::WithinAbs(-1.0, 0.2));
    CHECK_THAT(slope_of(slh), Catch::Matchers::WithinAbs(-1.0, 0.2));
    CHECK_THAT(slope_of(ssh), Catch::Matchers::WithinAbs(-1.0, 0.2));

    // Plane-wave loading: loop projections vanish with k, star projections
    // approach the static limit.
    CHECK_THAT(slope_of(rhs_l), Catch::Matchers::WithinAbs(1.0, 0.2));
    CHECK(rhs_s.back() / rhs_s.front() < 2.0);
    CHECK(rhs_s.front() / rhs_s.back() < 2.0);

    // cond(T_Hdiv) grows as 1/k^2 with c = 1/k^2; the mixed Gram has no k.
    LineFit ch = loglog_fit(ks, cond_h);
    CHECK_THAT(ch.slope, Catch::Matchers::WithinAbs(-2.0, 0.3));
    CHECK(ch.r2 > 0.95);
    CHECK(cond_l2_max / cond_l2_min < 1.0 + 1e-12);
}

TEST_CASE("charge channel of the dual-tested system vanishes on loop rows") {
    const double k = 0.7;
    OperatorSet a =
        build_operator_set(make_sphere(0.25, 1), k, 1.0, parts_for_approaches({4}));
    OperatorSet b =
        build_operator_set(make_sphere(0.25, 1), k, 7.3, parts_for_approaches({4}));
    LoopStar dual_ls = loop_star_dual(*a.base, a.duals.transfer);

    Eigen::MatrixXcd diff = *a.matrices.system_hdiv - *b.matrices.system_hdiv;
    const double scale = a.matrices.system_hdiv->cwiseAbs().maxCoeff();
    CHECK(diff.cwiseAbs().maxCoeff() > 1e-3 * scale); // c genuinely moves entries
    CHECK((dual_ls.loops.cast<cplx>().transpose() * diff).cwiseAbs().maxCoeff() <=
          1e-10 * scale);

    Eigen::VectorXcd rdiff = a.matrices.rhs_hdiv - b.matrices.rhs_hdiv;
    const double rscale = a.matrices.rhs_hdiv.cwiseAbs().maxCoeff();
    CHECK(rdiff.cwiseAbs().maxCoeff() > 1e-3 * rscale);
    CHECK((dual_ls.loops.cast<cplx>().transpose() * rdiff).cwiseAbs().maxCoeff() <=
          1e-10 * rscale);
}

TEST_CASE("preconditioned spectra cluster at +-1/4") {
    const double k = 0.5, c = 1.0 / (k * k);
    OperatorSet set = build_operator_set(make_sphere(0.25, 1), k, c,
                                         parts_for_approaches({1, 2, 3}));
    const std::vector<cplx> centers = {cplx(0.25, 0.0), cplx(-0.25, 0.0)};
    for (int approach : {1, 2, 3}) {
        Eigen::VectorXcd eigs = preconditioned_spectrum(approach, set.matrices);
        REQUIRE(eigs.size() == set.base->num_edges());
        INFO("approach " << approach);
        CHECK(cluster_fraction(eigs, centers, 0.15) >= 0.8);
    }

    // Deterministic assembly: a rebuilt spectrum is bitwise-stable well below
    // any physical tolerance.
    OperatorSet again = build_operator_set(make_sphere(0.25, 1), k, c,
                                           parts_for_approaches({1}));
    Eigen::VectorXcd e1 = preconditioned_spectrum(1, set.matrices);
    Eigen::VectorXcd e2 = preconditioned_spectrum(1, again.matrices);
    REQUIRE(e1.size() == e2.size());
    CHECK((e1 - e2).cwiseAbs().maxCoeff() <= 1e-8);
}

TEST_CASE("explicit preconditioner matrix matches the operator form") {
    const double k = 0.7, c = 1.0 / (k * k);
    OperatorSet set = build_operator_set(make_sphere(0.25, 1), k, c,
                                         parts_for_approaches({1, 3}));
    std::mt19937 rng(17);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int approach : {1, 3}) {
        Eigen::MatrixXcd P = preconditioner_matrix(approach, set.matrices);
        InnerCounter counter;
        LinearOperator op = build_preconditioner(approach, set.matrices, &counter,
                                                 InnerSolveOptions{});
        REQUIRE(op.n == P.cols());
        for (int trial = 0; trial < 3; ++trial) {
            Eigen::VectorXcd x(P.cols());
            for (Eigen::Index i = 0; i < x.size(); ++i) x(i) = cplx(u(rng), u(rng));
            Eigen::VectorXcd want = P * x;
            Eigen::VectorXcd got = op.apply(x);
            INFO("approach " << approach << " trial " << trial);
            CHECK((want - got).norm() <= 1e-6 * want.norm());
        }
    }
    CHECK_THROWS(preconditioner_matrix(4, set.matrices));
    CHECK_THROWS(preconditioner_matrix(2, set.matrices)); // parts not assembled
}
