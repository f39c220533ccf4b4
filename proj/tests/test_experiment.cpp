#include <efie/experiment.hpp>

#include <catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>

using namespace efie;

TEST_CASE("operator parts follow the approach selection") {
    OperatorParts p1 = parts_for_approaches({1});
    CHECK(p1.system_hdiv);
    CHECK(p1.middle_single_layer);
    CHECK_FALSE(p1.system_l2);
    CHECK_FALSE(p1.middle_efio_swapped);
    CHECK_FALSE(p1.middle_efie_dual);

    OperatorParts p2 = parts_for_approaches({2});
    CHECK(p2.system_hdiv);
    CHECK(p2.middle_efio_swapped);

    OperatorParts p3 = parts_for_approaches({3});
    CHECK(p3.system_l2);
    CHECK(p3.middle_efie_dual);
    CHECK_FALSE(p3.system_hdiv);

    OperatorParts p4 = parts_for_approaches({4});
    CHECK(p4.system_hdiv);
    CHECK_FALSE(p4.middle_single_layer);

    OperatorParts p5 = parts_for_approaches({5});
    CHECK(p5.system_l2);
    CHECK_FALSE(p5.middle_efie_dual);

    OperatorParts all = parts_for_approaches({1, 2, 3, 4, 5});
    CHECK((all.system_hdiv && all.system_l2 && all.middle_single_layer &&
           all.middle_efio_swapped && all.middle_efie_dual));

    CHECK_THROWS_AS(parts_for_approaches({6}), std::invalid_argument);
    CHECK_THROWS_AS(parts_for_approaches({0}), std::invalid_argument);
}

TEST_CASE("csv format pins columns, empty error on failure, flags as words") {
    std::vector<ResultRow> rows(2);
    rows[0].approach = 1;
    rows[0].k = 0.01;
    rows[0].h = 0.125;
    rows[0].N = 480;
    rows[0].rel_error = 0.015625;
    rows[0].outer_iters = 12;
    rows[0].inner_iters = 345;
    rows[0].converged = true;
    rows[0].seconds = 2.5;
    rows[1].approach = 5;
    rows[1].k = 1.0;
    rows[1].h = 0.125;
    rows[1].N = 480;
    rows[1].rel_error = std::numeric_limits<double>::quiet_NaN();
    rows[1].outer_iters = 3000;
    rows[1].inner_iters = 0;
    rows[1].converged = false;
    rows[1].seconds = 0.0;

    const std::string want =
        "approach,k,h,N,rel_error,outer_iters,inner_iters,converged,seconds\n"
        "1,0.01,0.125,480,0.015625,12,345,true,2.5\n"
        "5,1,0.125,480,,3000,0,false,0\n";
    CHECK(results_csv(rows) == want);

    const std::string path =
        (std::filesystem::temp_directory_path() / "efie_test_results.csv").string();
    write_results_csv(path, rows);
    std::ifstream in(path, std::ios::binary);
    std::stringstream buf;
    buf << in.rdbuf();
    CHECK(buf.str() == want);
    std::remove(path.c_str());

    CHECK_THROWS(write_results_csv("/nonexistent/dir/results.csv", rows));
}

TEST_CASE("sweep produces one row per approach and frequency") {
    SweepRequest req;
    req.radius = 0.25;
    req.level = 0;
    req.ks = {0.5, 1.0};
    req.approaches = {4, 5};
    req.deterministic = true;

    const std::vector<ResultRow> rows = run_sweep(req);
    REQUIRE(rows.size() == 4);
    std::set<std::pair<int, double>> seen;
    for (const ResultRow& r : rows) {
        CHECK(seen.insert({r.approach, r.k}).second); // unique (approach, k)
        CHECK(r.N == 30);
        CHECK(r.h > 0.0);
        CHECK(r.seconds == 0.0);
        CHECK(r.converged);
        CHECK(r.outer_iters > 0);
        // level 0 is deliberately coarse; the solve must still track the
        // analytic reference to discretization accuracy
        CHECK(r.rel_error > 0.0);
        CHECK(r.rel_error < 1.0);
    }
    // both approaches discretize the same physics: same-k errors are close
    CHECK_THAT(rows[0].rel_error,
               Catch::Matchers::WithinRel(rows[1].rel_error, 0.05));

    // identical requests give identical bytes in deterministic mode
    const std::vector<ResultRow> again = run_sweep(req);
    CHECK(results_csv(rows) == results_csv(again));
}

TEST_CASE("non-convergence is recorded, not fatal") {
    SweepRequest req;
    req.radius = 0.25;
    req.level = 0;
    req.ks = {1.0};
    req.approaches = {5};
    req.deterministic = true;

    Config cfg = Config::from_string("solver.max_iter = 2\n");
    const std::vector<ResultRow> rows = run_sweep(req, cfg);
    REQUIRE(rows.size() == 1);
    CHECK_FALSE(rows[0].converged);
    CHECK(std::isnan(rows[0].rel_error));
    const std::string csv = results_csv(rows);
    CHECK(csv.find(",,") != std::string::npos); // empty error column
    CHECK(csv.find("false") != std::string::npos);
}

TEST_CASE("right preconditioning leaves the solution unchanged") {
    // Approaches 1 and 4 solve the same linear system, with and without the
    // sandwich preconditioner; the coefficient vectors must agree to solver
    // accuracy.
    OperatorSet set = build_operator_set(make_sphere(0.25, 1), 1.0, 1.0,
                                         parts_for_approaches({1}));
    SolveReport direct = solve_approach(4, set.matrices);
    SolveReport sandwiched = solve_approach(1, set.matrices);
    REQUIRE(direct.converged);
    REQUIRE(sandwiched.converged);
    CHECK((direct.x - sandwiched.x).norm() <= 5e-5 * direct.x.norm());
    CHECK(sandwiched.iterations <= direct.iterations);
    long inner_total = 0;
    for (const auto& kv : sandwiched.inner_iterations) inner_total += kv.second;
    CHECK(inner_total > 0);
    CHECK(direct.inner_iterations.empty());
}
