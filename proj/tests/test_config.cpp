#include <efie/config.hpp>

#include <catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>

using namespace efie;

TEST_CASE("flat key=value parsing with comments and overrides") {
    Config c = Config::from_string(
        "# run setup\n"
        "sphere.radius = 0.25\n"
        "\n"
        "  solver.tol =1e-6   # tight\n"
        "quadrature.outer_degree= 6\n"
        "solver.tol = 1e-7\n"); // later assignment wins
    CHECK(c.has("sphere.radius"));
    CHECK_FALSE(c.has("missing"));
    CHECK(c.get_double("sphere.radius", 0.0) == 0.25);
    CHECK(c.get_double("solver.tol", 0.0) == 1e-7);
    CHECK(c.get_int("quadrature.outer_degree", 0) == 6);
    CHECK(c.get_string("absent", "fallback") == "fallback");
    CHECK(c.get_double("absent", 2.5) == 2.5);
    CHECK(c.get_int("absent", 9) == 9);

    c.set(" solver.tol ", " 1e-3 "); // command-line override, trimmed
    CHECK(c.get_double("solver.tol", 0.0) == 1e-3);
}

TEST_CASE("malformed config lines and values are rejected") {
    CHECK_THROWS_AS(Config::from_string("novalue\n"), ConfigError);
    CHECK_THROWS_AS(Config::from_string("= 3\n"), ConfigError);
    CHECK_THROWS_MATCHES(Config::from_string("a = 1\nbad line\n"), ConfigError,
                         Catch::Matchers::MessageMatches(
                             Catch::Matchers::ContainsSubstring("line 2")));

    Config c = Config::from_string("x = abc\ny = 1.5z\nz = 2.5\n");
    CHECK_THROWS_AS(c.get_double("x", 0.0), ConfigError);
    CHECK_THROWS_AS(c.get_double("y", 0.0), ConfigError);
    CHECK_THROWS_AS(c.get_int("z", 0), ConfigError); // trailing ".5"
    CHECK(c.get_string("x", "") == "abc");

    CHECK_THROWS_AS(Config::from_file("/nonexistent/path/run.cfg"), ConfigError);
}

TEST_CASE("config file round-trip") {
    const std::string path =
        (std::filesystem::temp_directory_path() / "efie_test_run.cfg").string();
    {
        std::ofstream out(path);
        out << "solver.restart = 40\nsweep.level = 3\n";
    }
    Config c = Config::from_file(path);
    CHECK(c.get_int("solver.restart", 0) == 40);
    CHECK(c.get_int("sweep.level", 0) == 3);
    std::remove(path.c_str());
}

TEST_CASE("typed views apply recognized keys and keep defaults elsewhere") {
    Config c = Config::from_string(
        "quadrature.outer_degree = 6\n"
        "quadrature.clustered_nodes = 20\n"
        "solver.tol = 1e-6\n"
        "solver.inner_tol = 1e-9\n"
        "solver.max_iter = 500\n");

    QuadConfig q = quadrature_config(c);
    QuadConfig dflt;
    CHECK(q.outer_degree == 6);
    CHECK(q.clustered_nodes == 20);
    CHECK(q.inner_degree == dflt.inner_degree);
    CHECK(q.separated_degree == dflt.separated_degree);
    CHECK(q.near_threshold == dflt.near_threshold);
    CHECK(q.line_nodes == dflt.line_nodes);

    GmresOptions o = solver_options(c);
    CHECK(o.tol == 1e-6);
    CHECK(o.max_iter == 500);
    CHECK(o.restart == GmresOptions{}.restart);

    InnerSolveOptions i = inner_solve_options(c);
    CHECK(i.tol == 1e-9);
    CHECK(i.max_iter == 500);
}

TEST_CASE("divergence weight follows c_scale / k^2") {
    Config c;
    CHECK_THAT(divergence_weight(c, 0.5), Catch::Matchers::WithinRel(4.0, 1e-15));
    CHECK_THAT(divergence_weight(c, 0.01),
               Catch::Matchers::WithinRel(1e4, 1e-15));
    c.set("c_scale", "2.5");
    CHECK_THAT(divergence_weight(c, 0.5), Catch::Matchers::WithinRel(10.0, 1e-15));
}
