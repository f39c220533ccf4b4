#include <efie/solver.hpp>

#include <catch_amalgamated.hpp>

#include <memory>
#include <random>

using namespace efie;

namespace {

Eigen::MatrixXcd random_diag_dominant(std::mt19937& rng, int n) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Eigen::MatrixXcd A(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) A(i, j) = cplx(u(rng), u(rng));
    for (int i = 0; i < n; ++i) A(i, i) += cplx(2.0 * n, n);
    return A;
}

Eigen::VectorXcd random_vector(std::mt19937& rng, int n) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Eigen::VectorXcd b(n);
    for (int i = 0; i < n; ++i) b(i) = cplx(u(rng), u(rng));
    return b;
}

} // namespace

TEST_CASE("matrix operator is linear") {
    std::mt19937 rng(11);
    const Eigen::MatrixXcd A = random_diag_dominant(rng, 13);
    const LinearOperator op = matrix_operator(A);
    const Eigen::VectorXcd x = random_vector(rng, 13), y = random_vector(rng, 13);
    const cplx alpha(0.7, -1.3);
    const Eigen::VectorXcd lhs = op.apply(alpha * x + y);
    const Eigen::VectorXcd rhs = alpha * op.apply(x) + op.apply(y);
    CHECK((lhs - rhs).norm() < 1e-10 * rhs.norm());
}

TEST_CASE("identity system converges in one step") {
    const Eigen::MatrixXcd A = Eigen::MatrixXcd::Identity(9, 9);
    std::mt19937 rng(12);
    const Eigen::VectorXcd b = random_vector(rng, 9);
    const SolveReport rep = gmres(matrix_operator(A), b, GmresOptions{});
    CHECK(rep.converged);
    CHECK(rep.iterations == 1);
    CHECK((rep.x - b).norm() < 1e-12 * b.norm());
}

TEST_CASE("zero right-hand side returns the zero solution") {
    const Eigen::MatrixXcd A = Eigen::MatrixXcd::Identity(6, 6);
    const SolveReport rep =
        gmres(matrix_operator(A), Eigen::VectorXcd::Zero(6), GmresOptions{});
    CHECK(rep.converged);
    CHECK(rep.iterations == 0);
    CHECK(rep.x.norm() == 0.0);
}

TEST_CASE("iterative and direct solutions agree on many systems") {
    std::mt19937 rng(13);
    for (int trial = 0; trial < 50; ++trial) {
        const int n = 20 + int(rng() % 30);
        const Eigen::MatrixXcd A = random_diag_dominant(rng, n);
        const Eigen::VectorXcd b = random_vector(rng, n);
        GmresOptions opt;
        opt.tol = 1e-10;
        const SolveReport rep = gmres(matrix_operator(A), b, opt);
        const Eigen::VectorXcd xd = lu_solve(A, b);
        INFO("trial " << trial << " n " << n);
        REQUIRE(rep.converged);
        CHECK((rep.x - xd).norm() < 1e-8 * xd.norm());
    }
}

TEST_CASE("residual history is monotone without restarts") {
    std::mt19937 rng(14);
    const int n = 40;
    Eigen::MatrixXcd A = random_diag_dominant(rng, n);
    A.diagonal().array() -= cplx(1.2 * n, 0.0); // make it take several steps
    const Eigen::VectorXcd b = random_vector(rng, n);
    GmresOptions opt;
    opt.tol = 1e-9;
    const SolveReport rep = gmres(matrix_operator(A), b, opt);
    REQUIRE(rep.converged);
    REQUIRE(rep.residual_history.size() > 3);
    for (size_t i = 1; i < rep.residual_history.size(); ++i)
        CHECK(rep.residual_history[i] <= rep.residual_history[i - 1] + 1e-15);
    // history is relative to |b|, so it starts at or below one
    CHECK(rep.residual_history.front() <= 1.0 + 1e-12);
    CHECK(rep.residual_history.back() <= 1e-9);
}

TEST_CASE("restarted iteration still converges") {
    std::mt19937 rng(15);
    const int n = 60;
    const Eigen::MatrixXcd A = random_diag_dominant(rng, n);
    const Eigen::VectorXcd b = random_vector(rng, n);
    GmresOptions opt;
    opt.tol = 1e-9;
    opt.restart = 7;
    const SolveReport rep = gmres(matrix_operator(A), b, opt);
    REQUIRE(rep.converged);
    const Eigen::VectorXcd xd = lu_solve(A, b);
    CHECK((rep.x - xd).norm() < 1e-7 * xd.norm());
}

TEST_CASE("right preconditioning changes iterations, not the answer") {
    std::mt19937 rng(16);
    const int n = 35;
    const Eigen::MatrixXcd A = random_diag_dominant(rng, n);
    const Eigen::VectorXcd b = random_vector(rng, n);
    const Eigen::MatrixXcd Ainv = A.partialPivLu().inverse();
    const LinearOperator P = matrix_operator(Ainv);

    GmresOptions opt;
    opt.tol = 1e-10;
    const SolveReport plain = gmres(matrix_operator(A), b, opt);
    const SolveReport pre = gmres(matrix_operator(A), b, opt, &P);
    REQUIRE(plain.converged);
    REQUIRE(pre.converged);
    CHECK(pre.iterations <= 2); // exact inverse: one Krylov step suffices
    CHECK((pre.x - plain.x).norm() < 5e-8 * plain.x.norm());
}

TEST_CASE("direct solver handles an ill-conditioned system") {
    const int n = 8;
    Eigen::MatrixXcd H(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) H(i, j) = 1.0 / double(i + j + 1);
    Eigen::VectorXcd b = Eigen::VectorXcd::Ones(n);
    const Eigen::VectorXcd x = lu_solve(H, b);
    CHECK((H * x - b).norm() < 1e-10 * b.norm());
}

TEST_CASE("sandwich preconditioner applies both inverses and the middle") {
    std::mt19937 rng(17);
    const int n = 24;
    const auto G1 = std::make_shared<Eigen::MatrixXcd>(random_diag_dominant(rng, n));
    const auto M = std::make_shared<Eigen::MatrixXcd>(random_diag_dominant(rng, n));
    const auto G2 = std::make_shared<Eigen::MatrixXcd>(random_diag_dominant(rng, n));

    auto counter = std::make_shared<InnerCounter>();
    InnerSolveOptions iopt;
    iopt.tol = 1e-11;
    const LinearOperator P = sandwich_preconditioner(G1, "left_gram", M,
                                                     G2, "right_gram", counter.get(), iopt);

    const Eigen::VectorXcd y = random_vector(rng, n);
    const Eigen::VectorXcd got = P.apply(y);
    const Eigen::VectorXcd want =
        G1->partialPivLu().solve((*M) * G2->partialPivLu().solve(y));
    CHECK((got - want).norm() < 1e-8 * want.norm());

    REQUIRE(counter->totals.count("left_gram") == 1);
    REQUIRE(counter->totals.count("right_gram") == 1);
    CHECK(counter->total("left_gram") > 0);
    CHECK(counter->total("right_gram") > 0);
    CHECK(counter->total("absent_label") == 0);
}

TEST_CASE("sandwich preconditioner reports a failed inner solve") {
    const int n = 10;
    const auto G1 = std::make_shared<Eigen::MatrixXcd>(
        Eigen::MatrixXcd::Zero(n, n)); // singular: inner solve cannot converge
    const auto M = std::make_shared<Eigen::MatrixXcd>(
        Eigen::MatrixXcd::Identity(n, n));
    const auto G2 = std::make_shared<Eigen::MatrixXcd>(
        Eigen::MatrixXcd::Identity(n, n));
    auto counter = std::make_shared<InnerCounter>();
    InnerSolveOptions iopt;
    iopt.max_iter = 25;
    const LinearOperator P =
        sandwich_preconditioner(G1, "bad_gram", M, G2, "ok_gram", counter.get(), iopt);
    CHECK_THROWS_AS(P.apply(Eigen::VectorXcd::Ones(n)), SolverError);
}
