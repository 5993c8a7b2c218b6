#include "dlmpsim/conic.hpp"

#include "doctest.h"

using namespace dlmpsim;
using conic::ConeSpec;
using conic::Problem;
using conic::Status;

namespace {

Eigen::SparseMatrix<double> sparse(int rows, int cols,
                                   const std::vector<Eigen::Triplet<double>>& trips) {
    Eigen::SparseMatrix<double> M(rows, cols);
    M.setFromTriplets(trips.begin(), trips.end());
    return M;
}

Eigen::SparseMatrix<double> empty(int rows, int cols) { return sparse(rows, cols, {}); }

}  // namespace

TEST_CASE("equality-constrained QP solves in one shot") {
    // min 1/2 (x0^2 + x1^2) s.t. x0 + x1 = 2 -> x = (1,1)
    Problem prob;
    prob.P = sparse(2, 2, {{0, 0, 1.0}, {1, 1, 1.0}});
    prob.c = Eigen::VectorXd::Zero(2);
    prob.A = sparse(1, 2, {{0, 0, 1.0}, {0, 1, 1.0}});
    prob.b = Eigen::VectorXd::Constant(1, 2.0);
    prob.G = empty(0, 2);
    prob.h = Eigen::VectorXd(0);
    auto sol = conic::solve(prob);
    REQUIRE(sol.status == Status::optimal);
    CHECK(sol.x(0) == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(sol.x(1) == doctest::Approx(1.0).epsilon(1e-8));
    // stationarity: x + A'y = 0 -> y = -1
    CHECK(sol.y(0) == doctest::Approx(-1.0).epsilon(1e-8));
}

TEST_CASE("small LP with known optimum and duals") {
    // min -x0 - 2 x1 s.t. x0 + x1 <= 1, x >= 0  -> x = (0,1), obj = -2
    Problem prob;
    prob.P = empty(2, 2);
    prob.c = Eigen::VectorXd(2);
    prob.c << -1.0, -2.0;
    prob.A = empty(0, 2);
    prob.b = Eigen::VectorXd(0);
    // rows: x0 + x1 <= 1; -x0 <= 0; -x1 <= 0
    prob.G = sparse(3, 2, {{0, 0, 1.0}, {0, 1, 1.0}, {1, 0, -1.0}, {2, 1, -1.0}});
    prob.h = Eigen::VectorXd(3);
    prob.h << 1.0, 0.0, 0.0;
    prob.cones.n_lin = 3;
    auto sol = conic::solve(prob);
    REQUIRE(sol.status == Status::optimal);
    CHECK(sol.obj == doctest::Approx(-2.0).epsilon(1e-7));
    CHECK(sol.x(1) == doctest::Approx(1.0).epsilon(1e-6));
    // dual of the budget row prices the binding constraint at 2
    CHECK(sol.z(0) == doctest::Approx(2.0).epsilon(1e-6));
}

TEST_CASE("norm minimization hits the analytic SOC solution") {
    // min t s.t. (t, 3, 4) in SOC -> t = 5
    Problem prob;
    prob.P = empty(1, 1);
    prob.c = Eigen::VectorXd::Constant(1, 1.0);
    prob.A = empty(0, 1);
    prob.b = Eigen::VectorXd(0);
    prob.G = sparse(3, 1, {{0, 0, -1.0}});
    prob.h = Eigen::VectorXd(3);
    prob.h << 0.0, 3.0, 4.0;
    prob.cones.soc_dims = {3};
    auto sol = conic::solve(prob);
    REQUIRE(sol.status == Status::optimal);
    CHECK(sol.x(0) == doctest::Approx(5.0).epsilon(1e-7));
}

TEST_CASE("mixed equality, box and cone problem") {
    // min x0 + x1 + 0.1 z  s.t. x0 + x1 + z = 2, (z, x0, x1) in SOC, z <= 1.6
    // Feasibility needs z >= ||(x0,x1)||; pushing cost onto the cheap z.
    Problem prob;
    prob.P = empty(3, 3);
    prob.c = Eigen::VectorXd(3);
    prob.c << 1.0, 1.0, 0.1;
    prob.A = sparse(1, 3, {{0, 0, 1.0}, {0, 1, 1.0}, {0, 2, 1.0}});
    prob.b = Eigen::VectorXd::Constant(1, 2.0);
    prob.G = sparse(4, 3, {{0, 2, 1.0}, {1, 2, -1.0}, {2, 0, -1.0}, {3, 1, -1.0}});
    prob.h = Eigen::VectorXd(4);
    prob.h << 1.6, 0.0, 0.0, 0.0;
    prob.cones.n_lin = 1;
    prob.cones.soc_dims = {3};
    auto sol = conic::solve(prob);
    REQUIRE(sol.status == Status::optimal);
    // primal feasibility
    CHECK(sol.x.sum() == doctest::Approx(2.0).epsilon(1e-7));
    double tail = std::hypot(sol.x(0), sol.x(1));
    CHECK(sol.x(2) >= tail - 1e-7);
    CHECK(sol.x(2) <= 1.6 + 1e-7);
}

TEST_CASE("infeasible bounds are certified") {
    // x >= 1 and x <= 0
    Problem prob;
    prob.P = empty(1, 1);
    prob.c = Eigen::VectorXd::Constant(1, 1.0);
    prob.A = empty(0, 1);
    prob.b = Eigen::VectorXd(0);
    prob.G = sparse(2, 1, {{0, 0, -1.0}, {1, 0, 1.0}});
    prob.h = Eigen::VectorXd(2);
    prob.h << -1.0, 0.0;
    prob.cones.n_lin = 2;
    auto sol = conic::solve(prob);
    CHECK(sol.status == Status::infeasible);
}

TEST_CASE("quadratic objective with active box bound reports exact dual") {
    // min 1/2 x^2 - 4x s.t. x <= 1 -> x = 1, z = 3
    Problem prob;
    prob.P = sparse(1, 1, {{0, 0, 1.0}});
    prob.c = Eigen::VectorXd::Constant(1, -4.0);
    prob.A = empty(0, 1);
    prob.b = Eigen::VectorXd(0);
    prob.G = sparse(1, 1, {{0, 0, 1.0}});
    prob.h = Eigen::VectorXd::Constant(1, 1.0);
    prob.cones.n_lin = 1;
    auto sol = conic::solve(prob);
    REQUIRE(sol.status == Status::optimal);
    CHECK(sol.x(0) == doctest::Approx(1.0).epsilon(1e-7));
    CHECK(sol.z(0) == doctest::Approx(3.0).epsilon(1e-6));
}

TEST_CASE("cone projection helper") {
    ConeSpec cones;
    cones.n_lin = 2;
    cones.soc_dims = {3};
    Eigen::VectorXd v(5);
    v << -1.0, 2.0, 0.0, 3.0, 4.0;  // SOC part on the boundary of the polar
    Eigen::VectorXd pr = conic::cone_project(v, cones);
    CHECK(pr(0) == 0.0);
    CHECK(pr(1) == 2.0);
    // projection of (0,3,4): coef = (0+5)/2 = 2.5 along the tail direction
    CHECK(pr(2) == doctest::Approx(2.5));
    CHECK(std::hypot(pr(3), pr(4)) == doctest::Approx(2.5));
    CHECK(conic::cone_min_eig(pr, cones) >= -1e-12);
}
