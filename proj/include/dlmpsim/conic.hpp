#pragma once

#include <Eigen/Sparse>
#include <vector>

namespace dlmpsim::conic {

/// Layout of the slack cone K for rows of G x + s = h:
/// the first n_lin rows carry componentwise nonnegative slacks, followed by
/// one second-order cone block per entry of soc_dims (s0 >= ||s1||).
struct ConeSpec {
    int n_lin = 0;
    std::vector<int> soc_dims;

    int rows() const {
        int m = n_lin;
        for (int d : soc_dims) m += d;
        return m;
    }
    int degree() const { return n_lin + static_cast<int>(soc_dims.size()); }
};

/// minimize (1/2) x'Px + c'x  subject to  Ax = b,  Gx + s = h,  s in K.
struct Problem {
    Eigen::SparseMatrix<double> P;  // n x n, symmetric PSD (may be empty)
    Eigen::VectorXd c;
    Eigen::SparseMatrix<double> A;  // p x n
    Eigen::VectorXd b;
    Eigen::SparseMatrix<double> G;  // m x n
    Eigen::VectorXd h;
    ConeSpec cones;

    int num_vars() const { return static_cast<int>(c.size()); }
};

struct Settings {
    double tol = 1e-7;
    int max_iter = 100;
    double static_reg = 1e-9;
    int refine_steps = 2;
    bool verbose = false;
};

enum class Status { optimal, infeasible, max_iter };

struct Solution {
    Status status = Status::max_iter;
    Eigen::VectorXd x;
    Eigen::VectorXd y;  // equality multipliers
    Eigen::VectorXd z;  // cone multipliers, z in K*
    Eigen::VectorXd s;  // slacks, s in K
    double obj = 0.0;
    double gap = 0.0;
    double res_primal = 0.0;
    double res_dual = 0.0;
    int iters = 0;
};

Solution solve(const Problem& prob, const Settings& settings = {});

/// Smallest cone eigenvalue of a vector laid out per spec: min s_i over the
/// linear part and s0 - ||s1|| per SOC block. Positive iff strictly interior.
double cone_min_eig(const Eigen::VectorXd& v, const ConeSpec& cones);

/// Euclidean projection onto K (used by tests and by first-order methods).
Eigen::VectorXd cone_project(const Eigen::VectorXd& v, const ConeSpec& cones);

}  // namespace dlmpsim::conic
