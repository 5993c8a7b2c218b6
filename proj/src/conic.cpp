#include "dlmpsim/conic.hpp"

#include <Eigen/SparseCholesky>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

namespace dlmpsim::conic {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Nesterov-Todd scaling per cone. For the linear part W is diagonal; each
// SOC block stores the normalized scaling point wbar (wbar0^2 - ||wbar1||^2
// = 1) and the factor eta, with W = eta (2 wbar wbar' - J), J = diag(1,-I).
struct Scaling {
    Eigen::VectorXd w_lin;       // sqrt(s_i / z_i)
    Eigen::VectorXd lambda_lin;  // sqrt(s_i z_i)
    struct Soc {
        double eta = 1.0;
        Eigen::VectorXd wbar;
        Eigen::VectorXd lambda;  // W z = W^{-1} s at the NT point
        Eigen::MatrixXd W2;      // eta^2 (2 wbar wbar' - J)^2
    };
    std::vector<Soc> socs;
};

double soc_resid(const Eigen::Ref<const Eigen::VectorXd>& u) {
    double tail = u.tail(u.size() - 1).norm();
    return std::sqrt(std::max(0.0, (u(0) - tail) * (u(0) + tail)));
}

bool compute_scaling(const Eigen::VectorXd& s, const Eigen::VectorXd& z, const ConeSpec& cones,
                     Scaling& sc) {
    const int nl = cones.n_lin;
    sc.w_lin.resize(nl);
    sc.lambda_lin.resize(nl);
    for (int i = 0; i < nl; ++i) {
        if (s(i) <= 0.0 || z(i) <= 0.0) return false;
        sc.w_lin(i) = std::sqrt(s(i) / z(i));
        sc.lambda_lin(i) = std::sqrt(s(i) * z(i));
    }
    sc.socs.resize(cones.soc_dims.size());
    int off = nl;
    for (size_t k = 0; k < cones.soc_dims.size(); ++k) {
        const int d = cones.soc_dims[k];
        auto sk = s.segment(off, d);
        auto zk = z.segment(off, d);
        double rs = soc_resid(sk);
        double rz = soc_resid(zk);
        if (rs <= 0.0 || rz <= 0.0) return false;
        Eigen::VectorXd sb = sk / rs, zb = zk / rz;
        double gamma = std::sqrt((1.0 + sb.dot(zb)) / 2.0);
        auto& soc = sc.socs[k];
        soc.wbar.resize(d);
        soc.wbar(0) = (sb(0) + zb(0)) / (2.0 * gamma);
        soc.wbar.tail(d - 1) = (sb.tail(d - 1) - zb.tail(d - 1)) / (2.0 * gamma);
        soc.eta = std::sqrt(rs / rz);

        // H = 2 wbar wbar' - J; W2 = eta^2 H^2
        Eigen::MatrixXd H = 2.0 * soc.wbar * soc.wbar.transpose();
        H(0, 0) -= 1.0;
        for (int i = 1; i < d; ++i) H(i, i) += 1.0;
        soc.W2 = (soc.eta * soc.eta) * (H * H);

        // lambda = W z = eta (2 wbar (wbar'z) - J z)
        Eigen::VectorXd Jz(d);
        Jz(0) = zk(0);
        Jz.tail(d - 1) = -zk.tail(d - 1);
        soc.lambda = soc.eta * (2.0 * soc.wbar * soc.wbar.dot(zk) - Jz);
        off += d;
    }
    return true;
}

// W u per cone block.
Eigen::VectorXd apply_W(const Scaling& sc, const ConeSpec& cones, const Eigen::VectorXd& u) {
    Eigen::VectorXd out(u.size());
    const int nl = cones.n_lin;
    out.head(nl) = sc.w_lin.cwiseProduct(u.head(nl));
    int off = nl;
    for (size_t k = 0; k < cones.soc_dims.size(); ++k) {
        const int d = cones.soc_dims[k];
        auto uk = u.segment(off, d);
        const auto& soc = sc.socs[k];
        Eigen::VectorXd Ju(d);
        Ju(0) = uk(0);
        Ju.tail(d - 1) = -uk.tail(d - 1);
        out.segment(off, d) = soc.eta * (2.0 * soc.wbar * soc.wbar.dot(uk) - Ju);
        off += d;
    }
    return out;
}

Eigen::VectorXd apply_Winv(const Scaling& sc, const ConeSpec& cones, const Eigen::VectorXd& u) {
    Eigen::VectorXd out(u.size());
    const int nl = cones.n_lin;
    out.head(nl) = u.head(nl).cwiseQuotient(sc.w_lin);
    int off = nl;
    for (size_t k = 0; k < cones.soc_dims.size(); ++k) {
        const int d = cones.soc_dims[k];
        auto uk = u.segment(off, d);
        const auto& soc = sc.socs[k];
        Eigen::VectorXd Jw(d);
        Jw(0) = soc.wbar(0);
        Jw.tail(d - 1) = -soc.wbar.tail(d - 1);
        Eigen::VectorXd Ju(d);
        Ju(0) = uk(0);
        Ju.tail(d - 1) = -uk.tail(d - 1);
        out.segment(off, d) = (2.0 * Jw * Jw.dot(uk) - Ju) / soc.eta;
        off += d;
    }
    return out;
}

// Jordan product u o v per cone.
Eigen::VectorXd jordan_mul(const ConeSpec& cones, const Eigen::VectorXd& u,
                           const Eigen::VectorXd& v) {
    Eigen::VectorXd out(u.size());
    const int nl = cones.n_lin;
    out.head(nl) = u.head(nl).cwiseProduct(v.head(nl));
    int off = nl;
    for (int d : cones.soc_dims) {
        auto uk = u.segment(off, d);
        auto vk = v.segment(off, d);
        out(off) = uk.dot(vk);
        out.segment(off + 1, d - 1) = uk(0) * vk.tail(d - 1) + vk(0) * uk.tail(d - 1);
        off += d;
    }
    return out;
}

// Solve lambda o x = a per cone.
Eigen::VectorXd jordan_div(const ConeSpec& cones, const Eigen::VectorXd& lambda,
                           const Eigen::VectorXd& a) {
    Eigen::VectorXd out(a.size());
    const int nl = cones.n_lin;
    out.head(nl) = a.head(nl).cwiseQuotient(lambda.head(nl));
    int off = nl;
    for (int d : cones.soc_dims) {
        auto lk = lambda.segment(off, d);
        auto ak = a.segment(off, d);
        double det = lk(0) * lk(0) - lk.tail(d - 1).squaredNorm();
        double x0 = (lk(0) * ak(0) - lk.tail(d - 1).dot(ak.tail(d - 1))) / det;
        out(off) = x0;
        out.segment(off + 1, d - 1) = (ak.tail(d - 1) - x0 * lk.tail(d - 1)) / lk(0);
        off += d;
    }
    return out;
}

Eigen::VectorXd cone_identity(const ConeSpec& cones) {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(cones.rows());
    e.head(cones.n_lin).setOnes();
    int off = cones.n_lin;
    for (int d : cones.soc_dims) {
        e(off) = 1.0;
        off += d;
    }
    return e;
}

// Largest alpha >= 0 with u + alpha du in K; may return +inf.
double max_step(const ConeSpec& cones, const Eigen::VectorXd& u, const Eigen::VectorXd& du) {
    double alpha = kInf;
    for (int i = 0; i < cones.n_lin; ++i)
        if (du(i) < 0.0) alpha = std::min(alpha, -u(i) / du(i));
    int off = cones.n_lin;
    for (int d : cones.soc_dims) {
        auto uk = u.segment(off, d);
        auto dk = du.segment(off, d);
        // Roots of (u0+a d0)^2 - ||u1+a d1||^2 = 0; first positive root is
        // the boundary crossing (u starts interior).
        double a = dk(0) * dk(0) - dk.tail(d - 1).squaredNorm();
        double b = 2.0 * (uk(0) * dk(0) - uk.tail(d - 1).dot(dk.tail(d - 1)));
        double c = uk(0) * uk(0) - uk.tail(d - 1).squaredNorm();
        double best = kInf;
        if (std::abs(a) < 1e-14) {
            if (b < 0.0) best = -c / b;
        } else {
            double disc = b * b - 4.0 * a * c;
            if (disc >= 0.0) {
                double sq = std::sqrt(disc);
                double r1 = (-b - sq) / (2.0 * a);
                double r2 = (-b + sq) / (2.0 * a);
                if (r1 > r2) std::swap(r1, r2);
                if (r1 > 0.0)
                    best = r1;
                else if (r2 > 0.0)
                    best = r2;
            }
        }
        // The quadratic also vanishes on the reflected cone; ignore roots
        // where the head would already be negative.
        if (best < kInf && uk(0) + best * dk(0) >= -1e-14) alpha = std::min(alpha, best);
        off += d;
    }
    return alpha;
}

struct KktSystem {
    int n = 0, p = 0, m = 0;
    const Problem* prob = nullptr;
    double delta = 1e-9;
    Eigen::SparseMatrix<double> K;
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt;
    bool analyzed = false;

    void assemble(const Scaling* sc) {
        std::vector<Eigen::Triplet<double>> trips;
        trips.reserve(prob->P.nonZeros() + 2 * prob->A.nonZeros() + 2 * prob->G.nonZeros() + n + p +
                      m * 4);
        for (int k = 0; k < prob->P.outerSize(); ++k)
            for (Eigen::SparseMatrix<double>::InnerIterator it(prob->P, k); it; ++it)
                trips.emplace_back(it.row(), it.col(), it.value());
        for (int i = 0; i < n; ++i) trips.emplace_back(i, i, delta);
        for (int k = 0; k < prob->A.outerSize(); ++k)
            for (Eigen::SparseMatrix<double>::InnerIterator it(prob->A, k); it; ++it) {
                trips.emplace_back(n + it.row(), it.col(), it.value());
                trips.emplace_back(it.col(), n + it.row(), it.value());
            }
        for (int i = 0; i < p; ++i) trips.emplace_back(n + i, n + i, -delta);
        for (int k = 0; k < prob->G.outerSize(); ++k)
            for (Eigen::SparseMatrix<double>::InnerIterator it(prob->G, k); it; ++it) {
                trips.emplace_back(n + p + it.row(), it.col(), it.value());
                trips.emplace_back(it.col(), n + p + it.row(), it.value());
            }
        // The SOC blocks are emitted densely in both the W = I and the scaled
        // case so the symbolic factorization can be reused across iterations.
        const auto& cones = prob->cones;
        for (int i = 0; i < cones.n_lin; ++i) {
            double w2 = sc ? sc->w_lin(i) * sc->w_lin(i) : 1.0;
            trips.emplace_back(n + p + i, n + p + i, -w2 - delta);
        }
        int off = cones.n_lin;
        for (size_t k = 0; k < cones.soc_dims.size(); ++k) {
            const int d = cones.soc_dims[k];
            for (int r = 0; r < d; ++r)
                for (int c2 = 0; c2 < d; ++c2) {
                    double v = sc ? -sc->socs[k].W2(r, c2) : (r == c2 ? -1.0 : 0.0);
                    if (r == c2) v -= delta;
                    trips.emplace_back(n + p + off + r, n + p + off + c2, v);
                }
            off += d;
        }
        K.resize(n + p + m, n + p + m);
        K.setFromTriplets(trips.begin(), trips.end());
        K.makeCompressed();
    }

    bool factorize(const Scaling* sc) {
        assemble(sc);
        if (!analyzed) {
            ldlt.analyzePattern(K);
            analyzed = true;
        }
        ldlt.factorize(K);
        return ldlt.info() == Eigen::Success;
    }

    // Residual against the unregularized KKT operator.
    Eigen::VectorXd apply_unreg(const Scaling* sc, const Eigen::VectorXd& v) const {
        Eigen::VectorXd out = Eigen::VectorXd::Zero(n + p + m);
        auto vx = v.head(n);
        auto vy = v.segment(n, p);
        auto vz = v.tail(m);
        out.head(n) = prob->P * vx + prob->A.transpose() * vy + prob->G.transpose() * vz;
        out.segment(n, p) = prob->A * vx;
        out.tail(m) = prob->G * vx;
        if (sc == nullptr) {
            out.tail(m) -= vz;
        } else {
            const auto& cones = prob->cones;
            Eigen::VectorXd W2z(m);
            W2z.head(cones.n_lin) =
                sc->w_lin.array().square().matrix().cwiseProduct(vz.head(cones.n_lin));
            int off = cones.n_lin;
            for (size_t k = 0; k < cones.soc_dims.size(); ++k) {
                const int d = cones.soc_dims[k];
                W2z.segment(off, d) = sc->socs[k].W2 * vz.segment(off, d);
                off += d;
            }
            out.tail(m) -= W2z;
        }
        return out;
    }

    Eigen::VectorXd solve(const Scaling* sc, const Eigen::VectorXd& rhs, int refine_steps) const {
        Eigen::VectorXd sol = ldlt.solve(rhs);
        for (int it = 0; it < refine_steps; ++it) {
            Eigen::VectorXd resid = rhs - apply_unreg(sc, sol);
            sol += ldlt.solve(resid);
        }
        return sol;
    }
};

}  // namespace

double cone_min_eig(const Eigen::VectorXd& v, const ConeSpec& cones) {
    double me = kInf;
    for (int i = 0; i < cones.n_lin; ++i) me = std::min(me, v(i));
    int off = cones.n_lin;
    for (int d : cones.soc_dims) {
        me = std::min(me, v(off) - v.segment(off + 1, d - 1).norm());
        off += d;
    }
    return me;
}

Eigen::VectorXd cone_project(const Eigen::VectorXd& v, const ConeSpec& cones) {
    Eigen::VectorXd out = v;
    for (int i = 0; i < cones.n_lin; ++i) out(i) = std::max(0.0, v(i));
    int off = cones.n_lin;
    for (int d : cones.soc_dims) {
        double nrm = v.segment(off + 1, d - 1).norm();
        double head = v(off);
        if (nrm <= head) {
            // inside, keep
        } else if (nrm <= -head) {
            out.segment(off, d).setZero();
        } else {
            double coef = (head + nrm) / 2.0;
            out(off) = coef;
            out.segment(off + 1, d - 1) = (coef / nrm) * v.segment(off + 1, d - 1);
        }
        off += d;
    }
    return out;
}

Solution solve(const Problem& prob, const Settings& settings) {
    const int n = prob.num_vars();
    const int p = static_cast<int>(prob.b.size());
    const int m = static_cast<int>(prob.h.size());
    const ConeSpec& cones = prob.cones;

    Solution sol;
    sol.x = Eigen::VectorXd::Zero(n);
    sol.y = Eigen::VectorXd::Zero(p);
    sol.z = Eigen::VectorXd::Zero(m);
    sol.s = Eigen::VectorXd::Zero(m);

    KktSystem kkt;
    kkt.n = n;
    kkt.p = p;
    kkt.m = m;
    kkt.prob = &prob;
    kkt.delta = settings.static_reg;

    const double cnorm = std::max(1.0, prob.c.lpNorm<Eigen::Infinity>());
    const double bnorm = std::max(1.0, p > 0 ? prob.b.lpNorm<Eigen::Infinity>() : 0.0);
    const double hnorm = std::max(1.0, m > 0 ? prob.h.lpNorm<Eigen::Infinity>() : 0.0);

    if (m == 0) {
        // Pure equality QP: one KKT solve.
        if (!kkt.factorize(nullptr)) return sol;
        Eigen::VectorXd rhs(n + p);
        rhs.head(n) = -prob.c;
        rhs.tail(p) = prob.b;
        Eigen::VectorXd v = kkt.solve(nullptr, rhs, settings.refine_steps);
        sol.x = v.head(n);
        sol.y = v.tail(p);
        sol.obj = 0.5 * sol.x.dot(prob.P * sol.x) + prob.c.dot(sol.x);
        sol.status = Status::optimal;
        sol.iters = 1;
        return sol;
    }

    // Initial point: solve the W = I system with rhs (-c, b, h) and push the
    // resulting slack/multiplier pair into the cone interior.
    {
        if (!kkt.factorize(nullptr)) return sol;
        Eigen::VectorXd rhs(n + p + m);
        rhs.head(n) = -prob.c;
        rhs.segment(n, p) = prob.b;
        rhs.tail(m) = prob.h;
        Eigen::VectorXd v = kkt.solve(nullptr, rhs, settings.refine_steps);
        sol.x = v.head(n);
        sol.y = v.segment(n, p);
        Eigen::VectorXd zhat = v.tail(m);
        sol.s = -zhat;
        sol.z = zhat;
        Eigen::VectorXd e = cone_identity(cones);
        double mes = cone_min_eig(sol.s, cones);
        if (mes <= 1e-10) sol.s += (1.0 - mes) * e;
        double mez = cone_min_eig(sol.z, cones);
        if (mez <= 1e-10) sol.z += (1.0 - mez) * e;
    }

    const double nu = static_cast<double>(cones.degree());
    Eigen::VectorXd e = cone_identity(cones);
    Scaling sc;

    for (int iter = 0; iter < settings.max_iter; ++iter) {
        Eigen::VectorXd Px = prob.P * sol.x;
        Eigen::VectorXd rx = Px + prob.c + prob.A.transpose() * sol.y + prob.G.transpose() * sol.z;
        Eigen::VectorXd ry = prob.A * sol.x - prob.b;
        Eigen::VectorXd rz = prob.G * sol.x + sol.s - prob.h;
        double gap = sol.s.dot(sol.z);
        double obj = 0.5 * sol.x.dot(Px) + prob.c.dot(sol.x);

        double res_dual = rx.lpNorm<Eigen::Infinity>() / cnorm;
        double res_eq = p > 0 ? ry.lpNorm<Eigen::Infinity>() / bnorm : 0.0;
        double res_in = rz.lpNorm<Eigen::Infinity>() / hnorm;
        double rel_gap = std::abs(gap) / std::max(1.0, std::abs(obj));

        sol.obj = obj;
        sol.gap = gap;
        sol.res_primal = std::max(res_eq, res_in);
        sol.res_dual = res_dual;
        sol.iters = iter;

        if (settings.verbose)
            std::printf("ipm %3d  obj % .6e  gap %.2e  rp %.2e  rd %.2e\n", iter, obj, rel_gap,
                        sol.res_primal, res_dual);

        if (res_dual <= settings.tol && sol.res_primal <= settings.tol && rel_gap <= settings.tol) {
            sol.status = Status::optimal;
            return sol;
        }

        // Primal infeasibility certificate: A'y + G'z ~ 0, z in K*, and
        // b'y + h'z < 0 on the scaled ray.
        {
            double denom = -(prob.b.dot(sol.y) + prob.h.dot(sol.z));
            if (denom > 1e-8) {
                Eigen::VectorXd cert =
                    (prob.A.transpose() * sol.y + prob.G.transpose() * sol.z) / denom;
                double ynorm = std::max(sol.y.lpNorm<Eigen::Infinity>(),
                                        sol.z.lpNorm<Eigen::Infinity>()) /
                               denom;
                if (cert.lpNorm<Eigen::Infinity>() <= settings.tol * std::max(1.0, ynorm) &&
                    ynorm > 1e3) {
                    sol.status = Status::infeasible;
                    return sol;
                }
            }
            if (std::max(sol.y.lpNorm<Eigen::Infinity>(), sol.z.lpNorm<Eigen::Infinity>()) > 1e13)
                break;
        }

        if (!compute_scaling(sol.s, sol.z, cones, sc)) break;
        if (!kkt.factorize(&sc)) {
            kkt.delta *= 10.0;
            if (!kkt.factorize(&sc)) break;
        }

        Eigen::VectorXd lambda(m);
        lambda.head(cones.n_lin) = sc.lambda_lin;
        {
            int off = cones.n_lin;
            for (size_t k = 0; k < cones.soc_dims.size(); ++k) {
                lambda.segment(off, cones.soc_dims[k]) = sc.socs[k].lambda;
                off += cones.soc_dims[k];
            }
        }
        double mu = gap / nu;

        // Affine (predictor) direction.
        Eigen::VectorXd rhs(n + p + m);
        rhs.head(n) = -rx;
        rhs.segment(n, p) = -ry;
        rhs.tail(m) = -rz + sol.s;
        Eigen::VectorXd dir = kkt.solve(&sc, rhs, settings.refine_steps);
        Eigen::VectorXd dx = dir.head(n), dy = dir.segment(n, p), dz = dir.tail(m);
        Eigen::VectorXd ds = -rz - prob.G * dx;

        double alpha_aff =
            std::min({1.0, max_step(cones, sol.s, ds), max_step(cones, sol.z, dz)});
        double gap_aff = (sol.s + alpha_aff * ds).dot(sol.z + alpha_aff * dz);
        double sigma = std::pow(std::max(0.0, gap_aff / gap), 3.0);
        sigma = std::min(1.0, std::max(1e-12, sigma));

        // Combined (corrector) direction with Mehrotra second-order term.
        Eigen::VectorXd Winv_ds = apply_Winv(sc, cones, ds);
        Eigen::VectorXd W_dz = apply_W(sc, cones, dz);
        Eigen::VectorXd dcomp = sigma * mu * e - jordan_mul(cones, lambda, lambda) -
                                jordan_mul(cones, Winv_ds, W_dz);
        Eigen::VectorXd wdiv = apply_W(sc, cones, jordan_div(cones, lambda, dcomp));
        rhs.tail(m) = -rz - wdiv;
        dir = kkt.solve(&sc, rhs, settings.refine_steps);
        dx = dir.head(n);
        dy = dir.segment(n, p);
        dz = dir.tail(m);
        ds = -rz - prob.G * dx;

        double alpha =
            std::min({1.0, 0.99 * max_step(cones, sol.s, ds), 0.99 * max_step(cones, sol.z, dz)});
        if (!std::isfinite(alpha) || alpha <= 1e-12) break;

        sol.x += alpha * dx;
        sol.y += alpha * dy;
        sol.z += alpha * dz;
        sol.s += alpha * ds;
    }

    // Final certificate check before giving up.
    {
        double denom = -(prob.b.dot(sol.y) + prob.h.dot(sol.z));
        if (denom > 1e-8) {
            Eigen::VectorXd cert = (prob.A.transpose() * sol.y + prob.G.transpose() * sol.z) / denom;
            double ynorm =
                std::max(sol.y.lpNorm<Eigen::Infinity>(), sol.z.lpNorm<Eigen::Infinity>()) / denom;
            if (cert.lpNorm<Eigen::Infinity>() <= 1e-6 * std::max(1.0, ynorm) && ynorm > 1e3) {
                sol.status = Status::infeasible;
                return sol;
            }
        }
    }
    sol.status = Status::max_iter;
    return sol;
}

}  // namespace dlmpsim::conic
