#include "relucone/nnls.hpp"

#include <algorithm>
#include <limits>
#include <random>

namespace relucone {
namespace {

// Least squares restricted to the passive column set.
Vec solve_passive(const Mat& A, const Vec& y, const std::vector<int>& passive) {
    Mat Ap(A.rows(), static_cast<Eigen::Index>(passive.size()));
    for (size_t k = 0; k < passive.size(); ++k)
        Ap.col(static_cast<Eigen::Index>(k)) = A.col(passive[k]);
    return Ap.colPivHouseholderQr().solve(y);
}

}  // namespace

NnlsSolution nnls(const Mat& A, const Vec& y, const NnlsOptions& opts) {
    const int n = static_cast<int>(A.cols());
    NnlsSolution out;
    out.coeffs = Vec::Zero(n);
    if (n == 0) {
        out.residual = y.norm();
        return out;
    }

    const int max_iter = opts.max_iterations > 0 ? opts.max_iterations : 6 * n + 60;
    const double dual_scale = std::max(1.0, (A.transpose() * y).cwiseAbs().maxCoeff());
    const double dual_tol = opts.dual_tol * dual_scale;

    std::vector<bool> in_passive(n, false);
    std::vector<int> passive;
    Vec z = Vec::Zero(n);
    bool stationary = false;

    int iter = 0;
    while (iter < max_iter && !stationary) {
        ++iter;
        Vec w = A.transpose() * (y - A * z);
        int best = -1;
        double best_w = dual_tol;
        for (int i = 0; i < n; ++i) {
            if (!in_passive[i] && w[i] > best_w) {
                best_w = w[i];
                best = i;
            }
        }
        if (best < 0) {
            stationary = true;  // no inactive coefficient improves the fit
            break;
        }
        in_passive[best] = true;
        passive.push_back(best);

        int inner = 0;
        while (!passive.empty() && inner++ < max_iter) {
            Vec s = solve_passive(A, y, passive);
            if (s.minCoeff() > 0.0) {
                z.setZero();
                for (size_t k = 0; k < passive.size(); ++k)
                    z[passive[k]] = s[static_cast<Eigen::Index>(k)];
                break;
            }
            // Step toward s until the first passive coefficient hits zero.
            double alpha = std::numeric_limits<double>::infinity();
            for (size_t k = 0; k < passive.size(); ++k) {
                double sk = s[static_cast<Eigen::Index>(k)];
                if (sk <= 0.0) {
                    double denom = z[passive[k]] - sk;
                    if (denom > 0.0) alpha = std::min(alpha, z[passive[k]] / denom);
                }
            }
            if (!std::isfinite(alpha)) alpha = 0.0;
            for (size_t k = 0; k < passive.size(); ++k) {
                int i = passive[k];
                z[i] += alpha * (s[static_cast<Eigen::Index>(k)] - z[i]);
            }
            std::vector<int> kept;
            for (int i : passive) {
                if (z[i] > 1e-14) {
                    kept.push_back(i);
                } else {
                    z[i] = 0.0;
                    in_passive[i] = false;
                }
            }
            passive = std::move(kept);
        }
    }

    out.converged = stationary;
    out.coeffs = z;
    out.residual = (A * z - y).norm();
    out.iterations = iter;
    return out;
}

bool cone_feasible(const Mat& A, const Vec& y, double feas_tol) {
    if (A.cols() == 0) return y.norm() <= feas_tol;
    NnlsSolution sol = nnls(A, y);
    return sol.residual <= feas_tol;
}

bool polyhedron_feasible(const Mat& A, const Vec& b, double feas_tol) {
    const Eigen::Index m = A.rows();
    const Eigen::Index k = A.cols();
    if (m == 0) return true;
    // A c <= b  with free c: split c and add slack, then ask for an exact
    // nonnegative solution of  A c+ - A c- + s = b.
    Mat S(m, 2 * k + m);
    if (k > 0) {
        S.block(0, 0, m, k) = A;
        S.block(0, k, m, k) = -A;
    }
    S.block(0, 2 * k, m, m) = Mat::Identity(m, m);
    return cone_feasible(S, b, feas_tol);
}

bool mixed_feasible(const Mat& Aeq, const Vec& beq, const Mat& Aineq, const Vec& bineq,
                    double feas_tol) {
    const Eigen::Index me = Aeq.rows();
    const Eigen::Index mi = Aineq.rows();
    const Eigen::Index k = std::max(Aeq.cols(), Aineq.cols());
    if (me + mi == 0) return true;
    Mat S(me + mi, 2 * k + mi);
    S.setZero();
    if (me > 0 && k > 0) {
        S.block(0, 0, me, k) = Aeq;
        S.block(0, k, me, k) = -Aeq;
    }
    if (mi > 0) {
        if (k > 0) {
            S.block(me, 0, mi, k) = Aineq;
            S.block(me, k, mi, k) = -Aineq;
        }
        S.block(me, 2 * k, mi, mi) = Mat::Identity(mi, mi);
    }
    Vec rhs(me + mi);
    if (me > 0) rhs.head(me) = beq;
    if (mi > 0) rhs.tail(mi) = bineq;
    return cone_feasible(S, rhs, feas_tol);
}

std::optional<Vec> polyhedron_point(const Mat& A, const Vec& b, double feas_tol) {
    const Eigen::Index m = A.rows();
    const Eigen::Index k = A.cols();
    if (m == 0 || k == 0) {
        if (m > 0 && (b.array() < -feas_tol).any()) return std::nullopt;
        return Vec::Zero(k);
    }
    Mat S(m, 2 * k + m);
    S.block(0, 0, m, k) = A;
    S.block(0, k, m, k) = -A;
    S.block(0, 2 * k, m, m) = Mat::Identity(m, m);
    NnlsSolution sol = nnls(S, b);
    if (sol.residual > feas_tol) return std::nullopt;
    return Vec(sol.coeffs.head(k) - sol.coeffs.segment(k, k));
}

std::vector<Vec> polyhedron_walk(const Mat& A, const Vec& b, const Vec& c0, int count,
                                 std::uint64_t seed, double span_cap) {
    const Eigen::Index k = c0.size();
    std::vector<Vec> states;
    states.reserve(static_cast<size_t>(count));
    if (k == 0) {
        for (int i = 0; i < count; ++i) states.push_back(c0);
        return states;
    }

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    Vec c = c0;
    const int burn_in = 8 * static_cast<int>(k);
    const int steps = burn_in + 3 * count;
    int emitted = 0;
    for (int step = 0; step < steps && emitted < count; ++step) {
        Vec u(k);
        for (Eigen::Index i = 0; i < k; ++i) u[i] = gauss(rng);
        double un = u.norm();
        if (un <= 0.0) continue;
        u /= un;
        double t_lo = -span_cap;
        double t_hi = span_cap;
        for (Eigen::Index r = 0; r < A.rows(); ++r) {
            double den = A.row(r).dot(u);
            double slack = b[r] - A.row(r).dot(c);
            if (slack < 0.0) slack = 0.0;  // start may sit on the boundary
            if (den > 1e-14)
                t_hi = std::min(t_hi, slack / den);
            else if (den < -1e-14)
                t_lo = std::max(t_lo, -slack / -den);
        }
        if (t_hi < t_lo) continue;
        c += (t_lo + (t_hi - t_lo) * unif(rng)) * u;
        if (step >= burn_in && (step - burn_in) % 3 == 0) {
            states.push_back(c);
            ++emitted;
        }
    }
    while (emitted < count) {  // degenerate polyhedra just repeat the anchor
        states.push_back(c);
        ++emitted;
    }
    return states;
}

}  // namespace relucone
