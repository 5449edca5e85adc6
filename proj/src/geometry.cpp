#include "relucone/geometry.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>

namespace relucone {
namespace {

// Minimum-norm least-squares solution together with the rank decision.
struct SvdSolve {
    Vec solution;
    Mat nullspace;  // orthonormal columns
    double residual = 0.0;
};

SvdSolve svd_solve(const Mat& A, const Vec& rhs, double eps_rank) {
    Eigen::JacobiSVD<Mat> svd(A, Eigen::ComputeThinU | Eigen::ComputeFullV);
    const Vec& sing = svd.singularValues();
    const double smax = sing.size() > 0 ? sing[0] : 0.0;
    Eigen::Index rank = 0;
    for (Eigen::Index i = 0; i < sing.size(); ++i)
        if (sing[i] > eps_rank * smax && sing[i] > 0.0) ++rank;

    const Mat& V = svd.matrixV();
    Vec x = Vec::Zero(A.cols());
    if (rank > 0) {
        Vec uty = svd.matrixU().leftCols(rank).transpose() * rhs;
        for (Eigen::Index i = 0; i < rank; ++i) uty[i] /= sing[i];
        x = V.leftCols(rank) * uty;
    }
    SvdSolve out;
    out.solution = x;
    out.nullspace = V.rightCols(V.cols() - rank);
    out.residual = (A * x - rhs).norm();
    return out;
}

}  // namespace

Hyperplane::Hyperplane(Vec n, double off, const Tolerances& tols) : normal(std::move(n)), offset(off) {
    require_vec(normal, "Hyperplane normal");
    if (!std::isfinite(offset)) throw InvalidInput("Hyperplane offset must be finite");
    if (normal.norm() <= tols.eps_rank) throw DegenerateInput("Hyperplane normal is numerically zero");
}

AffineSubspace::AffineSubspace(Vec base_point, Mat orthonormal_directions)
    : base(std::move(base_point)), directions(std::move(orthonormal_directions)) {
    require_vec(base, "AffineSubspace base");
    if (directions.size() == 0 && directions.rows() != base.size())
        directions = Mat::Zero(base.size(), 0);
    if (directions.rows() != base.size())
        throw DimensionMismatch("AffineSubspace directions do not match the ambient dimension");
    if (!directions.allFinite()) throw InvalidInput("AffineSubspace directions must be finite");
    if (directions.cols() > 0) {
        Mat gram = directions.transpose() * directions;
        double dev = (gram - Mat::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff();
        if (dev > 1e-10)
            throw InvalidInput("AffineSubspace directions are not orthonormal (deviation " +
                               std::to_string(dev) + ")");
    }
}

AffineSubspace AffineSubspace::from_spanning(Vec base_point, const Mat& spanning,
                                             const Tolerances& tols) {
    Mat dirs = orthonormalize_columns(spanning, tols.eps_rank);
    return AffineSubspace(std::move(base_point), std::move(dirs));
}

double AffineSubspace::distance(const Vec& x) const {
    require_same_dim(x, base, "AffineSubspace::distance");
    Vec delta = x - base;
    if (directions.cols() > 0) delta -= directions * (directions.transpose() * delta);
    return delta.norm();
}

Vec AffineSubspace::project(const Vec& x) const {
    require_same_dim(x, base, "AffineSubspace::project");
    if (directions.cols() == 0) return base;
    return base + directions * (directions.transpose() * (x - base));
}

Sign side_of(const Hyperplane& plane, const Vec& x, double tol) {
    require_same_dim(x, plane.normal, "side_of");
    double v = plane.eval(x);
    if (v > tol) return Sign::Plus;
    if (v < -tol) return Sign::Minus;
    return Sign::Zero;
}

Mat orthonormalize_columns(const Mat& raw, double eps_rank) {
    if (raw.cols() == 0) return Mat::Zero(raw.rows(), 0);
    Eigen::JacobiSVD<Mat> svd(raw, Eigen::ComputeThinU);
    const Vec& sing = svd.singularValues();
    const double smax = sing.size() > 0 ? sing[0] : 0.0;
    if (smax <= 1e-300) return Mat::Zero(raw.rows(), 0);
    Eigen::Index rank = 0;
    for (Eigen::Index i = 0; i < sing.size(); ++i)
        if (sing[i] > eps_rank * smax) ++rank;
    return svd.matrixU().leftCols(rank);
}

AffineSubspace intersect_planes(std::span<const Hyperplane> planes, const Tolerances& tols) {
    if (planes.empty()) throw InvalidInput("intersect_planes: need at least one hyperplane");
    const int d = planes[0].dim();
    if (static_cast<int>(planes.size()) > d)
        throw InvalidInput("intersect_planes: more hyperplanes than the ambient dimension");
    Mat A(static_cast<Eigen::Index>(planes.size()), d);
    Vec rhs(static_cast<Eigen::Index>(planes.size()));
    for (size_t i = 0; i < planes.size(); ++i) {
        if (planes[i].dim() != d)
            throw DimensionMismatch("intersect_planes: mixed ambient dimensions");
        if (planes[i].normal.norm() <= tols.eps_rank)
            throw DegenerateInput("intersect_planes: hyperplane " + std::to_string(i) +
                                  " has a numerically zero normal");
        A.row(static_cast<Eigen::Index>(i)) = planes[i].normal.transpose();
        rhs[static_cast<Eigen::Index>(i)] = -planes[i].offset;
    }
    SvdSolve sol = svd_solve(A, rhs, tols.eps_rank);
    if (sol.residual > tols.eps_solve * std::max(1.0, rhs.norm()))
        throw EmptyIntersection("intersect_planes: inconsistent system, residual " +
                                std::to_string(sol.residual));
    return AffineSubspace(sol.solution, sol.nullspace);
}

std::optional<AffineSubspace> affine_intersect(const AffineSubspace& a, const AffineSubspace& b,
                                               const Tolerances& tols) {
    if (a.ambient_dim() != b.ambient_dim())
        throw DimensionMismatch("affine_intersect: ambient dimensions differ");
    const Eigen::Index ka = a.directions.cols();
    const Eigen::Index kb = b.directions.cols();
    const Vec rhs = b.base - a.base;
    const double scale = std::max(1.0, rhs.norm());

    if (ka + kb == 0) {
        if (rhs.norm() <= tols.eps_solve * scale) return a;
        return std::nullopt;
    }

    Mat M(a.ambient_dim(), ka + kb);
    if (ka > 0) M.leftCols(ka) = a.directions;
    if (kb > 0) M.rightCols(kb) = -b.directions;
    SvdSolve sol = svd_solve(M, rhs, tols.eps_rank);
    if (sol.residual > tols.eps_solve * scale) return std::nullopt;

    Vec base = a.base;
    if (ka > 0) base += a.directions * sol.solution.head(ka);

    Mat dirs_raw(a.ambient_dim(), sol.nullspace.cols());
    if (sol.nullspace.cols() > 0) {
        if (ka > 0)
            dirs_raw = a.directions * sol.nullspace.topRows(ka);
        else
            dirs_raw = -b.directions * sol.nullspace.bottomRows(kb);
    }
    Mat dirs = orthonormalize_columns(dirs_raw, tols.eps_rank);
    return AffineSubspace(std::move(base), std::move(dirs));
}

bool same_subspace(const AffineSubspace& a, const AffineSubspace& b, double tol) {
    if (a.ambient_dim() != b.ambient_dim()) return false;
    if (a.dim() != b.dim()) return false;
    if (a.distance(b.base) > tol || b.distance(a.base) > tol) return false;
    for (Eigen::Index j = 0; j < a.directions.cols(); ++j) {
        Vec v = a.directions.col(j);
        Vec res = v - b.directions * (b.directions.transpose() * v);
        if (res.norm() > tol) return false;
    }
    for (Eigen::Index j = 0; j < b.directions.cols(); ++j) {
        Vec v = b.directions.col(j);
        Vec res = v - a.directions * (a.directions.transpose() * v);
        if (res.norm() > tol) return false;
    }
    return true;
}

}  // namespace relucone
