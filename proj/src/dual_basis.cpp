#include "relucone/dual_basis.hpp"

#include "relucone/nnls.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <random>

namespace relucone {

DualBasis build_dual_basis(const LayerMap& layer, const Tolerances& tols) {
    const int d = layer.dim();

    Eigen::JacobiSVD<Mat> svd(layer.weights);
    const Vec& sing = svd.singularValues();
    if (sing[0] <= 0.0 || sing[d - 1] <= tols.eps_rank * sing[0])
        throw SingularArrangement("build_dual_basis: weight rows are rank deficient");

    std::vector<Hyperplane> planes;
    planes.reserve(static_cast<size_t>(d));
    for (int i = 0; i < d; ++i) planes.push_back(layer.hyperplane(i, tols));

    DualBasis basis;
    basis.apex = intersect_planes(planes, tols).base;
    basis.vectors = Mat(d, d);

    // Each dual direction spans the line common to all planes but one.
    std::vector<Hyperplane> rest;
    for (int i = 0; i < d; ++i) {
        rest.clear();
        for (int j = 0; j < d; ++j)
            if (j != i) rest.push_back(planes[static_cast<size_t>(j)]);
        AffineSubspace line = intersect_planes(rest, tols);
        if (line.dim() != 1)
            throw SingularArrangement("build_dual_basis: plane subset does not meet in a line");
        Vec e = line.directions.col(0);
        double toward = layer.weights.row(i).dot(e);
        if (std::abs(toward) <= tols.eps_rank)
            throw SingularArrangement("build_dual_basis: dual direction is tangent to its plane");
        if (toward > 0.0) e = -e;
        basis.vectors.col(i) = e;
    }
    return basis;
}

PreimageSet preimage(const LayerMap& layer, const Vec& y, const Tolerances& tols) {
    require_same_dim(y, layer.bias, "preimage");
    if ((y.array() < -tols.membership).any())
        throw InvalidInput("preimage: output must lie in the nonnegative orthant");

    DualBasis basis = build_dual_basis(layer, tols);
    OutputPattern pattern = make_output_pattern(y, tols.signature);

    // Base point: translated planes for the support, untranslated for the
    // zero set. For an invertible arrangement this is one linear solve.
    Vec rhs = y - layer.bias;
    for (int i : pattern.zero_idx) rhs[i] = -layer.bias[i];
    Vec base = layer.weights.fullPivLu().solve(rhs);
    double residual = (layer.weights * base - rhs).norm();
    if (residual > tols.eps_solve * std::max(1.0, rhs.norm()))
        throw NoSolution("preimage: base-point system is inconsistent");

    PreimageSet set;
    set.base = std::move(base);
    set.positive_idx = pattern.positive_idx;
    set.zero_idx = pattern.zero_idx;
    set.generators = Mat(layer.dim(), static_cast<Eigen::Index>(pattern.zero_idx.size()));
    for (size_t k = 0; k < pattern.zero_idx.size(); ++k)
        set.generators.col(static_cast<Eigen::Index>(k)) = basis.vectors.col(pattern.zero_idx[k]);

    // The set is empty iff no cone point reaches the nonnegative orthant:
    // feasibility of  base + G a >= 0, a >= 0  via slack variables.
    const int d = layer.dim();
    const Eigen::Index p = set.generators.cols();
    Mat feas(d, p + d);
    if (p > 0) feas.leftCols(p) = set.generators;
    feas.rightCols(d) = -Mat::Identity(d, d);
    if (!cone_feasible(feas, -set.base, tols.membership))
        throw EmptyPreimage("preimage: the cone misses the nonnegative orthant");
    return set;
}

bool preimage_contains(const PreimageSet& set, const Vec& x, double tol) {
    require_same_dim(x, set.base, "preimage_contains");
    if (!in_nonneg_orthant(x, tol)) return false;
    Vec delta = x - set.base;
    if (set.generator_count() == 0) return delta.norm() <= tol;
    // Fast paths around the cone solver: an exact unconstrained decomposition
    // with nonnegative weights certifies membership, and an unconstrained
    // residual above tol rules it out (constraining the weights can only
    // increase the residual). Only sign-infeasible exact fits fall through.
    Vec alpha = set.generators.colPivHouseholderQr().solve(delta);
    const double unconstrained = (set.generators * alpha - delta).norm();
    if (unconstrained > tol) return false;
    if (alpha.minCoeff() >= 0.0) return true;
    NnlsSolution sol = nnls(set.generators, delta);
    return sol.residual <= tol;
}

std::vector<Vec> sample_preimage(const PreimageSet& set, int count, std::uint64_t seed,
                                 double radius, double tol) {
    if (count < 0) throw InvalidInput("sample_preimage: count must be nonnegative");
    if (!(radius >= 0.0)) throw InvalidInput("sample_preimage: radius must be nonnegative");

    std::vector<Vec> samples;
    samples.reserve(static_cast<size_t>(count));
    const int p = set.generator_count();
    if (p == 0) {
        // A single point; the constructor already guaranteed it is admissible.
        for (int i = 0; i < count; ++i) samples.push_back(set.base);
        return samples;
    }

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(0.0, radius);
    constexpr long kDrawBudget = 1000000;
    long draws = 0;
    Vec alpha(p);
    while (static_cast<int>(samples.size()) < count) {
        ++draws;
        for (int i = 0; i < p; ++i) alpha[i] = unif(rng);
        Vec x = set.base + set.generators * alpha;
        if (in_nonneg_orthant(x, tol)) samples.push_back(x);
        if (draws >= kDrawBudget &&
            static_cast<double>(samples.size()) < 0.001 * static_cast<double>(draws))
            throw SamplingExhausted("sample_preimage: rejection rate above 99.9% after " +
                                    std::to_string(draws) + " draws");
    }
    return samples;
}

}  // namespace relucone
