#pragma once

#include <Eigen/Dense>
#include <Eigen/SVD>

#include "pcv/errors.hpp"

namespace pcv {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;
using Index = Eigen::Index;

inline void require_finite(const Matrix& m, const char* name) {
    if (m.rows() < 1 || m.cols() < 1)
        throw ShapeMismatch(std::string(name) + " must have at least one row and column");
    if (!m.allFinite())
        throw ValidationError(std::string(name) + " contains non-finite values");
}

// Column centering and (optional) standardization. Standard deviations use
// the sample (I-1) denominator; golden files depend on this choice.
struct Preprocessor {
    RowVector mean;
    RowVector scale;
    bool standardize = false;

    static Preprocessor fit(const Matrix& x, bool standardize) {
        require_finite(x, "X");
        Preprocessor p;
        p.standardize = standardize;
        p.mean = x.colwise().mean();
        if (standardize) {
            if (x.rows() < 2)
                throw ValidationError("standardization needs at least two rows");
            RowVector var = (x.rowwise() - p.mean).colwise().squaredNorm() /
                            static_cast<double>(x.rows() - 1);
            p.scale = var.cwiseSqrt();
            for (Index j = 0; j < p.scale.size(); ++j)
                if (!(p.scale(j) > 0.0)) throw ZeroVarianceColumn(j);
        } else {
            p.scale = RowVector::Ones(x.cols());
        }
        return p;
    }

    Matrix apply(const Matrix& x) const {
        check_cols(x);
        return (x.rowwise() - mean).array().rowwise() / scale.array();
    }

    Matrix invert(const Matrix& x) const {
        check_cols(x);
        return (x.array().rowwise() * scale.array()).rowwise() + mean.array();
    }

  private:
    void check_cols(const Matrix& x) const {
        if (x.cols() != mean.cols())
            throw ShapeMismatch("matrix has " + std::to_string(x.cols()) +
                                " columns, preprocessor expects " + std::to_string(mean.cols()));
    }
};

// Right singular vectors and singular values of a truncated SVD,
// X = U S V^T + E. Columns of V are orthonormal; sigma is nonincreasing.
struct SvdBasis {
    Matrix V;      // J x A
    Vector sigma;  // A

    Index components() const { return V.cols(); }

    // sigma^2 / (I-1), the per-component sample variances.
    Vector eigenvalues(Index rows) const {
        return sigma.array().square() / static_cast<double>(rows - 1);
    }
};

// Truncated SVD of a preprocessed matrix. Each column of V is
// sign-normalized so its largest-magnitude entry is positive; this removes
// the sign ambiguity before any cross-model comparison.
inline SvdBasis svd_truncated(const Matrix& x, Index a_comp) {
    require_finite(x, "X");
    if (a_comp < 1 || a_comp > std::min(x.rows(), x.cols()))
        throw ValidationError("component count " + std::to_string(a_comp) +
                              " out of range for " + std::to_string(x.rows()) + "x" +
                              std::to_string(x.cols()) + " matrix");
    Eigen::BDCSVD<Matrix> svd(x, Eigen::ComputeThinU | Eigen::ComputeThinV);
    if (svd.info() != Eigen::Success) throw DidNotConverge("BDCSVD");
    SvdBasis basis;
    basis.V = svd.matrixV().leftCols(a_comp);
    basis.sigma = svd.singularValues().head(a_comp);
    for (Index a = 0; a < a_comp; ++a) {
        Index imax;
        basis.V.col(a).cwiseAbs().maxCoeff(&imax);
        if (basis.V(imax, a) < 0.0) basis.V.col(a) = -basis.V.col(a);
    }
    return basis;
}

// Per-row squared distances to a model with the first `a` components:
// q_i = ||x_i (I - V_a V_a^T)||^2   (orthogonal / lack-of-fit distance)
// h_i = sum_{b<=a} (t_ib / sigma_b)^2  with t = x V_a  (score distance)
struct DistancePair {
    Vector q;
    Vector h;
};

inline DistancePair distances(const Matrix& x, const SvdBasis& basis, Index a) {
    if (a < 1 || a > basis.components())
        throw ValidationError("distance component count out of range");
    if (x.cols() != basis.V.rows())
        throw ShapeMismatch("X has " + std::to_string(x.cols()) + " columns, basis expects " +
                            std::to_string(basis.V.rows()));
    for (Index b = 0; b < a; ++b)
        if (basis.sigma(b) == 0.0) throw ZeroSingularValue(b);
    const auto va = basis.V.leftCols(a);
    Matrix t = x * va;
    DistancePair d;
    d.q = (x - t * va.transpose()).rowwise().squaredNorm();
    d.h = (t.array().rowwise() / basis.sigma.head(a).transpose().array())
              .square()
              .rowwise()
              .sum();
    return d;
}

}  // namespace pcv
