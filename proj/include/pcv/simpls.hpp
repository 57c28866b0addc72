#pragma once

#include "pcv/matrix.hpp"

namespace pcv {

// Single-response PLS decomposition fitted with SIMPLS (de Jong 1993):
//   T = X W,  X = T P^T + E_x,  yhat = T c
// Weight columns are unit vectors, so the scores carry the magnitude.
// With this normalization P^T W = I, which the generators rely on.
struct PlsModel {
    Matrix W;  // J x A unit-norm weights
    Matrix P;  // J x A x-loadings
    Vector c;  // A    y-loadings

    Index components() const { return W.cols(); }

    Vector predict(const Matrix& x) const { return (x * W) * c; }
};

// X must be column centered (and standardized if desired); y must be
// centered. The covariance vector X^T y is deflated through an orthonormal
// basis of the loadings, which keeps the scores mutually orthogonal.
inline PlsModel simpls_fit(const Matrix& x, const Vector& y, Index a_comp) {
    require_finite(x, "X");
    if (y.size() != x.rows())
        throw ShapeMismatch("y has " + std::to_string(y.size()) + " entries, X has " +
                            std::to_string(x.rows()) + " rows");
    if (!y.allFinite()) throw ValidationError("y contains non-finite values");
    if (a_comp < 1 || a_comp > std::min(x.rows() - 1, x.cols()))
        throw ValidationError("PLS component count " + std::to_string(a_comp) +
                              " out of range for " + std::to_string(x.rows()) + "x" +
                              std::to_string(x.cols()) + " matrix");

    const Index j_vars = x.cols();
    PlsModel m;
    m.W.resize(j_vars, a_comp);
    m.P.resize(j_vars, a_comp);
    m.c.resize(a_comp);
    Matrix basis(j_vars, a_comp);  // orthonormal loading basis used for deflation

    Vector s = x.transpose() * y;
    const double s0 = s.norm();
    for (Index a = 0; a < a_comp; ++a) {
        const double sn = s.norm();
        if (!(sn > 1e-14 * s0) || sn == 0.0) throw RankDeficient(a);
        Vector w = s / sn;
        Vector t = x * w;
        const double tt = t.squaredNorm();
        if (!(tt > 0.0)) throw RankDeficient(a);
        Vector p = (x.transpose() * t) / tt;
        const double c = y.dot(t) / tt;
        if (std::abs(c) < 1e-14) throw ZeroYLoading(a);

        m.W.col(a) = w;
        m.P.col(a) = p;
        m.c(a) = c;

        Vector v = p;
        if (a > 0) {
            auto prev = basis.leftCols(a);
            v -= prev * (prev.transpose() * v);
            v -= prev * (prev.transpose() * v);  // reorthogonalize
        }
        const double vn = v.norm();
        if (!(vn > 1e-14 * p.norm())) throw RankDeficient(a);
        basis.col(a) = v / vn;
        s -= basis.col(a) * (basis.col(a).dot(s));
    }
    return m;
}

}  // namespace pcv
