#pragma once

#include <json.hpp>

#include "pcv/engine.hpp"
#include "pcv/matrix.hpp"
#include "pcv/resampling.hpp"
#include "pcv/simpls.hpp"

namespace pcv {

struct RuleCheck {
    std::string rule;    // "q", "h" or "yhat"
    Index component;     // 1-based component count the rule was checked at
    double max_rel_dev;  // max over segments and rows of |dev| / max(1, ref)
    bool pass;
};

struct RuleReport {
    std::vector<RuleCheck> checks;
    bool pass = true;
    double tolerance = 1e-8;
    double cratio_max = 0.0;  // pls only
    bool has_cratio = false;

    nlohmann::json to_json() const {
        nlohmann::json rules = nlohmann::json::array();
        for (const auto& c : checks)
            rules.push_back({{"rule", c.rule},
                             {"component", c.component},
                             {"max_rel_dev", c.max_rel_dev},
                             {"pass", c.pass}});
        nlohmann::json j{{"pass", pass}, {"tolerance", tolerance}, {"rules", rules}};
        if (has_cratio) j["cratio_max"] = cratio_max;
        return j;
    }
};

namespace detail {

inline void check_same_shape(const Matrix& x, const Matrix& xpv) {
    if (x.rows() != xpv.rows() || x.cols() != xpv.cols())
        throw ShapeMismatch("PV-set is " + std::to_string(xpv.rows()) + "x" +
                            std::to_string(xpv.cols()) + ", original is " +
                            std::to_string(x.rows()) + "x" + std::to_string(x.cols()));
}

inline double rel_dev(double value, double ref) {
    return std::abs(value - ref) / std::max(1.0, std::abs(ref));
}

}  // namespace detail

// Refits the global and all local models from the original data and checks
// that the PV rows reproduce the held-out outcomes of the local models.
// Nothing fitted by the generator is reused. With scale_scores the score
// distance h is enforced for every component count and the orthogonal
// distance q at the full count A; without it q is enforced for every
// component count.
inline RuleReport check_rules_svd(const Matrix& x, const Matrix& xpv, const SegmentPlan& plan,
                                  Index a_comp, bool standardize, bool scale_scores,
                                  double tol = 1e-8) {
    detail::check_same_shape(x, xpv);
    if (plan.rows() != x.rows()) throw ShapeMismatch("plan does not cover the data rows");
    const Preprocessor pre = Preprocessor::fit(x, standardize);
    const Matrix xs = pre.apply(x);
    const Matrix xps = pre.apply(xpv);
    const SvdBasis global = svd_truncated(xs, a_comp);

    RuleReport report;
    report.tolerance = tol;
    Vector worst_q = Vector::Zero(a_comp);
    Vector worst_h = Vector::Zero(a_comp);
    for (int k = 0; k < plan.K; ++k) {
        const auto train = detail::complement_rows(plan, k);
        const auto seg = plan.segments()[static_cast<std::size_t>(k)];
        const SvdBasis local = svd_truncated(detail::take_rows(xs, train), a_comp);
        const Matrix xval = detail::take_rows(xs, seg);
        const Matrix xpval = detail::take_rows(xps, seg);
        for (Index a = 1; a <= a_comp; ++a) {
            const DistancePair d_pv = distances(xpval, global, a);
            const DistancePair d_loc = distances(xval, local, a);
            for (Index i = 0; i < d_pv.q.size(); ++i) {
                worst_q(a - 1) = std::max(worst_q(a - 1), detail::rel_dev(d_pv.q(i), d_loc.q(i)));
                worst_h(a - 1) = std::max(worst_h(a - 1), detail::rel_dev(d_pv.h(i), d_loc.h(i)));
            }
        }
    }
    if (scale_scores) {
        for (Index a = 1; a <= a_comp; ++a)
            report.checks.push_back({"h", a, worst_h(a - 1), worst_h(a - 1) <= tol});
        report.checks.push_back({"q", a_comp, worst_q(a_comp - 1), worst_q(a_comp - 1) <= tol});
    } else {
        for (Index a = 1; a <= a_comp; ++a)
            report.checks.push_back({"q", a, worst_q(a - 1), worst_q(a - 1) <= tol});
    }
    for (const auto& c : report.checks) report.pass = report.pass && c.pass;
    return report;
}

// Predicted-response rule: for every segment the global model applied to
// the PV rows must predict what the local model predicts on the held-out
// rows, for every component count 1..A.
inline RuleReport check_rules_pls(const Matrix& x, const Vector& y, const Matrix& xpv,
                                  const SegmentPlan& plan, Index a_comp, bool standardize,
                                  double tol = 1e-8) {
    detail::check_same_shape(x, xpv);
    if (plan.rows() != x.rows()) throw ShapeMismatch("plan does not cover the data rows");
    if (y.size() != x.rows()) throw ShapeMismatch("response length does not match the data");
    const Preprocessor pre = Preprocessor::fit(x, standardize);
    const Matrix xs = pre.apply(x);
    const Matrix xps = pre.apply(xpv);
    const Vector yc = y.array() - y.mean();
    const PlsModel global = simpls_fit(xs, yc, a_comp);

    RuleReport report;
    report.tolerance = tol;
    report.has_cratio = true;
    Vector worst = Vector::Zero(a_comp);
    for (int k = 0; k < plan.K; ++k) {
        const auto train = detail::complement_rows(plan, k);
        const auto seg = plan.segments()[static_cast<std::size_t>(k)];
        PlsModel local =
            simpls_fit(detail::take_rows(xs, train), detail::take(yc, train), a_comp);
        for (Index a = 0; a < a_comp; ++a) {
            double sign = global.W.col(a).dot(local.W.col(a)) < 0.0 ? -1.0 : 1.0;
            report.cratio_max =
                std::max(report.cratio_max, std::abs(sign * local.c(a) / global.c(a)));
        }
        const Matrix t_pv = detail::take_rows(xps, seg) * global.W;
        const Matrix t_loc = detail::take_rows(xs, seg) * local.W;
        for (Index a = 1; a <= a_comp; ++a) {
            const Vector yhat_pv = t_pv.leftCols(a) * global.c.head(a);
            const Vector yhat_loc = t_loc.leftCols(a) * local.c.head(a);
            for (Index i = 0; i < yhat_pv.size(); ++i)
                worst(a - 1) = std::max(worst(a - 1), detail::rel_dev(yhat_pv(i), yhat_loc(i)));
        }
    }
    for (Index a = 1; a <= a_comp; ++a)
        report.checks.push_back({"yhat", a, worst(a - 1), worst(a - 1) <= tol});
    for (const auto& c : report.checks) report.pass = report.pass && c.pass;
    return report;
}

// Informational comparison of the two column covariance structures; the
// method promises similarity, not equality, so nothing here is a gate.
struct CovarianceSummary {
    double frobenius_rel_dist = 0.0;
    double max_mean_delta = 0.0;
    double max_sd_delta = 0.0;

    nlohmann::json to_json() const {
        return nlohmann::json{{"frobenius_rel_dist", frobenius_rel_dist},
                              {"max_mean_delta", max_mean_delta},
                              {"max_sd_delta", max_sd_delta}};
    }
};

inline CovarianceSummary covariance_summary(const Matrix& x, const Matrix& xpv) {
    detail::check_same_shape(x, xpv);
    auto covariance = [](const Matrix& m) {
        Matrix c = m.rowwise() - m.colwise().mean();
        return Matrix(c.transpose() * c / static_cast<double>(m.rows() - 1));
    };
    const Matrix cx = covariance(x);
    const Matrix cp = covariance(xpv);
    CovarianceSummary s;
    s.frobenius_rel_dist = (cx - cp).norm() / cx.norm();
    s.max_mean_delta = (x.colwise().mean() - xpv.colwise().mean()).cwiseAbs().maxCoeff();
    auto sd = [](const Matrix& m) {
        return ((m.rowwise() - m.colwise().mean()).colwise().squaredNorm() /
                static_cast<double>(m.rows() - 1))
            .cwiseSqrt();
    };
    s.max_sd_delta = (sd(x) - sd(xpv)).cwiseAbs().maxCoeff();
    return s;
}

}  // namespace pcv
