#pragma once

#include <cstdint>
#include <mutex>
#include <optional>
#include <thread>
#include <utility>
#include <vector>

#include "pcv/matrix.hpp"
#include "pcv/resampling.hpp"
#include "pcv/simpls.hpp"

namespace pcv {

enum class Method { svd, pls };

inline const char* to_string(Method m) { return m == Method::svd ? "svd" : "pls"; }

inline Method method_from_string(const std::string& s) {
    if (s == "svd") return Method::svd;
    if (s == "pls") return Method::pls;
    throw ValidationError("unknown method '" + s + "'");
}

// Fitted global models. Local (per-segment) models reuse the same types but
// share the global preprocessing: all generation happens in preprocessed
// space and only the final PV-set is mapped back to original units.
struct PvModelSvd {
    SvdBasis basis;
    Preprocessor pre;
};

struct PvModelPls {
    PlsModel model;
    Preprocessor pre;
    double mean_y = 0.0;
};

struct PvMeta {
    Method method = Method::svd;
    int K = 0;
    Index A = 0;
    std::uint64_t seed = 0;
    SplitScheme scheme = SplitScheme::random;
    bool standardize = false;
    bool scale_scores = false;
    double cratio_max = 0.0;  // pls only
};

// Generated predictor matrix, same shape as the source; row i corresponds
// to row i of the original.
struct PvSet {
    Matrix xpv;
    PvMeta meta;
};

struct CRatioReport {
    Matrix ratios;  // K x A, entries c_{k,a} / c_a
    double max_abs = 0.0;
    std::vector<std::pair<int, Index>> exceeded;  // (segment, component) over the limit
};

namespace detail {

inline Matrix take_rows(const Matrix& x, const std::vector<long>& idx) {
    Matrix out(static_cast<Index>(idx.size()), x.cols());
    for (std::size_t i = 0; i < idx.size(); ++i) out.row(static_cast<Index>(i)) = x.row(idx[i]);
    return out;
}

inline Vector take(const Vector& v, const std::vector<long>& idx) {
    Vector out(static_cast<Index>(idx.size()));
    for (std::size_t i = 0; i < idx.size(); ++i) out(static_cast<Index>(i)) = v(idx[i]);
    return out;
}

inline std::vector<long> complement_rows(const SegmentPlan& plan, int k) {
    std::vector<long> idx;
    idx.reserve(static_cast<std::size_t>(plan.rows()));
    for (long i = 0; i < plan.rows(); ++i)
        if (plan.assignment[static_cast<std::size_t>(i)] != k) idx.push_back(i);
    return idx;
}

// Re-create the residual part in the orthogonal complement of the global
// model space: project the local residuals out of span(ortho), then rescale
// each row so its squared norm matches the local q exactly. A row whose
// local residual is nonzero but vanishes in the complement (relative drop
// below 1e-14, i.e. a rescale factor beyond 1e7) has no direction to
// restore along; that is surfaced, not fabricated.
inline Matrix restore_residuals(const Matrix& e_local, const Matrix& ortho, int segment,
                                const std::vector<long>& seg_rows) {
    Matrix e = e_local - (e_local * ortho) * ortho.transpose();
    for (Index r = 0; r < e.rows(); ++r) {
        const double q_local = e_local.row(r).squaredNorm();
        const double q_proj = e.row(r).squaredNorm();
        if (q_local <= 1e-14) {
            e.row(r).setZero();
        } else if (q_proj < 1e-14 * q_local) {
            throw DegenerateResidual(segment, seg_rows[static_cast<std::size_t>(r)]);
        } else {
            e.row(r) *= std::sqrt(q_local / q_proj);
            // a large rescale amplifies the rounding residue left inside
            // span(ortho); sweep it out once more and renormalize
            e.row(r) -= (e.row(r) * ortho) * ortho.transpose();
            const double q_swept = e.row(r).squaredNorm();
            if (q_swept > 0.0) e.row(r) *= std::sqrt(q_local / q_swept);
        }
    }
    return e;
}

// Orthonormal basis spanning the columns of m (assumed full column rank).
inline Matrix orthonormal_columns(const Matrix& m) {
    Eigen::HouseholderQR<Matrix> qr(m);
    return qr.householderQ() * Matrix::Identity(m.rows(), m.cols());
}

}  // namespace detail

// SVD-based PV-set generation. For every segment k a local basis V_k is
// fitted on the rows outside k and sign-aligned to the global V. The
// explained part of the PV rows is X_k V_k V^T (a rotation between the two
// orthonormal spaces); with scale_scores the scores are additionally
// rescaled per component by sigma_a / sigma_{k,a}, which makes the score
// distances h match the local model for every component count. The residual
// part is restored in the complement of V so the orthogonal distances q
// match the local model exactly (for every a when scale_scores is off, at
// a = A when it is on).
inline PvSet generate_pv_svd(const Matrix& x, Index a_comp, const SegmentPlan& plan,
                             bool standardize, bool scale_scores) {
    require_finite(x, "X");
    if (plan.rows() != x.rows())
        throw ShapeMismatch("segment plan covers " + std::to_string(plan.rows()) +
                            " rows, X has " + std::to_string(x.rows()));
    const Preprocessor pre = Preprocessor::fit(x, standardize);
    const Matrix xs = pre.apply(x);
    const SvdBasis global = svd_truncated(xs, a_comp);

    Matrix xpv(x.rows(), x.cols());
    const auto segments = plan.segments();
    for (int k = 0; k < plan.K; ++k) {
        const auto train = detail::complement_rows(plan, k);
        if (static_cast<Index>(train.size()) < a_comp)
            throw SegmentRankDeficient(k, "fewer training rows than components");
        SvdBasis local = svd_truncated(detail::take_rows(xs, train), a_comp);
        if (!(local.sigma(a_comp - 1) > 1e-12 * local.sigma(0)))
            throw SegmentRankDeficient(k, "singular value underflow");
        for (Index a = 0; a < a_comp; ++a)
            if (global.V.col(a).dot(local.V.col(a)) < 0.0) local.V.col(a) = -local.V.col(a);

        const Matrix xval = detail::take_rows(xs, segments[static_cast<std::size_t>(k)]);
        Matrix t = xval * local.V;
        const Matrix e_local = xval - t * local.V.transpose();
        if (scale_scores)
            t = t.array().rowwise() *
                (global.sigma.array() / local.sigma.array()).transpose();
        const Matrix e = detail::restore_residuals(e_local, global.V, k,
                                                   segments[static_cast<std::size_t>(k)]);
        const Matrix block = t * global.V.transpose() + e;
        const auto& rows = segments[static_cast<std::size_t>(k)];
        for (std::size_t r = 0; r < rows.size(); ++r)
            xpv.row(rows[r]) = block.row(static_cast<Index>(r));
    }

    PvSet out;
    out.xpv = pre.invert(xpv);
    out.meta = PvMeta{Method::svd, plan.K,        a_comp, plan.seed,
                      plan.scheme, standardize,   scale_scores, 0.0};
    return out;
}

// PLS-based PV-set generation (single response). Per segment the local
// scores are converted into PV scores through D_k = diag(c_{k,a} / c_a), so
// applying the global model to the PV rows predicts exactly what the local
// model predicts on the held-out rows. Residuals are restored in the
// orthogonal complement of span(W): the local residuals satisfy E_k W_k = 0,
// and E' W = 0 is exactly what keeps the predicted-response rule intact
// (the global scores of the PV rows are computed through W).
inline std::pair<PvSet, CRatioReport> generate_pv_pls(const Matrix& x, const Vector& y,
                                                      Index a_comp, const SegmentPlan& plan,
                                                      bool standardize,
                                                      double cratio_warn = 2.0) {
    require_finite(x, "X");
    if (plan.rows() != x.rows())
        throw ShapeMismatch("segment plan covers " + std::to_string(plan.rows()) +
                            " rows, X has " + std::to_string(x.rows()));
    if (y.size() != x.rows())
        throw ShapeMismatch("y has " + std::to_string(y.size()) + " entries, X has " +
                            std::to_string(x.rows()) + " rows");
    const Preprocessor pre = Preprocessor::fit(x, standardize);
    const Matrix xs = pre.apply(x);
    const double mean_y = y.mean();
    const Vector yc = y.array() - mean_y;
    const PlsModel global = simpls_fit(xs, yc, a_comp);
    const Matrix ortho = detail::orthonormal_columns(global.W);
    // minimal-norm row adjustments within span(W): solves W^T dx = dt
    const Eigen::CompleteOrthogonalDecomposition<Matrix> w_solver(global.W.transpose());

    Matrix xpv(x.rows(), x.cols());
    CRatioReport report;
    report.ratios.resize(plan.K, a_comp);
    const auto segments = plan.segments();
    for (int k = 0; k < plan.K; ++k) {
        const auto train = detail::complement_rows(plan, k);
        if (static_cast<Index>(train.size()) < a_comp + 1)
            throw SegmentRankDeficient(k, "fewer training rows than components");
        PlsModel local =
            simpls_fit(detail::take_rows(xs, train), detail::take(yc, train), a_comp);
        for (Index a = 0; a < a_comp; ++a) {
            if (global.W.col(a).dot(local.W.col(a)) < 0.0) {
                local.W.col(a) = -local.W.col(a);
                local.P.col(a) = -local.P.col(a);
                local.c(a) = -local.c(a);
            }
            report.ratios(k, a) = local.c(a) / global.c(a);
        }

        const Matrix xval = detail::take_rows(xs, segments[static_cast<std::size_t>(k)]);
        const Matrix t = xval * local.W;
        const Matrix e_local = xval - t * local.P.transpose();
        const Matrix t_pv = t * report.ratios.row(k).asDiagonal();
        const Matrix e = detail::restore_residuals(e_local, ortho, k,
                                                   segments[static_cast<std::size_t>(k)]);
        Matrix block = t_pv * global.P.transpose() + e;
        // In exact arithmetic the global scores of these rows equal T_k D_k
        // component by component, which is what makes the predicted-response
        // rule hold for every component count. Deflation roundoff surfaces
        // through P^T W when trailing components carry near-zero covariance,
        // so the scores are polished back onto their exact values with
        // minimal-norm row adjustments inside span(W).
        for (int sweep = 0; sweep < 2; ++sweep) {
            const Matrix score_gap = t_pv - block * global.W;
            block += w_solver.solve(score_gap.transpose()).transpose();
        }
        const auto& rows = segments[static_cast<std::size_t>(k)];
        for (std::size_t r = 0; r < rows.size(); ++r)
            xpv.row(rows[r]) = block.row(static_cast<Index>(r));
    }

    report.max_abs = report.ratios.cwiseAbs().maxCoeff();
    for (int k = 0; k < plan.K; ++k)
        for (Index a = 0; a < a_comp; ++a)
            if (std::abs(report.ratios(k, a)) > cratio_warn) report.exceeded.emplace_back(k, a);

    PvSet out;
    out.xpv = pre.invert(xpv);
    out.meta = PvMeta{Method::pls, plan.K,      a_comp, plan.seed,
                      plan.scheme, standardize, false,  report.max_abs};
    return {std::move(out), std::move(report)};
}

enum class Task { none, regression, classification };

struct Targets {
    Task task = Task::none;
    Vector y;                               // regression response
    std::vector<int> class_ids;             // classification, 0-based
    std::vector<std::string> class_levels;  // label per class id

    static Targets none() { return {}; }
    static Targets regression(Vector resp) {
        Targets t;
        t.task = Task::regression;
        t.y = std::move(resp);
        return t;
    }
    static Targets classification(std::vector<int> ids, std::vector<std::string> levels) {
        Targets t;
        t.task = Task::classification;
        t.class_ids = std::move(ids);
        t.class_levels = std::move(levels);
        return t;
    }
};

struct AugmentOptions {
    Method method = Method::svd;
    Index A = 1;
    int K = 4;
    int n_sets = 1;
    std::uint64_t seed = 0;
    SplitScheme scheme = SplitScheme::random;
    bool standardize = false;
    bool scale_scores = true;
    bool per_class = false;  // svd + classification: one model per class
    double cratio_warn = 2.0;
    int threads = 1;  // sets are independent; output is identical for any value
};

// Original data stacked with the generated PV-sets, responses replicated.
struct AugmentedDataset {
    Matrix x;
    Targets targets;
    std::vector<std::uint64_t> set_seeds;
    std::vector<CRatioReport> cratio;  // per set, pls only
    AugmentOptions options;

    long source_rows() const {
        return options.n_sets > 0 ? x.rows() / (options.n_sets + 1) : x.rows();
    }
};

namespace detail {

inline std::vector<std::vector<long>> class_row_index(const Targets& t) {
    std::size_t n_classes = t.class_levels.size();
    std::vector<std::vector<long>> idx(n_classes);
    for (std::size_t i = 0; i < t.class_ids.size(); ++i)
        idx[static_cast<std::size_t>(t.class_ids[i])].push_back(static_cast<long>(i));
    return idx;
}

inline Matrix generate_one_set(const Matrix& x, const Targets& targets,
                               const AugmentOptions& opt, std::uint64_t set_seed,
                               CRatioReport* ratio_out) {
    if (opt.method == Method::pls) {
        Vector y;
        if (targets.task == Task::regression) {
            y = targets.y;
        } else if (targets.task == Task::classification) {
            if (targets.class_levels.size() != 2)
                throw ValidationError(
                    "pls generation supports a single response; use two classes or svd");
            y.resize(static_cast<Index>(targets.class_ids.size()));
            for (std::size_t i = 0; i < targets.class_ids.size(); ++i)
                y(static_cast<Index>(i)) = static_cast<double>(targets.class_ids[i]);
        } else {
            throw ValidationError("pls generation requires a response or class column");
        }
        auto plan = make_splits(x.rows(), opt.K, set_seed, opt.scheme);
        auto [pv, ratio] = generate_pv_pls(x, y, opt.A, plan, opt.standardize, opt.cratio_warn);
        if (ratio_out) *ratio_out = std::move(ratio);
        return std::move(pv.xpv);
    }
    if (opt.per_class) {
        if (targets.task != Task::classification)
            throw ValidationError("per-class generation requires a class column");
        Matrix out(x.rows(), x.cols());
        const auto by_class = class_row_index(targets);
        for (std::size_t c = 0; c < by_class.size(); ++c) {
            const auto& idx = by_class[c];
            auto plan = make_splits(static_cast<long>(idx.size()), opt.K,
                                    derive_seed(set_seed, c + 1), opt.scheme);
            PvSet pv = generate_pv_svd(take_rows(x, idx), opt.A, plan, opt.standardize,
                                       opt.scale_scores);
            for (std::size_t r = 0; r < idx.size(); ++r)
                out.row(idx[r]) = pv.xpv.row(static_cast<Index>(r));
        }
        return out;
    }
    auto plan = make_splits(x.rows(), opt.K, set_seed, opt.scheme);
    return generate_pv_svd(x, opt.A, plan, opt.standardize, opt.scale_scores).xpv;
}

}  // namespace detail

// Stack the original data with n_sets PV-sets, each generated from an
// independently seeded segment plan. Rows keep their source order inside
// every block; responses and class labels are replicated as-is. For
// per-class SVD generation every class must have at least K members.
inline AugmentedDataset augment(const Matrix& x, const Targets& targets,
                                const AugmentOptions& opt) {
    require_finite(x, "X");
    if (opt.n_sets < 0) throw ValidationError("n_sets must be nonnegative");
    if (targets.task == Task::regression && targets.y.size() != x.rows())
        throw ShapeMismatch("response length does not match X rows");
    if (targets.task == Task::classification &&
        static_cast<Index>(targets.class_ids.size()) != x.rows())
        throw ShapeMismatch("class labels do not match X rows");
    if (opt.per_class) {
        if (opt.method != Method::svd)
            throw ValidationError("per-class generation is svd-only");
        std::vector<long> counts(targets.class_levels.size(), 0);
        for (int id : targets.class_ids) ++counts[static_cast<std::size_t>(id)];
        for (std::size_t c = 0; c < counts.size(); ++c)
            if (counts[c] < opt.K) throw ClassTooSmall(targets.class_levels[c], opt.K);
    }

    AugmentedDataset out;
    out.options = opt;
    const long rows = x.rows();
    out.x.resize(rows * (opt.n_sets + 1), x.cols());
    out.x.topRows(rows) = x;
    out.set_seeds.resize(static_cast<std::size_t>(opt.n_sets));
    out.cratio.resize(opt.method == Method::pls ? static_cast<std::size_t>(opt.n_sets) : 0);
    for (int i = 0; i < opt.n_sets; ++i)
        out.set_seeds[static_cast<std::size_t>(i)] = derive_seed(opt.seed, static_cast<std::uint64_t>(i) + 1);

    const int workers = std::max(1, std::min(opt.threads, opt.n_sets));
    std::exception_ptr first_error;
    std::mutex error_mutex;
    auto run_range = [&](int begin, int end) {
        for (int i = begin; i < end; ++i) {
            try {
                CRatioReport* ratio =
                    opt.method == Method::pls ? &out.cratio[static_cast<std::size_t>(i)] : nullptr;
                out.x.middleRows(rows * (i + 1), rows) = detail::generate_one_set(
                    x, targets, opt, out.set_seeds[static_cast<std::size_t>(i)], ratio);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
                return;
            }
        }
    };
    if (workers <= 1) {
        run_range(0, opt.n_sets);
    } else {
        std::vector<std::thread> pool;
        const int chunk = (opt.n_sets + workers - 1) / workers;
        for (int w = 0; w < workers; ++w)
            pool.emplace_back(run_range, w * chunk, std::min(opt.n_sets, (w + 1) * chunk));
        for (auto& t : pool) t.join();
    }
    if (first_error) std::rethrow_exception(first_error);

    out.targets.task = targets.task;
    if (targets.task == Task::regression) {
        out.targets.y.resize(rows * (opt.n_sets + 1));
        for (int i = 0; i <= opt.n_sets; ++i) out.targets.y.segment(rows * i, rows) = targets.y;
    } else if (targets.task == Task::classification) {
        out.targets.class_levels = targets.class_levels;
        out.targets.class_ids.reserve(targets.class_ids.size() *
                                      static_cast<std::size_t>(opt.n_sets + 1));
        for (int i = 0; i <= opt.n_sets; ++i)
            out.targets.class_ids.insert(out.targets.class_ids.end(), targets.class_ids.begin(),
                                         targets.class_ids.end());
    }
    return out;
}

}  // namespace pcv
