#pragma once

#include <algorithm>
#include <atomic>
#include <functional>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>
#include <vector>

#include <json.hpp>

#include "pcv/engine.hpp"
#include "pcv/io.hpp"
#include "pcv/mlp.hpp"
#include "pcv/schema.hpp"

namespace pcv {

// One grid cell of the benchmark: train with n_sets PV-sets (0 = baseline)
// generated with A latent variables and K segments, repeated with fresh
// splits, fresh PV-sets and fresh network init.
struct ExperimentConfig {
    std::string dataset;
    Task task = Task::regression;
    std::string train_csv;  // regression: fixed train/test files
    std::string test_csv;
    std::string data_csv;   // classification: single file, split per run
    double train_fraction = 0.75;
    std::string schema_path;

    Method method = Method::pls;
    bool per_class = false;
    bool standardize_generation = true;
    bool scale_scores = true;
    std::vector<int> n_sets{0, 1};
    std::vector<Index> n_lv{10};
    std::vector<int> n_seg{4};
    int repeats = 5;
    std::uint64_t seed = 1;

    std::vector<Index> hidden;
    double learning_rate = 1e-4;
    int epochs = 300;
    Index batch_size = 10;

    int threads = 0;  // 0 = hardware concurrency
    std::string out_csv;
    std::string out_summary;

    static ExperimentConfig from_json(const nlohmann::json& j) {
        ExperimentConfig c;
        try {
            c.dataset = j.at("dataset").get<std::string>();
            const std::string task = j.at("task").get<std::string>();
            if (task == "regression")
                c.task = Task::regression;
            else if (task == "classification")
                c.task = Task::classification;
            else
                throw ValidationError("unknown task '" + task + "'");
            if (c.task == Task::regression) {
                c.train_csv = j.at("train_csv").get<std::string>();
                c.test_csv = j.at("test_csv").get<std::string>();
            } else {
                c.data_csv = j.at("data_csv").get<std::string>();
                c.train_fraction = j.value("train_fraction", 0.75);
            }
            c.schema_path = j.value("schema", std::string());
            c.method = method_from_string(j.value("method", std::string("pls")));
            c.per_class = j.value("per_class", false);
            c.standardize_generation = j.value("standardize_generation", true);
            c.scale_scores = j.value("scale_scores", true);
            c.n_sets = j.at("n_sets").get<std::vector<int>>();
            c.n_lv.clear();
            for (auto v : j.at("n_lv").get<std::vector<long>>()) c.n_lv.push_back(v);
            c.n_seg = j.at("n_seg").get<std::vector<int>>();
            c.repeats = j.value("repeats", 5);
            c.seed = j.value("seed", 1ULL);
            c.hidden.clear();
            for (auto v : j.at("hidden").get<std::vector<long>>()) c.hidden.push_back(v);
            c.learning_rate = j.at("learning_rate").get<double>();
            c.epochs = j.value("epochs", 300);
            c.batch_size = j.value("batch_size", 10L);
            c.threads = j.value("threads", 0);
            c.out_csv = j.value("out_csv", std::string());
            c.out_summary = j.value("out_summary", std::string());
        } catch (const nlohmann::json::exception& e) {
            throw ValidationError("experiment config: " + std::string(e.what()));
        }
        if (c.n_sets.empty() || c.n_lv.empty() || c.n_seg.empty() || c.repeats < 1)
            throw ValidationError("experiment config: empty grid");
        return c;
    }
};

struct RunRecord {
    std::string dataset;
    std::string method;  // "none" for baseline runs
    int n_sets = 0;
    Index A = 0;
    int K = 0;
    double lr = 0.0;
    int repeat = 0;
    Task task = Task::regression;
    EvalMetrics metrics;
};

struct ExperimentData {
    Matrix x_train;  // regression
    Vector y_train;
    Matrix x_test;
    Vector y_test;
    Matrix x_all;  // classification
    std::vector<int> class_ids;
    std::vector<std::string> class_levels;
};

namespace detail {

inline ExperimentData load_experiment_data(const ExperimentConfig& cfg) {
    ExperimentData d;
    if (cfg.task == Task::regression) {
        auto [ttrain, strain] = read_dataset(cfg.train_csv, cfg.schema_path);
        auto enc_train = encode(ttrain, strain);
        if (!enc_train.y) throw SchemaMismatch("regression benchmark needs a response column");
        auto [ttest, stest] = read_dataset(cfg.test_csv, cfg.schema_path);
        auto enc_test = encode(ttest, stest);
        if (!enc_test.y) throw SchemaMismatch("test set lacks the response column");
        d.x_train = std::move(enc_train.x);
        d.y_train = std::move(*enc_train.y);
        d.x_test = std::move(enc_test.x);
        d.y_test = std::move(*enc_test.y);
    } else {
        auto [t, s] = read_dataset(cfg.data_csv, cfg.schema_path);
        auto enc = encode(t, s);
        if (!enc.class_ids) throw SchemaMismatch("classification benchmark needs a class column");
        d.x_all = std::move(enc.x);
        d.class_ids = std::move(*enc.class_ids);
        d.class_levels = std::move(enc.class_levels);
    }
    return d;
}

// Standardization for network inputs computed from the original (not
// augmented) training rows; a constant column keeps scale 1 so centered
// values stay zero.
struct AnnScaler {
    RowVector mean;
    RowVector scale;

    static AnnScaler fit(const Matrix& x) {
        AnnScaler s;
        s.mean = x.colwise().mean();
        RowVector var = (x.rowwise() - s.mean).colwise().squaredNorm() /
                        static_cast<double>(x.rows() - 1);
        s.scale = var.cwiseSqrt();
        for (Index j = 0; j < s.scale.size(); ++j)
            if (!(s.scale(j) > 0.0)) s.scale(j) = 1.0;
        return s;
    }

    Matrix apply(const Matrix& x) const {
        return (x.rowwise() - mean).array().rowwise() / scale.array();
    }
};

struct RunPlan {
    int n_sets = 0;
    Index A = 0;
    int K = 0;
    int repeat = 0;
    std::uint64_t seed = 0;
};

inline EvalMetrics run_regression(const ExperimentConfig& cfg, const ExperimentData& d,
                                  const RunPlan& run) {
    Matrix x = d.x_train;
    Vector y = d.y_train;
    if (run.n_sets > 0) {
        AugmentOptions opt;
        opt.method = cfg.method;
        opt.A = run.A;
        opt.K = run.K;
        opt.n_sets = run.n_sets;
        opt.seed = derive_seed(run.seed, 2);
        opt.standardize = cfg.standardize_generation;
        opt.scale_scores = cfg.scale_scores;
        auto aug = augment(d.x_train, Targets::regression(d.y_train), opt);
        x = std::move(aug.x);
        y = std::move(aug.targets.y);
    }
    const AnnScaler scaler = AnnScaler::fit(d.x_train);
    const double y_center = d.y_train.mean();
    MlpSpec spec = MlpSpec::dense(x.cols(), cfg.hidden, LossKind::mse);
    spec.learning_rate = cfg.learning_rate;
    spec.epochs = cfg.epochs;
    spec.batch_size = cfg.batch_size;
    spec.seed = derive_seed(run.seed, 3);
    TrainResult tr = mlp_train(spec, scaler.apply(x), y.array() - y_center);
    return evaluate(tr.net, scaler.apply(d.x_test), d.y_test, Task::regression, y_center);
}

inline EvalMetrics run_classification(const ExperimentConfig& cfg, const ExperimentData& d,
                                      const RunPlan& run) {
    // stratified split: the same fraction drawn from every class
    SplitMix64 split_rng(derive_seed(run.seed, 1));
    std::vector<long> train_rows, test_rows;
    for (std::size_t c = 0; c < d.class_levels.size(); ++c) {
        std::vector<long> rows;
        for (std::size_t i = 0; i < d.class_ids.size(); ++i)
            if (d.class_ids[i] == static_cast<int>(c)) rows.push_back(static_cast<long>(i));
        shuffle(rows, split_rng);
        const std::size_t n_train =
            static_cast<std::size_t>(cfg.train_fraction * static_cast<double>(rows.size()));
        for (std::size_t i = 0; i < rows.size(); ++i)
            (i < n_train ? train_rows : test_rows).push_back(rows[i]);
    }
    std::sort(train_rows.begin(), train_rows.end());
    std::sort(test_rows.begin(), test_rows.end());

    Matrix x_train = detail::take_rows(d.x_all, train_rows);
    Matrix x_test = detail::take_rows(d.x_all, test_rows);
    std::vector<int> ids_train, ids_test;
    for (long r : train_rows) ids_train.push_back(d.class_ids[static_cast<std::size_t>(r)]);
    for (long r : test_rows) ids_test.push_back(d.class_ids[static_cast<std::size_t>(r)]);

    Matrix x = x_train;
    std::vector<int> ids = ids_train;
    if (run.n_sets > 0) {
        AugmentOptions opt;
        opt.method = cfg.method;
        opt.A = run.A;
        opt.K = run.K;
        opt.n_sets = run.n_sets;
        opt.seed = derive_seed(run.seed, 2);
        opt.standardize = cfg.standardize_generation;
        opt.scale_scores = cfg.scale_scores;
        opt.per_class = cfg.per_class;
        auto aug = augment(x_train, Targets::classification(ids_train, d.class_levels), opt);
        x = std::move(aug.x);
        ids = std::move(aug.targets.class_ids);
    }
    const AnnScaler scaler = AnnScaler::fit(x_train);
    Vector y(static_cast<Index>(ids.size()));
    for (std::size_t i = 0; i < ids.size(); ++i) y(static_cast<Index>(i)) = ids[i];
    Vector y_test(static_cast<Index>(ids_test.size()));
    for (std::size_t i = 0; i < ids_test.size(); ++i) y_test(static_cast<Index>(i)) = ids_test[i];

    MlpSpec spec = MlpSpec::dense(x.cols(), cfg.hidden, LossKind::bce);
    spec.learning_rate = cfg.learning_rate;
    spec.epochs = cfg.epochs;
    spec.batch_size = cfg.batch_size;
    spec.seed = derive_seed(run.seed, 3);
    TrainResult tr = mlp_train(spec, scaler.apply(x), y);
    return evaluate(tr.net, scaler.apply(x_test), y_test, Task::classification);
}

}  // namespace detail

// Expands the factorial grid (baseline runs once, not per A/K level), runs
// every cell x repeat with derived seeds, in parallel across runs. Each run
// is single-threaded, so results do not depend on the thread count.
inline std::vector<RunRecord> run_experiment(
    const ExperimentConfig& cfg, std::function<void(const RunRecord&)> on_result = {}) {
    const ExperimentData data = detail::load_experiment_data(cfg);

    struct Cell {
        int n_sets;
        Index A;
        int K;
    };
    std::vector<Cell> cells;
    bool baseline_added = false;
    for (int ns : cfg.n_sets) {
        if (ns == 0) {
            if (!baseline_added) cells.push_back({0, 0, 0});
            baseline_added = true;
            continue;
        }
        for (Index a : cfg.n_lv)
            for (int k : cfg.n_seg) cells.push_back({ns, a, k});
    }
    if (!baseline_added) cells.insert(cells.begin(), {0, 0, 0});

    std::vector<detail::RunPlan> plans;
    for (std::size_t ci = 0; ci < cells.size(); ++ci)
        for (int rep = 0; rep < cfg.repeats; ++rep) {
            detail::RunPlan p;
            p.n_sets = cells[ci].n_sets;
            p.A = cells[ci].A;
            p.K = cells[ci].K;
            p.repeat = rep;
            p.seed = derive_seed(derive_seed(cfg.seed, ci + 1), static_cast<std::uint64_t>(rep) + 1);
            plans.push_back(p);
        }

    std::vector<RunRecord> records(plans.size());
    std::atomic<std::size_t> next{0};
    std::mutex report_mutex;
    std::exception_ptr first_error;
    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= plans.size()) return;
            try {
                const auto& p = plans[i];
                RunRecord rec;
                rec.dataset = cfg.dataset;
                rec.method = p.n_sets == 0 ? "none" : to_string(cfg.method);
                rec.n_sets = p.n_sets;
                rec.A = p.A;
                rec.K = p.K;
                rec.lr = cfg.learning_rate;
                rec.repeat = p.repeat;
                rec.task = cfg.task;
                rec.metrics = cfg.task == Task::regression
                                  ? detail::run_regression(cfg, data, p)
                                  : detail::run_classification(cfg, data, p);
                records[i] = rec;
                if (on_result) {
                    std::lock_guard<std::mutex> lock(report_mutex);
                    on_result(rec);
                }
            } catch (...) {
                std::lock_guard<std::mutex> lock(report_mutex);
                if (!first_error) first_error = std::current_exception();
                next.store(plans.size());
                return;
            }
        }
    };
    int n_threads = cfg.threads > 0 ? cfg.threads
                                    : static_cast<int>(std::thread::hardware_concurrency());
    n_threads = std::max(1, std::min<int>(n_threads, static_cast<int>(plans.size())));
    if (n_threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    if (first_error) std::rethrow_exception(first_error);
    return records;
}

// Long-format results: dataset, method, n_sets, A, K, lr, repeat, metric, value.
inline void write_results_csv(const std::vector<RunRecord>& records, const std::string& path) {
    Table t;
    t.columns = {"dataset", "method", "n_sets", "A", "K", "lr", "repeat", "metric", "value"};
    for (const auto& r : records) {
        auto push = [&](const char* metric, double value) {
            t.rows.push_back({r.dataset, r.method, std::to_string(r.n_sets), std::to_string(r.A),
                              std::to_string(r.K), format_double(r.lr), std::to_string(r.repeat),
                              metric, format_double(value)});
        };
        if (r.task == Task::regression) {
            push("rmsep", r.metrics.rmsep);
            push("r2", r.metrics.r2);
        } else {
            push("accuracy", r.metrics.accuracy);
        }
    }
    write_csv(t, path);
}

inline double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    if (n == 0) return 0.0;
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// One line per grid cell and metric with the median over repeats, the
// comparison statistic of the benchmark.
inline std::string median_summary(const std::vector<RunRecord>& records) {
    std::map<std::string, std::vector<double>> groups;
    for (const auto& r : records) {
        auto add = [&](const char* metric, double value) {
            std::ostringstream key;
            key << r.dataset << " method=" << r.method << " n_sets=" << r.n_sets << " A=" << r.A
                << " K=" << r.K << " metric=" << metric;
            groups[key.str()].push_back(value);
        };
        if (r.task == Task::regression) {
            add("rmsep", r.metrics.rmsep);
            add("r2", r.metrics.r2);
        } else {
            add("accuracy", r.metrics.accuracy);
        }
    }
    std::ostringstream out;
    for (const auto& [key, values] : groups)
        out << key << " median=" << format_double(median(values)) << " n=" << values.size()
            << '\n';
    return out.str();
}

}  // namespace pcv
