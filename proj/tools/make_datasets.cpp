// Dataset tooling: produces the canonical CSVs consumed by the library.
//
//   synth    deterministic surrogate datasets whose documented summary
//            statistics (spectral eigenstructure, category counts, class
//            sizes) match the published descriptions of the Tecator and
//            Cleveland heart data
//   tecator  converts the StatLib Tecator archive file
//   heart    converts the UCI Cleveland processed data file
//
// The toolkit itself only ever reads the CSVs written here.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

#include "pcv/io.hpp"
#include "pcv/matrix.hpp"
#include "pcv/rng.hpp"
#include "pcv/schema.hpp"

using namespace pcv;

namespace {

std::vector<std::string> tecator_header() {
    std::vector<std::string> h;
    for (int j = 0; j < 100; ++j) h.push_back("x" + std::to_string(850 + 2 * j));
    h.push_back("fat");
    return h;
}

nlohmann::json tecator_schema_json() {
    DatasetSchema s;
    for (int j = 0; j < 100; ++j)
        s.columns.push_back({"x" + std::to_string(850 + 2 * j), ColumnKind::numeric,
                             ColumnRole::predictor, {}});
    s.columns.push_back({"fat", ColumnKind::numeric, ColumnRole::response, {}});
    return s.to_json();
}

void write_with_response(const Matrix& x, const Vector& y, const std::string& path) {
    Matrix full(x.rows(), x.cols() + 1);
    full.leftCols(x.cols()) = x;
    full.col(x.cols()) = y;
    write_matrix_csv(full, tecator_header(), path);
}

// Spectra-like surrogate. The leading five smooth components carry the
// documented eigenvalues (25.6, ... after column standardization, everything
// beyond the fifth below 1e-3); behind them sits a long structured tail of
// smooth minor components with log-decaying eigenvalues, the shape real
// spectra show, which keeps the per-component y-loadings stable across
// cross-validation folds. The response rides on the latent scores.
void synth_tecator(const std::string& dir, std::uint64_t seed) {
    const Index n_train = 170, n_test = 45, j_vars = 100;
    const Index n_comp = 60;
    SplitMix64 rng(derive_seed(seed, 1));

    Matrix loadings(j_vars, n_comp);
    for (Index j = 0; j < j_vars; ++j) {
        const double x = static_cast<double>(j) / static_cast<double>(j_vars - 1);
        loadings(j, 0) = std::exp(-(x - 0.45) * (x - 0.45) / 0.50);
        loadings(j, 1) = x - 0.5;
        loadings(j, 2) = std::exp(-(x - 0.62) * (x - 0.62) / 0.020);
        loadings(j, 3) = std::exp(-(x - 0.38) * (x - 0.38) / 0.012);
        loadings(j, 4) = std::sin(6.2831853071795865 * x) * (0.6 + x);
    }
    // minor components: random low-order Fourier curves
    for (Index a = 5; a < n_comp; ++a) {
        double c[6];
        for (double& v : c) v = rng.normal();
        for (Index j = 0; j < j_vars; ++j) {
            const double x = static_cast<double>(j) / static_cast<double>(j_vars - 1);
            double v = 0.0;
            for (int m = 0; m < 6; ++m)
                v += c[m] * std::sin(3.141592653589793 * (m + 1) * (x + 0.05 * (double)(a % 7)));
            loadings(j, a) = v;
        }
    }
    Eigen::HouseholderQR<Matrix> qr(loadings);
    Matrix basis = qr.householderQ() * Matrix::Identity(j_vars, n_comp);

    Matrix u(n_train, n_comp);
    for (Index i = 0; i < u.size(); ++i) u.data()[i] = rng.normal();
    u.rowwise() -= u.colwise().mean();
    Eigen::HouseholderQR<Matrix> qru(u);
    u = qru.householderQ() * Matrix::Identity(n_train, n_comp);

    // five strong directions with a spread ladder (the whole trace lives
    // here) and a log-decaying structured tail below the 1e-3 line
    Vector lam(n_comp);
    lam.head(5) << 25.6, 23.0, 20.0, 17.0, 14.35;
    for (Index a = 5; a < n_comp; ++a)  // 3.5e-4 down to 1e-7, log-spaced
        lam(a) = 3.5e-4 * std::pow(1e-7 / 3.5e-4, static_cast<double>(a - 5) /
                                                      static_cast<double>(n_comp - 6));
    Matrix z = u * (lam * static_cast<double>(n_train - 1)).cwiseSqrt().asDiagonal() *
               basis.transpose();
    for (Index i = 0; i < z.size(); ++i) z.data()[i] += 1e-5 * rng.normal();

    // alternate between the target singular spectrum and unit column scale
    for (int it = 0; it < 400; ++it) {
        z.rowwise() -= z.colwise().mean().eval();
        RowVector sd =
            (z.colwise().squaredNorm() / static_cast<double>(n_train - 1)).cwiseSqrt();
        z.array().rowwise() /= sd.array();
        Eigen::BDCSVD<Matrix> svd(z, Eigen::ComputeThinU | Eigen::ComputeThinV);
        Vector s = svd.singularValues();
        Vector ev = s.array().square() / static_cast<double>(n_train - 1);
        if (std::abs(ev(0) - 25.6) < 0.05 && ev(5) < 3.8e-4 && it > 2) break;
        Vector target = s;
        for (Index a = 0; a < n_comp; ++a) target(a) = std::sqrt(lam(a) * (n_train - 1));
        const double cap = std::sqrt(1e-8 * (n_train - 1));
        for (Index a = n_comp; a < s.size(); ++a) target(a) = std::min(s(a), cap);
        z = svd.matrixU() * target.asDiagonal() * svd.matrixV().transpose();
    }

    // latent coordinates of the calibrated block, unit variance per column
    Eigen::BDCSVD<Matrix> svd(z, Eigen::ComputeThinU | Eigen::ComputeThinV);
    Matrix scores_train =
        svd.matrixU().leftCols(n_comp) * std::sqrt(static_cast<double>(n_train));
    Matrix v_final = svd.matrixV().leftCols(n_comp);
    Vector sigma_final = svd.singularValues().head(n_comp);

    Matrix scores_test(n_test, n_comp);
    for (Index i = 0; i < scores_test.size(); ++i) scores_test.data()[i] = rng.normal();
    Matrix z_test = scores_test *
                        (sigma_final / std::sqrt(static_cast<double>(n_train))).asDiagonal() *
                        v_final.transpose();
    for (Index i = 0; i < z_test.size(); ++i) z_test.data()[i] += 1e-5 * rng.normal();

    // response: a stepped loading ladder over the strong components, small
    // uniform loadings along the structured tail, and high-frequency
    // nonlinear terms. The oscillatory parts are what keeps a small-step
    // optimizer busy, while their linear projections onto the latent
    // directions are negligible, so the per-component PLS y-loadings stay
    // fold-stable. Measurement noise sits far below the smallest loading.
    auto make_y = [&](const Matrix& t) {
        Vector y(t.rows());
        for (Index i = 0; i < t.rows(); ++i) {
            double v = 20.0 + 5.60 * t(i, 0) + 4.14 * t(i, 1) + 3.07 * t(i, 2) +
                       2.27 * t(i, 3) + 1.68 * t(i, 4);
            for (Index a = 5; a < n_comp; ++a) v += 0.5 * t(i, a);
            v += 3.0 * std::sin(3.0 * t(i, 0)) + 2.0 * std::sin(2.2 * t(i, 1) + 1.0);
            v += 1e-4 * rng.normal();
            y(i) = std::min(60.0, std::max(0.2, v));
        }
        return y;
    };
    Vector y_train = make_y(scores_train);
    Vector y_test = make_y(scores_test);

    // back to absorbance-like units: smooth baseline and per-channel scale
    RowVector baseline(j_vars), scale(j_vars);
    for (Index j = 0; j < j_vars; ++j) {
        const double x = static_cast<double>(j) / static_cast<double>(j_vars - 1);
        baseline(j) = 2.8 + 0.5 * std::exp(-(x - 0.55) * (x - 0.55) / 0.09);
        scale(j) = 0.30 + 0.12 * std::sin(3.1415926 * x);
    }
    Matrix x_train = (z.array().rowwise() * scale.array()).rowwise() + baseline.array();
    Matrix x_test = (z_test.array().rowwise() * scale.array()).rowwise() + baseline.array();

    std::filesystem::create_directories(dir);
    write_with_response(x_train, y_train, dir + "/tecator_train.csv");
    write_with_response(x_test, y_test, dir + "/tecator_test.csv");
    std::ofstream schema(dir + "/tecator.schema.json");
    schema << tecator_schema_json().dump(2) << '\n';
    std::cout << "wrote " << dir << "/tecator_{train,test}.csv (170/45 rows, 100 channels)\n";
}

struct HeartColumn {
    std::string name;
    std::vector<std::string> levels;        // declared (schema) order
    std::vector<long> counts;               // per level, same order
    std::vector<std::size_t> severity;      // level indices from benign to severe
    double association;                     // weight of the latent severity score
};

nlohmann::json heart_schema_json() {
    DatasetSchema s;
    s.columns.push_back({"age", ColumnKind::numeric, ColumnRole::predictor, {}});
    s.columns.push_back({"sex", ColumnKind::categorical, ColumnRole::predictor, {"male", "female"}});
    s.columns.push_back({"cp", ColumnKind::categorical, ColumnRole::predictor,
                         {"abnang", "angina", "asympt", "notang"}});
    s.columns.push_back({"restbp", ColumnKind::numeric, ColumnRole::predictor, {}});
    s.columns.push_back({"chol", ColumnKind::numeric, ColumnRole::predictor, {}});
    s.columns.push_back(
        {"sugar", ColumnKind::categorical, ColumnRole::predictor, {"<120", ">=120"}});
    s.columns.push_back(
        {"restecg", ColumnKind::categorical, ColumnRole::predictor, {"hyper", "normal"}});
    s.columns.push_back({"maxhr", ColumnKind::numeric, ColumnRole::predictor, {}});
    s.columns.push_back(
        {"exang", ColumnKind::categorical, ColumnRole::predictor, {"true", "false"}});
    s.columns.push_back({"oldpeak", ColumnKind::numeric, ColumnRole::predictor, {}});
    s.columns.push_back(
        {"slope", ColumnKind::categorical, ColumnRole::predictor, {"down", "flat", "up"}});
    s.columns.push_back({"vessels", ColumnKind::numeric, ColumnRole::predictor, {}});
    s.columns.push_back(
        {"thal", ColumnKind::categorical, ColumnRole::predictor, {"fix", "normal", "rev"}});
    s.columns.push_back(
        {"class", ColumnKind::categorical, ColumnRole::class_label, {"healthy", "sick"}});
    return s.to_json();
}

// Mixed-data surrogate with the published marginals: 292 records, class
// split 159/133, exact per-level counts for every categorical column, and
// a shared latent severity score that ties predictors to the class.
void synth_heart(const std::string& dir, std::uint64_t seed) {
    const long n = 292;
    SplitMix64 rng(derive_seed(seed, 2));

    std::vector<double> z(n);
    for (auto& v : z) v = rng.normal();

    // class: the 133 highest severity + noise become 'sick'
    std::vector<long> order(n);
    std::iota(order.begin(), order.end(), 0L);
    std::vector<double> class_score(n);
    for (long i = 0; i < n; ++i) class_score[i] = z[i] + 0.40 * rng.normal();
    std::sort(order.begin(), order.end(),
              [&](long a, long b) { return class_score[a] > class_score[b]; });
    std::vector<int> sick(n, 0);
    for (long i = 0; i < 133; ++i) sick[order[i]] = 1;

    auto numeric_column = [&](double center, double spread, double assoc, double lo, double hi,
                              int decimals) {
        std::vector<double> col(n);
        for (long i = 0; i < n; ++i) {
            double v = center + spread * (assoc * z[i] + std::sqrt(1.0 - assoc * assoc) * rng.normal());
            v = std::min(hi, std::max(lo, v));
            const double f = std::pow(10.0, decimals);
            col[i] = std::round(v * f) / f;
        }
        return col;
    };
    const auto age = numeric_column(54.5, 9.0, 0.35, 29, 77, 0);
    const auto restbp = numeric_column(131.0, 17.0, 0.30, 94, 200, 0);
    const auto chol = numeric_column(249.0, 51.0, 0.20, 126, 564, 0);
    const auto maxhr = numeric_column(150.0, 22.0, -0.55, 71, 202, 0);
    const auto oldpeak = numeric_column(1.05, 1.10, 0.55, 0, 6.2, 1);

    // exact-count, severity-ordered block assignment
    auto assign_levels = [&](const HeartColumn& spec) {
        std::vector<double> score(n);
        for (long i = 0; i < n; ++i)
            score[i] = spec.association * z[i] +
                       std::sqrt(1.0 - spec.association * spec.association) * rng.normal();
        std::vector<long> idx(n);
        std::iota(idx.begin(), idx.end(), 0L);
        std::sort(idx.begin(), idx.end(), [&](long a, long b) { return score[a] < score[b]; });
        std::vector<int> level(n);
        long pos = 0;
        for (std::size_t s = 0; s < spec.severity.size(); ++s) {
            const std::size_t lev = spec.severity[s];
            for (long c = 0; c < spec.counts[lev]; ++c) level[idx[pos++]] = static_cast<int>(lev);
        }
        // every (class, level) cell needs enough members that any 75% subset
        // keeps the dummy columns away from zero variance
        for (std::size_t lev = 0; lev < spec.levels.size(); ++lev) {
            const long floor_count =
                std::min<long>(8, spec.counts[lev] / 2);
            for (int cls = 0; cls < 2; ++cls) {
                auto count_cell = [&] {
                    long c = 0;
                    for (long i = 0; i < n; ++i)
                        if (sick[i] == cls && level[i] == static_cast<int>(lev)) ++c;
                    return c;
                };
                while (count_cell() < floor_count) {
                    // swap level labels between a row of this class in the
                    // most common level and a row of the other class here
                    long donor = -1, recipient = -1;
                    std::vector<long> counts_by_level(spec.levels.size(), 0);
                    for (long i = 0; i < n; ++i)
                        if (sick[i] == cls) ++counts_by_level[static_cast<std::size_t>(level[i])];
                    std::size_t big = 0;
                    for (std::size_t l2 = 1; l2 < counts_by_level.size(); ++l2)
                        if (counts_by_level[l2] > counts_by_level[big]) big = l2;
                    std::vector<long> donors, recipients;
                    for (long i = 0; i < n; ++i) {
                        if (sick[i] == cls && level[i] == static_cast<int>(big)) donors.push_back(i);
                        if (sick[i] != cls && level[i] == static_cast<int>(lev))
                            recipients.push_back(i);
                    }
                    if (donors.empty() || recipients.empty()) break;
                    donor = donors[rng.below(donors.size())];
                    recipient = recipients[rng.below(recipients.size())];
                    std::swap(level[donor], level[recipient]);
                }
            }
        }
        return level;
    };

    const HeartColumn sex{"sex", {"male", "female"}, {200, 92}, {1, 0}, 0.30};
    const HeartColumn cp{"cp", {"abnang", "angina", "asympt", "notang"}, {49, 23, 138, 82},
                         {3, 0, 1, 2}, 0.55};
    const HeartColumn sugar{"sugar", {"<120", ">=120"}, {43, 249}, {0, 1}, 0.15};
    const HeartColumn restecg{"restecg", {"hyper", "normal"}, {145, 147}, {1, 0}, 0.35};
    const HeartColumn exang{"exang", {"true", "false"}, {95, 197}, {1, 0}, 0.50};
    const HeartColumn slope{"slope", {"down", "flat", "up"}, {20, 134, 138}, {2, 1, 0}, 0.45};
    const HeartColumn thal{"thal", {"fix", "normal", "rev"}, {17, 161, 114}, {1, 0, 2}, 0.55};
    const HeartColumn vessels{"vessels", {"0", "1", "2", "3"}, {176, 65, 38, 13}, {0, 1, 2, 3},
                              0.50};

    const auto sex_l = assign_levels(sex);
    const auto cp_l = assign_levels(cp);
    const auto sugar_l = assign_levels(sugar);
    const auto restecg_l = assign_levels(restecg);
    const auto exang_l = assign_levels(exang);
    const auto slope_l = assign_levels(slope);
    const auto thal_l = assign_levels(thal);
    const auto vessels_l = assign_levels(vessels);

    Table t;
    t.columns = {"age",   "sex",     "cp",    "restbp", "chol",    "sugar", "restecg",
                 "maxhr", "exang",   "oldpeak", "slope", "vessels", "thal",  "class"};
    for (long i = 0; i < n; ++i) {
        std::vector<std::string> row;
        row.push_back(format_double(age[i]));
        row.push_back(sex.levels[static_cast<std::size_t>(sex_l[i])]);
        row.push_back(cp.levels[static_cast<std::size_t>(cp_l[i])]);
        row.push_back(format_double(restbp[i]));
        row.push_back(format_double(chol[i]));
        row.push_back(sugar.levels[static_cast<std::size_t>(sugar_l[i])]);
        row.push_back(restecg.levels[static_cast<std::size_t>(restecg_l[i])]);
        row.push_back(format_double(maxhr[i]));
        row.push_back(exang.levels[static_cast<std::size_t>(exang_l[i])]);
        row.push_back(format_double(oldpeak[i]));
        row.push_back(slope.levels[static_cast<std::size_t>(slope_l[i])]);
        row.push_back(vessels.levels[static_cast<std::size_t>(vessels_l[i])]);
        row.push_back(thal.levels[static_cast<std::size_t>(thal_l[i])]);
        row.push_back(sick[i] ? "sick" : "healthy");
        t.rows.push_back(std::move(row));
    }
    std::filesystem::create_directories(dir);
    write_csv(t, dir + "/heart.csv");
    std::ofstream schema(dir + "/heart.schema.json");
    schema << heart_schema_json().dump(2) << '\n';
    std::cout << "wrote " << dir << "/heart.csv (292 rows, 13 predictors + class)\n";
}

// StatLib Tecator archive: whitespace-separated floats, 125 values per
// sample (100 absorbance channels, 22 principal components, moisture, fat,
// protein). The first 215 samples are the C/M/T subsets; the first 170
// become the training set and the remaining 45 the test set.
int convert_tecator(const std::string& raw, const std::string& dir) {
    std::ifstream in(raw);
    if (!in) {
        std::cerr << "cannot open " << raw << "\n";
        return 1;
    }
    std::vector<double> values;
    double v;
    while (in >> v) values.push_back(v);
    const std::size_t per_sample = 125;
    if (values.size() < 215 * per_sample) {
        std::cerr << "expected at least " << 215 * per_sample << " values, found "
                  << values.size() << "\n";
        return 1;
    }
    Matrix x(215, 100);
    Vector y(215);
    for (long i = 0; i < 215; ++i) {
        for (long j = 0; j < 100; ++j)
            x(i, j) = values[static_cast<std::size_t>(i) * per_sample + static_cast<std::size_t>(j)];
        y(i) = values[static_cast<std::size_t>(i) * per_sample + 123];  // moisture, fat, protein
    }
    std::filesystem::create_directories(dir);
    write_with_response(x.topRows(170), y.head(170), dir + "/tecator_train.csv");
    write_with_response(x.bottomRows(45), y.tail(45), dir + "/tecator_test.csv");
    std::ofstream schema(dir + "/tecator.schema.json");
    schema << tecator_schema_json().dump(2) << '\n';
    std::cout << "converted " << raw << "\n";
    return 0;
}

// UCI processed.cleveland.data: 14 comma-separated fields per row, '?' for
// missing values (such rows are dropped), class collapsed to healthy/sick.
int convert_heart(const std::string& raw, const std::string& dir) {
    std::ifstream in(raw);
    if (!in) {
        std::cerr << "cannot open " << raw << "\n";
        return 1;
    }
    Table t;
    t.columns = {"age",   "sex",   "cp",      "restbp", "chol",    "sugar", "restecg",
                 "maxhr", "exang", "oldpeak", "slope",  "vessels", "thal",  "class"};
    std::string line;
    long dropped = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> f;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) f.push_back(cell);
        if (f.size() != 14) continue;
        bool missing = false;
        for (const auto& c : f) missing = missing || c.find('?') != std::string::npos;
        if (missing) {
            ++dropped;
            continue;
        }
        auto num = [&](const std::string& s) { return *parse_double(s); };
        std::vector<std::string> row;
        row.push_back(format_double(num(f[0])));
        row.push_back(num(f[1]) > 0.5 ? "male" : "female");
        const int cp = static_cast<int>(num(f[2]));
        row.push_back(cp == 1 ? "angina" : cp == 2 ? "abnang" : cp == 3 ? "notang" : "asympt");
        row.push_back(format_double(num(f[3])));
        row.push_back(format_double(num(f[4])));
        row.push_back(num(f[5]) > 0.5 ? ">=120" : "<120");
        row.push_back(num(f[6]) < 0.5 ? "normal" : "hyper");
        row.push_back(format_double(num(f[7])));
        row.push_back(num(f[8]) > 0.5 ? "true" : "false");
        row.push_back(format_double(num(f[9])));
        const int slope = static_cast<int>(num(f[10]));
        row.push_back(slope == 1 ? "up" : slope == 2 ? "flat" : "down");
        row.push_back(format_double(num(f[11])));
        const int thal = static_cast<int>(num(f[12]));
        row.push_back(thal == 6 ? "fix" : thal == 7 ? "rev" : "normal");
        row.push_back(num(f[13]) > 0.5 ? "sick" : "healthy");
        t.rows.push_back(std::move(row));
    }
    if (t.rows.empty()) {
        std::cerr << "no usable rows in " << raw << "\n";
        return 1;
    }
    std::filesystem::create_directories(dir);
    write_csv(t, dir + "/heart.csv");
    std::ofstream schema(dir + "/heart.schema.json");
    schema << heart_schema_json().dump(2) << '\n';
    std::cout << "converted " << raw << " (" << t.rows.size() << " rows, " << dropped
              << " dropped)\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"dataset preparation for the PCV toolkit"};
    app.require_subcommand(1);

    std::string out = "data";
    std::uint64_t seed = 20240801;
    auto* synth = app.add_subcommand("synth", "write surrogate tecator/heart datasets");
    synth->add_option("--out", out, "output directory");
    synth->add_option("--seed", seed, "generator seed");

    std::string tecator_raw, tecator_out = "data";
    auto* tec = app.add_subcommand("tecator", "convert the StatLib tecator file");
    tec->add_option("--raw", tecator_raw, "raw archive file")->required();
    tec->add_option("--out", tecator_out, "output directory");

    std::string heart_raw, heart_out = "data";
    auto* hea = app.add_subcommand("heart", "convert UCI processed.cleveland.data");
    hea->add_option("--raw", heart_raw, "raw data file")->required();
    hea->add_option("--out", heart_out, "output directory");

    CLI11_PARSE(app, argc, argv);

    try {
        if (synth->parsed()) {
            synth_tecator(out, seed);
            synth_heart(out, seed);
            return 0;
        }
        if (tec->parsed()) return convert_tecator(tecator_raw, tecator_out);
        if (hea->parsed()) return convert_heart(heart_raw, heart_out);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
