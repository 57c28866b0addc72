// Command line for the PCV toolkit.
//
//   pcv generate   augment a dataset with PV-sets
//   pcv diagnose   verify the Procrustean rules of a generated set
//   pcv benchmark  run a train/test experiment grid from a config file
//
// Exit codes: 0 success, 1 runtime failure, 2 invalid arguments or shapes,
// 3 rule violation (diagnose).

#include <CLI11.hpp>

#include <iostream>

#include "pcv/pcv.hpp"

using namespace pcv;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;
constexpr int kExitRuleFail = 3;

struct GenerateArgs {
    std::string data;
    std::string schema;
    std::string method = "svd";
    long nlv = 0;
    int nseg = 4;
    int nsets = 1;
    std::uint64_t seed = 0;
    bool standardize = false;
    bool scale_scores = true;
    bool per_class = false;
    std::string scheme = "random";
    int threads = 1;
    std::string out;
};

Targets targets_from_encoded(const EncodedTable& enc) {
    if (enc.y) return Targets::regression(*enc.y);
    if (enc.class_ids) return Targets::classification(*enc.class_ids, enc.class_levels);
    return Targets::none();
}

int cmd_generate(const GenerateArgs& a) {
    Method method;
    try {
        method = method_from_string(a.method);
    } catch (const ValidationError&) {
        std::cerr << "error: --method must be svd or pls\n";
        return kExitUsage;
    }
    if (a.nlv < 1) {
        std::cerr << "error: --nlv must be at least 1\n";
        return kExitUsage;
    }
    if (a.nsets < 0) {
        std::cerr << "error: --nsets must be nonnegative\n";
        return kExitUsage;
    }
    SplitScheme scheme;
    try {
        scheme = split_scheme_from_string(a.scheme);
    } catch (const ValidationError&) {
        std::cerr << "error: --scheme must be random or venetian\n";
        return kExitUsage;
    }

    Table table;
    DatasetSchema schema;
    EncodedTable enc;
    try {
        std::tie(table, schema) = read_dataset(a.data, a.schema);
        enc = encode(table, schema);
    } catch (const ValidationError& e) {
        std::cerr << "error: --data/--schema: " << e.what() << "\n";
        return kExitUsage;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    }

    if (a.nseg < 2 || a.nseg > enc.x.rows()) {
        std::cerr << "error: --nseg " << a.nseg << " invalid for " << enc.x.rows() << " rows\n";
        return kExitUsage;
    }
    if (a.nlv > std::min(enc.x.rows(), enc.x.cols())) {
        std::cerr << "error: --nlv " << a.nlv << " exceeds the data rank bound\n";
        return kExitUsage;
    }
    const Targets targets = targets_from_encoded(enc);
    if (method == Method::pls && targets.task == Task::none) {
        std::cerr << "error: --method pls needs a response or class column in --schema\n";
        return kExitUsage;
    }
    if (a.per_class && targets.task != Task::classification) {
        std::cerr << "error: --per-class needs a class column in --schema\n";
        return kExitUsage;
    }
    if (a.per_class && method != Method::svd) {
        std::cerr << "error: --per-class applies to --method svd only\n";
        return kExitUsage;
    }

    AugmentOptions opt;
    opt.method = method;
    opt.A = a.nlv;
    opt.K = a.nseg;
    opt.n_sets = a.nsets;
    opt.seed = a.seed;
    opt.scheme = scheme;
    opt.standardize = a.standardize;
    opt.scale_scores = a.scale_scores;
    opt.per_class = a.per_class;
    opt.threads = a.threads;

    AugmentedDataset aug;
    try {
        aug = augment(enc.x, targets, opt);
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    }

    for (std::size_t s = 0; s < aug.cratio.size(); ++s)
        for (const auto& [k, comp] : aug.cratio[s].exceeded)
            std::cerr << "warning: set " << s + 1 << ": |c_k/c| = "
                      << std::abs(aug.cratio[s].ratios(k, comp)) << " beyond " << opt.cratio_warn
                      << " at segment " << k + 1 << ", component " << comp + 1 << "\n";

    try {
        Table out_table = decode(aug.x, enc.colmap, DecodeMode::continuous);
        if (targets.task == Task::regression) {
            const auto& name = schema.columns[static_cast<std::size_t>(schema.response_index())].name;
            out_table.columns.push_back(name);
            for (long i = 0; i < out_table.n_rows(); ++i)
                out_table.rows[static_cast<std::size_t>(i)].push_back(
                    format_double(aug.targets.y(i)));
        } else if (targets.task == Task::classification) {
            const auto& name = schema.columns[static_cast<std::size_t>(schema.class_index())].name;
            out_table.columns.push_back(name);
            for (long i = 0; i < out_table.n_rows(); ++i)
                out_table.rows[static_cast<std::size_t>(i)].push_back(
                    aug.targets.class_levels[static_cast<std::size_t>(
                        aug.targets.class_ids[static_cast<std::size_t>(i)])]);
        }
        write_csv(out_table, a.out);

        nlohmann::json meta;
        meta["tool_version"] = version;
        meta["source"] = a.data;
        meta["method"] = to_string(method);
        meta["n_lv"] = a.nlv;
        meta["n_seg"] = a.nseg;
        meta["n_sets"] = a.nsets;
        meta["seed"] = a.seed;
        meta["set_seeds"] = aug.set_seeds;
        meta["scheme"] = a.scheme;
        meta["standardize"] = a.standardize;
        meta["scale_scores"] = a.scale_scores;
        meta["per_class"] = a.per_class;
        meta["source_rows"] = enc.x.rows();
        meta["predictor_columns"] = enc.x.cols();
        if (!aug.cratio.empty()) {
            double worst = 0;
            for (const auto& r : aug.cratio) worst = std::max(worst, r.max_abs);
            meta["cratio_max"] = worst;
        }
        write_sidecar(a.out, meta);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
    std::cout << "wrote " << a.out << " (" << (aug.x.rows()) << " rows) and "
              << sidecar_path(a.out) << "\n";
    return kExitOk;
}

struct DiagnoseArgs {
    std::string data;
    std::string schema;
    std::string pvset;
    std::string method = "svd";
    long nlv = 0;
    int nseg = 0;
    std::uint64_t seed = 0;
    bool seed_given = false;
    std::string plan_path;
    std::string scheme = "random";
    bool standardize = false;
    bool scale_scores = true;
    int set_index = -1;
    std::string out;
};

int cmd_diagnose(const DiagnoseArgs& a) {
    Method method;
    try {
        method = method_from_string(a.method);
    } catch (const ValidationError&) {
        std::cerr << "error: --method must be svd or pls\n";
        return kExitUsage;
    }
    if (a.nlv < 1) {
        std::cerr << "error: --nlv must be at least 1\n";
        return kExitUsage;
    }
    if (a.plan_path.empty() && !a.seed_given) {
        std::cerr << "error: either --plan or --seed (with --nseg) is required\n";
        return kExitUsage;
    }

    try {
        auto [table, schema] = read_dataset(a.data, a.schema);
        EncodedTable enc = encode(table, schema);
        const long rows = enc.x.rows();

        // the PV file carries the encoded predictor columns by name
        Table pv_table = read_csv(a.pvset);
        std::vector<long> pv_cols;
        for (const auto& col : enc.colmap) {
            long found = -1;
            for (long j = 0; j < pv_table.n_cols(); ++j)
                if (pv_table.columns[static_cast<std::size_t>(j)] == col.encoded_name) found = j;
            if (found < 0) throw ShapeMismatch("PV file lacks column '" + col.encoded_name + "'");
            pv_cols.push_back(found);
        }
        long pv_rows = pv_table.n_rows();
        long block = -1;
        if (pv_rows == rows) {
            block = 0;
        } else if (pv_rows % rows == 0) {
            if (a.set_index < 1) {
                std::cerr << "error: stacked PV file (" << pv_rows / rows
                          << " blocks): --set selects the PV block (1-based)\n";
                return kExitUsage;
            }
            if (static_cast<long>(a.set_index) >= pv_rows / rows) {
                std::cerr << "error: --set " << a.set_index << " out of range\n";
                return kExitUsage;
            }
            block = a.set_index;
        } else {
            throw ShapeMismatch("PV file has " + std::to_string(pv_rows) +
                                " rows, the source has " + std::to_string(rows));
        }
        Matrix xpv(rows, enc.x.cols());
        for (long i = 0; i < rows; ++i)
            for (std::size_t j = 0; j < pv_cols.size(); ++j) {
                const auto& cell =
                    pv_table.rows[static_cast<std::size_t>(block * rows + i)]
                        [static_cast<std::size_t>(pv_cols[j])];
                auto v = parse_double(cell);
                if (!v) throw ParseError(block * rows + i + 2, pv_cols[j] + 1, "non-numeric cell");
                xpv(i, static_cast<Index>(j)) = *v;
            }

        SegmentPlan plan;
        if (!a.plan_path.empty()) {
            nlohmann::json j = read_json(a.plan_path);
            plan.K = j.at("K").get<int>();
            plan.seed = j.value("seed", 0ULL);
            plan.scheme = split_scheme_from_string(j.value("scheme", std::string("random")));
            plan.assignment = j.at("assignment").get<std::vector<int>>();
            if (plan.rows() != rows) throw ShapeMismatch("plan does not cover the data rows");
        } else {
            if (a.nseg < 2) {
                std::cerr << "error: --nseg must accompany --seed\n";
                return kExitUsage;
            }
            plan = make_splits(rows, a.nseg, a.seed, split_scheme_from_string(a.scheme));
        }

        RuleReport report;
        if (method == Method::svd) {
            report = check_rules_svd(enc.x, xpv, plan, a.nlv, a.standardize, a.scale_scores);
        } else {
            Vector y;
            if (enc.y) {
                y = *enc.y;
            } else if (enc.class_ids && enc.class_levels.size() == 2) {
                y.resize(rows);
                for (long i = 0; i < rows; ++i) y(i) = (*enc.class_ids)[static_cast<std::size_t>(i)];
            } else {
                std::cerr << "error: pls diagnosis needs a response or two-class column\n";
                return kExitUsage;
            }
            report = check_rules_pls(enc.x, y, xpv, plan, a.nlv, a.standardize);
        }

        const std::string text = report.to_json().dump(2);
        if (a.out.empty()) {
            std::cout << text << "\n";
        } else {
            std::ofstream f(a.out);
            f << text << "\n";
        }
        return report.pass ? kExitOk : kExitRuleFail;
    } catch (const ShapeMismatch& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
}

int cmd_benchmark(const std::string& config_path) {
    ExperimentConfig cfg;
    try {
        cfg = ExperimentConfig::from_json(read_json(config_path));
    } catch (const Error& e) {
        std::cerr << "error: --config: " << e.what() << "\n";
        return kExitUsage;
    }
    try {
        auto records = run_experiment(cfg, [](const RunRecord& r) {
            std::cout << r.dataset << " method=" << r.method << " n_sets=" << r.n_sets
                      << " A=" << r.A << " K=" << r.K << " repeat=" << r.repeat;
            if (r.task == Task::regression)
                std::cout << " rmsep=" << format_double(r.metrics.rmsep);
            else
                std::cout << " accuracy=" << format_double(r.metrics.accuracy);
            std::cout << std::endl;
        });
        if (!cfg.out_csv.empty()) write_results_csv(records, cfg.out_csv);
        const std::string summary = median_summary(records);
        std::cout << "\n" << summary;
        if (!cfg.out_summary.empty()) {
            std::ofstream f(cfg.out_summary);
            f << summary;
        }
        return kExitOk;
    } catch (const DivergedLoss& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Procrustes validation sets: generation, diagnostics, benchmarks"};
    app.require_subcommand(1);

    GenerateArgs g;
    auto* gen = app.add_subcommand("generate", "augment a dataset with PV-sets");
    gen->add_option("--data", g.data, "input csv")->required();
    gen->add_option("--schema", g.schema, "schema json (inferred when absent)");
    gen->add_option("--method", g.method, "svd | pls")->required();
    gen->add_option("--nlv", g.nlv, "number of latent variables A")->required();
    gen->add_option("--nseg", g.nseg, "number of cross-validation segments K");
    gen->add_option("--nsets", g.nsets, "number of PV-sets to generate")->required();
    gen->add_option("--seed", g.seed, "generation seed");
    gen->add_flag("--standardize", g.standardize, "standardize columns inside the generator");
    gen->add_option("--scale-scores", g.scale_scores,
                    "svd only: rescale scores by sigma/sigma_k (default 1)");
    gen->add_flag("--per-class", g.per_class, "svd classification: one model per class");
    gen->add_option("--scheme", g.scheme, "random | venetian");
    gen->add_option("--threads", g.threads, "parallel set generation (output is identical)");
    gen->add_option("--out", g.out, "output csv")->required();

    DiagnoseArgs d;
    auto* diag = app.add_subcommand("diagnose", "check the Procrustean rules of a PV-set");
    diag->add_option("--data", d.data, "original csv")->required();
    diag->add_option("--schema", d.schema, "schema json");
    diag->add_option("--pvset", d.pvset, "PV csv (file from generate, or a single set)")
        ->required();
    diag->add_option("--method", d.method, "svd | pls")->required();
    diag->add_option("--nlv", d.nlv, "number of latent variables A")->required();
    diag->add_option("--nseg", d.nseg, "segments used at generation");
    diag->add_option("--seed", d.seed, "plan seed used at generation")
        ->trigger_on_parse()
        ->each([&d](const std::string&) { d.seed_given = true; });
    diag->add_option("--plan", d.plan_path, "segment plan json (alternative to --seed)");
    diag->add_option("--scheme", d.scheme, "random | venetian");
    diag->add_flag("--standardize", d.standardize, "generation used --standardize");
    diag->add_option("--scale-scores", d.scale_scores, "generation used score scaling");
    diag->add_option("--set", d.set_index, "PV block to check in a stacked file (1-based)");
    diag->add_option("--out", d.out, "write the report json here");

    std::string config_path;
    auto* bench = app.add_subcommand("benchmark", "run an experiment grid");
    bench->add_option("--config", config_path, "experiment config json")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    }

    if (gen->parsed()) return cmd_generate(g);
    if (diag->parsed()) return cmd_diagnose(d);
    if (bench->parsed()) return cmd_benchmark(config_path);
    return kExitUsage;
}
