#include "bankgcn/commands.hpp"

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <iomanip>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "bankgcn/check_suite.hpp"
#include "bankgcn/checkpoint.hpp"

namespace bankgcn {

namespace fs = std::filesystem;
using nlohmann::json;

RunConfig resolve_config(const CommonOptions& options, const std::string& seed_key) {
    KeyValues kv;
    if (options.config) kv = read_key_values(*options.config);
    for (const auto& assignment : options.overrides) apply_override(kv, assignment);
    if (options.seed) kv[seed_key] = std::to_string(*options.seed);
    if (options.out) kv["output.dir"] = options.out->string();
    return load_run_config(kv);
}

unsigned thread_cap() {
    const char* env = std::getenv("BANKGCN_THREADS");
    if (!env || !*env) return 1;
    char* end = nullptr;
    const unsigned long v = std::strtoul(env, &end, 10);
    if (*end != '\0' || v == 0) throw ConfigError(std::string("BANKGCN_THREADS must be a positive integer, got '") +
                                                  env + "'");
    return static_cast<unsigned>(v);
}

namespace {

template <typename F>
int guarded(std::ostream& err, F&& body) {
    try {
        return body();
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const ParseError& e) {
        err << "parse error: " << e.what() << '\n';
        return kExitRuntime;
    } catch (const FormatError& e) {
        err << "format error: " << e.what() << '\n';
        return kExitRuntime;
    } catch (const DimensionError& e) {
        err << "shape error: " << e.what() << '\n';
        return kExitRuntime;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
}

ModelParams initial_model(const RunConfig& config, const Dataset& ds, std::mt19937_64& rng) {
    ModelSpec spec;
    spec.input_dim = ds.feature_dim();
    spec.widths = config.model.widths;
    spec.subspaces = config.model.subspaces;
    spec.order = config.model.order;
    spec.num_classes = ds.num_classes;
    spec.gamma = config.train.gamma;
    return config.model.frozen_lowpass ? frozen_lowpass_model(spec, rng) : init_model(spec, rng);
}

json history_json(const HistoryRecord& r) {
    return json{{"epoch", r.epoch},     {"train_loss", r.train_loss}, {"omega", r.omega},
                {"val_loss", r.val_loss}, {"val_acc", r.val_acc},       {"lr", r.lr},
                {"elapsed_s", r.elapsed_s}};
}

json confusion_json(const Evaluation& ev) {
    json rows = json::array();
    for (Index r = 0; r < ev.confusion.rows(); ++r) {
        json row = json::array();
        for (Index c = 0; c < ev.confusion.cols(); ++c) row.push_back(ev.confusion(r, c));
        rows.push_back(row);
    }
    return rows;
}

struct RunOutcome {
    bool ok = false;
    double test_acc = 0.0;
    std::string error;
};

void require_trainable(const Dataset& ds) {
    if (ds.graphs.empty()) throw ConfigError("dataset has no graphs");
    if (ds.num_classes < 2) throw ConfigError("dataset needs at least two classes");
}

}  // namespace

int cmd_train(const CommonOptions& options, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        const RunConfig config = resolve_config(options);
        const unsigned threads = thread_cap();
        const Dataset ds = load_dataset(config.dataset);
        require_trainable(ds);
        const std::vector<int> labels = labels_of(ds.graphs);

        // Splits are computed up front so a bad split fails before anything is written.
        std::vector<SplitIndices> splits;
        for (int r = 0; r < config.runs; ++r) {
            splits.push_back(stratified_split(labels, config.dataset.split, config.train.seed + r));
        }

        fs::create_directories(config.out_dir);
        write_file_atomic(config.out_dir / "config.txt", render_run_config(config));

        std::vector<RunOutcome> outcomes(static_cast<std::size_t>(config.runs));
        std::mutex log_mutex;
        std::atomic<int> next{0};
        auto worker = [&] {
            for (int r = next++; r < config.runs; r = next++) {
                const auto& split = splits[static_cast<std::size_t>(r)];
                const fs::path dir = config.out_dir / ("run" + std::to_string(r));
                std::vector<HistoryRecord> history;
                RunOutcome& outcome = outcomes[static_cast<std::size_t>(r)];
                auto flush_history = [&] {
                    std::string text;
                    for (const auto& rec : history) text += history_json(rec).dump() + "\n";
                    write_file_atomic(dir / "history.ndjson", text);
                };
                try {
                    fs::create_directories(dir);
                    const std::uint64_t seed = config.train.seed + static_cast<std::uint64_t>(r);
                    std::mt19937_64 rng(seed);
                    const ModelParams init = initial_model(config, ds, rng);
                    const auto train_set = select(ds.graphs, split.train);
                    const auto val_set = select(ds.graphs, split.val);
                    const auto test_set = select(ds.graphs, split.test);
                    TrainConfig tc = config.train;
                    tc.seed = seed;
                    const TrainResult result =
                        train(init, train_set, val_set, tc, [&](const HistoryRecord& rec) { history.push_back(rec); });
                    flush_history();
                    save_checkpoint(result.best_params, dir / "checkpoint.bgcn");
                    const Evaluation train_eval = evaluate(result.best_params, train_set);
                    const Evaluation test_eval = evaluate(result.best_params, test_set);
                    json record{{"run", r},
                                {"seed", seed},
                                {"best_epoch", result.best_epoch},
                                {"epochs", result.history.size()},
                                {"best_val_acc", result.best_val_acc},
                                {"best_val_loss", result.best_val_loss},
                                {"train_acc", train_eval.accuracy},
                                {"test_acc", test_eval.accuracy},
                                {"test_loss", test_eval.mean_loss},
                                {"omega", model_omega(result.best_params)},
                                {"confusion", confusion_json(test_eval)}};
                    write_file_atomic(dir / "result.json", record.dump(2) + "\n");
                    outcome.ok = true;
                    outcome.test_acc = test_eval.accuracy;
                    std::lock_guard lock(log_mutex);
                    out << "run " << r << ": test accuracy " << test_eval.accuracy << " (best epoch "
                        << result.best_epoch << ")\n";
                } catch (const std::exception& e) {
                    outcome.error = e.what();
                    try {
                        flush_history();
                    } catch (const std::exception&) {
                    }
                    std::lock_guard lock(log_mutex);
                    err << "run " << r << " failed: " << e.what() << '\n';
                }
            }
        };
        const unsigned workers = std::min<unsigned>(threads, static_cast<unsigned>(config.runs));
        if (workers <= 1) {
            worker();
        } else {
            std::vector<std::thread> pool;
            for (unsigned t = 0; t < workers; ++t) pool.emplace_back(worker);
            for (auto& t : pool) t.join();
        }

        std::vector<double> accs;
        json per_run = json::array();
        json failed = json::array();
        for (int r = 0; r < config.runs; ++r) {
            const auto& o = outcomes[static_cast<std::size_t>(r)];
            if (o.ok) {
                accs.push_back(o.test_acc);
                per_run.push_back(o.test_acc);
            } else {
                per_run.push_back(nullptr);
                failed.push_back({{"run", r}, {"error", o.error}});
            }
        }
        double mean = 0.0;
        for (double a : accs) mean += a;
        if (!accs.empty()) mean /= static_cast<double>(accs.size());
        double var = 0.0;
        for (double a : accs) var += (a - mean) * (a - mean);
        const double std_acc = accs.size() > 1 ? std::sqrt(var / static_cast<double>(accs.size() - 1)) : 0.0;
        json summary{{"dataset", ds.name},
                     {"runs", config.runs},
                     {"mean_acc", accs.empty() ? json(nullptr) : json(mean)},
                     {"std_acc", accs.empty() ? json(nullptr) : json(std_acc)},
                     {"per_run_acc", per_run}};
        if (!failed.empty()) summary["failed_runs"] = failed;
        write_file_atomic(config.out_dir / "summary.json", summary.dump(2) + "\n");
        out << "mean test accuracy " << mean << " +- " << std_acc << " over " << accs.size() << " run(s)\n";
        return failed.empty() ? kExitOk : kExitRuntime;
    });
}

int cmd_eval(const CommonOptions& options, const EvalOptions& eval, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        const RunConfig config = resolve_config(options);
        if (eval.split != "all" && eval.split != "train" && eval.split != "val" && eval.split != "test") {
            throw ConfigError("--split must be all, train, val or test");
        }
        if (eval.run < 0) throw ConfigError("--run must be non-negative");
        const ModelParams params = load_checkpoint(eval.checkpoint);
        const Dataset ds = load_dataset(config.dataset);
        if (ds.graphs.empty()) throw ConfigError("dataset has no graphs");
        if (ds.feature_dim() != params.input_dim()) {
            throw DimensionError("checkpoint expects node feature width " + std::to_string(params.input_dim()) +
                                 " but the dataset has width " + std::to_string(ds.feature_dim()));
        }
        if (ds.num_classes > params.num_classes()) {
            throw DimensionError("checkpoint predicts " + std::to_string(params.num_classes()) +
                                 " classes but the dataset has " + std::to_string(ds.num_classes));
        }
        std::vector<Graph> graphs = ds.graphs;
        if (eval.split != "all") {
            const SplitIndices split = stratified_split(labels_of(ds.graphs), config.dataset.split,
                                                        config.train.seed + static_cast<std::uint64_t>(eval.run));
            const auto& which = eval.split == "train" ? split.train : eval.split == "val" ? split.val : split.test;
            graphs = select(ds.graphs, which);
        }
        const Evaluation ev = evaluate(params, graphs);
        json report{{"split", eval.split},
                    {"graphs", graphs.size()},
                    {"accuracy", ev.accuracy},
                    {"mean_loss", ev.mean_loss},
                    {"confusion", confusion_json(ev)}};
        out << report.dump(2) << '\n';
        return kExitOk;
    });
}

int cmd_export_response(const CommonOptions& options, const ExportOptions& exp, std::ostream& out,
                        std::ostream& err) {
    return guarded(err, [&] {
        const RunConfig config = resolve_config(options);
        if (exp.points < 2) throw ConfigError("--points must be at least 2");
        if (exp.layer < 0) throw ConfigError("--layer must be non-negative");
        const ModelParams params = load_checkpoint(exp.checkpoint);
        if (static_cast<std::size_t>(exp.layer) >= params.layers.size()) {
            throw ConfigError("--layer " + std::to_string(exp.layer) + " out of range: checkpoint has " +
                              std::to_string(params.layers.size()) + " layers");
        }
        const BankLayerParams& layer = params.layers[static_cast<std::size_t>(exp.layer)];
        fs::create_directories(config.out_dir);

        std::vector<std::vector<ResponsePoint>> grids;
        for (const auto& f : layer.filters) grids.push_back(frequency_response_grid(f, exp.points));
        const std::string prefix = "layer" + std::to_string(exp.layer);
        auto number = [](std::ostringstream& ss, double v) { ss << std::setprecision(17) << v; };
        for (std::size_t p = 0; p < grids.size(); ++p) {
            std::ostringstream ss;
            ss << "lambda,response\n";
            for (const auto& pt : grids[p]) {
                number(ss, pt.lambda);
                ss << ',';
                number(ss, pt.response);
                ss << '\n';
            }
            write_file_atomic(config.out_dir / (prefix + "_filter" + std::to_string(p) + ".csv"), ss.str());
        }
        std::ostringstream all;
        all << "lambda";
        for (std::size_t p = 0; p < grids.size(); ++p) all << ",filter" << p;
        all << '\n';
        for (int i = 0; i < exp.points; ++i) {
            number(all, grids.front()[static_cast<std::size_t>(i)].lambda);
            for (const auto& grid : grids) {
                all << ',';
                number(all, grid[static_cast<std::size_t>(i)].response);
            }
            all << '\n';
        }
        write_file_atomic(config.out_dir / (prefix + "_filters.csv"), all.str());

        json report{{"layer", exp.layer},
                    {"filters", grids.size()},
                    {"points", exp.points},
                    {"layer_omega", diversity_penalty(layer.filters)},
                    {"model_omega", model_omega(params)}};
        out << report.dump(2) << '\n';
        return kExitOk;
    });
}

int cmd_check(const CommonOptions& options, bool inject_fault, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        CheckOptions check;
        check.seed = options.seed.value_or(0);
        check.inject_fault = inject_fault;
        const auto results = run_check_suite(check);
        out << format_check_table(results);
        bool ok = true;
        for (const auto& r : results) ok = ok && r.passed;
        out << (ok ? "all checks passed" : "some checks failed") << " (seed " << check.seed << ")\n";
        return ok ? kExitOk : kExitCheckFailed;
    });
}

int cmd_gen_synthetic(const CommonOptions& options, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        RunConfig config = resolve_config(options, "dataset.synthetic.seed");
        if (config.dataset.source != DatasetConfig::Source::Synthetic) {
            throw ConfigError("gen-synthetic needs dataset.source = synthetic");
        }
        const Dataset ds = load_dataset(config.dataset);
        const std::string name = config.dataset.tu_name.empty() ? "SYNTH" : config.dataset.tu_name;
        write_tu_dataset(ds, config.out_dir, name);
        out << "wrote " << ds.graphs.size() << " graphs as " << (config.out_dir / name).string() << "_*.txt\n";
        return kExitOk;
    });
}

int cmd_inspect_dataset(const CommonOptions& options, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        const RunConfig config = resolve_config(options);
        const Dataset ds = load_dataset(config.dataset);
        const DatasetStats st = dataset_stats(ds);
        std::vector<std::size_t> class_counts(static_cast<std::size_t>(ds.num_classes), 0);
        for (const auto& g : ds.graphs) ++class_counts[static_cast<std::size_t>(g.label())];

        json layers = json::array();
        Index d_in = ds.feature_dim();
        const int s_req = config.model.frozen_lowpass ? 1 : config.model.subspaces;
        for (Index width : config.model.widths) {
            const int s = config.model.frozen_lowpass ? 1 : effective_subspaces(d_in, width, s_req);
            layers.push_back(
                {{"input_dim", d_in},
                 {"output_dim", width},
                 {"subspaces", s},
                 {"order", config.model.order},
                 {"params_per_subspace_convention",
                  bank_layer_param_count(d_in, width, s, config.model.order, ParamConvention::PerSubspace)},
                 {"params_shared_order_convention",
                  bank_layer_param_count(d_in, width, s, config.model.order, ParamConvention::SharedOrder)}});
            d_in = width;
        }
        json model{{"layers", layers}};
        if (ds.num_classes >= 2 && ds.feature_dim() > 0) {
            std::mt19937_64 rng(config.train.seed);
            const ModelParams params = initial_model(config, ds, rng);
            model["total_params_per_subspace_convention"] = model_param_count(params, ParamConvention::PerSubspace);
            model["total_params_shared_order_convention"] = model_param_count(params, ParamConvention::SharedOrder);
        }
        model["note"] =
            "per-subspace counts every filter's K+1 coefficients; shared-order counts one set of K+1 per layer";

        json report{{"name", ds.name},
                    {"graphs", st.graphs},
                    {"classes", st.classes},
                    {"class_counts", class_counts},
                    {"class_values", ds.class_values},
                    {"mean_nodes", st.mean_nodes},
                    {"mean_edges", st.mean_edges},
                    {"feature_dim", st.feature_dim},
                    {"feature_kind", to_string(ds.feature_kind)},
                    {"label_channels", ds.label_channels},
                    {"attribute_channels", ds.attribute_channels},
                    {"warnings", ds.warnings},
                    {"model", model}};
        out << report.dump(2) << '\n';
        return kExitOk;
    });
}

}  // namespace bankgcn
