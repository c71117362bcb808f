#include "mbfs/harness/cli.hpp"

#include <cmath>
#include <algorithm>
#include <fstream>
#include <functional>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "mbfs/error.hpp"
#include "mbfs/harness/csv.hpp"
#include "mbfs/harness/experiments.hpp"
#include "mbfs/harness/ingest.hpp"
#include "mbfs/rng.hpp"
#include "mbfs/synthetic/gaussian.hpp"
#include "mbfs/version.hpp"

namespace mbfs::harness {
namespace {

using nlohmann::json;

struct Common {
    std::uint64_t seed = 0;
    std::string out;
    std::string config;
};

void add_common(CLI::App* sub, Common& c) {
    sub->add_option("--seed", c.seed, "Random seed");
    sub->add_option("--out", c.out, "Output path");
    sub->add_option("--config", c.config, "JSON file with option values; command-line flags take precedence");
}

// Fills options that were not given on the command line from the JSON
// config. Keys are long option names without dashes; '-' and '_' are
// interchangeable.
void apply_config(CLI::App* sub, const std::string& path) {
    if (path.empty()) return;
    std::ifstream in(path);
    if (!in) throw CLI::ValidationError("--config", "cannot open '" + path + "'");
    json cfg;
    try {
        in >> cfg;
    } catch (const json::exception& e) {
        throw CLI::ValidationError("--config", std::string("invalid JSON: ") + e.what());
    }
    if (!cfg.is_object()) throw CLI::ValidationError("--config", "config must be a JSON object");
    for (CLI::Option* opt : sub->get_options()) {
        if (opt->count() > 0 || opt->get_lnames().empty()) continue;
        const std::string name = opt->get_lnames().front();
        if (name == "config" || name == "help") continue;
        std::string underscored = name;
        std::replace(underscored.begin(), underscored.end(), '-', '_');
        const json* value = nullptr;
        if (cfg.contains(name)) {
            value = &cfg.at(name);
        } else if (cfg.contains(underscored)) {
            value = &cfg.at(underscored);
        }
        if (!value) continue;
        auto to_text = [](const json& v) { return v.is_string() ? v.get<std::string>() : v.dump(); };
        if (value->is_array()) {
            std::string joined;
            for (const auto& v : *value) joined += (joined.empty() ? "" : ",") + to_text(v);
            opt->add_result(joined);
        } else if (value->is_boolean()) {
            if (!value->get<bool>()) continue;
            opt->add_result("true");
        } else {
            opt->add_result(to_text(*value));
        }
        opt->run_callback();
    }
}

json envelope(const json& spec, const json& results) {
    return {{"spec", spec}, {"results", results}, {"version", kVersion}};
}

void write_text(const std::string& path, const std::string& text, std::ostream& fallback) {
    if (path.empty()) {
        fallback << text;
        return;
    }
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error(ErrorKind::invalid_argument, "cannot write '" + path + "'");
    f << text;
}

json load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::invalid_argument, "cannot open '" + path + "'");
    try {
        json j;
        in >> j;
        return j;
    } catch (const json::exception& e) {
        throw Error(ErrorKind::parse_error, path + ": " + e.what());
    }
}

synthetic::DagSpec load_dag(const std::string& path, double epsilon) {
    synthetic::DagSpec dag = path.empty() ? synthetic::default_dag_spec() : synthetic::dag_spec_from_json(load_json(path));
    dag.epsilon = epsilon;
    dag.validate();
    return dag;
}

mapper::MappingModel load_model(const std::string& path) {
    const json j = load_json(path);
    if (j.contains("results") && j.at("results").contains("model")) {
        return mapper::mapping_model_from_json(j.at("results").at("model"));
    }
    return mapper::mapping_model_from_json(j);
}

std::string to_csv(const Table& t) {
    std::ostringstream s;
    write_csv(s, t);
    return s.str();
}

// Options shared by every command that can fit maps.
struct TrainFlags {
    std::size_t map_dim = 1;
    std::vector<std::size_t> map_hidden{32, 32};
    std::vector<std::size_t> head_hidden{164, 164};
    std::string head = "gaussian";
    double lambda = 0.1;
    std::size_t iterations = 5000;
    std::size_t batch = 256;
    double lr = 1e-3;

    void add(CLI::App* sub) {
        sub->add_option("--map-dim", map_dim, "Dimension r of each feature map")->check(CLI::PositiveNumber);
        sub->add_option("--map-hidden", map_hidden, "Hidden widths of each map")->delimiter(',');
        sub->add_option("--head-hidden", head_hidden, "Hidden widths of the head")->delimiter(',');
        sub->add_option("--head", head, "Surrogate head")->check(CLI::IsMember({"gaussian", "bernoulli"}));
        sub->add_option("--lambda", lambda, "Regularization coefficient")->check(CLI::NonNegativeNumber);
        sub->add_option("--iterations", iterations, "Training iterations");
        sub->add_option("--batch", batch, "Batch size")->check(CLI::Range(2, 1 << 30));
        sub->add_option("--lr", lr, "Adam learning rate")->check(CLI::PositiveNumber);
    }
    MapTraining training(const Dataset& data, std::size_t delta) const {
        MapTraining t;
        t.shape.feature_dims = data.feature_dims();
        t.shape.map_dim = map_dim;
        t.shape.map_hidden = map_hidden;
        t.shape.head_hidden = head_hidden;
        t.shape.head_kind = mapper::head_kind_from_string(head);
        t.shape.delta = delta;
        t.train.lambda = lambda;
        t.train.iterations = iterations;
        t.train.batch_size = batch;
        t.train.delta = delta;
        t.train.adam.learning_rate = lr;
        return t;
    }
    json spec() const {
        return {{"map_dim", map_dim}, {"map_hidden", map_hidden}, {"head_hidden", head_hidden}, {"head", head},
                {"lambda", lambda},   {"iterations", iterations}, {"batch", batch},             {"lr", lr}};
    }
};

struct CiFlags {
    int k = 100;
    int perms = 1000;
    int k_perm = 5;
    double alpha = 0.05;
    unsigned threads = 1;

    void add(CLI::App* sub) {
        sub->add_option("--k", k, "k of the CMI estimator")->check(CLI::PositiveNumber);
        sub->add_option("--perms", perms, "Number of permutations B")->check(CLI::PositiveNumber);
        sub->add_option("--k-perm", k_perm, "Neighbourhood size of the local permutation")->check(CLI::PositiveNumber);
        sub->add_option("--alpha", alpha, "Significance level")->check(CLI::Range(0.0, 1.0));
        sub->add_option("--threads", threads, "Worker threads (0 = all cores)");
    }
    ci::CiConfig config(std::uint64_t seed) const {
        ci::CiConfig c;
        c.k_cmi = k;
        c.num_permutations = perms;
        c.k_perm = k_perm;
        c.alpha = alpha;
        c.seed = seed;
        c.threads = threads;
        return c;
    }
    json spec() const { return {{"k", k}, {"perms", perms}, {"k_perm", k_perm}, {"alpha", alpha}}; }
};

json set_json(const std::vector<std::size_t>& s) { return json(s); }

json log_json(const std::vector<mb::TestRecord>& log) {
    json out = json::array();
    for (const auto& r : log) {
        out.push_back({{"i", r.i},
                       {"S", set_json(r.S)},
                       {"statistic", r.statistic},
                       {"p_value", r.p_value},
                       {"decision", r.independent ? "independent" : "dependent"},
                       {"phase", r.phase == mb::Phase::adjacency ? "adjacency" : "coparent"}});
    }
    return out;
}

json history_json(const std::vector<mapper::TrainRecord>& h) {
    json last = json::object();
    if (!h.empty()) {
        last = {{"iteration", h.back().iteration},
                {"objective", h.back().objective.value},
                {"log_likelihood", h.back().objective.log_likelihood},
                {"regularizer", h.back().objective.regularizer}};
    }
    return last;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Markov blanket feature selection with learned feature maps and k-NN CI tests", "mbfs"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kVersion);

    // gen
    Common gen_c;
    std::string gen_kind = "bullseye2d", gen_rings = "unit", gen_dag, gen_write_dag;
    std::size_t gen_n = 2000;
    double gen_eps = 0.3, gen_rho = 0.5;
    auto* gen = app.add_subcommand("gen", "Generate a synthetic dataset as CSV");
    add_common(gen, gen_c);
    gen->add_option("--kind", gen_kind, "Dataset kind")
        ->check(CLI::IsMember({"bullseye2d", "dag", "gaussian", "gaussian_chain"}));
    gen->add_option("--n", gen_n, "Sample count")->check(CLI::PositiveNumber);
    gen->add_option("--epsilon", gen_eps, "Noise half-width")->check(CLI::Range(0.0, 0.5));
    gen->add_option("--rings", gen_rings, "Radius rings for bullseye2d: unit=[.25,.5]u[.75,1], wide=[1,2]u[3,4]")
        ->check(CLI::IsMember({"unit", "wide"}));
    gen->add_option("--rho", gen_rho, "Correlation for gaussian data")->check(CLI::Range(-0.999999, 0.999999));
    gen->add_option("--dag", gen_dag, "DAG JSON for --kind dag (default DAG if omitted)");
    gen->add_option("--write-dag", gen_write_dag, "Also write the DAG used as JSON");

    // train-maps
    Common tm_c;
    TrainFlags tm_t;
    std::string tm_data, tm_history;
    std::size_t tm_delta = 2;
    auto* tm = app.add_subcommand("train-maps", "Fit feature maps and the surrogate head; write a checkpoint");
    add_common(tm, tm_c);
    tm_t.add(tm);
    tm->add_option("data", tm_data, "Dataset CSV (x<i>_<j> feature columns and y)")->required();
    tm->add_option("--delta", tm_delta, "Max conditioning set size; masks have 1..delta+1 ones");
    tm->add_option("--history", tm_history, "Write the per-iteration objective as CSV");

    // estimate
    Common est_c;
    std::string est_data, est_x, est_y = "y", est_z, est_tie = "strict";
    bool est_mi = false, est_cmi = false;
    int est_k = 5;
    double est_jitter = 0.0;
    auto* est = app.add_subcommand("estimate", "k-NN estimate of I(X;Y) or I(X;Y|Z) from CSV columns");
    add_common(est, est_c);
    est->add_option("data", est_data, "CSV file")->required();
    auto* mi_flag = est->add_flag("--mi", est_mi, "Estimate I(X;Y) (default)");
    auto* cmi_flag = est->add_flag("--cmi", est_cmi, "Estimate I(X;Y|Z)");
    mi_flag->excludes(cmi_flag);
    est->add_option("--x", est_x, "X columns (x3 selects x3_*; comma-separated)");
    est->add_option("--y", est_y, "Y columns");
    est->add_option("--z", est_z, "Z columns (required with --cmi)");
    est->add_option("--k", est_k, "Number of neighbours")->check(CLI::PositiveNumber);
    est->add_option("--tie-mode", est_tie, "Tie handling")->check(CLI::IsMember({"strict", "mixed"}));
    est->add_option("--jitter", est_jitter, "Relative uniform jitter (0 = off)")->check(CLI::NonNegativeNumber);

    // ci-test
    Common ct_c;
    CiFlags ct_f;
    std::string ct_data, ct_x, ct_y = "y", ct_z;
    auto* ct = app.add_subcommand("ci-test", "Permutation CI test on CSV columns");
    add_common(ct, ct_c);
    ct_f.add(ct);
    ct->add_option("data", ct_data, "CSV file")->required();
    ct->add_option("--x", ct_x, "X columns");
    ct->add_option("--y", ct_y, "Y columns");
    ct->add_option("--z", ct_z, "Conditioning columns (omit for an unconditional test)");

    // roc
    Common roc_c;
    CiFlags roc_f;
    TrainFlags roc_t;
    std::string roc_dag, roc_data, roc_backend = "mapped_knn", roc_model, roc_score = "p_value", roc_relations, roc_json;
    std::size_t roc_n = 6000, roc_delta = 2;
    double roc_eps = 0.3;
    auto* roc = app.add_subcommand("roc", "Run the CI test on every relation of a DAG and sweep an ROC curve");
    add_common(roc, roc_c);
    roc_f.add(roc);
    roc_t.add(roc);
    roc->add_option("--dag", roc_dag, "DAG JSON (default DAG if omitted)");
    roc->add_option("--data", roc_data, "Dataset CSV; generated from the DAG if omitted");
    roc->add_option("--n", roc_n, "Samples to generate")->check(CLI::PositiveNumber);
    roc->add_option("--epsilon", roc_eps, "DAG noise half-width")->check(CLI::Range(0.0, 0.5));
    roc->add_option("--delta", roc_delta, "Max conditioning set size");
    roc->add_option("--backend", roc_backend, "CI backend")->check(CLI::IsMember({"mapped_knn", "raw_knn"}));
    roc->add_option("--model", roc_model, "Mapping checkpoint; trained on the data if omitted");
    roc->add_option("--score", roc_score, "Score swept in the CSV")->check(CLI::IsMember({"p_value", "statistic"}));
    roc->add_option("--relations", roc_relations, "Write per-relation results as CSV");
    roc->add_option("--json", roc_json, "Write the JSON summary to this file as well as stdout");

    // select
    Common sel_c;
    CiFlags sel_f;
    TrainFlags sel_t;
    std::string sel_data, sel_ts, sel_dag, sel_backend = "mapped_knn", sel_model, sel_log;
    std::size_t sel_delta = 3, sel_window = 1, sel_stride = 1, sel_n = 6000;
    double sel_eps = 0.3;
    auto* sel = app.add_subcommand("select", "Find the Markov blanket of y");
    add_common(sel, sel_c);
    sel_f.add(sel);
    sel_t.add(sel);
    sel->add_option("data", sel_data, "Dataset CSV");
    sel->add_option("--timeseries", sel_ts, "Time-series CSV (entity,time,features...,label) instead of data");
    sel->add_option("--window", sel_window, "Time steps per feature block")->check(CLI::PositiveNumber);
    sel->add_option("--stride", sel_stride, "Spacing of the sampled time steps")->check(CLI::PositiveNumber);
    sel->add_option("--dag", sel_dag, "DAG JSON: oracle ground truth, or data source when no data is given");
    sel->add_option("--n", sel_n, "Samples to generate from the DAG")->check(CLI::PositiveNumber);
    sel->add_option("--epsilon", sel_eps, "DAG noise half-width")->check(CLI::Range(0.0, 0.5));
    sel->add_option("--delta", sel_delta, "Max conditioning set size");
    sel->add_option("--backend", sel_backend, "CI backend")->check(CLI::IsMember({"mapped_knn", "raw_knn", "oracle"}));
    sel->add_option("--model", sel_model, "Mapping checkpoint; trained on the data if omitted");
    sel->add_option("--log", sel_log, "Write the test log as CSV");

    // calibrate
    Common cal_c;
    CiFlags cal_f;
    std::size_t cal_trials = 200, cal_n = 300;
    auto* cal = app.add_subcommand("calibrate", "False-positive rate of the CI test on conditionally independent data");
    add_common(cal, cal_c);
    cal_f.add(cal);
    cal->add_option("--trials", cal_trials, "Number of datasets")->check(CLI::PositiveNumber);
    cal->add_option("--n", cal_n, "Samples per dataset")->check(CLI::PositiveNumber);

    // mi-sweep
    Common sw_c;
    TrainFlags sw_t;
    std::vector<double> sw_eps{0.1, 0.2, 0.3, 0.4, 0.5};
    std::vector<std::size_t> sw_n{2000};
    std::size_t sw_seeds = 5;
    std::string sw_rings = "wide";
    bool sw_maps = false;
    int sw_k = 5;
    auto* sw = app.add_subcommand("mi-sweep", "2D bullseye MI estimates over grids of epsilon and n");
    add_common(sw, sw_c);
    sw_t.add(sw);
    sw->add_option("--epsilon", sw_eps, "Epsilon grid")->delimiter(',');
    sw->add_option("--n", sw_n, "Sample-size grid")->delimiter(',');
    sw->add_option("--seeds", sw_seeds, "Seeds per grid point")->check(CLI::PositiveNumber);
    sw->add_option("--rings", sw_rings, "Ring convention")->check(CLI::IsMember({"unit", "wide"}));
    sw->add_option("--k", sw_k, "Number of neighbours")->check(CLI::PositiveNumber);
    sw->add_flag("--train-maps", sw_maps, "Also fit nominal and regularized maps");

    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
        for (auto [sub, c] : {std::pair{gen, &gen_c}, {tm, &tm_c}, {est, &est_c}, {ct, &ct_c}, {roc, &roc_c},
                              {sel, &sel_c}, {cal, &cal_c}, {sw, &sw_c}}) {
            if (sub->parsed()) apply_config(sub, c->config);
        }
        if (est->parsed() && est_x.empty()) throw CLI::RequiredError("--x");
        if (ct->parsed() && ct_x.empty()) throw CLI::RequiredError("--x");
        if (est->parsed() && est_cmi && est_z.empty()) throw CLI::ValidationError("--z", "--cmi needs --z");
        if (sel->parsed() && !sel_data.empty() && !sel_ts.empty()) {
            throw CLI::ValidationError("--timeseries", "give either a data CSV or --timeseries, not both");
        }
    } catch (const CLI::CallForHelp& e) {
        app.exit(e, out, err);
        return 0;
    } catch (const CLI::CallForAllHelp& e) {
        app.exit(e, out, err);
        return 0;
    } catch (const CLI::CallForVersion& e) {
        app.exit(e, out, err);
        return 0;
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return 2;
    }

    try {
        if (gen->parsed()) {
            json spec = {{"kind", gen_kind}, {"n", gen_n}, {"epsilon", gen_eps}, {"seed", gen_c.seed}};
            Table table;
            if (gen_kind == "bullseye2d") {
                synthetic::BullseyeConfig bc;
                bc.epsilon = gen_eps;
                bc.n = gen_n;
                bc.seed = gen_c.seed;
                bc.rings = gen_rings == "unit" ? synthetic::kUnitRings : synthetic::kWideRings;
                const auto d = synthetic::gen_bullseye_2d(bc);
                table = dataset_to_table(Dataset{{d.x}, d.y}, {{"r", d.r}});
            } else if (gen_kind == "dag") {
                const auto dag = load_dag(gen_dag, gen_eps);
                table = dataset_to_table(synthetic::gen_bullseye_dag(dag, gen_n, gen_c.seed));
                if (!gen_write_dag.empty()) write_text(gen_write_dag, synthetic::to_json(dag).dump(2) + "\n", out);
            } else if (gen_kind == "gaussian") {
                const auto g = synthetic::gen_gaussian_pair(gen_n, gen_rho, gen_c.seed);
                table = dataset_to_table(Dataset{{g.x}, g.y});
            } else {
                const auto g = synthetic::gen_gaussian_chain(gen_n, 0.8, 0.8, gen_c.seed);
                table = dataset_to_table(Dataset{{g.x, g.z}, g.y});
            }
            write_text(gen_c.out, to_csv(table), out);
            return 0;
        }

        if (tm->parsed()) {
            const Dataset data = dataset_from_table(read_csv_file(tm_data));
            const auto fit = fit_maps(data, tm_t.training(data, tm_delta), tm_c.seed);
            json spec = tm_t.spec();
            spec["delta"] = tm_delta;
            spec["seed"] = tm_c.seed;
            spec["data"] = tm_data;
            json results = {{"model", mapper::to_json(fit.model)},
                            {"final", history_json(fit.history)},
                            {"warnings", fit.warnings}};
            if (!tm_history.empty()) {
                Table h;
                h.header = {"iteration", "objective", "log_likelihood", "regularizer"};
                h.columns.assign(4, {});
                for (const auto& r : fit.history) {
                    h.columns[0].push_back(static_cast<double>(r.iteration));
                    h.columns[1].push_back(r.objective.value);
                    h.columns[2].push_back(r.objective.log_likelihood);
                    h.columns[3].push_back(r.objective.regularizer);
                }
                write_text(tm_history, to_csv(h), out);
            }
            write_text(tm_c.out, envelope(spec, results).dump(2) + "\n", out);
            return 0;
        }

        if (est->parsed()) {
            const Table table = read_csv_file(est_data);
            knn::KnnConfig kc;
            kc.k = est_k;
            kc.tie_mode = est_tie == "mixed" ? knn::TieMode::mixed : knn::TieMode::strict;
            kc.jitter = est_jitter;
            kc.jitter_seed = est_c.seed;
            const auto x = select_columns(table, est_x);
            const auto y = select_columns(table, est_y);
            json spec = {{"x", est_x}, {"y", est_y}, {"k", est_k}, {"tie_mode", est_tie}, {"jitter", est_jitter},
                         {"seed", est_c.seed}, {"data", est_data}};
            json doc;
            if (est_cmi) {
                spec["z"] = est_z;
                const double v = knn::fp_cmi(x, y, select_columns(table, est_z), kc);
                doc = envelope(spec, {{"cmi_nats", v}, {"n", x.n()}});
                doc["cmi_nats"] = v;
            } else {
                const double v = knn::ksg_mi(x, y, kc);
                doc = envelope(spec, {{"mi_nats", v}, {"n", x.n()}});
                doc["mi_nats"] = v;
            }
            const std::string text = doc.dump(2) + "\n";
            out << text;
            if (!est_c.out.empty()) write_text(est_c.out, text, out);
            return 0;
        }

        if (ct->parsed()) {
            const Table table = read_csv_file(ct_data);
            const auto x = select_columns(table, ct_x);
            const auto y = select_columns(table, ct_y);
            std::optional<knn::SampleBlock> z;
            if (!ct_z.empty()) z = select_columns(table, ct_z);
            const auto r = ci::ci_test(x, y, z, ct_f.config(ct_c.seed));
            json spec = ct_f.spec();
            spec.update({{"x", ct_x}, {"y", ct_y}, {"z", ct_z}, {"seed", ct_c.seed}, {"data", ct_data}});
            const json results = {{"statistic", r.statistic},
                                  {"p_value", r.p_value},
                                  {"independent", r.independent},
                                  {"null_samples", r.null_samples}};
            const std::string text = envelope(spec, results).dump(2) + "\n";
            out << text;
            if (!ct_c.out.empty()) write_text(ct_c.out, text, out);
            return 0;
        }

        if (roc->parsed()) {
            const auto dag = load_dag(roc_dag, roc_eps);
            const Dataset data = roc_data.empty() ? synthetic::gen_bullseye_dag(dag, roc_n, roc_c.seed)
                                                  : dataset_from_table(read_csv_file(roc_data));
            if (data.m() != dag.m) throw Error(ErrorKind::dimension_mismatch, "dataset and DAG differ in feature count");
            std::optional<mapper::MappingModel> model;
            json train_info = nullptr;
            if (roc_backend == "mapped_knn") {
                if (!roc_model.empty()) {
                    model = load_model(roc_model);
                } else {
                    const auto fit = fit_maps(data, roc_t.training(data, roc_delta), derive_seed(roc_c.seed, 7));
                    model = fit.model;
                    train_info = history_json(fit.history);
                }
            }
            const auto ex = run_ci_roc(data, dag, roc_delta, roc_f.config(roc_c.seed), model ? &*model : nullptr);
            const RocTable& chosen = roc_score == "p_value" ? ex.by_p_value : ex.by_statistic;
            std::ostringstream csv;
            write_roc_csv(csv, chosen);
            write_text(roc_c.out, csv.str(), out);
            if (!roc_relations.empty()) {
                std::ostringstream rel;
                rel << "i,S,independent,statistic,p_value\n";
                for (const auto& o : ex.outcomes) {
                    std::string s;
                    for (std::size_t k = 0; k < o.relation.S.size(); ++k) s += (k ? ";" : "") + std::to_string(o.relation.S[k]);
                    rel << o.relation.i << ',' << s << ',' << (o.relation.independent ? 1 : 0) << ','
                        << format_double(o.statistic) << ',' << format_double(o.p_value) << '\n';
                }
                write_text(roc_relations, rel.str(), out);
            }
            json spec = roc_f.spec();
            spec.update({{"dag", synthetic::to_json(dag)}, {"n", data.n()}, {"delta", roc_delta}, {"backend", roc_backend},
                         {"score", roc_score}, {"seed", roc_c.seed}, {"data", roc_data}, {"model", roc_model}});
            if (roc_backend == "mapped_knn" && roc_model.empty()) spec["training"] = roc_t.spec();
            const json results = {{"auc", chosen.auc},
                                  {"auc_p_value", ex.by_p_value.auc},
                                  {"auc_statistic", ex.by_statistic.auc},
                                  {"relations", ex.outcomes.size()},
                                  {"training", train_info}};
            const std::string text = envelope(spec, results).dump(2) + "\n";
            if (!roc_c.out.empty()) out << text;
            if (!roc_json.empty()) write_text(roc_json, text, out);
            return 0;
        }

        if (sel->parsed()) {
            const mb::Backend backend = mb::backend_from_string(sel_backend);
            json spec = sel_f.spec();
            spec.update({{"backend", sel_backend}, {"delta", sel_delta}, {"seed", sel_c.seed}});
            mb::MbConfig cfg;
            cfg.delta = sel_delta;
            cfg.backend = backend;
            cfg.ci = sel_f.config(sel_c.seed);
            mb::MbResult res;
            json extra = json::object();
            std::optional<synthetic::DagSpec> dag;
            if (!sel_dag.empty() || (sel_data.empty() && sel_ts.empty())) dag = load_dag(sel_dag, sel_eps);
            if (backend == mb::Backend::oracle) {
                res = mb::find_markov_blanket(Dataset{}, cfg, nullptr, &*dag);
                spec["dag"] = synthetic::to_json(*dag);
            } else {
                Dataset data;
                if (!sel_ts.empty()) {
                    const auto ing = ingest_timeseries_file(sel_ts, sel_window, sel_stride);
                    data = ing.data;
                    extra["feature_names"] = ing.feature_names;
                    extra["samples"] = ing.entities.size();
                    extra["dropped_entities"] = ing.dropped_entities;
                    spec.update({{"timeseries", sel_ts}, {"window", sel_window}, {"stride", sel_stride}});
                } else if (!sel_data.empty()) {
                    data = dataset_from_table(read_csv_file(sel_data));
                    spec["data"] = sel_data;
                } else {
                    data = synthetic::gen_bullseye_dag(*dag, sel_n, sel_c.seed);
                    spec.update({{"dag", synthetic::to_json(*dag)}, {"n", sel_n}});
                }
                std::optional<mapper::MappingModel> model;
                if (backend == mb::Backend::mapped_knn) {
                    if (!sel_model.empty()) {
                        model = load_model(sel_model);
                        spec["model"] = sel_model;
                    } else {
                        TrainFlags t = sel_t;
                        if (!sel_ts.empty() && t.head == "gaussian") t.head = "bernoulli";
                        const auto fit = fit_maps(data, t.training(data, sel_delta), derive_seed(sel_c.seed, 7));
                        model = fit.model;
                        spec["training"] = t.spec();
                        extra["training"] = history_json(fit.history);
                    }
                }
                res = mb::find_markov_blanket(data, cfg, model ? &*model : nullptr);
            }
            json results = {{"adjacents", set_json(res.adjacents)},
                            {"coparents", set_json(res.coparents)},
                            {"selected", set_json(res.selected)},
                            {"tests", res.test_log.size()},
                            {"test_log", log_json(res.test_log)}};
            if (dag) results["ground_truth"] = set_json(synthetic::markov_blanket_of(*dag, dag->target()));
            results.update(extra);
            if (!sel_log.empty()) {
                std::ostringstream s;
                mb::write_test_log_csv(s, res.test_log);
                write_text(sel_log, s.str(), out);
            }
            write_text(sel_c.out, envelope(spec, results).dump(2) + "\n", out);
            return 0;
        }

        if (cal->parsed()) {
            const auto r = run_calibration(cal_trials, cal_n, cal_f.config(cal_c.seed), cal_c.seed);
            json spec = cal_f.spec();
            spec.update({{"trials", cal_trials}, {"n", cal_n}, {"seed", cal_c.seed}});
            const json results = {{"trials", r.trials},
                                  {"rejections", r.rejections},
                                  {"false_positive_rate", r.false_positive_rate},
                                  {"p_values", r.p_values}};
            write_text(cal_c.out, envelope(spec, results).dump(2) + "\n", out);
            return 0;
        }

        if (sw->parsed()) {
            const auto rings = sw_rings == "unit" ? synthetic::kUnitRings : synthetic::kWideRings;
            knn::KnnConfig kc;
            kc.k = sw_k;
            std::optional<MapTraining> maps;
            if (sw_maps) {
                MapTraining t = bullseye_map_training();
                t.train.lambda = sw_t.lambda;
                t.train.iterations = sw_t.iterations;
                t.train.batch_size = sw_t.batch;
                t.train.adam.learning_rate = sw_t.lr;
                maps = t;
            }
            Table t;
            t.header = {"epsilon", "n", "seed", "oracle", "knn_raw", "knn_r", "knn_nominal", "knn_regularized"};
            t.columns.assign(t.header.size(), {});
            for (const double eps : sw_eps) {
                for (const std::size_t n : sw_n) {
                    for (std::size_t s = 0; s < sw_seeds; ++s) {
                        const auto row = run_bullseye_trial(eps, n, derive_seed(sw_c.seed, s), rings, kc, maps);
                        const double vals[] = {row.epsilon,   static_cast<double>(row.n), static_cast<double>(s),
                                               row.oracle,    row.knn_raw,                row.knn_r,
                                               row.knn_nominal, row.knn_regularized};
                        for (std::size_t c = 0; c < t.columns.size(); ++c) t.columns[c].push_back(vals[c]);
                    }
                }
            }
            write_text(sw_c.out, to_csv(t), out);
            return 0;
        }
    } catch (const Error& e) {
        err << "error (" << to_string(e.kind()) << "): " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
    return 2;
}

}  // namespace mbfs::harness
