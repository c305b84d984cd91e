#include "lidar/cli.hpp"

#include <cstdio>
#include <fstream>
#include <optional>
#include <ostream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "lidar/io.hpp"
#include "lidar/rankstats.hpp"
#include "lidar/synth.hpp"

namespace lidar {

namespace {

std::string g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string g6(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

bool sniff_emb1(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) raise(errc::io_failure, "cannot open '" + path.string() + "' for reading");
    char magic[4] = {};
    in.read(magic, 4);
    return in.gcount() == 4 && std::string_view(magic, 4) == "EMB1";
}

struct ScoreArgs {
    std::string in;
    std::string format = "auto";
    std::optional<int> n;
    std::optional<int> q;
    std::string metric;
    double delta = kDefaultDelta;
    double eps = kDefaultEps;
    std::optional<int> reduce;
    bool centered = false;
    std::string registry;
    std::string model_id;
    bool overwrite = false;
};

struct CorrelateArgs {
    std::string registry;
    std::string metric;
    std::string oracle_field = "oracle_accuracy";
    std::string method = "tau-b";
};

struct SelectArgs {
    std::string registry;
    std::string metric;
    std::string oracle_field = "oracle_accuracy";
};

struct SynthArgs {
    std::string spec;
    std::string out;
};

struct Prop1Args {
    std::string in;
    int r = 0;
    double noise_scale = 0.0;
    double delta = kDefaultDelta;
    double eps = kDefaultEps;
    int trials = 100;
    std::uint64_t seed = 0;
};

EmbeddingBatch load_batch(const ScoreArgs& a) {
    bool use_emb1;
    if (a.format == "emb1") {
        use_emb1 = true;
    } else if (a.format == "csv") {
        use_emb1 = false;
    } else {
        use_emb1 = sniff_emb1(a.in);
    }
    if (use_emb1) return read_emb1(a.in);
    if (!a.n || !a.q) {
        throw CLI::ValidationError("score", "CSV input requires --n and --q");
    }
    return read_csv_batch(a.in, *a.n, *a.q);
}

int cmd_score(const ScoreArgs& a, std::ostream& out) {
    const auto kind = metric_kind_from(a.metric);
    const EmbeddingBatch batch = load_batch(a);

    MetricConfig cfg;
    cfg.delta = a.delta;
    cfg.eps = a.eps;
    cfg.reduce_before_invert = a.reduce;
    cfg.center_rankme = a.centered;

    MetricScore score;
    switch (*kind) {
        case MetricKind::lidar: score = lidar_score(batch, cfg); break;
        case MetricKind::rankme:
            score = rankme_score(flatten(batch, cfg.center_rankme), cfg.eps);
            score.branch_label = batch.branch_label;
            break;
        case MetricKind::rankme_aug: score = rankme_aug_score(batch, cfg.eps); break;
    }

    out << metric_kind_name(score.kind) << " = " << g6(score.value) << "  (n=" << batch.n
        << " q=" << batch.q << " p=" << batch.p << ", delta=" << g6(cfg.delta)
        << ", eps=" << g6(cfg.eps) << ")";
    if (score.degenerate) out << "  [degenerate spectrum]";
    if (!score.branch_label.empty()) out << "  branch=" << score.branch_label;
    out << "\n";

    if (!a.registry.empty()) {
        Registry registry = read_registry_or_empty(a.registry);
        ModelRecord& rec = registry.upsert(a.model_id);
        set_score(rec, score.kind, score.value, a.overwrite);
        if (!rec.raw.contains("source_path")) {
            rec.source_path = a.in;
            rec.raw["source_path"] = a.in;
        }
        write_registry(registry, a.registry);
    }

    out << "#RESULT cmd=score metric=" << metric_kind_name(score.kind) << " value="
        << g17(score.value) << " degenerate=" << (score.degenerate ? 1 : 0) << " n=" << batch.n
        << " q=" << batch.q << " p=" << batch.p << " delta=" << g17(cfg.delta)
        << " eps=" << g17(cfg.eps);
    if (a.reduce) out << " reduce=" << *a.reduce;
    if (!score.branch_label.empty()) out << " branch=" << score.branch_label;
    if (!a.model_id.empty()) out << " model=" << a.model_id;
    out << "\n";
    return 0;
}

PairedSeries series_from_registry(const Registry& registry, MetricKind kind,
                                  const std::string& oracle_field) {
    PairedSeries s;
    const std::string key = metric_kind_name(kind);
    for (const auto& rec : registry.records) {
        const auto it = rec.scores.find(key);
        const auto oracle = rec.numeric_field(oracle_field);
        if (it == rec.scores.end() || !oracle) continue;
        s.x.push_back(it->second);
        s.y.push_back(*oracle);
        s.labels.push_back(rec.model_id);
    }
    return s;
}

int cmd_correlate(const CorrelateArgs& a, std::ostream& out) {
    const auto kind = metric_kind_from(a.metric);
    const auto method = corr_method_from(a.method);
    const Registry registry = read_registry(a.registry);
    const PairedSeries series = series_from_registry(registry, *kind, a.oracle_field);
    if (series.x.size() < 2) {
        raise(errc::no_eligible_records, "need at least 2 records with both '" + a.metric +
                                             "' and '" + a.oracle_field + "'");
    }

    CorrelationReport report = (*method == CorrMethod::spearman)
                                   ? spearman(series)
                                   : kendall(series, *method);

    out << "model" << '\t' << a.metric << '\t' << a.oracle_field << "\n";
    for (size_t i = 0; i < series.x.size(); ++i) {
        out << series.labels[i] << '\t' << g6(series.x[i]) << '\t' << g6(series.y[i]) << "\n";
    }
    out << corr_method_name(report.method) << " = ";
    if (report.status == CorrStatus::ok) {
        out << g6(report.coefficient);
    } else {
        out << "undefined (" << corr_status_name(report.status) << ")";
    }
    out << "  n=" << report.n;
    if (report.method != CorrMethod::spearman) {
        out << " C=" << report.concordant << " D=" << report.discordant;
    }
    out << " ties_x=" << report.tie_groups_x << " ties_y=" << report.tie_groups_y << "\n";

    out << "#RESULT cmd=correlate method=" << corr_method_name(report.method)
        << " status=" << corr_status_name(report.status);
    if (report.status == CorrStatus::ok) out << " coefficient=" << g17(report.coefficient);
    out << " n=" << report.n << " tie_groups_x=" << report.tie_groups_x
        << " tie_groups_y=" << report.tie_groups_y;
    if (report.method != CorrMethod::spearman) {
        out << " concordant=" << report.concordant << " discordant=" << report.discordant;
    }
    out << "\n";
    return 0;
}

int cmd_select(const SelectArgs& a, std::ostream& out) {
    const auto kind = metric_kind_from(a.metric);
    const Registry registry = read_registry(a.registry);

    std::vector<SelectionCandidate> candidates;
    const std::string key = metric_kind_name(*kind);
    candidates.reserve(registry.records.size());
    for (const auto& rec : registry.records) {
        SelectionCandidate c;
        c.model_id = rec.model_id;
        if (const auto it = rec.scores.find(key); it != rec.scores.end()) c.metric = it->second;
        c.oracle = rec.numeric_field(a.oracle_field);
        candidates.push_back(std::move(c));
    }
    const SelectionReport report = select_top(candidates);

    out << "chosen by " << a.metric << ": " << report.chosen_id << "  metric="
        << g6(report.chosen_metric) << "  " << a.oracle_field << "=" << g6(report.chosen_oracle);
    if (report.metric_tie) out << "  [metric tie, smallest id kept]";
    out << "\n";
    out << "oracle best:   " << report.oracle_best_id << "  " << a.oracle_field << "="
        << g6(report.oracle_best_accuracy) << "\n";
    out << "recovered-accuracy gap: " << g6(report.gap) << "\n";

    out << "#RESULT cmd=select chosen=" << report.chosen_id << " chosen_metric="
        << g17(report.chosen_metric) << " chosen_oracle=" << g17(report.chosen_oracle)
        << " oracle_best=" << report.oracle_best_id << " oracle_best_accuracy="
        << g17(report.oracle_best_accuracy) << " gap=" << g17(report.gap)
        << " metric_tie=" << (report.metric_tie ? 1 : 0) << "\n";
    return 0;
}

PlantedSpec parse_planted_spec(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) raise(errc::io_failure, "cannot open '" + path.string() + "' for reading");
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        raise(errc::parse_error, std::string("spec JSON: ") + e.what());
    }
    if (!j.is_object()) raise(errc::parse_error, "spec JSON must be an object");

    PlantedSpec spec;
    auto get_int = [&](const char* name, int& field, bool required) {
        if (!j.contains(name)) {
            if (required) raise(errc::parse_error, std::string("spec is missing '") + name + "'");
            return;
        }
        if (!j[name].is_number_integer()) {
            raise(errc::parse_error, std::string("spec field '") + name + "' must be an integer");
        }
        field = j[name].get<int>();
    };
    auto get_real = [&](const char* name, double& field) {
        if (!j.contains(name)) return;
        if (!j[name].is_number()) {
            raise(errc::parse_error, std::string("spec field '") + name + "' must be a number");
        }
        field = j[name].get<double>();
    };

    get_int("n", spec.n, true);
    get_int("q", spec.q, true);
    get_int("p", spec.p, true);
    get_int("k_signal", spec.k_signal, false);
    get_int("r_nuisance", spec.r_nuisance, false);
    get_real("signal_strength", spec.signal_strength);
    get_real("within_noise", spec.within_noise);
    get_real("nuisance_scale", spec.nuisance_scale);
    if (j.contains("seed")) {
        if (!j["seed"].is_number_integer()) raise(errc::parse_error, "spec field 'seed' must be an integer");
        spec.seed = j["seed"].get<std::uint64_t>();
    }

    static const char* known[] = {"n", "q", "p", "k_signal", "r_nuisance", "signal_strength",
                                  "within_noise", "nuisance_scale", "seed"};
    for (const auto& [key, value] : j.items()) {
        bool ok = false;
        for (const char* name : known) ok = ok || key == name;
        if (!ok) raise(errc::parse_error, "unknown spec field '" + key + "'");
    }
    return spec;
}

int cmd_synth(const SynthArgs& a, std::ostream& out) {
    const PlantedSpec spec = parse_planted_spec(a.spec);
    const EmbeddingBatch batch = gen_planted(spec);
    write_emb1(batch, a.out);
    out << "wrote " << a.out << "  (n=" << spec.n << " q=" << spec.q << " p=" << spec.p
        << ", k_signal=" << spec.k_signal << ", r_nuisance=" << spec.r_nuisance << ")\n";
    out << "#RESULT cmd=synth out=" << a.out << " n=" << spec.n << " q=" << spec.q
        << " p=" << spec.p << " k_signal=" << spec.k_signal << " r_nuisance=" << spec.r_nuisance
        << " seed=" << spec.seed << "\n";
    return 0;
}

int cmd_prop1(const Prop1Args& a, std::ostream& out) {
    const EmbeddingBatch batch = read_emb1(a.in);
    MetricConfig cfg;
    cfg.delta = a.delta;
    cfg.eps = a.eps;
    const Prop1Report report = prop1_check(batch, a.r, a.noise_scale, cfg, a.trials, a.seed);

    out << "trials=" << report.trials << " checked=" << report.checked << " skipped="
        << report.skipped << " violations=" << report.violations << "\n";
    if (report.skipped > 0) {
        out << "unmet preconditions:";
        for (const auto& name : report.unmet_preconditions) out << " " << name;
        out << "\n";
    } else {
        out << "base=" << g6(report.base_score) << " bound=" << g6(report.bound) << " margins min/mean/max = "
            << g6(report.min_margin) << " / " << g6(report.mean_margin) << " / "
            << g6(report.max_margin) << "\n";
    }

    out << "#RESULT cmd=prop1-check trials=" << report.trials << " checked=" << report.checked
        << " skipped=" << report.skipped << " violations=" << report.violations;
    if (report.checked > 0) {
        out << " base=" << g17(report.base_score) << " bound=" << g17(report.bound)
            << " min_margin=" << g17(report.min_margin) << " mean_margin="
            << g17(report.mean_margin) << " max_margin=" << g17(report.max_margin);
    }
    if (!report.unmet_preconditions.empty()) {
        out << " unmet=";
        for (size_t i = 0; i < report.unmet_preconditions.size(); ++i) {
            if (i) out << ",";
            out << report.unmet_preconditions[i];
        }
    }
    out << "\n";
    return report.violations > 0 ? 1 : 0;
}

} // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"LiDAR representation-quality metric and label-free model evaluation", "lidar"};
    app.require_subcommand(1);

    ScoreArgs score_args;
    auto* score = app.add_subcommand(
        "score", "Score an embedding batch (recommended sampling: n=1000/q=50 for "
                 "transformer-scale embeddings, n=5000/q=10 or n=10000/q=10 for wide ones)");
    score->add_option("--in", score_args.in, "EMB1 or CSV batch file")->required();
    score->add_option("--format", score_args.format, "auto|emb1|csv (default: sniff the magic)")
        ->check(CLI::IsMember({"auto", "emb1", "csv"}));
    score->add_option("--n", score_args.n, "class count (CSV input only)");
    score->add_option("--q", score_args.q, "samples per class (CSV input only)");
    score->add_option("--metric", score_args.metric, "lidar|rankme|rankme-aug")
        ->required()
        ->check(CLI::IsMember({"lidar", "rankme", "rankme-aug"}));
    score->add_option("--delta", score_args.delta, "within-scatter ridge (default 1e-4)");
    score->add_option("--eps", score_args.eps, "smooth-rank constant (default 1e-8)");
    score->add_option("--reduce", score_args.reduce,
                      "project to k principal dimensions before the inversion");
    score->add_flag("--centered", score_args.centered,
                    "center the flattened matrix for vanilla rankme");
    score->add_option("--registry", score_args.registry, "JSON-lines registry to update");
    score->add_option("--model-id", score_args.model_id, "record to attach the score to");
    score->add_flag("--overwrite", score_args.overwrite, "replace a conflicting stored score");
    score->get_option("--registry")->needs(score->get_option("--model-id"));
    score->get_option("--model-id")->needs(score->get_option("--registry"));

    CorrelateArgs corr_args;
    auto* correlate = app.add_subcommand("correlate", "Rank-correlate a metric against an oracle");
    correlate->add_option("--registry", corr_args.registry, "JSON-lines registry")->required();
    correlate->add_option("--metric", corr_args.metric, "lidar|rankme|rankme-aug")
        ->required()
        ->check(CLI::IsMember({"lidar", "rankme", "rankme-aug"}));
    correlate->add_option("--oracle-field", corr_args.oracle_field,
                          "numeric record field holding the oracle (default oracle_accuracy)");
    correlate->add_option("--method", corr_args.method, "spearman|tau-a|tau-b|tau-abs")
        ->check(CLI::IsMember({"spearman", "tau-a", "tau-b", "tau-abs"}));

    SelectArgs select_args;
    auto* select = app.add_subcommand("select", "Report the top-ranking model for a metric");
    select->add_option("--registry", select_args.registry, "JSON-lines registry")->required();
    select->add_option("--metric", select_args.metric, "lidar|rankme|rankme-aug")
        ->required()
        ->check(CLI::IsMember({"lidar", "rankme", "rankme-aug"}));
    select->add_option("--oracle-field", select_args.oracle_field,
                       "numeric record field holding the oracle (default oracle_accuracy)");

    SynthArgs synth_args;
    auto* synth = app.add_subcommand("synth", "Generate a planted-signal batch");
    synth->add_option("--spec", synth_args.spec, "JSON planted spec")->required();
    synth->add_option("--out", synth_args.out, "EMB1 output path")->required();

    Prop1Args prop1_args;
    auto* prop1 = app.add_subcommand("prop1-check",
                                     "Check appended-noise scores against the closed-form bound");
    prop1->add_option("--in", prop1_args.in, "EMB1 batch file")->required();
    prop1->add_option("--r", prop1_args.r, "appended noise dimensions")->required();
    prop1->add_option("--noise-scale", prop1_args.noise_scale, "appended noise scale")->required();
    prop1->add_option("--delta", prop1_args.delta, "within-scatter ridge (default 1e-4)");
    prop1->add_option("--eps", prop1_args.eps, "smooth-rank constant (default 1e-8)");
    prop1->add_option("--trials", prop1_args.trials, "trial count (default 100)");
    prop1->add_option("--seed", prop1_args.seed, "base seed (default 0)");

    try {
        std::vector<const char*> argv;
        argv.reserve(args.size() + 1);
        argv.push_back("lidar");
        for (const auto& a : args) argv.push_back(a.c_str());
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 2;
    }

    try {
        if (app.got_subcommand(score)) return cmd_score(score_args, out);
        if (app.got_subcommand(correlate)) return cmd_correlate(corr_args, out);
        if (app.got_subcommand(select)) return cmd_select(select_args, out);
        if (app.got_subcommand(synth)) return cmd_synth(synth_args, out);
        if (app.got_subcommand(prop1)) return cmd_prop1(prop1_args, out);
    } catch (const CLI::ValidationError& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

} // namespace lidar
