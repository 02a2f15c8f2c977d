#include "cli.hpp"

#include <chrono>
#include <ctime>
#include <filesystem>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>

#include <openssl/evp.h>

#include <CLI11.hpp>
#include <json.hpp>

#include "tdfdr/baselines.hpp"
#include "tdfdr/error.hpp"
#include "tdfdr/harness.hpp"
#include "tdfdr/io.hpp"
#include "tdfdr/report.hpp"
#include "tdfdr/tdp.hpp"

namespace tdfdr::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::string_view kBottomMarker = "BOTTOM";

struct MatrixOptions {
    std::string input;
    std::string delimiter = "tab";
    std::string cases;
    std::string controls;
    bool no_header = false;
    bool no_id_column = false;
};

struct RunOptions {
    MatrixOptions matrix;
    std::string score = "t";
    std::string variant = "simplified";
    double alpha = 0.05;
    double r = 1.0;
    std::size_t permutations = 49;
    std::uint64_t seed = 1;
    std::vector<double> r_grid{1, 2, 5, 10, 15, 20, 25};
    std::size_t n2 = 0;  // 0 = automatic
    std::size_t threads = 1;
};

json to_json(const MatrixOptions& m) {
    return json{{"input", m.input},         {"delimiter", m.delimiter}, {"cases", m.cases},
                {"controls", m.controls},   {"no_header", m.no_header}, {"no_id_column", m.no_id_column}};
}

MatrixOptions matrix_from_json(const json& j) {
    MatrixOptions m;
    m.input = j.at("input").get<std::string>();
    m.delimiter = j.at("delimiter").get<std::string>();
    m.cases = j.at("cases").get<std::string>();
    m.controls = j.at("controls").get<std::string>();
    m.no_header = j.at("no_header").get<bool>();
    m.no_id_column = j.at("no_id_column").get<bool>();
    return m;
}

json to_json(const RunOptions& o) {
    return json{{"matrix", to_json(o.matrix)}, {"score", o.score},   {"variant", o.variant},
                {"alpha", o.alpha},            {"r", o.r},           {"permutations", o.permutations},
                {"seed", o.seed},              {"r_grid", o.r_grid}, {"n2", o.n2},
                {"threads", o.threads}};
}

RunOptions run_from_json(const json& j) {
    RunOptions o;
    o.matrix = matrix_from_json(j.at("matrix"));
    o.score = j.at("score").get<std::string>();
    o.variant = j.at("variant").get<std::string>();
    o.alpha = j.at("alpha").get<double>();
    o.r = j.at("r").get<double>();
    o.permutations = j.at("permutations").get<std::size_t>();
    o.seed = j.at("seed").get<std::uint64_t>();
    o.r_grid = j.at("r_grid").get<std::vector<double>>();
    o.n2 = j.at("n2").get<std::size_t>();
    o.threads = j.at("threads").get<std::size_t>();
    return o;
}

char parse_delimiter(const std::string& d) {
    if (d == "tab" || d == "\\t" || d == "\t") return '\t';
    if (d == "comma" || d == ",") return ',';
    if (d == "space" || d == " ") return ' ';
    if (d == "semicolon" || d == ";") return ';';
    if (d.size() == 1) return d[0];
    throw InvalidArgument("unsupported delimiter '" + d + "'");
}

IngestResult load_matrix(const MatrixOptions& m) {
    if (m.input.empty()) throw InvalidArgument("--input is required");
    if (m.cases.empty() || m.controls.empty()) throw InvalidArgument("--cases and --controls are required");
    IngestOptions opts;
    opts.delimiter = parse_delimiter(m.delimiter);
    opts.cases = m.cases;
    opts.controls = m.controls;
    opts.header = !m.no_header;
    opts.id_column = !m.no_id_column;
    return ingest_matrix(fs::path(m.input), opts);
}

std::string sha256_hex(std::string_view bytes) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
        throw Error("sha256 digest failed");
    }
    std::ostringstream ss;
    for (unsigned int i = 0; i < len; ++i) ss << std::hex << std::setw(2) << std::setfill('0') << int{digest[i]};
    return ss.str();
}

json input_record(const std::string& path) {
    const auto bytes = read_file(path);
    return json{{"path", path}, {"sha256", sha256_hex(bytes)}, {"bytes", bytes.size()}};
}

std::string utc_now() {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    std::ostringstream ss;
    ss << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return ss.str();
}

/// Collects the files a command writes so the manifest can list them.
class Artifacts {
public:
    explicit Artifacts(fs::path dir) : dir_{std::move(dir)}, start_{std::chrono::steady_clock::now()} {
        std::error_code ec;
        fs::create_directories(dir_, ec);
        if (ec) throw IoError("cannot create output directory '" + dir_.string() + "': " + ec.message());
    }

    void write(const std::string& name, std::string_view contents) {
        const auto path = dir_ / name;
        write_file(path, contents);
        paths_.push_back(path.string());
    }

    void write_manifest(std::string_view command, json config, std::uint64_t seed, json inputs) {
        const auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(
                                 std::chrono::steady_clock::now() - start_)
                                 .count();
        const auto manifest_path = (dir_ / "manifest.json").string();
        json outputs = paths_;
        outputs.push_back(manifest_path);
        json manifest{{"tool", "tdfdr"},
                      {"version", TDFDR_VERSION},
                      {"command", command},
                      {"config", std::move(config)},
                      {"seed", seed},
                      {"inputs", std::move(inputs)},
                      {"outputs", outputs},
                      {"timing", {{"started_utc", started_utc_}, {"elapsed_ms", elapsed}}}};
        write_file(manifest_path, manifest.dump(2) + "\n");
    }

    const fs::path& dir() const { return dir_; }

private:
    fs::path dir_;
    std::chrono::steady_clock::time_point start_;
    std::string started_utc_ = utc_now();
    std::vector<std::string> paths_;
};

std::string format_or_na(double v) { return std::isfinite(v) ? format_double(v) : "NA"; }

TdConfig make_config(const RunOptions& o) {
    TdConfig cfg;
    cfg.variant = parse_variant(o.variant);
    cfg.r = cfg.variant == Variant::Simplified ? 1.0 : o.r;
    if (cfg.variant == Variant::Simplified && o.r != 1.0) {
        throw InvalidArgument("--r must be 1 for the simplified variant");
    }
    cfg.alpha = o.alpha;
    if (o.permutations < 1) throw InvalidArgument("--permutations must be >= 1");
    cfg.max_permutations = o.permutations + 1;
    cfg.seed = o.seed;
    cfg.adaptive_r_grid = o.r_grid;
    if (o.n2 != 0) cfg.adaptive_n2 = N2Policy{false, o.n2};
    cfg.threads = o.threads;
    cfg.validate();
    return cfg;
}

int cmd_run(RunOptions options, const std::string& replay, std::string output, std::ostream& out) {
    json recorded_input;
    if (!replay.empty()) {
        const auto manifest = json::parse(read_file(replay));
        if (manifest.at("command") != "run") throw InvalidArgument("manifest '" + replay + "' is not from a run");
        options = run_from_json(manifest.at("config"));
        recorded_input = manifest.at("inputs").at("matrix");
    }

    const auto cfg = make_config(options);
    const auto kind = parse_score_kind(options.score);
    const auto input = input_record(options.matrix.input);
    if (!recorded_input.is_null() && recorded_input.at("sha256") != input.at("sha256")) {
        throw DataError("input '" + options.matrix.input + "' no longer matches the manifest digest");
    }
    const auto ingested = load_matrix(options.matrix);
    const auto& data = ingested.dataset;
    const auto decisions = run_procedure(data, kind, cfg);

    std::vector<std::uint8_t> rejected(data.m(), 0);
    for (const auto id : decisions.rejected_ids) rejected[id] = 1;

    std::ostringstream tsv;
    tsv << "id\ttarget_score\tlabel\tfinal_rank\tfinal_score\trejected\n";
    for (const auto& lt : decisions.per_test) {
        tsv << data.ids()[lt.id] << '\t' << format_or_na(lt.target_score) << '\t' << to_char(lt.label) << '\t'
            << lt.global_rank << '\t'
            << (lt.final_score.is_bottom() ? std::string(kBottomMarker) : format_double(lt.final_score.value()))
            << '\t' << int{rejected[lt.id]} << '\n';
    }

    json summary{{"variant", std::string(to_string(decisions.variant))},
                 {"score", std::string(to_string(kind))},
                 {"alpha", cfg.alpha},
                 {"r", decisions.r},
                 {"t", decisions.t},
                 {"permutation_mode", std::string(to_string(decisions.mode))},
                 {"K", decisions.K},
                 {"rejections", decisions.rejected_ids.size()},
                 {"targets_at_K", decisions.targets_at_K},
                 {"decoys_at_K", decisions.decoys_at_K},
                 {"estimated_fdr", decisions.estimated_fdr_at_K},
                 {"no_discoveries", decisions.no_discoveries},
                 {"seed", cfg.seed},
                 {"m", data.m()},
                 {"n1", data.n_cases()},
                 {"n0", data.n_controls()},
                 {"dropped_rows", ingested.dropped_rows},
                 {"degenerate_tests", decisions.degenerate_tests},
                 {"manifest", "manifest.json"},
                 {"input_sha256", input.at("sha256")}};
    if (decisions.adaptive) {
        const auto& a = *decisions.adaptive;
        summary["adaptive"] = json{{"r_max", a.r_max}, {"n2", a.n2}, {"grid", a.grid}, {"part1_rejections", a.part1_rejections}};
    }

    if (output.empty()) output = ".";
    Artifacts artifacts{output};
    artifacts.write("results.tsv", tsv.str());
    artifacts.write("summary.json", summary.dump(2) + "\n");
    artifacts.write_manifest("run", to_json(options), cfg.seed, json{{"matrix", input}});

    out << "tdfdr run: " << data.m() << " tests (" << ingested.dropped_rows << " dropped), t = " << decisions.t
        << " (" << to_string(decisions.mode) << "), K = " << decisions.K << ", "
        << decisions.rejected_ids.size() << " rejections at alpha " << format_double(cfg.alpha) << "\n";
    return kOk;
}

struct SimulateOptions {
    std::string preset;
    std::string config;
    std::optional<std::size_t> reps;
    std::uint64_t seed = 1;
    std::size_t threads = 1;
    std::vector<double> alphas;
    std::vector<std::string> formats{"tsv", "json", "markdown"};
    std::string output = ".";
};

int cmd_simulate(const SimulateOptions& o, std::ostream& out) {
    std::vector<ExperimentSpec> experiments;
    json inputs = json::object();
    if (!o.preset.empty() && !o.config.empty()) throw InvalidArgument("use either --preset or --config, not both");
    if (!o.preset.empty()) {
        experiments = preset(o.preset, o.reps.value_or(100), o.seed, o.threads);
    } else if (!o.config.empty()) {
        auto spec = load_experiment_config(o.config);
        if (o.reps) spec.reps = *o.reps;
        spec.threads = o.threads;
        experiments.push_back(std::move(spec));
        inputs["config"] = input_record(o.config);
    } else {
        throw InvalidArgument("simulate needs --preset or --config");
    }
    std::vector<ReportFormat> formats;
    for (const auto& f : o.formats) formats.push_back(parse_report_format(f));

    Artifacts artifacts{o.output};
    for (auto& spec : experiments) {
        if (!o.alphas.empty()) spec.alphas = o.alphas;
        spec.validate();
        const auto summary = run_experiment(spec);
        for (const auto f : formats) {
            artifacts.write(spec.name + std::string(file_extension(f)), render_report(summary, f));
        }
        out << "simulated " << spec.name << ": " << spec.reps << " replicates x " << spec.methods.size()
            << " methods\n";
    }
    json config{{"preset", o.preset}, {"config", o.config},     {"reps", o.reps ? json(*o.reps) : json(nullptr)},
                {"seed", o.seed},     {"threads", o.threads},   {"alphas", o.alphas},
                {"formats", o.formats}};
    artifacts.write_manifest("simulate", config, o.seed, inputs);
    return kOk;
}

struct BaselineOptions {
    MatrixOptions matrix;
    std::string method = "storey";
    std::string pvalues = "ttest";
    double alpha = 0.05;
    double lambda = 0.5;
    std::size_t draws = 10;
    std::uint64_t seed = 1;
    std::size_t threads = 1;
    std::string output = ".";
};

int cmd_baseline(const BaselineOptions& o, std::ostream& out) {
    if (o.method != "bh" && o.method != "storey") throw InvalidArgument("--method must be bh or storey");
    const auto input = input_record(o.matrix.input);
    const auto ingested = load_matrix(o.matrix);
    const auto& data = ingested.dataset;

    PValueVector p;
    switch (parse_pvalue_method(o.pvalues)) {
        case PValueMethod::TTest: p = t_pvalues(data, true); break;
        case PValueMethod::RankSum: p = rank_sum_pvalues(data); break;
        case PValueMethod::PooledPermutation:
            p = pooled_permutation_pvalues(data, ScoreKind::AbsT, o.draws, o.seed, o.threads);
            break;
    }
    const auto q = o.method == "bh" ? qvalues_with_pi0(p.p, 1.0) : storey_qvalues(p.p, o.lambda);
    const auto rejected_ids = o.method == "bh" ? bh_reject(p.p, o.alpha) : reject_by_qvalue(q.q, o.alpha);
    std::vector<std::uint8_t> rejected(data.m(), 0);
    for (const auto id : rejected_ids) rejected[id] = 1;

    std::ostringstream tsv;
    tsv << "id\tp\tq\trejected\n";
    for (std::size_t j = 0; j < data.m(); ++j) {
        tsv << data.ids()[j] << '\t' << format_double(p.p[j]) << '\t' << format_double(q.q[j]) << '\t'
            << int{rejected[j]} << '\n';
    }
    json summary{{"method", o.method},
                 {"pvalues", std::string(to_string(p.method))},
                 {"alpha", o.alpha},
                 {"pi0", q.pi0},
                 {"rejections", rejected_ids.size()},
                 {"degenerate_tests", p.degenerate},
                 {"m", data.m()},
                 {"dropped_rows", ingested.dropped_rows},
                 {"seed", o.seed},
                 {"manifest", "manifest.json"}};
    if (o.method == "storey") summary["lambda"] = o.lambda;

    Artifacts artifacts{o.output};
    artifacts.write("baseline.tsv", tsv.str());
    artifacts.write("summary.json", summary.dump(2) + "\n");
    json config{{"matrix", to_json(o.matrix)}, {"method", o.method}, {"pvalues", o.pvalues}, {"alpha", o.alpha},
                {"lambda", o.lambda},          {"draws", o.draws},   {"seed", o.seed},       {"threads", o.threads}};
    artifacts.write_manifest("baseline", config, o.seed, json{{"matrix", input}});
    out << "tdfdr baseline: " << rejected_ids.size() << " of " << data.m() << " rejected (" << o.method << ", "
        << to_string(p.method) << ")\n";
    return kOk;
}

int cmd_report(const std::string& input, const std::vector<std::string>& formats, const std::string& output,
               std::ostream& out) {
    const auto summary = summary_from_json(read_file(input));
    if (output.empty()) {
        for (const auto& f : formats) out << render_report(summary, parse_report_format(f));
        return kOk;
    }
    Artifacts artifacts{output};
    for (const auto& f : formats) {
        const auto fmt = parse_report_format(f);
        artifacts.write(summary.spec.name + std::string(file_extension(fmt)), render_report(summary, fmt));
    }
    artifacts.write_manifest("report", json{{"formats", formats}}, summary.spec.seed,
                             json{{"report", input_record(input)}});
    return kOk;
}

void add_matrix_options(CLI::App* cmd, MatrixOptions& m) {
    cmd->add_option("--input", m.input, "Delimited matrix: optional id column, then one column per sample");
    cmd->add_option("--delimiter", m.delimiter, "Field delimiter: tab, comma, or a single character");
    cmd->add_option("--cases", m.cases, "Case columns: 1-based indices/ranges over data columns, or header names");
    cmd->add_option("--controls", m.controls, "Control columns, same syntax as --cases");
    cmd->add_flag("--no-header", m.no_header, "Input has no header line");
    cmd->add_flag("--no-id-column", m.no_id_column, "First column is data, not a test identifier");
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Target-decoy false discovery rate control for two-group multiple testing", "tdfdr"};
    app.require_subcommand(1);
    app.set_version_flag("--version", TDFDR_VERSION);

    RunOptions run_opts;
    std::string replay;
    std::string run_output;
    auto* run_cmd = app.add_subcommand("run", "Run a target-decoy procedure on a matrix");
    add_matrix_options(run_cmd, run_opts.matrix);
    run_cmd->add_option("--score", run_opts.score, "Score: t, signed-t or ranksum")
        ->check(CLI::IsMember({"t", "abs-t", "signed-t", "tsigned", "ranksum", "rank-sum"}));
    run_cmd->add_option("--variant", run_opts.variant, "standard, simplified or adaptive")
        ->check(CLI::IsMember({"standard", "simplified", "adaptive"}));
    run_cmd->add_option("--alpha", run_opts.alpha, "FDR level")->check(CLI::Range(0.0, 1.0));
    run_cmd->add_option("--r", run_opts.r, "Decoy-to-target odds for the standard variant")
        ->check(CLI::Range(1.0, 1e9));
    run_cmd->add_option("--permutations", run_opts.permutations, "Maximum decoys per test (t - 1)")
        ->check(CLI::Range(std::size_t{1}, std::size_t{1'000'000}));
    run_cmd->add_option("--seed", run_opts.seed, "Master random seed");
    run_cmd->add_option("--r-grid", run_opts.r_grid, "Adaptive r grid")->delimiter(',');
    run_cmd->add_option("--n2", run_opts.n2, "Adaptive part-1 group size (0 = automatic)");
    run_cmd->add_option("--threads", run_opts.threads, "Worker threads (0 = all cores)");
    run_cmd->add_option("--output", run_output, "Output directory");
    run_cmd->add_option("--replay", replay, "Re-run the configuration recorded in a manifest.json");

    SimulateOptions sim_opts;
    std::size_t sim_reps = 0;
    auto* sim_cmd = app.add_subcommand("simulate", "Monte-Carlo FDR and power experiments");
    sim_cmd->add_option("--preset", sim_opts.preset, "table1-2, table3-4 or table5");
    sim_cmd->add_option("--config", sim_opts.config, "Experiment file of key = value lines");
    auto* reps_opt = sim_cmd->add_option("--reps", sim_reps, "Replicates")
                         ->check(CLI::Range(std::size_t{2}, std::size_t{100'000'000}));
    sim_cmd->add_option("--seed", sim_opts.seed, "Master random seed");
    sim_cmd->add_option("--threads", sim_opts.threads, "Worker threads (0 = all cores)");
    sim_cmd->add_option("--alphas,--alpha", sim_opts.alphas, "Override the alpha grid")
        ->delimiter(',')
        ->check(CLI::Range(0.0, 1.0));
    sim_cmd->add_option("--formats", sim_opts.formats, "Report formats: tsv, json, markdown")->delimiter(',');
    sim_cmd->add_option("--output", sim_opts.output, "Output directory");

    BaselineOptions base_opts;
    auto* base_cmd = app.add_subcommand("baseline", "BH or Storey q-value control on t, rank-sum or pooled p-values");
    add_matrix_options(base_cmd, base_opts.matrix);
    base_cmd->add_option("--method", base_opts.method, "bh or storey")->check(CLI::IsMember({"bh", "storey"}));
    base_cmd->add_option("--pvalues", base_opts.pvalues, "ttest, ranksum or permutation")
        ->check(CLI::IsMember({"ttest", "ranksum", "permutation"}));
    base_cmd->add_option("--alpha", base_opts.alpha, "FDR level")->check(CLI::Range(0.0, 1.0));
    base_cmd->add_option("--lambda", base_opts.lambda, "Storey lambda")->check(CLI::Range(0.0, 0.999999));
    base_cmd->add_option("--draws", base_opts.draws, "Pooled permutation draws per test")
        ->check(CLI::Range(std::size_t{1}, std::size_t{1'000'000}));
    base_cmd->add_option("--seed", base_opts.seed, "Master random seed");
    base_cmd->add_option("--threads", base_opts.threads, "Worker threads (0 = all cores)");
    base_cmd->add_option("--output", base_opts.output, "Output directory");

    std::string report_input;
    std::vector<std::string> report_formats{"markdown"};
    std::string report_output;
    auto* report_cmd = app.add_subcommand("report", "Re-render a stored JSON experiment report");
    report_cmd->add_option("--input", report_input, "JSON report written by simulate")->required();
    report_cmd->add_option("--format,--formats", report_formats, "tsv, json and/or markdown")
        ->delimiter(',')
        ->check(CLI::IsMember({"tsv", "json", "markdown", "md"}));
    report_cmd->add_option("--output", report_output, "Output directory (stdout when omitted)");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::Success& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ConversionError& e) {
        app.exit(e, out, err);
        return kInvalidValue;
    } catch (const CLI::ValidationError& e) {
        app.exit(e, out, err);
        return kInvalidValue;
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return kUsage;
    }

    try {
        if (run_cmd->parsed()) return cmd_run(run_opts, replay, run_output, out);
        if (sim_cmd->parsed()) {
            if (reps_opt->count() > 0) sim_opts.reps = sim_reps;
            return cmd_simulate(sim_opts, out);
        }
        if (base_cmd->parsed()) return cmd_baseline(base_opts, out);
        if (report_cmd->parsed()) return cmd_report(report_input, report_formats, report_output, out);
    } catch (const InvalidArgument& e) {
        err << "tdfdr: invalid argument: " << e.what() << "\n";
        return kInvalidValue;
    } catch (const IoError& e) {
        err << "tdfdr: I/O error: " << e.what() << "\n";
        return kIoFailure;
    } catch (const fs::filesystem_error& e) {
        err << "tdfdr: I/O error: " << e.what() << "\n";
        return kIoFailure;
    } catch (const DataError& e) {
        err << "tdfdr: data error: " << e.what() << "\n";
        return kDataError;
    } catch (const DegenerateVariance& e) {
        err << "tdfdr: data error: " << e.what() << "\n";
        return kDataError;
    } catch (const json::exception& e) {
        err << "tdfdr: data error: " << e.what() << "\n";
        return kDataError;
    } catch (const std::exception& e) {
        err << "tdfdr: internal error: " << e.what() << "\n";
        return kInternal;
    }
    return kUsage;
}

}  // namespace tdfdr::cli
