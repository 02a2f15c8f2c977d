#include "tdfdr/report.hpp"

#include <cmath>
#include <iomanip>
#include <sstream>

#include <json.hpp>

#include "tdfdr/error.hpp"
#include "tdfdr/io.hpp"

namespace tdfdr {

using nlohmann::json;

ReportFormat parse_report_format(std::string_view name) {
    if (name == "tsv") return ReportFormat::Tsv;
    if (name == "json") return ReportFormat::Json;
    if (name == "markdown" || name == "md") return ReportFormat::Markdown;
    throw InvalidArgument("unknown report format '" + std::string(name) + "'");
}

std::string_view file_extension(ReportFormat f) noexcept {
    switch (f) {
        case ReportFormat::Tsv: return ".tsv";
        case ReportFormat::Json: return ".json";
        case ReportFormat::Markdown: return ".md";
    }
    return "";
}

namespace {

constexpr std::string_view kTsvHeader =
    "method\talpha\tmean_fdp\tfdp_se\tmean_rejections\tmean_true_rejections\treplicates\tfailures\tstarred";

std::vector<std::string_view> split(std::string_view s, char d) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = s.find(d, start);
        if (pos == std::string_view::npos) {
            out.push_back(s.substr(start));
            return out;
        }
        out.push_back(s.substr(start, pos - start));
        start = pos + 1;
    }
}

std::size_t parse_size(std::string_view s) {
    const double v = parse_double(s);
    if (v < 0 || v != std::floor(v)) throw DataError("expected a count, got '" + std::string(s) + "'");
    return static_cast<std::size_t>(v);
}

std::string fixed(double v, int digits) {
    std::ostringstream ss;
    ss << std::fixed << std::setprecision(digits) << v;
    return ss.str();
}

json spec_to_json(const ExperimentSpec& spec) {
    json methods = json::array();
    for (const auto& m : spec.methods) methods.push_back(m.tag);
    // threads is an execution detail and stays out of reports
    return json{{"name", spec.name},
                {"model", std::string(to_string(spec.sim.model))},
                {"rho", spec.sim.rho},
                {"m", spec.sim.m},
                {"n1", spec.sim.n_cases},
                {"n0", spec.sim.n_controls},
                {"false_fraction", spec.sim.false_fraction},
                {"effect_cycle", spec.sim.effective_cycle()},
                {"reps", spec.reps},
                {"alphas", spec.alphas},
                {"methods", methods},
                {"seed", spec.seed},
                {"max_failures", spec.max_failures}};
}

ExperimentSpec spec_from_json(const json& j) {
    ExperimentSpec spec;
    spec.name = j.at("name").get<std::string>();
    spec.sim.model = parse_sim_model(j.at("model").get<std::string>());
    spec.sim.rho = j.at("rho").get<double>();
    spec.sim.m = j.at("m").get<std::size_t>();
    spec.sim.n_cases = j.at("n1").get<std::size_t>();
    spec.sim.n_controls = j.at("n0").get<std::size_t>();
    spec.sim.false_fraction = j.at("false_fraction").get<double>();
    spec.sim.effect_cycle = j.at("effect_cycle").get<std::vector<double>>();
    spec.reps = j.at("reps").get<std::size_t>();
    spec.alphas = j.at("alphas").get<std::vector<double>>();
    spec.methods.clear();
    for (const auto& tag : j.at("methods")) spec.methods.push_back(parse_method(tag.get<std::string>()));
    spec.seed = j.at("seed").get<std::uint64_t>();
    spec.max_failures = j.at("max_failures").get<std::size_t>();
    return spec;
}

std::string render_json(const ExperimentSummary& summary) {
    json cells = json::array();
    for (const auto& c : summary.cells) {
        cells.push_back(json{{"method", c.method},
                             {"alpha", c.alpha},
                             {"mean_fdp", c.mean_fdp},
                             {"fdp_se", c.fdp_se},
                             {"mean_rejections", c.mean_rejections},
                             {"mean_true_rejections", c.mean_true_rejections},
                             {"replicates", c.replicates},
                             {"failures", c.failures},
                             {"aborted", c.aborted},
                             {"starred", c.starred},
                             {"first_error", c.first_error},
                             {"per_replicate",
                              {{"fdp", c.fdp}, {"rejections", c.rejections}, {"true_rejections", c.true_rejections}}}});
    }
    json doc{{"experiment", spec_to_json(summary.spec)}, {"cells", cells}};
    return doc.dump(2) + "\n";
}

std::string render_markdown(const ExperimentSummary& summary) {
    const auto& spec = summary.spec;
    std::ostringstream out;
    out << "## " << spec.name << "\n\n";
    out << "model " << to_string(spec.sim.model);
    if (spec.sim.model == SimModel::Normal) out << " (rho " << format_double(spec.sim.rho) << ")";
    out << ", m = " << spec.sim.m << ", n1 = " << spec.sim.n_cases << ", n0 = " << spec.sim.n_controls
        << ", false nulls " << format_double(spec.sim.false_fraction * 100) << "%, " << spec.reps
        << " replicates, seed " << spec.seed << "\n\n";

    auto table = [&](std::string_view title, auto&& cell_text) {
        out << "### " << title << "\n\n| method |";
        for (const double a : spec.alphas) out << " " << format_double(a) << " |";
        out << "\n|---|";
        for (std::size_t i = 0; i < spec.alphas.size(); ++i) out << "---:|";
        out << "\n";
        for (const auto& m : spec.methods) {
            out << "| " << m.tag << " |";
            for (const double a : spec.alphas) {
                const auto& c = summary.cell(m.tag, a);
                out << " " << (c.aborted ? std::string("aborted") : cell_text(c)) << (c.starred ? "*" : "") << " |";
            }
            out << "\n";
        }
        out << "\n";
    };
    table("Mean FDP", [](const CellSummary& c) { return fixed(c.mean_fdp, 3); });
    table("Mean rejections", [](const CellSummary& c) { return fixed(c.mean_rejections, 1); });

    double max_se = 0.0;
    for (const auto& c : summary.cells) max_se = std::max(max_se, c.fdp_se);
    out << "Largest standard error of a mean FDP: " << fixed(max_se, 4)
        << ". Cells whose mean FDP exceeds alpha are marked with *.\n";
    return out.str();
}

}  // namespace

std::vector<SummaryRow> summary_rows(const ExperimentSummary& summary) {
    std::vector<SummaryRow> rows;
    for (const auto& c : summary.cells) {
        rows.push_back(SummaryRow{c.method, c.alpha, c.mean_fdp, c.fdp_se, c.mean_rejections, c.mean_true_rejections,
                                  c.replicates, c.failures, c.starred});
    }
    return rows;
}

std::string render_summary_tsv(const std::vector<SummaryRow>& rows) {
    std::ostringstream out;
    out << kTsvHeader << '\n';
    for (const auto& r : rows) {
        out << r.method << '\t' << format_double(r.alpha) << '\t' << format_double(r.mean_fdp) << '\t'
            << format_double(r.fdp_se) << '\t' << format_double(r.mean_rejections) << '\t'
            << format_double(r.mean_true_rejections) << '\t' << r.replicates << '\t' << r.failures << '\t'
            << (r.starred ? "yes" : "no") << '\n';
    }
    return out.str();
}

std::vector<SummaryRow> parse_summary_tsv(std::string_view text) {
    auto lines = split(text, '\n');
    if (!lines.empty() && lines.back().empty()) lines.pop_back();
    if (lines.empty() || lines.front() != kTsvHeader) throw DataError("summary TSV: missing or unexpected header");
    std::vector<SummaryRow> rows;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const auto f = split(lines[i], '\t');
        if (f.size() != 9) throw DataError("summary TSV line " + std::to_string(i + 1) + ": expected 9 fields");
        if (f[8] != "yes" && f[8] != "no") {
            throw DataError("summary TSV line " + std::to_string(i + 1) + ": starred must be yes or no");
        }
        rows.push_back(SummaryRow{std::string(f[0]), parse_double(f[1]), parse_double(f[2]), parse_double(f[3]),
                                  parse_double(f[4]), parse_double(f[5]), parse_size(f[6]), parse_size(f[7]),
                                  f[8] == "yes"});
    }
    return rows;
}

std::string render_report(const ExperimentSummary& summary, ReportFormat format) {
    switch (format) {
        case ReportFormat::Tsv: return render_summary_tsv(summary_rows(summary));
        case ReportFormat::Json: return render_json(summary);
        case ReportFormat::Markdown: return render_markdown(summary);
    }
    throw InvalidArgument("unknown report format");
}

void emit_report(const ExperimentSummary& summary, ReportFormat format, const std::filesystem::path& path) {
    write_file(path, render_report(summary, format));
}

ExperimentSummary summary_from_json(std::string_view text) {
    try {
        const auto doc = json::parse(text);
        ExperimentSummary s;
        s.spec = spec_from_json(doc.at("experiment"));
        for (const auto& c : doc.at("cells")) {
            CellSummary cell;
            cell.method = c.at("method").get<std::string>();
            cell.alpha = c.at("alpha").get<double>();
            cell.mean_fdp = c.at("mean_fdp").get<double>();
            cell.fdp_se = c.at("fdp_se").get<double>();
            cell.mean_rejections = c.at("mean_rejections").get<double>();
            cell.mean_true_rejections = c.at("mean_true_rejections").get<double>();
            cell.replicates = c.at("replicates").get<std::size_t>();
            cell.failures = c.at("failures").get<std::size_t>();
            cell.aborted = c.at("aborted").get<bool>();
            cell.starred = c.at("starred").get<bool>();
            cell.first_error = c.at("first_error").get<std::string>();
            const auto& pr = c.at("per_replicate");
            cell.fdp = pr.at("fdp").get<std::vector<double>>();
            cell.rejections = pr.at("rejections").get<std::vector<std::size_t>>();
            cell.true_rejections = pr.at("true_rejections").get<std::vector<std::size_t>>();
            s.cells.push_back(std::move(cell));
        }
        return s;
    } catch (const json::exception& e) {
        throw DataError(std::string("report JSON: ") + e.what());
    }
}

}  // namespace tdfdr
