#include "texfuse/experiment.hpp"

#include "texfuse/error.hpp"
#include "numeric_io.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace texfuse {

namespace fs = std::filesystem;

// results.txt layout, tab separated:
//   texfuse-results 1
//   seed <n>
//   folds <n>
//   config <json>
//   descriptor <id> mean <x> folds <x...>
//   fusion <name> mean <x> members <id,id,...> folds <x...>

namespace {

constexpr const char* kHeader = "texfuse-results\t1";

std::vector<std::string> split_tabs(const std::string& line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto tab = line.find('\t', start);
        out.push_back(line.substr(start, tab - start));
        if (tab == std::string::npos) break;
        start = tab + 1;
    }
    return out;
}

std::string fixed2(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

void write_row(std::ostream& out, const char* kind, const AccuracyRow& row) {
    out << kind << '\t' << row.id << "\tmean\t" << detail::format_double(row.mean_accuracy);
    if (row.members.size() || std::string(kind) == "fusion") {
        out << "\tmembers\t";
        for (std::size_t i = 0; i < row.members.size(); ++i) out << (i ? "," : "") << row.members[i];
    }
    out << "\tfolds";
    for (double a : row.fold_accuracy) out << '\t' << detail::format_double(a);
    out << '\n';
}

AccuracyRow parse_row(const std::vector<std::string>& cells, int line_no) {
    auto bad = [&] { return Error("results file line " + std::to_string(line_no) + " is malformed"); };
    if (cells.size() < 5 || cells[2] != "mean") throw bad();
    AccuracyRow row;
    row.id = cells[1];
    row.mean_accuracy = detail::parse_double(cells[3]);
    std::size_t i = 4;
    if (cells[i] == "members") {
        if (cells.size() < 7) throw bad();
        std::istringstream ms(cells[i + 1]);
        std::string m;
        while (std::getline(ms, m, ',')) row.members.push_back(m);
        i += 2;
    }
    if (cells[i] != "folds") throw bad();
    for (++i; i < cells.size(); ++i) row.fold_accuracy.push_back(detail::parse_double(cells[i]));
    return row;
}

void atomic_write(const fs::path& path, const std::string& text) {
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw Error("cannot write '" + path.string() + "'");
        out << text;
        if (!out) throw Error("failed writing '" + path.string() + "'");
    }
    fs::rename(tmp, path);
}

std::string pad(const std::string& s, std::size_t w) { return s.size() >= w ? s : s + std::string(w - s.size(), ' '); }

}  // namespace

void write_report(const ExperimentReport& report, const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw Error("cannot create output directory '" + dir.string() + "'");
    std::ostringstream out;
    out << kHeader << '\n';
    out << "seed\t" << report.seed << '\n';
    out << "folds\t" << report.folds << '\n';
    out << "config\t" << report.config_snapshot << '\n';
    for (const auto& row : report.descriptors) write_row(out, "descriptor", row);
    for (const auto& row : report.fusions) write_row(out, "fusion", row);
    atomic_write(dir / "results.txt", out.str());
    atomic_write(dir / "table.txt", render_tables(report));
}

ExperimentReport read_report(const fs::path& results_file) {
    std::ifstream in(results_file);
    if (!in) throw Error("cannot read '" + results_file.string() + "'");
    std::string line;
    if (!std::getline(in, line) || line != kHeader) {
        throw Error("'" + results_file.string() + "' is not a texfuse results file");
    }
    ExperimentReport r;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto tab = line.find('\t');
        const std::string key = line.substr(0, tab);
        const std::string rest = tab == std::string::npos ? std::string{} : line.substr(tab + 1);
        if (key == "seed") {
            r.seed = static_cast<std::uint64_t>(std::stoull(rest));
        } else if (key == "folds") {
            r.folds = static_cast<int>(detail::parse_int(rest));
        } else if (key == "config") {
            r.config_snapshot = rest;
        } else if (key == "descriptor") {
            r.descriptors.push_back(parse_row(split_tabs(line), line_no));
        } else if (key == "fusion") {
            r.fusions.push_back(parse_row(split_tabs(line), line_no));
        } else {
            throw Error("results file line " + std::to_string(line_no) + " has unknown key '" + key + "'");
        }
    }
    return r;
}

std::string render_tables(const ExperimentReport& report) {
    std::ostringstream out;
    out << "Seed " << report.seed << ", " << report.folds << "-fold cross-validation\n\n";

    out << "Stand-alone descriptors (accuracy %)\n";
    std::vector<std::size_t> widths;
    std::string header = pad("", 10);
    std::string values = pad("Accuracy", 10);
    for (const auto& row : report.descriptors) {
        const std::size_t w = std::max<std::size_t>(row.id.size(), 6) + 2;
        widths.push_back(w);
        header += pad(row.id, w);
        values += pad(fixed2(row.mean_accuracy), w);
    }
    out << header << '\n' << values << '\n';
    for (int f = 0; f < report.folds; ++f) {
        std::string line = pad("fold " + std::to_string(f), 10);
        for (std::size_t i = 0; i < report.descriptors.size(); ++i) {
            const auto& acc = report.descriptors[i].fold_accuracy;
            line += pad(static_cast<std::size_t>(f) < acc.size() ? fixed2(acc[f]) : "-", widths[i]);
        }
        out << line << '\n';
    }

    if (!report.fusions.empty()) {
        std::size_t name_w = 8;
        for (const auto& row : report.fusions) name_w = std::max(name_w, row.id.size() + 2);
        out << "\nEnsembles (accuracy %)\n";
        out << pad("Method", name_w) << pad("Accuracy", 10) << "Members\n";
        for (const auto& row : report.fusions) {
            std::string members;
            for (std::size_t i = 0; i < row.members.size(); ++i) members += (i ? " + " : "") + row.members[i];
            out << pad(row.id, name_w) << pad(fixed2(row.mean_accuracy), 10) << members << '\n';
        }
    }
    return out.str();
}

}  // namespace texfuse
