#include "larvae/csv.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "larvae/errors.hpp"
#include "larvae/version.hpp"

namespace larvae {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

void CsvWriter::comment(const std::string& line) { comments_.push_back(line); }

void CsvWriter::manifest(const RunManifest& m) {
    comment(std::string(kToolName) + " " + kVersion);
    comment("subcommand: " + m.subcommand);
    if (!m.scenario_path.empty()) comment("scenario: " + m.scenario_path);
    if (!m.controller.empty()) comment("controller: " + m.controller);
    if (!m.out_path.empty()) comment("out: " + m.out_path);
    comment("deterministic: true");
    for (const auto& kv : m.extra) comment(kv.first + ": " + kv.second);
}

void CsvWriter::columns(std::vector<std::string> names) { names_ = std::move(names); }

void CsvWriter::row(const std::vector<double>& values) { rows_.push_back(values); }

std::string CsvWriter::str() const {
    std::ostringstream out;
    for (const auto& c : comments_) out << "# " << c << "\n";
    for (std::size_t i = 0; i < names_.size(); ++i)
        out << names_[i] << (i + 1 < names_.size() ? "," : "");
    out << "\n";
    for (const auto& r : rows_) {
        for (std::size_t i = 0; i < r.size(); ++i)
            out << format_double(r[i]) << (i + 1 < r.size() ? "," : "");
        out << "\n";
    }
    return out.str();
}

void CsvWriter::write(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot write '" + path + "'");
    out << str();
}

}  // namespace larvae
