#pragma once

#include <string>
#include <vector>

namespace larvae {

/// Run provenance echoed at the top of every output file as '#' comments.
struct RunManifest {
    std::string subcommand;
    std::string scenario_path;
    std::string controller;
    std::string out_path;
    std::vector<std::pair<std::string, std::string>> extra;
};

/// Column-oriented CSV writer with deterministic numeric formatting.
class CsvWriter {
public:
    void comment(const std::string& line);
    void manifest(const RunManifest& m);
    void columns(std::vector<std::string> names);
    void row(const std::vector<double>& values);
    void write(const std::string& path) const;
    std::string str() const;

private:
    std::vector<std::string> comments_;
    std::vector<std::string> names_;
    std::vector<std::vector<double>> rows_;
};

std::string format_double(double v);

}  // namespace larvae
