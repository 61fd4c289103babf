#pragma once

#include <string>
#include <vector>

namespace larvae {

struct SvgChannel {
    std::string name;
    std::vector<double> values;
};

/// Deterministic static line chart: one polyline per channel, labeled axes,
/// fixed formatting. Byte-identical output for identical input.
std::string render_svg(const std::string& title, const std::vector<double>& x,
                       const std::vector<SvgChannel>& channels);

void emit_svg(const std::string& path, const std::string& title, const std::vector<double>& x,
              const std::vector<SvgChannel>& channels);

}  // namespace larvae
