#pragma once

#include <string>
#include <vector>

namespace larvae {

/// Writes the bundled scenario files (the demonstration runs plus the
/// equilibrium benchmark) into `dir`. Returns the paths written. Output is
/// byte-deterministic.
std::vector<std::string> write_fixtures(const std::string& dir);

/// The JSON text of one named fixture; throws ValidationError for an unknown
/// name. Names: baseline, fig1..fig7.
std::string fixture_text(const std::string& name);

std::vector<std::string> fixture_names();

}  // namespace larvae
