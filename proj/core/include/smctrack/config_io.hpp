#pragma once

#include <filesystem>
#include <istream>
#include <string>

#include "smctrack/tracker.hpp"

namespace smctrack {

/// Flat key=value file mirroring TrackerConfig field names. Lines starting
/// with '#' and blank lines are ignored; unknown keys are errors.
TrackerConfig parse_tracker_config(std::istream& in, const std::string& source,
                                   TrackerConfig base = {});
TrackerConfig load_tracker_config(const std::filesystem::path& path,
                                  TrackerConfig base = {});

std::string format_tracker_config(const TrackerConfig& config);
void save_tracker_config(const TrackerConfig& config, const std::filesystem::path& path);

}  // namespace smctrack
