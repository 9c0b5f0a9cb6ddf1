#pragma once

#include <filesystem>
#include <string>

#include "smctrack/metrics.hpp"

namespace smctrack {

/// Static bar chart of the [0, 1] metrics (MOTA clamped for display).
std::string render_metrics_svg(const MetricsReport& report);

void write_metrics_svg(const MetricsReport& report, const std::filesystem::path& path);

}  // namespace smctrack
