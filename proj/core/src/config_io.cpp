#include "smctrack/config_io.hpp"

#include <fstream>

#include "smctrack/errors.hpp"
#include "text_util.hpp"

namespace smctrack {

namespace {

using detail::format_double;
using detail::parse_double;
using detail::parse_int;
using detail::trim;

bool parse_bool(std::string_view text, bool& out) {
  if (text == "true" || text == "1") {
    out = true;
    return true;
  }
  if (text == "false" || text == "0") {
    out = false;
    return true;
  }
  return false;
}

}  // namespace

TrackerConfig parse_tracker_config(std::istream& in, const std::string& source,
                                   TrackerConfig base) {
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    const auto trimmed = trim(line);
    if (trimmed.empty() || trimmed.front() == '#') continue;

    const auto eq = trimmed.find('=');
    if (eq == std::string_view::npos) {
      throw ParseError(source, line_number, "expected key=value");
    }
    const auto key = trim(trimmed.substr(0, eq));
    const auto value = trim(trimmed.substr(eq + 1));

    auto require_double = [&](double& out) {
      if (!parse_double(value, out)) {
        throw ParseError(source, line_number,
                         std::string(key) + " must be a number");
      }
    };
    auto require_int = [&](long long& out) {
      if (!parse_int(value, out)) {
        throw ParseError(source, line_number,
                         std::string(key) + " must be an integer");
      }
    };

    if (key == "gate_epsilon") {
      require_double(base.gate_epsilon);
    } else if (key == "new_track_threshold") {
      require_double(base.new_track_threshold);
    } else if (key == "match_cost_cap") {
      require_double(base.match_cost_cap);
    } else if (key == "det_floor") {
      require_double(base.det_floor);
    } else if (key == "lost_ttl") {
      long long v = 0;
      require_int(v);
      base.lost_ttl = static_cast<int>(v);
    } else if (key == "bank_capacity") {
      long long v = 0;
      require_int(v);
      if (v <= 0) {
        throw ParseError(source, line_number, "bank_capacity must be positive");
      }
      base.bank_capacity = static_cast<std::size_t>(v);
    } else if (key == "fusion_mode") {
      try {
        base.fusion_mode = parse_fusion_mode(std::string(value));
      } catch (const ConfigError& err) {
        throw ParseError(source, line_number, err.what());
      }
    } else if (key == "alpha") {
      require_double(base.alpha);
    } else if (key == "stage2_enabled") {
      if (!parse_bool(value, base.stage2_enabled)) {
        throw ParseError(source, line_number, "stage2_enabled must be true or false");
      }
    } else if (key == "stage2_appearance") {
      if (!parse_bool(value, base.stage2_appearance)) {
        throw ParseError(source, line_number, "stage2_appearance must be true or false");
      }
    } else if (key == "split_mode") {
      try {
        base.split_mode = parse_split_mode(std::string(value));
      } catch (const ConfigError& err) {
        throw ParseError(source, line_number, err.what());
      }
    } else if (key == "fixed_split_threshold") {
      require_double(base.fixed_split_threshold);
    } else if (key == "position_std_factor") {
      require_double(base.motion.position_std_factor);
    } else if (key == "velocity_std_factor") {
      require_double(base.motion.velocity_std_factor);
    } else {
      throw ParseError(source, line_number, "unknown key: " + std::string(key));
    }
  }
  base.validate();
  return base;
}

TrackerConfig load_tracker_config(const std::filesystem::path& path, TrackerConfig base) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open " + path.string() + " for reading");
  }
  return parse_tracker_config(in, path.string(), base);
}

std::string format_tracker_config(const TrackerConfig& config) {
  std::string out;
  out += "gate_epsilon=" + format_double(config.gate_epsilon) + "\n";
  out += "new_track_threshold=" + format_double(config.new_track_threshold) + "\n";
  out += "match_cost_cap=" + format_double(config.match_cost_cap) + "\n";
  out += "det_floor=" + format_double(config.det_floor) + "\n";
  out += "lost_ttl=" + std::to_string(config.lost_ttl) + "\n";
  out += "bank_capacity=" + std::to_string(config.bank_capacity) + "\n";
  out += "fusion_mode=" + to_string(config.fusion_mode) + "\n";
  out += "alpha=" + format_double(config.alpha) + "\n";
  out += std::string("stage2_enabled=") + (config.stage2_enabled ? "true" : "false") +
         "\n";
  out += std::string("stage2_appearance=") +
         (config.stage2_appearance ? "true" : "false") + "\n";
  out += "split_mode=" + to_string(config.split_mode) + "\n";
  out += "fixed_split_threshold=" + format_double(config.fixed_split_threshold) + "\n";
  out += "position_std_factor=" + format_double(config.motion.position_std_factor) + "\n";
  out += "velocity_std_factor=" + format_double(config.motion.velocity_std_factor) + "\n";
  return out;
}

void save_tracker_config(const TrackerConfig& config, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw IoError("cannot open " + path.string() + " for writing");
  }
  out << format_tracker_config(config);
  if (!out) {
    throw IoError("failed while writing " + path.string());
  }
}

}  // namespace smctrack
