#pragma once

#include <filesystem>
#include <istream>
#include <string>

#include "smctrack/slm.hpp"

namespace smctrack {

/// Textual tensor archive for the SLM weights and extractor settings.
/// Layout (one tensor block per projection; values are shortest round-trip
/// decimals, one row per line):
///
///   smctrack-slm v1
///   extractor_channels <int>
///   extractor_patch_width <int>
///   extractor_patch_height <int>
///   extractor_seed <uint64>
///   d_k <int>
///   d <int>
///   tensor <name> <rows> <cols>
///   <v ... v>
///   ...
///   end
///
/// Tensor names: w_query_0..3, w_key_0..3, w_value_0..3, w_fc.
std::string format_slm_model(const SlmModel& model);
void save_slm_model(const SlmModel& model, const std::filesystem::path& path);

SlmModel parse_slm_model(std::istream& in, const std::string& source);
SlmModel load_slm_model(const std::filesystem::path& path);

}  // namespace smctrack
