#pragma once

#include <filesystem>
#include <istream>
#include <string>
#include <vector>

#include "smctrack/geometry.hpp"
#include "smctrack/metrics.hpp"
#include "smctrack/tracker.hpp"

namespace smctrack {

/// One 10-field MOTChallenge CSV line:
/// frame,id,bb_left,bb_top,bb_width,bb_height,conf,x,y,z
struct MotCsvRecord {
  int frame = 0;
  std::int64_t id = -1;  // -1 for raw detections
  double bb_left = 0.0;
  double bb_top = 0.0;
  double bb_width = 0.0;
  double bb_height = 0.0;
  double conf = 0.0;
  double x = -1.0;
  double y = -1.0;
  double z = -1.0;
};

std::vector<MotCsvRecord> parse_mot_csv(std::istream& in, const std::string& source);
std::vector<MotCsvRecord> parse_mot_csv(const std::filesystem::path& path);

/// Detections grouped by frame in ascending order; within a frame the file
/// order is preserved. Scores must lie in [0, 1] and boxes must have positive
/// size, both reported with the offending line number.
std::vector<FrameObservations> parse_detection_csv(const std::filesystem::path& path);
std::vector<FrameObservations> parse_detection_stream(std::istream& in,
                                                      const std::string& source);

std::vector<GroundTruthEntry> parse_ground_truth_csv(const std::filesystem::path& path);
std::vector<GroundTruthEntry> parse_ground_truth_stream(std::istream& in,
                                                        const std::string& source);

std::vector<TrackOutput> parse_results_csv(const std::filesystem::path& path);
std::vector<TrackOutput> parse_results_stream(std::istream& in, const std::string& source);

/// One line per emission, sorted by (frame, id); floats use the shortest
/// round-trip decimal form so write/parse is an exact identity.
std::string format_results_csv(std::vector<TrackOutput> results);
void write_results_csv(const std::vector<TrackOutput>& results,
                       const std::filesystem::path& path);

std::string format_ground_truth_csv(std::vector<GroundTruthEntry> entries);
void write_ground_truth_csv(const std::vector<GroundTruthEntry>& entries,
                            const std::filesystem::path& path);

std::string format_detection_csv(const std::vector<FrameObservations>& frames);
void write_detection_csv(const std::vector<FrameObservations>& frames,
                         const std::filesystem::path& path);

}  // namespace smctrack
