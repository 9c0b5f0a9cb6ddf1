#include "smctrack/mot_csv.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

#include "smctrack/errors.hpp"
#include "text_util.hpp"

namespace smctrack {

namespace {

using detail::format_double;
using detail::parse_double;
using detail::parse_int;
using detail::split;
using detail::trim;

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open " + path.string() + " for reading");
  }
  return in;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw IoError("cannot open " + path.string() + " for writing");
  }
  out << content;
  if (!out) {
    throw IoError("failed while writing " + path.string());
  }
}

MotCsvRecord parse_record_line(std::string_view line, const std::string& source,
                               std::size_t line_number) {
  const auto fields = split(line, ',');
  if (fields.size() != 10) {
    throw ParseError(source, line_number,
                     "expected 10 comma-separated fields, got " +
                         std::to_string(fields.size()));
  }
  MotCsvRecord record;
  long long frame = 0, id = 0;
  if (!parse_int(trim(fields[0]), frame)) {
    throw ParseError(source, line_number, "frame is not an integer");
  }
  if (!parse_int(trim(fields[1]), id)) {
    throw ParseError(source, line_number, "id is not an integer");
  }
  record.frame = static_cast<int>(frame);
  record.id = id;

  double* const numeric[] = {&record.bb_left, &record.bb_top,  &record.bb_width,
                             &record.bb_height, &record.conf,  &record.x,
                             &record.y,        &record.z};
  static const char* const names[] = {"bb_left", "bb_top", "bb_width", "bb_height",
                                      "conf",    "x",      "y",        "z"};
  for (std::size_t i = 0; i < 8; ++i) {
    if (!parse_double(trim(fields[i + 2]), *numeric[i])) {
      throw ParseError(source, line_number,
                       std::string(names[i]) + " is not a number");
    }
  }

  if (record.frame < 1) {
    throw ParseError(source, line_number, "frame index must be >= 1");
  }
  if (!(record.bb_width > 0.0) || !(record.bb_height > 0.0)) {
    throw ParseError(source, line_number, "box width and height must be positive");
  }
  return record;
}

}  // namespace

std::vector<MotCsvRecord> parse_mot_csv(std::istream& in, const std::string& source) {
  std::vector<MotCsvRecord> records;
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    const auto trimmed = trim(line);
    if (trimmed.empty()) {
      continue;
    }
    records.push_back(parse_record_line(trimmed, source, line_number));
  }
  return records;
}

std::vector<MotCsvRecord> parse_mot_csv(const std::filesystem::path& path) {
  auto in = open_input(path);
  return parse_mot_csv(in, path.string());
}

std::vector<FrameObservations> parse_detection_stream(std::istream& in,
                                                      const std::string& source) {
  std::vector<MotCsvRecord> records;
  std::string line;
  std::size_t line_number = 0;
  std::vector<std::size_t> line_of_record;
  while (std::getline(in, line)) {
    ++line_number;
    const auto trimmed = trim(line);
    if (trimmed.empty()) continue;
    records.push_back(parse_record_line(trimmed, source, line_number));
    line_of_record.push_back(line_number);
  }

  std::map<int, FrameObservations> by_frame;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& record = records[i];
    if (record.conf < 0.0 || record.conf > 1.0) {
      throw ParseError(source, line_of_record[i],
                       "detection confidence must lie in [0, 1]");
    }
    auto& frame = by_frame[record.frame];
    frame.frame = record.frame;
    frame.detections.push_back(Detection{
        BoundingBox{record.bb_left, record.bb_top, record.bb_width, record.bb_height},
        record.conf, record.frame, std::nullopt});
  }

  std::vector<FrameObservations> frames;
  frames.reserve(by_frame.size());
  for (auto& [_, frame] : by_frame) {
    frames.push_back(std::move(frame));
  }
  return frames;
}

std::vector<FrameObservations> parse_detection_csv(const std::filesystem::path& path) {
  auto in = open_input(path);
  return parse_detection_stream(in, path.string());
}

std::vector<GroundTruthEntry> parse_ground_truth_stream(std::istream& in,
                                                        const std::string& source) {
  std::vector<GroundTruthEntry> entries;
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    const auto trimmed = trim(line);
    if (trimmed.empty()) continue;
    const MotCsvRecord record = parse_record_line(trimmed, source, line_number);
    if (record.id < 1) {
      throw ParseError(source, line_number, "ground-truth identity must be >= 1");
    }
    entries.push_back(GroundTruthEntry{
        record.frame, record.id,
        BoundingBox{record.bb_left, record.bb_top, record.bb_width, record.bb_height}});
  }
  return entries;
}

std::vector<GroundTruthEntry> parse_ground_truth_csv(const std::filesystem::path& path) {
  auto in = open_input(path);
  return parse_ground_truth_stream(in, path.string());
}

std::vector<TrackOutput> parse_results_stream(std::istream& in, const std::string& source) {
  std::vector<TrackOutput> results;
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    const auto trimmed = trim(line);
    if (trimmed.empty()) continue;
    const MotCsvRecord record = parse_record_line(trimmed, source, line_number);
    if (record.id < 1) {
      throw ParseError(source, line_number, "result track id must be >= 1");
    }
    results.push_back(TrackOutput{
        record.frame, record.id,
        BoundingBox{record.bb_left, record.bb_top, record.bb_width, record.bb_height},
        record.conf});
  }
  return results;
}

std::vector<TrackOutput> parse_results_csv(const std::filesystem::path& path) {
  auto in = open_input(path);
  return parse_results_stream(in, path.string());
}

std::string format_results_csv(std::vector<TrackOutput> results) {
  std::sort(results.begin(), results.end(), [](const TrackOutput& a, const TrackOutput& b) {
    return std::tie(a.frame, a.id) < std::tie(b.frame, b.id);
  });
  std::string out;
  for (const auto& r : results) {
    out += std::to_string(r.frame);
    out += ',';
    out += std::to_string(r.id);
    out += ',';
    out += format_double(r.box.left);
    out += ',';
    out += format_double(r.box.top);
    out += ',';
    out += format_double(r.box.width);
    out += ',';
    out += format_double(r.box.height);
    out += ',';
    out += format_double(r.score);
    out += ",-1,-1,-1\n";
  }
  return out;
}

void write_results_csv(const std::vector<TrackOutput>& results,
                       const std::filesystem::path& path) {
  write_file(path, format_results_csv(results));
}

std::string format_ground_truth_csv(std::vector<GroundTruthEntry> entries) {
  std::sort(entries.begin(), entries.end(),
            [](const GroundTruthEntry& a, const GroundTruthEntry& b) {
              return std::tie(a.frame, a.identity) < std::tie(b.frame, b.identity);
            });
  std::string out;
  for (const auto& e : entries) {
    out += std::to_string(e.frame);
    out += ',';
    out += std::to_string(e.identity);
    out += ',';
    out += format_double(e.box.left);
    out += ',';
    out += format_double(e.box.top);
    out += ',';
    out += format_double(e.box.width);
    out += ',';
    out += format_double(e.box.height);
    out += ",1,-1,-1,-1\n";
  }
  return out;
}

void write_ground_truth_csv(const std::vector<GroundTruthEntry>& entries,
                            const std::filesystem::path& path) {
  write_file(path, format_ground_truth_csv(entries));
}

std::string format_detection_csv(const std::vector<FrameObservations>& frames) {
  std::string out;
  for (const auto& frame : frames) {
    for (const auto& det : frame.detections) {
      out += std::to_string(frame.frame);
      out += ",-1,";
      out += format_double(det.box.left);
      out += ',';
      out += format_double(det.box.top);
      out += ',';
      out += format_double(det.box.width);
      out += ',';
      out += format_double(det.box.height);
      out += ',';
      out += format_double(det.score);
      out += ",-1,-1,-1\n";
    }
  }
  return out;
}

void write_detection_csv(const std::vector<FrameObservations>& frames,
                         const std::filesystem::path& path) {
  write_file(path, format_detection_csv(frames));
}

}  // namespace smctrack
