#include "smctrack/sidecar.hpp"

#include <cmath>
#include <fstream>
#include <map>

#include "smctrack/errors.hpp"
#include "text_util.hpp"

namespace smctrack {

namespace {

using detail::format_double;
using detail::parse_double;
using detail::parse_int;
using detail::split;
using detail::trim;

}  // namespace

std::vector<EmbeddingSidecarRecord> parse_sidecar_stream(std::istream& in,
                                                         const std::string& source) {
  std::vector<EmbeddingSidecarRecord> records;
  std::string line;
  std::size_t line_number = 0;
  Eigen::Index expected_dim = -1;
  while (std::getline(in, line)) {
    ++line_number;
    const auto trimmed = trim(line);
    if (trimmed.empty()) continue;

    const auto fields = split(trimmed, ',');
    if (fields.size() < 3) {
      throw ParseError(source, line_number, "expected frame,index,d,v1,...,vd");
    }
    long long frame = 0, index = 0, dim = 0;
    if (!parse_int(trim(fields[0]), frame) || !parse_int(trim(fields[1]), index) ||
        !parse_int(trim(fields[2]), dim)) {
      throw ParseError(source, line_number, "frame, index and d must be integers");
    }
    if (dim <= 0) {
      throw ParseError(source, line_number, "embedding dimension must be positive");
    }
    if (static_cast<long long>(fields.size()) != 3 + dim) {
      throw ParseError(source, line_number,
                       "expected " + std::to_string(3 + dim) + " fields for d=" +
                           std::to_string(dim));
    }
    if (expected_dim >= 0 && dim != expected_dim) {
      throw ParseError(source, line_number,
                       "embedding dimension changed mid-file");
    }
    expected_dim = dim;

    EmbeddingSidecarRecord record;
    record.frame = static_cast<int>(frame);
    record.detection_index = static_cast<int>(index);
    record.values.resize(dim);
    for (long long i = 0; i < dim; ++i) {
      double v = 0.0;
      if (!parse_double(trim(fields[static_cast<std::size_t>(3 + i)]), v) ||
          !std::isfinite(v)) {
        throw ParseError(source, line_number, "embedding values must be finite numbers");
      }
      record.values(i) = v;
    }
    records.push_back(std::move(record));
  }
  return records;
}

std::vector<EmbeddingSidecarRecord> parse_sidecar_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open " + path.string() + " for reading");
  }
  return parse_sidecar_stream(in, path.string());
}

std::string format_sidecar_csv(const std::vector<EmbeddingSidecarRecord>& records) {
  std::string out;
  for (const auto& record : records) {
    out += std::to_string(record.frame);
    out += ',';
    out += std::to_string(record.detection_index);
    out += ',';
    out += std::to_string(record.values.size());
    for (Eigen::Index i = 0; i < record.values.size(); ++i) {
      out += ',';
      out += format_double(record.values(i));
    }
    out += '\n';
  }
  return out;
}

void write_sidecar_csv(const std::vector<EmbeddingSidecarRecord>& records,
                       const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw IoError("cannot open " + path.string() + " for writing");
  }
  out << format_sidecar_csv(records);
  if (!out) {
    throw IoError("failed while writing " + path.string());
  }
}

std::vector<EmbeddingSidecarRecord> sidecar_from_frames(
    const std::vector<FrameObservations>& frames) {
  std::vector<EmbeddingSidecarRecord> records;
  for (const auto& frame : frames) {
    for (std::size_t i = 0; i < frame.detections.size(); ++i) {
      const auto& det = frame.detections[i];
      if (!det.embedding.has_value()) continue;
      records.push_back(EmbeddingSidecarRecord{frame.frame, static_cast<int>(i),
                                               det.embedding->values});
    }
  }
  return records;
}

void attach_embeddings(std::vector<FrameObservations>& frames,
                       const std::vector<EmbeddingSidecarRecord>& records) {
  std::map<int, std::size_t> frame_index;
  for (std::size_t i = 0; i < frames.size(); ++i) {
    frame_index[frames[i].frame] = i;
  }
  for (const auto& record : records) {
    auto it = frame_index.find(record.frame);
    if (it == frame_index.end()) {
      throw std::invalid_argument("sidecar frame " + std::to_string(record.frame) +
                                  " has no detections");
    }
    auto& dets = frames[it->second].detections;
    if (record.detection_index < 0 ||
        record.detection_index >= static_cast<int>(dets.size())) {
      throw std::invalid_argument("sidecar index " +
                                  std::to_string(record.detection_index) +
                                  " out of range in frame " +
                                  std::to_string(record.frame));
    }
    dets[static_cast<std::size_t>(record.detection_index)].embedding =
        Embedding::unit(record.values);
  }
}

}  // namespace smctrack
