#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <istream>
#include <vector>

#include "smctrack/geometry.hpp"

namespace smctrack {

/// One embedding keyed by (frame, detection index within frame):
/// "frame,index,d,v1,...,vd". The dimension must be constant per file.
struct EmbeddingSidecarRecord {
  int frame = 0;
  int detection_index = 0;
  Eigen::VectorXd values;
};

std::vector<EmbeddingSidecarRecord> parse_sidecar_csv(const std::filesystem::path& path);
std::vector<EmbeddingSidecarRecord> parse_sidecar_stream(std::istream& in,
                                                         const std::string& source);

std::string format_sidecar_csv(const std::vector<EmbeddingSidecarRecord>& records);
void write_sidecar_csv(const std::vector<EmbeddingSidecarRecord>& records,
                       const std::filesystem::path& path);

/// Builds sidecar records from frames that already carry embeddings.
std::vector<EmbeddingSidecarRecord> sidecar_from_frames(
    const std::vector<FrameObservations>& frames);

/// Attaches sidecar embeddings onto parsed detections by (frame, index).
void attach_embeddings(std::vector<FrameObservations>& frames,
                       const std::vector<EmbeddingSidecarRecord>& records);

}  // namespace smctrack
