#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "topotrack/classify.hpp"
#include "topotrack/persistence.hpp"
#include "topotrack/sim.hpp"
#include "topotrack/tracker.hpp"
#include "topotrack/trajectory.hpp"

namespace topotrack::io {

using nlohmann::json;

/// Seed and configuration fingerprint embedded in every output artifact.
struct ArtifactMeta {
    std::uint64_t seed = 0;
    std::string config_hash;
};

std::string fnv1a_hex(const std::string& text);
json meta_to_json(const ArtifactMeta& meta);

// Trajectory CSV: header id,t,x,y,z; one row per sample, rows per id in time
// order. Lines starting with '#' are ignored.
void write_trajectories(const std::filesystem::path& path, const std::vector<Tracklet>& tracklets,
                        const ArtifactMeta& meta);
std::vector<Tracklet> read_trajectories(const std::filesystem::path& path);

// Label sidecar CSV: header id,label.
void write_labels(const std::filesystem::path& path, const std::vector<Tracklet>& tracklets,
                  const ArtifactMeta& meta);
void attach_labels(const std::filesystem::path& path, std::vector<Tracklet>& tracklets);

// Diagram JSON: {"augmented": bool, "pairs": [[birth, death], ...]} with
// pairs sorted by (birth, death).
json diagram_to_json(const PersistenceDiagram& diagram);
PersistenceDiagram diagram_from_json(const json& j);

json binning_to_json(const BinningParams& params);
BinningParams binning_from_json(const json& j);

json model_to_json(const BehaviorModel& model, const ArtifactMeta& meta);
BehaviorModel model_from_json(const json& j);
void write_model(const std::filesystem::path& path, const BehaviorModel& model,
                 const ArtifactMeta& meta);
BehaviorModel read_model(const std::filesystem::path& path);

// Scan JSON-lines: one scan per line,
// {"t": ..., "measurements": [{"pos": [x, y], "cov": [[..],[..]]}, ...]}.
void write_scans(const std::filesystem::path& path, const std::vector<Scan>& scans,
                 const ArtifactMeta& meta);
std::vector<Scan> read_scans(const std::filesystem::path& path);

json tracker_output_to_json(const TrackerOutput& output, const ArtifactMeta& meta);

void write_monte_carlo_csv(const std::filesystem::path& path,
                           const std::vector<MonteCarloRow>& rows, const ArtifactMeta& meta);

/// Binned diagram as a CSV matrix (one row per lifetime band).
void write_bin_matrix_csv(const std::filesystem::path& path, const BinnedFeature& feature,
                          const ArtifactMeta& meta);

json load_json(const std::filesystem::path& path);
void save_json(const std::filesystem::path& path, const json& j);

}  // namespace topotrack::io
