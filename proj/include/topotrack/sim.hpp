#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "topotrack/tracker.hpp"
#include "topotrack/trajectory.hpp"

namespace topotrack {

/// Speed-profile envelope for one behavior class.
struct DriverProfile {
    std::string class_name = "normal";
    double cruise_lo = 8.0, cruise_hi = 13.0;    // m/s
    double accel_lo = 0.6, accel_hi = 1.2;       // m/s^2
    double osc_amp_lo = 0.0, osc_amp_hi = 0.5;   // speed oscillation, m/s
    double osc_freq_lo = 0.02, osc_freq_hi = 0.06;  // Hz
    double turn_speed_factor = 0.5;              // corner speed as fraction of cruise
};

DriverProfile normal_profile();
DriverProfile aggressive_profile();

/// Airborne EO style measurement model: angular error scaled by slant range
/// to a ground-plane position error, with a small pixel-quantization floor.
/// Motion detection needs per-frame displacement above the noise floor, so
/// the speed below which detection drops out scales with the position error.
struct SensorModel {
    double sigma_angular = 1e-3;         // rad
    double slant_range = 3000.0;         // m
    double sigma_floor = 0.5;            // m
    double detection_probability = 0.97; // above the speed threshold
    double detection_snr = 0.8;          // required speed per meter of noise
    double detection_speed_floor = 0.3;  // m/s

    double position_sigma() const {
        const double s = sigma_angular * slant_range;
        return s > sigma_floor ? s : sigma_floor;
    }

    /// Speed below which the target is not detected.
    double detection_threshold() const {
        const double t = detection_snr * position_sigma();
        return t > detection_speed_floor ? t : detection_speed_floor;
    }
};

struct PopulationConfig {
    int count = 1000;
    double aggressive_fraction = 0.5;
    int path_length = 360;  // samples per path
    double dt = 1.0;
    DriverProfile normal = normal_profile();
    DriverProfile aggressive = aggressive_profile();

    void validate() const;  // checks that aggressive ranges dominate normal
};

/// Labeled road-following paths on a synthetic grid; deterministic in seed.
std::vector<Tracklet> generate_population(const PopulationConfig& config, std::uint64_t seed);

/// Non-overlapping windows of exactly `window` samples (tail dropped);
/// each window inherits the parent label.
std::vector<Tracklet> window_tracklet(const Tracklet& tracklet, int window);

/// Tracklet-level split plus per-window-length materialization: the
/// (train window, test window) grid cell pairs train_windows[i] with
/// test_windows[j].
struct WindowedDatasets {
    std::vector<int> window_lengths;
    std::vector<std::vector<Tracklet>> train_windows;  // per window length
    std::vector<std::vector<Tracklet>> test_windows;
};

WindowedDatasets windowed_dataset(const std::vector<Tracklet>& tracklets,
                                  const std::vector<int>& window_lengths, double train_fraction,
                                  std::uint64_t seed, int max_windows_per_tracklet = 0);

/// Two crossing vehicles (a speeder and a normal driver) that slow below the
/// detection threshold at a shared intersection.
struct IntersectionScenario {
    std::vector<Tracklet> truth;                 // [0] = aggressive, [1] = normal
    std::vector<Scan> scans;
    std::vector<std::vector<int>> provenance;    // per scan: truth index per measurement
    double intersection_begin = 0.0;             // first vehicle starts slowing
    double intersection_end = 0.0;               // last vehicle back up to speed
    double dropout_begin = -1.0;                 // actual dropped-detection window,
    double dropout_end = -1.0;                   // -1 when nothing was dropped
};

IntersectionScenario generate_intersection_scenario(const SensorModel& sensor,
                                                    std::uint64_t seed);

/// Majority-ownership metric: association is correct when, for every vehicle,
/// the track owning most of its pre-intersection detections also owns most of
/// its post-intersection detections.
bool association_correct(const IntersectionScenario& scenario, const TrackerOutput& output);

/// Run a tracklet's positions through a single-target SRIF with the sensor's
/// noise and return the filtered state estimates as a tracklet. Used to train
/// behavior models on estimates rather than truth.
Tracklet filter_tracklet(const Tracklet& tracklet, const SensorModel& sensor,
                         const TrackerConfig& config, std::uint64_t seed);

struct MonteCarloRow {
    double sigma = 0.0;
    std::string variant;  // "baseline" or "behavior"
    int trials = 0;
    int successes = 0;
    double rate = 0.0;
    double stderr_ = 0.0;  // binomial standard error
};

/// Per sigma: correct-association rate over seeded trials, with and without
/// the behavior model. Trials run in parallel; per-trial seeds derive from
/// the master seed, so results do not depend on scheduling.
std::vector<MonteCarloRow> monte_carlo(const std::vector<double>& sigmas, int trials,
                                       const SensorModel& sensor, const TrackerConfig& config,
                                       const BehaviorModel& model, std::uint64_t seed,
                                       int threads = 0);

}  // namespace topotrack
