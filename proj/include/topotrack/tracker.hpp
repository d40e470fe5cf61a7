#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "topotrack/classify.hpp"
#include "topotrack/trajectory.hpp"

namespace topotrack {

struct Measurement {
    double t = 0.0;
    Eigen::Vector2d pos = Eigen::Vector2d::Zero();
    Eigen::Matrix2d cov = Eigen::Matrix2d::Identity();
};

struct Scan {
    double t = 0.0;
    std::vector<Measurement> measurements;
};

/// Square-root information form of a 2-D constant-velocity state
/// [px, py, vx, vy]. R is upper triangular with positive diagonal and
/// R^T R equals the information matrix; z = R * x.
struct SrifState {
    Eigen::Matrix4d R = Eigen::Matrix4d::Identity();
    Eigen::Vector4d z = Eigen::Vector4d::Zero();
    double t = 0.0;

    Eigen::Vector4d estimate() const;
    Eigen::Matrix4d covariance() const;
};

struct TrackerConfig {
    int max_hypotheses = 10;
    double gate_probability = 0.997;
    double detection_probability = 0.9;
    double false_alarm_density = 1e-6;  // per m^2
    double new_track_llr = -3.0;
    int max_missed = 5;               // consecutive misses before a track is dropped
    double process_noise = 6.0;       // white acceleration PSD, m^2/s^3
    double initial_speed_sigma = 15;  // new-track velocity prior, m/s
    int behavior_window = 20;         // state estimates per behavior update
    int behavior_period = 20;         // scans between behavior update attempts
    int max_new_tracks_per_scan = 2;
    int max_gated_per_track = 8;

    double gate_chi2() const { return -2.0 * std::log(1.0 - gate_probability); }
};

/// Class-conditional likelihood source for feature LLR updates. Fitted
/// behavior models provide one; tests may substitute mocks.
class BehaviorLikelihood {
public:
    virtual ~BehaviorLikelihood() = default;
    virtual const std::vector<std::string>& classes() const = 0;
    /// Initial class probabilities for a fresh track.
    virtual std::vector<double> prior() const = 0;
    /// ln p(z | B_i) for every class.
    virtual std::vector<double> log_likelihoods(const FeatureVec& z) const = 0;
    /// ln p(z | false target).
    virtual double log_false_target(const FeatureVec& z) const = 0;
    /// Turn a window of state estimates into the feature observation z.
    virtual FeatureVec featurize(const Tracklet& window) const = 0;
};

std::unique_ptr<BehaviorLikelihood> make_behavior_likelihood(const BehaviorModel& model);

struct WindowSample {
    double t = 0.0;
    double x = 0.0;
    double y = 0.0;
};

struct Track {
    std::int64_t id = 0;
    SrifState state;
    std::vector<std::pair<int, int>> history;  // (scan index, measurement index or -1)
    double llr_kinematic = 0.0;
    double llr_type = 0.0;
    double llr_behavior = 0.0;
    std::vector<double> behavior_posterior;       // empty until a model is attached
    std::vector<WindowSample> window;             // recent state estimates
    std::vector<std::pair<double, std::vector<double>>> posterior_trace;
    int missed = 0;

    double total_llr() const { return llr_kinematic + llr_type + llr_behavior; }
};

struct Hypothesis {
    std::vector<Track> tracks;
    double prior_score = 0.0;  // accumulated assignment prior terms

    double score() const;
    /// Lexicographic (track count, per-track id + history) key for
    /// deterministic tie-breaking.
    std::vector<std::int64_t> assignment_key() const;
};

struct SrifUpdateResult {
    SrifState state;
    Eigen::Vector2d residual = Eigen::Vector2d::Zero();  // whitened
    double dllr = 0.0;  // -0.5 e'e - ln(det R_post / det R_pred)
};

/// New-track state from a first measurement: position from the measurement,
/// zero velocity with a broad prior.
SrifState srif_init(const Measurement& m, const TrackerConfig& config);

/// Propagate to time t under constant velocity with process noise, by
/// orthogonal triangularization of the stacked information array.
SrifState srif_predict(const SrifState& state, double t, const TrackerConfig& config);

/// Time propagation to the measurement time followed by the measurement
/// update; returns the whitened residual and the kinematic LLR increment.
SrifUpdateResult srif_update(const SrifState& state, const Measurement& m,
                             const TrackerConfig& config);

/// True iff the Mahalanobis distance of the predicted residual is below the
/// configured chi-square quantile. `predicted` must already be at m.t.
bool gate(const SrifState& predicted, const Measurement& m, const TrackerConfig& config);

struct LlrUpdate {
    std::vector<double> posterior;
    double dllr = 0.0;
};

/// One Bayes step of the feature-likelihood recursion:
/// dllr = ln(sum_i p(z|B_i) p(B_i)) - ln p(z|FT), posterior updated in place.
/// Inputs are log-likelihoods; all-degenerate likelihoods are floored.
LlrUpdate feature_llr_update(std::span<const double> posterior,
                             std::span<const double> log_likelihoods, double log_false_target);

/// Behavior LLR update from the track's window of state estimates. No-op
/// (deferred) while the window holds fewer than config.behavior_window
/// estimates; otherwise consumes the window.
void behavior_window_update(Track& track, const BehaviorLikelihood& model,
                            const TrackerConfig& config);

/// Expand parent hypotheses with one scan: every gated assignment event per
/// track (measurement or miss) and, per unassigned measurement, false alarm
/// or new track, subject to the scan constraint.
std::vector<Hypothesis> expand_and_score(const std::vector<Hypothesis>& parents, const Scan& scan,
                                         int scan_index, const TrackerConfig& config);

/// Keep the top max_hypotheses by score, ties broken by assignment key.
void prune(std::vector<Hypothesis>& hypotheses, const TrackerConfig& config);

struct TrackerOutput {
    Hypothesis best;
    int scans_processed = 0;
    std::vector<std::string> behavior_classes;  // empty without a model
};

/// Recursive expand -> behavior update -> prune over time-ordered scans.
/// Without a model, behavior posteriors are reported as the uninformative 0.5.
TrackerOutput run_tracker(std::span<const Scan> scans, const TrackerConfig& config,
                          const BehaviorLikelihood* model = nullptr);

}  // namespace topotrack
