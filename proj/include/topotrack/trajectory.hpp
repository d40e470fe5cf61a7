#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

namespace topotrack {

/// One positional detection: time plus 3-D position in meters.
struct Sample {
    double t = 0.0;
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;
};

/// A candidate track: time-ordered positional samples for one target.
struct Tracklet {
    std::string id;
    std::vector<Sample> samples;
    std::optional<std::string> label;  // behavior class, when known (training data)

    /// Throws RejectedInputError on non-finite values or non-increasing times.
    void validate() const;
};

enum class SignalKind { speed, acceleration, turning };

const char* to_string(SignalKind kind);
SignalKind signal_kind_from_string(const std::string& name);

/// Scalar behavior signal derived from a tracklet.
struct BehaviorSignal {
    SignalKind kind = SignalKind::speed;
    std::vector<double> times;
    std::vector<double> values;
};

struct VelocitySample {
    double t = 0.0;
    std::array<double, 3> v{0.0, 0.0, 0.0};
};

/// Backward difference quotients; entry k is stamped at the later endpoint
/// t_{k+1}. Needs >= 2 samples with strictly increasing times.
std::vector<VelocitySample> velocity(const Tracklet& tracklet);

/// Derive speed (n-1 values), acceleration or turning (n-2 values each).
/// Turning is the mean of two consecutive speeds times sin of the angle
/// between the velocity vectors; a zero velocity vector contributes angle 0.
BehaviorSignal behavior_signal(const Tracklet& tracklet, SignalKind kind);

}  // namespace topotrack
