#include "topotrack/trajectory.hpp"

#include <algorithm>
#include <cmath>

#include "topotrack/errors.hpp"

namespace topotrack {

namespace {

double norm3(const std::array<double, 3>& v) {
    return std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
}

}  // namespace

void Tracklet::validate() const {
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const Sample& s = samples[i];
        if (!std::isfinite(s.t) || !std::isfinite(s.x) || !std::isfinite(s.y) ||
            !std::isfinite(s.z)) {
            throw RejectedInputError("tracklet '" + id + "': non-finite sample");
        }
        if (i > 0 && s.t <= samples[i - 1].t) {
            throw RejectedInputError("tracklet '" + id + "': times not strictly increasing");
        }
    }
}

const char* to_string(SignalKind kind) {
    switch (kind) {
        case SignalKind::speed: return "speed";
        case SignalKind::acceleration: return "acceleration";
        case SignalKind::turning: return "turning";
    }
    return "speed";
}

SignalKind signal_kind_from_string(const std::string& name) {
    if (name == "speed") return SignalKind::speed;
    if (name == "acceleration") return SignalKind::acceleration;
    if (name == "turning") return SignalKind::turning;
    throw RejectedConfigError("unknown signal kind '" + name + "'");
}

std::vector<VelocitySample> velocity(const Tracklet& tracklet) {
    if (tracklet.samples.size() < 2) {
        throw InsufficientDataError("velocity needs >= 2 samples, got " +
                                    std::to_string(tracklet.samples.size()));
    }
    tracklet.validate();
    std::vector<VelocitySample> out;
    out.reserve(tracklet.samples.size() - 1);
    for (std::size_t i = 1; i < tracklet.samples.size(); ++i) {
        const Sample& a = tracklet.samples[i - 1];
        const Sample& b = tracklet.samples[i];
        const double dt = b.t - a.t;
        if (dt <= 0.0) throw RejectedInputError("degenerate time step");
        out.push_back({b.t, {(b.x - a.x) / dt, (b.y - a.y) / dt, (b.z - a.z) / dt}});
    }
    return out;
}

BehaviorSignal behavior_signal(const Tracklet& tracklet, SignalKind kind) {
    const std::size_t min_samples = kind == SignalKind::speed ? 2 : 3;
    if (tracklet.samples.size() < min_samples) {
        throw InsufficientDataError(std::string("signal '") + to_string(kind) + "' needs >= " +
                                    std::to_string(min_samples) + " samples");
    }
    const std::vector<VelocitySample> vel = velocity(tracklet);
    BehaviorSignal sig;
    sig.kind = kind;

    switch (kind) {
        case SignalKind::speed:
            for (const VelocitySample& vs : vel) {
                sig.times.push_back(vs.t);
                sig.values.push_back(norm3(vs.v));
            }
            break;
        case SignalKind::acceleration:
            for (std::size_t i = 1; i < vel.size(); ++i) {
                const double dt = vel[i].t - vel[i - 1].t;
                std::array<double, 3> dv{(vel[i].v[0] - vel[i - 1].v[0]) / dt,
                                         (vel[i].v[1] - vel[i - 1].v[1]) / dt,
                                         (vel[i].v[2] - vel[i - 1].v[2]) / dt};
                sig.times.push_back(vel[i].t);
                sig.values.push_back(norm3(dv));
            }
            break;
        case SignalKind::turning:
            // T(t_i) = mean of consecutive speeds * sin(theta_i), theta in [0, pi].
            for (std::size_t i = 0; i + 1 < vel.size(); ++i) {
                const double na = norm3(vel[i].v);
                const double nb = norm3(vel[i + 1].v);
                double sin_theta = 0.0;
                if (na > 0.0 && nb > 0.0) {
                    const double dot = vel[i].v[0] * vel[i + 1].v[0] +
                                       vel[i].v[1] * vel[i + 1].v[1] +
                                       vel[i].v[2] * vel[i + 1].v[2];
                    const double c = std::clamp(dot / (na * nb), -1.0, 1.0);
                    sin_theta = std::sin(std::acos(c));
                }
                sig.times.push_back(vel[i].t);
                sig.values.push_back(0.5 * (na + nb) * sin_theta);
            }
            break;
    }
    return sig;
}

}  // namespace topotrack
