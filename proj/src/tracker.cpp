#include "topotrack/tracker.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

#include "topotrack/errors.hpp"

namespace topotrack {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

// Flip rows so the triangular factor has a positive diagonal; the attached
// right-hand side must flip with it.
void normalize_sign(Eigen::Matrix4d& R, Eigen::Vector4d& z) {
    for (int i = 0; i < 4; ++i) {
        if (R(i, i) < 0.0) {
            R.row(i) = -R.row(i);
            z(i) = -z(i);
        }
    }
}

double log_det_upper(const Eigen::Matrix4d& R) {
    double s = 0.0;
    for (int i = 0; i < 4; ++i) s += std::log(R(i, i));
    return s;
}

Eigen::Matrix4d transition(double dt) {
    Eigen::Matrix4d phi = Eigen::Matrix4d::Identity();
    phi(0, 2) = dt;
    phi(1, 3) = dt;
    return phi;
}

Eigen::Matrix4d process_noise(double dt, double q) {
    const double a = q * dt * dt * dt / 3.0;
    const double b = q * dt * dt / 2.0;
    const double c = q * dt;
    Eigen::Matrix4d Q = Eigen::Matrix4d::Zero();
    Q(0, 0) = Q(1, 1) = a;
    Q(2, 2) = Q(3, 3) = c;
    Q(0, 2) = Q(2, 0) = b;
    Q(1, 3) = Q(3, 1) = b;
    return Q;
}

}  // namespace

Eigen::Vector4d SrifState::estimate() const {
    return R.triangularView<Eigen::Upper>().solve(z);
}

Eigen::Matrix4d SrifState::covariance() const {
    const Eigen::Matrix4d rinv =
        R.triangularView<Eigen::Upper>().solve(Eigen::Matrix4d::Identity());
    return rinv * rinv.transpose();
}

SrifState srif_init(const Measurement& m, const TrackerConfig& config) {
    Eigen::LLT<Eigen::Matrix2d> llt(m.cov);
    if (llt.info() != Eigen::Success) {
        throw RejectedInputError("srif_init: measurement covariance not positive definite");
    }
    Eigen::Matrix4d info = Eigen::Matrix4d::Zero();
    info.topLeftCorner<2, 2>() = m.cov.inverse();
    const double vs = config.initial_speed_sigma;
    info(2, 2) = info(3, 3) = 1.0 / (vs * vs);

    SrifState state;
    state.t = m.t;
    state.R = Eigen::LLT<Eigen::Matrix4d>(info).matrixL().transpose();
    Eigen::Vector4d x = Eigen::Vector4d::Zero();
    x.head<2>() = m.pos;
    state.z = state.R * x;
    normalize_sign(state.R, state.z);
    return state;
}

SrifState srif_predict(const SrifState& state, double t, const TrackerConfig& config) {
    const double dt = t - state.t;
    if (dt < 0.0) throw RejectedInputError("srif_predict: time regression");
    if (dt == 0.0) return state;

    const Eigen::Matrix4d Q = process_noise(dt, config.process_noise);
    const Eigen::Matrix4d Lq = Eigen::LLT<Eigen::Matrix4d>(Q).matrixL();
    const Eigen::Matrix4d Rw =
        Lq.triangularView<Eigen::Lower>().solve(Eigen::Matrix4d::Identity());
    const Eigen::Matrix4d Rd = state.R * transition(-dt);  // R * Phi^{-1}

    // Stacked information array over [w; x_k]; QR marginalizes the noise.
    Eigen::Matrix<double, 8, 8> A = Eigen::Matrix<double, 8, 8>::Zero();
    A.topLeftCorner<4, 4>() = Rw;
    A.bottomLeftCorner<4, 4>() = -Rd;
    A.bottomRightCorner<4, 4>() = Rd;
    Eigen::Matrix<double, 8, 1> b = Eigen::Matrix<double, 8, 1>::Zero();
    b.tail<4>() = state.z;

    Eigen::HouseholderQR<Eigen::Matrix<double, 8, 8>> qr(A);
    b.applyOnTheLeft(qr.householderQ().adjoint());
    const Eigen::Matrix<double, 8, 8> T =
        qr.matrixQR().triangularView<Eigen::Upper>();

    SrifState out;
    out.t = t;
    out.R = T.bottomRightCorner<4, 4>();
    out.z = b.tail<4>();
    normalize_sign(out.R, out.z);
    return out;
}

SrifUpdateResult srif_update(const SrifState& state, const Measurement& m,
                             const TrackerConfig& config) {
    Eigen::LLT<Eigen::Matrix2d> llt(m.cov);
    if (llt.info() != Eigen::Success) {
        throw RejectedInputError("srif_update: measurement covariance not positive definite");
    }
    const SrifState pred = srif_predict(state, m.t, config);

    Eigen::Matrix<double, 2, 4> H = Eigen::Matrix<double, 2, 4>::Zero();
    H(0, 0) = H(1, 1) = 1.0;
    const Eigen::Matrix2d Lm = llt.matrixL();
    const Eigen::Matrix<double, 2, 4> Hw = Lm.triangularView<Eigen::Lower>().solve(H);
    const Eigen::Vector2d yw = Lm.triangularView<Eigen::Lower>().solve(m.pos);

    Eigen::Matrix<double, 6, 4> A;
    A.topRows<4>() = pred.R;
    A.bottomRows<2>() = Hw;
    Eigen::Matrix<double, 6, 1> b;
    b.head<4>() = pred.z;
    b.tail<2>() = yw;

    Eigen::HouseholderQR<Eigen::Matrix<double, 6, 4>> qr(A);
    b.applyOnTheLeft(qr.householderQ().adjoint());
    const Eigen::Matrix<double, 6, 4> T = qr.matrixQR().triangularView<Eigen::Upper>();

    SrifUpdateResult res;
    res.state.t = m.t;
    res.state.R = T.topRows<4>();
    res.state.z = b.head<4>();
    normalize_sign(res.state.R, res.state.z);
    res.residual = b.tail<2>();
    res.dllr = -0.5 * res.residual.squaredNorm() -
               (log_det_upper(res.state.R) - log_det_upper(pred.R));
    return res;
}

bool gate(const SrifState& predicted, const Measurement& m, const TrackerConfig& config) {
    const Eigen::Vector4d x = predicted.estimate();
    const Eigen::Matrix2d S = predicted.covariance().topLeftCorner<2, 2>() + m.cov;
    const Eigen::Vector2d nu = m.pos - x.head<2>();
    const double maha = nu.dot(S.inverse() * nu);
    return maha <= config.gate_chi2();
}

LlrUpdate feature_llr_update(std::span<const double> posterior,
                             std::span<const double> log_likelihoods, double log_false_target) {
    if (posterior.size() != log_likelihoods.size() || posterior.empty()) {
        throw RejectedInputError("feature_llr_update: class count mismatch");
    }
    constexpr double kFloor = -690.0;  // ~ln(1e-300)
    double max_ll = *std::max_element(log_likelihoods.begin(), log_likelihoods.end());
    std::vector<double> ll(log_likelihoods.begin(), log_likelihoods.end());
    if (!std::isfinite(max_ll) || max_ll < kFloor) {
        for (double& v : ll) v = kFloor;
        max_ll = kFloor;
    }

    LlrUpdate out;
    out.posterior.resize(posterior.size());
    double mix = 0.0;
    for (std::size_t i = 0; i < posterior.size(); ++i) {
        out.posterior[i] = std::exp(ll[i] - max_ll) * posterior[i];
        mix += out.posterior[i];
    }
    for (double& p : out.posterior) p /= mix;
    out.dllr = max_ll + std::log(mix) - log_false_target;
    return out;
}

void behavior_window_update(Track& track, const BehaviorLikelihood& model,
                            const TrackerConfig& config) {
    if (static_cast<int>(track.window.size()) < config.behavior_window) return;

    Tracklet window;
    window.id = "window";
    const std::size_t start = track.window.size() - config.behavior_window;
    for (std::size_t i = start; i < track.window.size(); ++i) {
        window.samples.push_back({track.window[i].t, track.window[i].x, track.window[i].y, 0.0});
    }

    FeatureVec z;
    try {
        z = model.featurize(window);
    } catch (const InsufficientDataError&) {
        return;  // window too short for the model's signals: defer
    }

    if (track.behavior_posterior.empty()) track.behavior_posterior = model.prior();
    const LlrUpdate upd =
        feature_llr_update(track.behavior_posterior, model.log_likelihoods(z),
                           model.log_false_target(z));
    track.behavior_posterior = upd.posterior;
    track.llr_behavior += upd.dllr;
    track.posterior_trace.emplace_back(window.samples.back().t, upd.posterior);
    track.window.clear();
}

double Hypothesis::score() const {
    double s = prior_score;
    for (const Track& t : tracks) s += t.total_llr();
    return s;
}

std::vector<std::int64_t> Hypothesis::assignment_key() const {
    std::vector<std::int64_t> key;
    key.push_back(static_cast<std::int64_t>(tracks.size()));
    for (const Track& t : tracks) {
        key.push_back(t.id);
        for (const auto& [scan, meas] : t.history) {
            key.push_back(static_cast<std::int64_t>(scan) * 1000000 + (meas + 1));
        }
    }
    return key;
}

namespace {

struct TrackExpansion {
    SrifState predicted;
    std::vector<int> candidates;               // gated measurement indices
    std::vector<SrifUpdateResult> updates;     // parallel to candidates
};

void append_window_samples(Hypothesis& h, double t) {
    for (Track& track : h.tracks) {
        const Eigen::Vector4d x = track.state.estimate();
        track.window.push_back({t, x(0), x(1)});
    }
}

}  // namespace

std::vector<Hypothesis> expand_and_score(const std::vector<Hypothesis>& parents, const Scan& scan,
                                         int scan_index, const TrackerConfig& config) {
    const int m_count = static_cast<int>(scan.measurements.size());
    const double log_pd = std::log(config.detection_probability);
    const double log_miss = std::log(std::max(1.0 - config.detection_probability, 1e-300));
    const double log_fa = std::log(config.false_alarm_density);

    std::vector<Hypothesis> children;

    for (const Hypothesis& parent : parents) {
        // Gate once per parent track and cache the measurement updates.
        std::vector<TrackExpansion> exp(parent.tracks.size());
        for (std::size_t ti = 0; ti < parent.tracks.size(); ++ti) {
            exp[ti].predicted = srif_predict(parent.tracks[ti].state, scan.t, config);
            std::vector<std::pair<double, int>> gated;
            for (int j = 0; j < m_count; ++j) {
                const Measurement& m = scan.measurements[j];
                const Eigen::Vector4d x = exp[ti].predicted.estimate();
                const Eigen::Matrix2d S =
                    exp[ti].predicted.covariance().topLeftCorner<2, 2>() + m.cov;
                const Eigen::Vector2d nu = m.pos - x.head<2>();
                const double maha = nu.dot(S.inverse() * nu);
                if (maha <= config.gate_chi2()) gated.emplace_back(maha, j);
            }
            std::sort(gated.begin(), gated.end());
            if (static_cast<int>(gated.size()) > config.max_gated_per_track) {
                gated.resize(config.max_gated_per_track);
            }
            std::sort(gated.begin(), gated.end(),
                      [](const auto& a, const auto& b) { return a.second < b.second; });
            for (const auto& [maha, j] : gated) {
                exp[ti].candidates.push_back(j);
                exp[ti].updates.push_back(
                    srif_update(parent.tracks[ti].state, scan.measurements[j], config));
            }
        }

        // Enumerate joint assignments under the scan constraint.
        std::vector<int> assignment(parent.tracks.size(), -1);
        std::vector<char> used(m_count, 0);

        auto emit = [&](const std::vector<int>& assign) {
            std::vector<int> unassigned;
            for (int j = 0; j < m_count; ++j) {
                if (!used[j]) unassigned.push_back(j);
            }
            const int u = static_cast<int>(unassigned.size());
            const int max_new = std::min(u, config.max_new_tracks_per_scan);

            // Each subset of the unassigned measurements may start new tracks;
            // the rest are false alarms (the score reference, term 0).
            for (std::uint32_t mask = 0; mask < (1u << u); ++mask) {
                if (std::popcount(mask) > max_new) continue;

                Hypothesis child = parent;
                for (std::size_t ti = 0; ti < child.tracks.size(); ++ti) {
                    Track& track = child.tracks[ti];
                    const int j = assign[ti];
                    if (j < 0) {
                        track.state = exp[ti].predicted;
                        track.history.emplace_back(scan_index, -1);
                        ++track.missed;
                        child.prior_score += log_miss;
                    } else {
                        const auto it = std::find(exp[ti].candidates.begin(),
                                                  exp[ti].candidates.end(), j);
                        const SrifUpdateResult& res =
                            exp[ti].updates[it - exp[ti].candidates.begin()];
                        track.state = res.state;
                        track.history.emplace_back(scan_index, j);
                        track.llr_kinematic += res.dllr;
                        track.missed = 0;
                        const double logdet =
                            std::log(scan.measurements[j].cov.determinant());
                        child.prior_score +=
                            log_pd - log_fa - std::log(kTwoPi) - 0.5 * logdet;
                    }
                }

                // Retire tracks that have missed too many scans in a row,
                // folding their score in so ranking stays comparable.
                for (auto it = child.tracks.begin(); it != child.tracks.end();) {
                    if (it->missed >= config.max_missed) {
                        child.prior_score += it->total_llr();
                        it = child.tracks.erase(it);
                    } else {
                        ++it;
                    }
                }

                for (int bit = 0; bit < u; ++bit) {
                    if (!(mask & (1u << bit))) continue;
                    const int j = unassigned[bit];
                    Track track;
                    track.id = static_cast<std::int64_t>(scan_index) * 100000 + j;
                    track.state = srif_init(scan.measurements[j], config);
                    track.history.emplace_back(scan_index, j);
                    child.prior_score += config.new_track_llr;
                    child.tracks.push_back(std::move(track));
                }

                append_window_samples(child, scan.t);
                children.push_back(std::move(child));
            }
        };

        auto dfs = [&](auto&& self, std::size_t ti) -> void {
            if (ti == parent.tracks.size()) {
                emit(assignment);
                return;
            }
            assignment[ti] = -1;
            self(self, ti + 1);
            for (int j : exp[ti].candidates) {
                if (used[j]) continue;
                used[j] = 1;
                assignment[ti] = j;
                self(self, ti + 1);
                assignment[ti] = -1;
                used[j] = 0;
            }
        };
        dfs(dfs, 0);
    }
    return children;
}

void prune(std::vector<Hypothesis>& hypotheses, const TrackerConfig& config) {
    std::stable_sort(hypotheses.begin(), hypotheses.end(),
                     [](const Hypothesis& a, const Hypothesis& b) {
                         const double sa = a.score();
                         const double sb = b.score();
                         if (sa != sb) return sa > sb;
                         return a.assignment_key() < b.assignment_key();
                     });
    if (static_cast<int>(hypotheses.size()) > config.max_hypotheses) {
        hypotheses.resize(config.max_hypotheses);
    }
}

TrackerOutput run_tracker(std::span<const Scan> scans, const TrackerConfig& config,
                          const BehaviorLikelihood* model) {
    for (std::size_t k = 1; k < scans.size(); ++k) {
        if (scans[k].t <= scans[k - 1].t) {
            throw RejectedInputError("run_tracker: scans not strictly time-ordered");
        }
    }

    std::vector<Hypothesis> hypotheses(1);
    for (std::size_t k = 0; k < scans.size(); ++k) {
        hypotheses = expand_and_score(hypotheses, scans[k], static_cast<int>(k), config);
        if (model && (k + 1) % static_cast<std::size_t>(config.behavior_period) == 0) {
            for (Hypothesis& h : hypotheses) {
                for (Track& t : h.tracks) behavior_window_update(t, *model, config);
            }
        }
        prune(hypotheses, config);
    }

    TrackerOutput out;
    out.scans_processed = static_cast<int>(scans.size());
    if (!hypotheses.empty()) out.best = hypotheses.front();
    if (model) out.behavior_classes = model->classes();
    return out;
}

namespace {

class ModelLikelihood final : public BehaviorLikelihood {
public:
    explicit ModelLikelihood(BehaviorModel model) : model_(std::move(model)) {}

    const std::vector<std::string>& classes() const override { return model_.classes; }
    std::vector<double> prior() const override { return model_.priors; }
    std::vector<double> log_likelihoods(const FeatureVec& z) const override {
        return model_.class_log_likelihood(z);
    }
    double log_false_target(const FeatureVec& z) const override {
        return model_.false_target_log_likelihood(z);
    }
    FeatureVec featurize(const Tracklet& window) const override {
        return model_.featurize(window);
    }

private:
    BehaviorModel model_;
};

}  // namespace

std::unique_ptr<BehaviorLikelihood> make_behavior_likelihood(const BehaviorModel& model) {
    if (!model.fitted()) throw StateError("make_behavior_likelihood: model is not fitted");
    return std::make_unique<ModelLikelihood>(model);
}

}  // namespace topotrack
