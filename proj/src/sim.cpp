#include "topotrack/sim.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <map>
#include <thread>

#include "topotrack/errors.hpp"
#include "topotrack/random.hpp"

namespace topotrack {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

}  // namespace

DriverProfile normal_profile() { return DriverProfile{}; }

DriverProfile aggressive_profile() {
    DriverProfile p;
    p.class_name = "aggressive";
    p.cruise_lo = 17.0;
    p.cruise_hi = 26.0;
    p.accel_lo = 2.5;
    p.accel_hi = 4.5;
    p.osc_amp_lo = 2.0;
    p.osc_amp_hi = 4.5;
    p.osc_freq_lo = 0.08;
    p.osc_freq_hi = 0.2;
    p.turn_speed_factor = 0.75;
    return p;
}

void PopulationConfig::validate() const {
    if (count < 2) throw RejectedConfigError("population: need at least 2 paths");
    if (path_length < 10) throw RejectedConfigError("population: path length must be >= 10");
    if (aggressive_fraction < 0.0 || aggressive_fraction > 1.0) {
        throw RejectedConfigError("population: class mix must be in [0, 1]");
    }
    const bool dominates = aggressive.cruise_lo > normal.cruise_hi &&
                           aggressive.accel_lo > normal.accel_hi &&
                           aggressive.osc_amp_lo > normal.osc_amp_hi;
    if (!dominates) {
        throw RejectedConfigError(
            "population: aggressive profile must strictly dominate the normal one");
    }
}

namespace {

/// Axis-aligned polyline route with random segment lengths and 90 degree
/// corners, long enough to hold the whole path.
class Route {
public:
    Route(Rng& rng, double needed_length) {
        static constexpr int kDx[4] = {1, 0, -1, 0};
        static constexpr int kDy[4] = {0, 1, 0, -1};
        double x = rng.uniform(0.0, 2000.0);
        double y = rng.uniform(0.0, 2000.0);
        int dir = rng.uniform_int(0, 3);
        points_.push_back({x, y});
        cumulative_.push_back(0.0);
        double total = 0.0;
        while (total < needed_length) {
            const double seg = rng.uniform(150.0, 400.0);
            x += seg * kDx[dir];
            y += seg * kDy[dir];
            total += seg;
            points_.push_back({x, y});
            cumulative_.push_back(total);
            dir = (dir + (rng.uniform() < 0.5 ? 1 : 3)) % 4;
        }
    }

    std::pair<double, double> at(double s) const {
        const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), s);
        std::size_t seg = it == cumulative_.begin() ? 0 : (it - cumulative_.begin()) - 1;
        seg = std::min(seg, points_.size() - 2);
        const double frac = (s - cumulative_[seg]) / (cumulative_[seg + 1] - cumulative_[seg]);
        const double f = std::clamp(frac, 0.0, 1.0);
        return {points_[seg].first + f * (points_[seg + 1].first - points_[seg].first),
                points_[seg].second + f * (points_[seg + 1].second - points_[seg].second)};
    }

    double distance_to_corner(double s) const {
        const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), s);
        if (it == cumulative_.end()) return 1e9;
        return *it - s;
    }

private:
    std::vector<std::pair<double, double>> points_;
    std::vector<double> cumulative_;
};

Tracklet generate_path(const DriverProfile& profile, int length, double dt, const std::string& id,
                       Rng& rng) {
    const double cruise = rng.uniform(profile.cruise_lo, profile.cruise_hi);
    const double accel = rng.uniform(profile.accel_lo, profile.accel_hi);
    const double amp = rng.uniform(profile.osc_amp_lo, profile.osc_amp_hi);
    const double freq = rng.uniform(profile.osc_freq_lo, profile.osc_freq_hi);
    const double phase = rng.uniform(0.0, kTwoPi);

    Route route(rng, profile.cruise_hi * length * dt * 1.3 + 200.0);

    Tracklet tracklet;
    tracklet.id = id;
    tracklet.label = profile.class_name;
    tracklet.samples.reserve(length);

    double plateau = cruise;
    double next_change = rng.uniform(60.0, 120.0);
    double v = rng.uniform(0.5 * cruise, 0.9 * cruise);
    double s = 0.0;
    for (int i = 0; i < length; ++i) {
        const double t = i * dt;
        if (t >= next_change) {
            plateau = cruise * rng.uniform(0.75, 1.0);
            next_change += rng.uniform(60.0, 120.0);
        }
        double target = plateau + amp * std::sin(kTwoPi * freq * t + phase);
        if (route.distance_to_corner(s) < 40.0) {
            target = std::min(target, profile.turn_speed_factor * cruise);
        }
        v += std::clamp(target - v, -accel * dt, accel * dt);
        v = std::max(v, 0.3);
        s += v * dt;
        const auto [x, y] = route.at(s);
        tracklet.samples.push_back({t, x, y, 0.0});
    }
    return tracklet;
}

}  // namespace

std::vector<Tracklet> generate_population(const PopulationConfig& config, std::uint64_t seed) {
    config.validate();
    const int n_aggressive =
        static_cast<int>(std::lround(config.count * config.aggressive_fraction));
    std::vector<Tracklet> out;
    out.reserve(config.count);
    for (int i = 0; i < config.count; ++i) {
        Rng rng(Rng::derive_seed(seed, static_cast<std::uint64_t>(i)));
        const bool aggressive = i < n_aggressive;
        char id[32];
        std::snprintf(id, sizeof(id), "veh%05d", i);
        out.push_back(generate_path(aggressive ? config.aggressive : config.normal,
                                    config.path_length, config.dt, id, rng));
    }
    return out;
}

std::vector<Tracklet> window_tracklet(const Tracklet& tracklet, int window) {
    if (window < 2) throw RejectedConfigError("window length must be >= 2");
    std::vector<Tracklet> out;
    const std::size_t n = tracklet.samples.size();
    for (std::size_t start = 0; start + window <= n; start += window) {
        Tracklet w;
        w.id = tracklet.id + "_w" + std::to_string(start / window);
        w.label = tracklet.label;
        w.samples.assign(tracklet.samples.begin() + start,
                         tracklet.samples.begin() + start + window);
        out.push_back(std::move(w));
    }
    return out;
}

WindowedDatasets windowed_dataset(const std::vector<Tracklet>& tracklets,
                                  const std::vector<int>& window_lengths, double train_fraction,
                                  std::uint64_t seed, int max_windows_per_tracklet) {
    for (int w : window_lengths) {
        for (const Tracklet& t : tracklets) {
            if (w > static_cast<int>(t.samples.size())) {
                throw RejectedConfigError("window length exceeds path length");
            }
        }
    }
    std::vector<std::size_t> index(tracklets.size());
    for (std::size_t i = 0; i < index.size(); ++i) index[i] = i;
    Rng rng(Rng::derive_seed(seed, 0x517));
    rng.shuffle(index);
    const std::size_t n_train =
        static_cast<std::size_t>(std::lround(train_fraction * tracklets.size()));

    WindowedDatasets out;
    out.window_lengths = window_lengths;
    for (int w : window_lengths) {
        std::vector<Tracklet> train, test;
        for (std::size_t k = 0; k < index.size(); ++k) {
            std::vector<Tracklet> windows = window_tracklet(tracklets[index[k]], w);
            if (max_windows_per_tracklet > 0 &&
                static_cast<int>(windows.size()) > max_windows_per_tracklet) {
                windows.resize(max_windows_per_tracklet);
            }
            auto& dest = k < n_train ? train : test;
            for (Tracklet& t : windows) dest.push_back(std::move(t));
        }
        out.train_windows.push_back(std::move(train));
        out.test_windows.push_back(std::move(test));
    }
    return out;
}

namespace {

struct PhasedSpeed {
    double cruise = 10.0;
    double amp = 0.0;
    double freq = 0.05;
    double phase = 0.0;
    double accel = 1.0;
    double t_slow = 50.0;  // deceleration begins
    double t_go = 66.0;    // departure from the intersection
    double creep = 0.6;    // crawl speed through the intersection, m/s
};

std::vector<double> phased_speeds(const PhasedSpeed& p, int steps, double dt) {
    std::vector<double> v(steps);
    double cur = std::max(p.cruise + p.amp * std::sin(p.phase), 3.0);
    for (int i = 0; i < steps; ++i) {
        const double t = i * dt;
        double target;
        if (t >= p.t_slow && t < p.t_go) {
            target = p.creep;
        } else {
            target = std::max(p.cruise + p.amp * std::sin(kTwoPi * p.freq * t + p.phase), 1.5);
        }
        cur += std::clamp(target - cur, -p.accel * dt, p.accel * dt);
        cur = std::max(cur, 0.0);
        v[i] = cur;
    }
    return v;
}

/// Arc length anchored so position 0 is reached at departure time.
std::vector<double> anchored_arc(const std::vector<double>& speeds, double dt, double t_go,
                                 double stop_offset) {
    std::vector<double> s(speeds.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < speeds.size(); ++i) {
        acc += speeds[i] * dt;
        s[i] = acc;
    }
    const std::size_t idx = std::min(static_cast<std::size_t>(std::lround(t_go / dt)),
                                     speeds.size() - 1);
    const double offset = s[idx];
    for (double& x : s) x = x - offset + stop_offset;
    return s;
}

}  // namespace

IntersectionScenario generate_intersection_scenario(const SensorModel& sensor,
                                                    std::uint64_t seed) {
    Rng rng(Rng::derive_seed(seed, 0xC0));
    const int steps = 140;
    const double dt = 1.0;

    PhasedSpeed speeder;
    speeder.cruise = rng.uniform(18.0, 24.0);
    speeder.amp = rng.uniform(2.5, 4.0);
    speeder.freq = rng.uniform(0.08, 0.15);
    speeder.phase = rng.uniform(0.0, kTwoPi);
    speeder.accel = rng.uniform(3.0, 4.0);
    speeder.t_slow = 50.0 + rng.uniform(-2.0, 2.0);
    speeder.t_go = 66.0 + rng.uniform(-1.5, 1.5);

    PhasedSpeed normal;
    normal.cruise = rng.uniform(9.0, 12.0);
    normal.amp = rng.uniform(0.0, 0.4);
    normal.freq = rng.uniform(0.02, 0.06);
    normal.phase = rng.uniform(0.0, kTwoPi);
    normal.accel = rng.uniform(1.0, 1.4);
    normal.t_slow = 48.0 + rng.uniform(-2.0, 2.0);
    normal.t_go = 68.0 + rng.uniform(-1.5, 1.5);

    const std::vector<double> v_a = phased_speeds(speeder, steps, dt);
    const std::vector<double> v_n = phased_speeds(normal, steps, dt);
    const std::vector<double> s_a = anchored_arc(v_a, dt, speeder.t_go, -2.5);
    const std::vector<double> s_n = anchored_arc(v_n, dt, normal.t_go, -2.5);

    IntersectionScenario scenario;
    scenario.truth.resize(2);
    scenario.truth[0].id = "speeder";
    scenario.truth[0].label = "aggressive";
    scenario.truth[1].id = "normal";
    scenario.truth[1].label = "normal";

    const double sigma = sensor.position_sigma();
    double first_drop = -1.0, last_drop = -1.0;
    for (int i = 0; i < steps; ++i) {
        const double t = i * dt;
        // Speeder eastbound in the y = +1.5 lane, normal driver northbound in
        // the x = -1.5 lane; both crawl up to a stop line 2.5 m from center.
        scenario.truth[0].samples.push_back({t, s_a[i], 1.5, 0.0});
        scenario.truth[1].samples.push_back({t, -1.5, s_n[i], 0.0});

        Scan scan;
        scan.t = t;
        std::vector<int> origin;
        const double speeds[2] = {v_a[i], v_n[i]};
        for (int veh = 0; veh < 2; ++veh) {
            if (speeds[veh] < sensor.detection_threshold()) {
                if (first_drop < 0.0) first_drop = t;
                last_drop = t;
                continue;
            }
            if (rng.uniform() >= sensor.detection_probability) continue;
            const Sample& truth = scenario.truth[veh].samples.back();
            Measurement m;
            m.t = t;
            m.pos = Eigen::Vector2d(truth.x + sigma * rng.gaussian(),
                                    truth.y + sigma * rng.gaussian());
            m.cov = sigma * sigma * Eigen::Matrix2d::Identity();
            scan.measurements.push_back(m);
            origin.push_back(veh);
        }
        if (scan.measurements.size() == 2 && rng.uniform() < 0.5) {
            std::swap(scan.measurements[0], scan.measurements[1]);
            std::swap(origin[0], origin[1]);
        }
        scenario.scans.push_back(std::move(scan));
        scenario.provenance.push_back(std::move(origin));
    }
    scenario.intersection_begin = std::min(speeder.t_slow, normal.t_slow);
    scenario.intersection_end = std::max(speeder.t_go, normal.t_go) + 3.0;
    scenario.dropout_begin = first_drop;
    scenario.dropout_end = last_drop;
    return scenario;
}

bool association_correct(const IntersectionScenario& scenario, const TrackerOutput& output) {
    const std::size_t n_tracks = output.best.tracks.size();
    const std::size_t n_vehicles = scenario.truth.size();
    // ownership[track][vehicle][phase]: detection counts before/after dropout
    std::vector<std::vector<std::array<int, 2>>> owned(
        n_tracks, std::vector<std::array<int, 2>>(n_vehicles, {0, 0}));
    std::vector<std::array<int, 2>> totals(n_vehicles, {0, 0});

    auto phase_of = [&](double t) -> int {
        if (t < scenario.intersection_begin) return 0;
        if (t > scenario.intersection_end) return 1;
        return -1;
    };

    for (std::size_t k = 0; k < scenario.scans.size(); ++k) {
        const int phase = phase_of(scenario.scans[k].t);
        if (phase < 0) continue;
        for (int veh : scenario.provenance[k]) ++totals[veh][phase];
    }
    for (std::size_t ti = 0; ti < n_tracks; ++ti) {
        for (const auto& [scan, meas] : output.best.tracks[ti].history) {
            if (meas < 0) continue;
            const int phase = phase_of(scenario.scans[scan].t);
            if (phase < 0) continue;
            ++owned[ti][scenario.provenance[scan][meas]][phase];
        }
    }

    for (std::size_t veh = 0; veh < n_vehicles; ++veh) {
        int owner[2] = {-1, -1};
        for (int phase = 0; phase < 2; ++phase) {
            for (std::size_t ti = 0; ti < n_tracks; ++ti) {
                if (2 * owned[ti][veh][phase] > totals[veh][phase]) {
                    owner[phase] = static_cast<int>(ti);
                }
            }
            if (owner[phase] < 0) return false;
        }
        if (owner[0] != owner[1]) return false;
    }
    return true;
}

Tracklet filter_tracklet(const Tracklet& tracklet, const SensorModel& sensor,
                         const TrackerConfig& config, std::uint64_t seed) {
    tracklet.validate();
    if (tracklet.samples.size() < 2) {
        throw InsufficientDataError("filter_tracklet: need >= 2 samples");
    }
    Rng rng(Rng::derive_seed(seed, 0xF1));
    const double sigma = sensor.position_sigma();
    const Eigen::Matrix2d cov = sigma * sigma * Eigen::Matrix2d::Identity();

    auto measure = [&](const Sample& s) {
        Measurement m;
        m.t = s.t;
        m.pos = Eigen::Vector2d(s.x + sigma * rng.gaussian(), s.y + sigma * rng.gaussian());
        m.cov = cov;
        return m;
    };

    Tracklet out;
    out.id = tracklet.id;
    out.label = tracklet.label;
    SrifState state = srif_init(measure(tracklet.samples.front()), config);
    {
        const Eigen::Vector4d x = state.estimate();
        out.samples.push_back({state.t, x(0), x(1), 0.0});
    }
    for (std::size_t i = 1; i < tracklet.samples.size(); ++i) {
        state = srif_update(state, measure(tracklet.samples[i]), config).state;
        const Eigen::Vector4d x = state.estimate();
        out.samples.push_back({state.t, x(0), x(1), 0.0});
    }
    return out;
}

std::vector<MonteCarloRow> monte_carlo(const std::vector<double>& sigmas, int trials,
                                       const SensorModel& sensor, const TrackerConfig& config,
                                       const BehaviorModel& model, std::uint64_t seed,
                                       int threads) {
    if (trials < 1) throw RejectedConfigError("monte_carlo: trials must be >= 1");
    if (threads <= 0) {
        threads = static_cast<int>(std::thread::hardware_concurrency());
        threads = std::clamp(threads, 1, 8);
    }

    std::vector<MonteCarloRow> rows;
    for (std::size_t si = 0; si < sigmas.size(); ++si) {
        SensorModel trial_sensor = sensor;
        trial_sensor.sigma_angular = sigmas[si];

        std::vector<std::pair<bool, bool>> results(trials);
        auto run_range = [&](int begin, int end) {
            for (int i = begin; i < end; ++i) {
                const std::uint64_t trial_seed =
                    Rng::derive_seed(seed, si * 1000003ULL + static_cast<std::uint64_t>(i));
                const IntersectionScenario scenario =
                    generate_intersection_scenario(trial_sensor, trial_seed);
                const TrackerOutput baseline = run_tracker(scenario.scans, config, nullptr);
                const auto likelihood = make_behavior_likelihood(model);
                const TrackerOutput behavior =
                    run_tracker(scenario.scans, config, likelihood.get());
                results[i] = {association_correct(scenario, baseline),
                              association_correct(scenario, behavior)};
            }
        };

        std::vector<std::future<void>> tasks;
        const int chunk = (trials + threads - 1) / threads;
        for (int begin = 0; begin < trials; begin += chunk) {
            const int end = std::min(begin + chunk, trials);
            tasks.push_back(std::async(std::launch::async, run_range, begin, end));
        }
        for (auto& task : tasks) task.get();

        int base_ok = 0, behav_ok = 0;
        for (const auto& [b, t] : results) {
            base_ok += b ? 1 : 0;
            behav_ok += t ? 1 : 0;
        }
        for (const auto& [name, ok] :
             std::initializer_list<std::pair<const char*, int>>{{"baseline", base_ok},
                                                                {"behavior", behav_ok}}) {
            MonteCarloRow row;
            row.sigma = sigmas[si];
            row.variant = name;
            row.trials = trials;
            row.successes = ok;
            row.rate = static_cast<double>(ok) / trials;
            row.stderr_ = std::sqrt(std::max(row.rate * (1.0 - row.rate), 0.0) / trials);
            rows.push_back(std::move(row));
        }
    }
    return rows;
}

}  // namespace topotrack
