// Independent reference implementations used only by tests. Each one takes a
// deliberately different route from the library code it checks.
#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "topotrack/persistence.hpp"
#include "topotrack/tracker.hpp"

namespace oracles {

// --- Sublevel-set component tracker -----------------------------------------
// Recomputes the components of {i : f_i <= c} from scratch at every distinct
// threshold and matches them across levels by interval containment.

inline std::vector<topotrack::PersistencePair> sublevel_diagram(const std::vector<double>& f,
                                                                bool augmented = false) {
    std::vector<double> thresholds = f;
    std::sort(thresholds.begin(), thresholds.end());
    thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());

    struct Component {
        int lo, hi;
        double birth;
    };
    std::vector<Component> prev;
    std::vector<topotrack::PersistencePair> pairs;
    const int n = static_cast<int>(f.size());

    for (double c : thresholds) {
        std::vector<Component> cur;
        int i = 0;
        while (i < n) {
            if (f[i] <= c) {
                int j = i;
                while (j + 1 < n && f[j + 1] <= c) ++j;
                cur.push_back({i, j, c});
                i = j + 1;
            } else {
                ++i;
            }
        }
        int births_here = 0;
        int activations = 0;
        for (int k = 0; k < n; ++k) {
            if (f[k] == c) ++activations;
        }
        for (Component& comp : cur) {
            std::vector<double> inside;
            for (const Component& p : prev) {
                if (p.lo >= comp.lo && p.hi <= comp.hi) inside.push_back(p.birth);
            }
            if (inside.empty()) {
                comp.birth = c;
                ++births_here;
                continue;
            }
            const auto oldest = std::min_element(inside.begin(), inside.end());
            comp.birth = *oldest;
            inside.erase(oldest);
            for (double b : inside) pairs.push_back({b, c});
        }
        if (augmented) {
            // Every activated sample that did not open a new component is a
            // join or merge event and contributes a diagonal point.
            for (int k = 0; k < activations - births_here; ++k) pairs.push_back({c, c});
        }
        prev = std::move(cur);
    }
    pairs.push_back({thresholds.front(), thresholds.back()});
    std::sort(pairs.begin(), pairs.end());
    return pairs;
}

// --- Exhaustive bijection matching ------------------------------------------
// Enumerates every matching of off-diagonal dots (each dot may also go to the
// diagonal; the nearest diagonal point is located numerically by ternary
// search rather than by formula).

inline double lp2(double dx, double dy, double p) {
    dx = std::abs(dx);
    dy = std::abs(dy);
    if (p == topotrack::kInfinityOrder) return std::max(dx, dy);
    return std::pow(std::pow(dx, p) + std::pow(dy, p), 1.0 / p);
}

inline double diagonal_cost_numeric(const topotrack::PersistencePair& a, double p) {
    double lo = std::min(a.birth, a.death) - 2.0 * std::abs(a.death - a.birth) - 1.0;
    double hi = std::max(a.birth, a.death) + 2.0 * std::abs(a.death - a.birth) + 1.0;
    for (int it = 0; it < 300; ++it) {
        const double m1 = lo + (hi - lo) / 3.0;
        const double m2 = hi - (hi - lo) / 3.0;
        const double f1 = lp2(a.birth - m1, a.death - m1, p);
        const double f2 = lp2(a.birth - m2, a.death - m2, p);
        if (f1 < f2)
            hi = m2;
        else
            lo = m1;
    }
    const double t = 0.5 * (lo + hi);
    return lp2(a.birth - t, a.death - t, p);
}

inline double wasserstein_exhaustive(const topotrack::PersistenceDiagram& d1,
                                     const topotrack::PersistenceDiagram& d2, double p,
                                     bool powered = false) {
    const std::vector<topotrack::PersistencePair> a = d1.off_diagonal();
    const std::vector<topotrack::PersistencePair> b = d2.off_diagonal();
    const bool bottleneck = p == topotrack::kInfinityOrder;

    auto fold = [&](double acc, double c) {
        if (bottleneck) return std::max(acc, c);
        return acc + (powered && p != 1.0 ? std::pow(c, p) : c);
    };

    double best = std::numeric_limits<double>::infinity();
    std::vector<char> used(b.size(), 0);

    auto rec = [&](auto&& self, std::size_t i, double acc) -> void {
        if (acc >= best) return;
        if (i == a.size()) {
            double total = acc;
            for (std::size_t j = 0; j < b.size(); ++j) {
                if (!used[j]) total = fold(total, diagonal_cost_numeric(b[j], p));
            }
            best = std::min(best, total);
            return;
        }
        self(self, i + 1, fold(acc, diagonal_cost_numeric(a[i], p)));
        for (std::size_t j = 0; j < b.size(); ++j) {
            if (used[j]) continue;
            used[j] = 1;
            self(self, i + 1,
                 fold(acc, lp2(a[i].birth - b[j].birth, a[i].death - b[j].death, p)));
            used[j] = 0;
        }
    };
    rec(rec, 0, 0.0);
    if (bottleneck) return best;
    return best <= 0.0 ? 0.0 : std::pow(best, 1.0 / p);
}

// --- Covariance-form Kalman filter ------------------------------------------
// Conventional predict/update with the Joseph-form covariance, plus the
// per-update log-likelihood term -0.5 nu' S^-1 nu - 0.5 ln(det S / det R).

struct KalmanState {
    Eigen::Vector4d x = Eigen::Vector4d::Zero();
    Eigen::Matrix4d P = Eigen::Matrix4d::Identity();
    double t = 0.0;
};

inline KalmanState kalman_init(const topotrack::Measurement& m,
                               const topotrack::TrackerConfig& config) {
    KalmanState s;
    s.t = m.t;
    s.x.head<2>() = m.pos;
    s.P.setZero();
    s.P.topLeftCorner<2, 2>() = m.cov;
    s.P(2, 2) = s.P(3, 3) = config.initial_speed_sigma * config.initial_speed_sigma;
    return s;
}

inline KalmanState kalman_predict(const KalmanState& s, double t, double q) {
    const double dt = t - s.t;
    Eigen::Matrix4d F = Eigen::Matrix4d::Identity();
    F(0, 2) = F(1, 3) = dt;
    Eigen::Matrix4d Q = Eigen::Matrix4d::Zero();
    const double a = q * dt * dt * dt / 3.0;
    const double b = q * dt * dt / 2.0;
    Q(0, 0) = Q(1, 1) = a;
    Q(2, 2) = Q(3, 3) = q * dt;
    Q(0, 2) = Q(2, 0) = Q(1, 3) = Q(3, 1) = b;
    KalmanState out;
    out.t = t;
    out.x = F * s.x;
    out.P = F * s.P * F.transpose() + Q;
    return out;
}

struct KalmanUpdate {
    KalmanState state;
    double loglik = 0.0;  // matches the SRIF dllr convention
};

inline KalmanUpdate kalman_update(const KalmanState& s, const topotrack::Measurement& m,
                                  double q) {
    const KalmanState pred = kalman_predict(s, m.t, q);
    Eigen::Matrix<double, 2, 4> H = Eigen::Matrix<double, 2, 4>::Zero();
    H(0, 0) = H(1, 1) = 1.0;
    const Eigen::Vector2d nu = m.pos - H * pred.x;
    const Eigen::Matrix2d S = H * pred.P * H.transpose() + m.cov;
    const Eigen::Matrix<double, 4, 2> K = pred.P * H.transpose() * S.inverse();

    KalmanUpdate out;
    out.state.t = m.t;
    out.state.x = pred.x + K * nu;
    const Eigen::Matrix4d IKH = Eigen::Matrix4d::Identity() - K * H;
    out.state.P = IKH * pred.P * IKH.transpose() + K * m.cov * K.transpose();
    out.loglik = -0.5 * nu.dot(S.inverse() * nu) -
                 0.5 * std::log(S.determinant() / m.cov.determinant());
    return out;
}

}  // namespace oracles
