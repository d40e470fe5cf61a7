#include "topotrack/persistence.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

#include "topotrack/errors.hpp"

namespace topotrack {

std::vector<PersistencePair> PersistenceDiagram::off_diagonal() const {
    std::vector<PersistencePair> out;
    for (const PersistencePair& p : pairs) {
        if (p.death > p.birth) out.push_back(p);
    }
    return out;
}

PersistenceDiagram morse_filtration(std::span<const double> values, bool augmented) {
    const std::size_t n = values.size();
    if (n == 0) throw InsufficientDataError("morse_filtration: empty input");
    for (double v : values) {
        if (!std::isfinite(v)) throw RejectedInputError("morse_filtration: non-finite value");
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return values[a] < values[b] || (values[a] == values[b] && a < b);
    });

    // Union-find over positions. A root remembers when (sweep rank) and at
    // what value its class was born; merges keep the older root.
    std::vector<std::int64_t> parent(n, -1);  // -1 = not yet in any sublevel set
    std::vector<std::size_t> birth_rank(n, 0);
    std::vector<double> birth_value(n, 0.0);

    auto find = [&](std::size_t i) {
        std::size_t root = i;
        while (parent[root] != static_cast<std::int64_t>(root))
            root = static_cast<std::size_t>(parent[root]);
        while (parent[i] != static_cast<std::int64_t>(root)) {
            const std::size_t next = static_cast<std::size_t>(parent[i]);
            parent[i] = static_cast<std::int64_t>(root);
            i = next;
        }
        return root;
    };

    PersistenceDiagram diagram;
    diagram.augmented = augmented;

    for (std::size_t k = 0; k < n; ++k) {
        const std::size_t i = order[k];
        const double v = values[i];
        const bool left = i > 0 && parent[i - 1] >= 0;
        const bool right = i + 1 < n && parent[i + 1] >= 0;

        if (!left && !right) {
            parent[i] = static_cast<std::int64_t>(i);
            birth_rank[i] = k;
            birth_value[i] = v;
        } else if (left != right) {
            parent[i] = static_cast<std::int64_t>(find(left ? i - 1 : i + 1));
            if (augmented) diagram.pairs.push_back({v, v});
        } else {
            const std::size_t ra = find(i - 1);
            const std::size_t rb = find(i + 1);
            const std::size_t younger = birth_rank[ra] > birth_rank[rb] ? ra : rb;
            const std::size_t older = younger == ra ? rb : ra;
            // A tie between adjacent values can produce a zero-persistence
            // merge; that point belongs on the diagonal, so only augmented
            // diagrams record it.
            if (augmented || birth_value[younger] < v) {
                diagram.pairs.push_back({birth_value[younger], v});
            }
            parent[younger] = static_cast<std::int64_t>(older);
            parent[i] = static_cast<std::int64_t>(older);
            if (augmented) diagram.pairs.push_back({v, v});
        }
    }

    // Essential class: the oldest component never merges; it spans min to max.
    diagram.pairs.push_back({values[order.front()], values[order.back()]});

    std::sort(diagram.pairs.begin(), diagram.pairs.end());
    return diagram;
}

namespace {

double lp_norm2d(double dx, double dy, double p) {
    dx = std::abs(dx);
    dy = std::abs(dy);
    if (p == kInfinityOrder) return std::max(dx, dy);
    if (p == 1.0) return dx + dy;
    if (p == 2.0) return std::hypot(dx, dy);
    return std::pow(std::pow(dx, p) + std::pow(dy, p), 1.0 / p);
}

double point_distance(const PersistencePair& a, const PersistencePair& b, double p) {
    return lp_norm2d(a.birth - b.birth, a.death - b.death, p);
}

// Distance from a dot to its L_p-nearest diagonal point ((b+d)/2, (b+d)/2).
double diagonal_distance(const PersistencePair& a, double p) {
    const double h = 0.5 * (a.death - a.birth);
    if (p == kInfinityOrder) return h;
    return lp_norm2d(h, h, p);
}

// Min-cost perfect matching on a dense square matrix, shortest augmenting
// paths with dual potentials. Exact; O(n^3).
double assignment_cost(const std::vector<std::vector<double>>& cost) {
    const int n = static_cast<int>(cost.size());
    if (n == 0) return 0.0;
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
    std::vector<int> match(n + 1, 0), way(n + 1, 0);
    for (int i = 1; i <= n; ++i) {
        match[0] = i;
        int j0 = 0;
        std::vector<double> minv(n + 1, inf);
        std::vector<char> used(n + 1, 0);
        do {
            used[j0] = 1;
            const int i0 = match[j0];
            int j1 = -1;
            double delta = inf;
            for (int j = 1; j <= n; ++j) {
                if (used[j]) continue;
                const double cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (int j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[match[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (match[j0] != 0);
        do {
            const int j1 = way[j0];
            match[j0] = match[j1];
            j0 = j1;
        } while (j0);
    }
    double total = 0.0;
    for (int j = 1; j <= n; ++j) total += cost[match[j] - 1][j - 1];
    return total;
}

// Kuhn's augmenting-path matching over edges with cost <= threshold.
bool perfect_matching_exists(const std::vector<std::vector<double>>& cost, double threshold) {
    const int n = static_cast<int>(cost.size());
    std::vector<int> match_right(n, -1);
    std::vector<char> visited(n, 0);

    std::function<bool(int)> augment = [&](int i) -> bool {
        for (int j = 0; j < n; ++j) {
            if (visited[j] || cost[i][j] > threshold) continue;
            visited[j] = 1;
            if (match_right[j] < 0 || augment(match_right[j])) {
                match_right[j] = i;
                return true;
            }
        }
        return false;
    };

    for (int i = 0; i < n; ++i) {
        std::fill(visited.begin(), visited.end(), 0);
        if (!augment(i)) return false;
    }
    return true;
}

}  // namespace

MatchingCost wasserstein(const PersistenceDiagram& d1, const PersistenceDiagram& d2, double p,
                         const WassersteinOptions& options) {
    if (!(p >= 1.0)) throw RejectedConfigError("wasserstein: order p must be in [1, inf]");
    const std::vector<PersistencePair> a = d1.off_diagonal();
    const std::vector<PersistencePair> b = d2.off_diagonal();
    const std::size_t n1 = a.size();
    const std::size_t n2 = b.size();
    const std::size_t n = n1 + n2;
    if (n == 0) return {p, 0.0};

    // Standard reduction: each side is padded with the other side's diagonal
    // projections, so every bijection corresponds to a perfect matching.
    std::vector<std::vector<double>> cost(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            double c = 0.0;
            if (i < n1 && j < n2) {
                c = point_distance(a[i], b[j], p);
            } else if (i < n1) {
                c = diagonal_distance(a[i], p);
            } else if (j < n2) {
                c = diagonal_distance(b[j], p);
            }
            cost[i][j] = c;
        }
    }

    if (p == kInfinityOrder) {
        std::vector<double> candidates;
        candidates.reserve(n * n + 1);
        candidates.push_back(0.0);
        for (const auto& row : cost)
            for (double c : row) candidates.push_back(c);
        std::sort(candidates.begin(), candidates.end());
        candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());
        std::size_t lo = 0, hi = candidates.size() - 1;
        while (lo < hi) {
            const std::size_t mid = (lo + hi) / 2;
            if (perfect_matching_exists(cost, candidates[mid]))
                hi = mid;
            else
                lo = mid + 1;
        }
        return {p, candidates[lo]};
    }

    if (options.powered && p != 1.0) {
        for (auto& row : cost)
            for (double& c : row) c = std::pow(c, p);
    }
    const double total = assignment_cost(cost);
    return {p, total <= 0.0 ? 0.0 : std::pow(total, 1.0 / p)};
}

std::pair<double, double> stability_check(std::span<const double> f, std::span<const double> g,
                                          double p) {
    if (f.size() != g.size()) throw RejectedInputError("stability_check: length mismatch");
    double sup = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) sup = std::max(sup, std::abs(f[i] - g[i]));
    const MatchingCost w = wasserstein(morse_filtration(f, false), morse_filtration(g, false), p);
    return {w.value, sup};
}

}  // namespace topotrack
