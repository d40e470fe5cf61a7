#pragma once

#include <limits>
#include <span>
#include <utility>
#include <vector>

namespace topotrack {

struct PersistencePair {
    double birth = 0.0;
    double death = 0.0;

    double persistence() const { return death - birth; }
    friend bool operator==(const PersistencePair&, const PersistencePair&) = default;
    friend auto operator<=>(const PersistencePair&, const PersistencePair&) = default;
};

/// 0-dimensional sublevel-set persistence diagram of a scalar signal.
/// Pairs are kept sorted by (birth, death) so serialization is reproducible.
/// An augmented diagram additionally records a zero-persistence pair (f, f)
/// at every non-birth event, retaining the attained function values.
struct PersistenceDiagram {
    std::vector<PersistencePair> pairs;
    bool augmented = false;

    std::size_t size() const { return pairs.size(); }

    /// Pairs with strictly positive persistence.
    std::vector<PersistencePair> off_diagonal() const;
};

inline constexpr double kInfinityOrder = std::numeric_limits<double>::infinity();

/// Discrete Morse filtration: sweep values in ascending order, track sublevel
/// components with a union-find, emit (birth, death) at every merge (the
/// younger class dies), and finally the essential pair (global min, global
/// max). Ties are broken by index. O(n log n) time, O(n) space.
PersistenceDiagram morse_filtration(std::span<const double> values, bool augmented);

struct MatchingCost {
    double p = 2.0;      // order, kInfinityOrder for bottleneck
    double value = 0.0;  // minimal bijection cost
};

struct WassersteinOptions {
    /// false: cost is (sum of L_p displacement norms)^(1/p).
    /// true:  conventional powered form (sum of norms^p)^(1/p).
    bool powered = false;
};

/// Minimum-cost bijection distance between diagrams, the diagonal acting as a
/// matching sink of infinite multiplicity. Zero-persistence pairs sit on the
/// diagonal and are absorbed by it. p = infinity gives the bottleneck
/// distance (binary search over feasibility matchings); finite p solves a
/// min-cost assignment by shortest augmenting paths.
MatchingCost wasserstein(const PersistenceDiagram& d1, const PersistenceDiagram& d2, double p,
                         const WassersteinOptions& options = {});

/// Returns (W_p(D0(f), D0(g)), max_i |f_i - g_i|). With p = infinity the first
/// component is bounded by the second (bottleneck stability, C = 1).
std::pair<double, double> stability_check(std::span<const double> f, std::span<const double> g,
                                          double p);

}  // namespace topotrack
