#include "topotrack/features.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "topotrack/errors.hpp"

namespace topotrack {

void BinningParams::validate() const {
    if (rows < 4 || cols < 4) throw RejectedConfigError("binning: resolutions must be >= 4");
    if (!(birth_min > 0.0)) throw RejectedConfigError("binning: birth_min must be > 0");
    if (!(birth_max > birth_min)) throw RejectedConfigError("binning: birth_max must exceed birth_min");
    if (!(life_max > 0.0)) throw RejectedConfigError("binning: life_max must be > 0");
}

int BinningParams::row_of(double lifetime) const {
    if (lifetime > life_max) return 0;
    const double sv = cell_height();
    // 1-based band m counted from the bottom: lifetime in (m*sv, (m+1)*sv].
    std::int64_t m = static_cast<std::int64_t>(std::ceil(lifetime / sv)) - 1;
    m = std::clamp<std::int64_t>(m, 0, rows - 2);
    return rows - 1 - static_cast<int>(m);
}

int BinningParams::col_of(double birth) const {
    if (birth <= birth_min) return 0;
    if (birth > birth_max) return cols - 1;
    const double sh = cell_width();
    std::int64_t j = static_cast<std::int64_t>(std::ceil((birth - birth_min) / sh));
    j = std::clamp<std::int64_t>(j, 1, cols - 2);
    return static_cast<int>(j);
}

std::vector<SkewPoint> skew_transform(const PersistenceDiagram& diagram) {
    std::vector<SkewPoint> out;
    out.reserve(diagram.pairs.size());
    for (const PersistencePair& p : diagram.pairs) {
        out.push_back({p.birth, p.death - p.birth});
    }
    return out;
}

std::int64_t BinnedFeature::total() const {
    return std::accumulate(counts.begin(), counts.end(), std::int64_t{0});
}

BinnedFeature bin_diagram(std::span<const SkewPoint> points, const BinningParams& params,
                          SignalKind kind) {
    params.validate();
    BinnedFeature feature;
    feature.params = params;
    feature.kind = kind;
    feature.counts.assign(static_cast<std::size_t>(params.rows) * params.cols, 0);
    for (const SkewPoint& pt : points) {
        ++feature.counts[params.row_of(pt.lifetime) * params.cols + params.col_of(pt.birth)];
    }
    return feature;
}

std::vector<std::int64_t> feature_vector(std::span<const BinnedFeature> features) {
    std::vector<std::int64_t> out;
    for (const BinnedFeature& f : features) {
        if (f.counts.size() != static_cast<std::size_t>(f.params.rows) * f.params.cols) {
            throw RejectedConfigError("feature_vector: matrix shape does not match its params");
        }
        out.insert(out.end(), f.counts.begin(), f.counts.end());
    }
    return out;
}

namespace {

double percentile(std::vector<double>& values, double q) {
    if (values.empty()) return 0.0;
    std::sort(values.begin(), values.end());
    const double pos = q * static_cast<double>(values.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(pos);
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return values[lo] * (1.0 - frac) + values[hi] * frac;
}

}  // namespace

BinningParams quantile_params(std::span<const std::vector<SkewPoint>> point_sets, int rows,
                              int cols) {
    std::vector<double> births;
    std::vector<double> lifetimes;
    for (const auto& set : point_sets) {
        for (const SkewPoint& pt : set) {
            births.push_back(pt.birth);
            lifetimes.push_back(pt.lifetime);
        }
    }
    constexpr double kFloor = 1e-6;
    BinningParams params;
    params.rows = rows;
    params.cols = cols;
    params.birth_min = std::max(percentile(births, 0.05), kFloor);
    params.birth_max = std::max(percentile(births, 0.95), params.birth_min * (1.0 + 1e-6) + kFloor);
    params.life_max = std::max(percentile(lifetimes, 0.95), kFloor);
    params.validate();
    return params;
}

}  // namespace topotrack
