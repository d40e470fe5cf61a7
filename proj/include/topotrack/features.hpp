#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "topotrack/persistence.hpp"
#include "topotrack/trajectory.hpp"

namespace topotrack {

/// Rectangular tiling of the skewed (birth, lifetime) half-plane.
///
/// Rows partition lifetime: row 1 is the overflow band (life_max, inf), rows
/// 2..rows tile [0, life_max] in bands of height cell_height(), the bottom
/// band closed at 0 so zero-persistence points are counted. Columns partition
/// birth: column 1 is (-inf, birth_min], columns 2..cols-1 tile
/// (birth_min, birth_max] in cells of width cell_width(), column cols is
/// (birth_max, inf). Interior intervals are half-open, closed on the right.
struct BinningParams {
    int rows = 8;            // vertical resolution, >= 4
    int cols = 8;            // horizontal resolution, >= 4
    double birth_min = 0.0;  // > 0
    double birth_max = 0.0;  // > birth_min
    double life_max = 0.0;   // > 0

    void validate() const;  // throws RejectedConfigError

    double cell_height() const { return life_max / (rows - 1); }
    double cell_width() const { return (birth_max - birth_min) / (cols - 2); }

    /// 0-based row/column of a point; every real lands in exactly one bin.
    int row_of(double lifetime) const;
    int col_of(double birth) const;

    friend bool operator==(const BinningParams&, const BinningParams&) = default;
};

struct SkewPoint {
    double birth = 0.0;
    double lifetime = 0.0;
};

/// (birth, death) -> (birth, death - birth).
std::vector<SkewPoint> skew_transform(const PersistenceDiagram& diagram);

/// Integer count matrix over the tiling; total count equals the number of
/// points binned.
struct BinnedFeature {
    std::vector<std::int64_t> counts;  // row-major rows x cols
    BinningParams params;
    SignalKind kind = SignalKind::speed;

    std::int64_t at(int row, int col) const { return counts[row * params.cols + col]; }
    std::int64_t total() const;
};

BinnedFeature bin_diagram(std::span<const SkewPoint> points, const BinningParams& params,
                          SignalKind kind = SignalKind::speed);

/// Row-major flattening of each matrix, concatenated in the given order.
std::vector<std::int64_t> feature_vector(std::span<const BinnedFeature> features);

/// Data-driven bounds: birth_min/birth_max from the 5th/95th percentile of
/// birth values, life_max from the 95th percentile of lifetimes, floored so
/// the constraints birth_max > birth_min > 0 and life_max > 0 hold.
BinningParams quantile_params(std::span<const std::vector<SkewPoint>> point_sets, int rows,
                              int cols);

}  // namespace topotrack
