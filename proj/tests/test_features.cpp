#include <doctest.h>

#include <numeric>

#include "topotrack/errors.hpp"
#include "topotrack/features.hpp"
#include "topotrack/random.hpp"

using namespace topotrack;

namespace {

BinningParams example_params() {
    BinningParams p;
    p.rows = 4;
    p.cols = 4;
    p.birth_min = 1.0;
    p.birth_max = 3.0;
    p.life_max = 3.0;
    return p;
}

}  // namespace

TEST_CASE("skew_transform: direct arithmetic") {
    PersistenceDiagram d;
    d.pairs = {{1, 4}, {2, 3}, {5, 5}};
    const auto skewed = skew_transform(d);
    REQUIRE(skewed.size() == 3);
    CHECK(skewed[0].birth == 1.0);
    CHECK(skewed[0].lifetime == 3.0);
    CHECK(skewed[1].birth == 2.0);
    CHECK(skewed[1].lifetime == 1.0);
    CHECK(skewed[2].birth == 5.0);
    CHECK(skewed[2].lifetime == 0.0);  // diagonal point drops to the axis
}

TEST_CASE("binning params: validation and derived cell sizes") {
    BinningParams p = example_params();
    CHECK(p.cell_height() == doctest::Approx(1.0));  // life_max / (rows-1)
    CHECK(p.cell_width() == doctest::Approx(1.0));   // (birth_max-birth_min) / (cols-2)

    p.rows = 3;
    CHECK_THROWS_AS(p.validate(), RejectedConfigError);
    p = example_params();
    p.birth_min = 0.0;
    CHECK_THROWS_AS(p.validate(), RejectedConfigError);
    p = example_params();
    p.birth_max = p.birth_min;
    CHECK_THROWS_AS(p.validate(), RejectedConfigError);
    p = example_params();
    p.life_max = 0.0;
    CHECK_THROWS_AS(p.validate(), RejectedConfigError);
}

TEST_CASE("bin_diagram: hand-placed points") {
    const BinningParams p = example_params();
    // Overflow band and left overflow column.
    CHECK(p.row_of(4.0) == 0);
    CHECK(p.col_of(0.5) == 0);
    // Bottom band is closed at zero.
    CHECK(p.row_of(0.5) == 3);
    CHECK(p.row_of(0.0) == 3);
    CHECK(p.col_of(2.0) == 1);
    // Interior bands are right-closed: lifetime exactly 2 falls in (1, 2].
    CHECK(p.row_of(2.0) == 2);
    CHECK(p.row_of(2.0 + 1e-9) == 1);
    CHECK(p.row_of(3.0) == 1);
    CHECK(p.col_of(5.0) == 3);

    const std::vector<SkewPoint> pts = {{0.5, 4.0}, {2.0, 0.5}, {5.0, 2.0}};
    const BinnedFeature f = bin_diagram(pts, p);
    CHECK(f.at(0, 0) == 1);  // (0.5, 4): overflow row, left column
    CHECK(f.at(3, 1) == 1);  // (2, 0.5): bottom band, first interior column
    CHECK(f.at(2, 3) == 1);  // (5, 2): right-closed interior band, right overflow
    CHECK(f.total() == 3);
}

TEST_CASE("bin_diagram: empty diagram gives the zero matrix") {
    const BinnedFeature f = bin_diagram(std::vector<SkewPoint>{}, example_params());
    CHECK(f.total() == 0);
    CHECK(f.counts.size() == 16);
}

TEST_CASE("bin_diagram: count conservation under random params") {
    Rng rng(21);
    for (int trial = 0; trial < 200; ++trial) {
        BinningParams p;
        p.rows = rng.uniform_int(4, 12);
        p.cols = rng.uniform_int(4, 12);
        p.birth_min = rng.uniform(0.01, 5.0);
        p.birth_max = p.birth_min + rng.uniform(0.01, 10.0);
        p.life_max = rng.uniform(0.01, 10.0);

        const int n = rng.uniform_int(0, 40);
        std::vector<SkewPoint> pts;
        for (int i = 0; i < n; ++i) {
            pts.push_back({rng.uniform(-2, 12), rng.uniform(0, 14)});
        }
        CHECK(bin_diagram(pts, p).total() == n);
    }
}

TEST_CASE("bin_diagram: refinement never changes the total") {
    Rng rng(22);
    std::vector<SkewPoint> pts;
    for (int i = 0; i < 25; ++i) pts.push_back({rng.uniform(0, 6), rng.uniform(0, 6)});
    BinningParams p = example_params();
    const std::int64_t total = bin_diagram(pts, p).total();
    for (int r = 4; r <= 16; r += 3) {
        p.rows = r;
        p.cols = r + 1;
        CHECK(bin_diagram(pts, p).total() == total);
    }
}

TEST_CASE("bin_diagram: identical points share a bin; overflow row is exclusive") {
    const BinningParams p = example_params();
    const std::vector<SkewPoint> pts = {{1.7, 2.3}, {1.7, 2.3}, {1.7, 2.3}};
    const BinnedFeature f = bin_diagram(pts, p);
    CHECK(*std::max_element(f.counts.begin(), f.counts.end()) == 3);

    for (double life : {3.001, 5.0, 100.0}) {
        const BinnedFeature g = bin_diagram(std::vector<SkewPoint>{{2.0, life}}, p);
        std::int64_t in_top = 0;
        for (int j = 0; j < p.cols; ++j) in_top += g.at(0, j);
        CHECK(in_top == 1);
        CHECK(g.total() == 1);
    }
}

TEST_CASE("feature_vector: flattening and concatenation") {
    const BinningParams p = example_params();
    const BinnedFeature one = bin_diagram(std::vector<SkewPoint>{{2.0, 1.5}}, p);
    CHECK(feature_vector(std::vector<BinnedFeature>{one}).size() == 16);

    const std::vector<BinnedFeature> three = {one, one, one};
    const auto combined = feature_vector(three);
    CHECK(combined.size() == 48);
    const auto zero = feature_vector(
        std::vector<BinnedFeature>{bin_diagram(std::vector<SkewPoint>{}, p)});
    CHECK(std::accumulate(zero.begin(), zero.end(), std::int64_t{0}) == 0);
}

TEST_CASE("quantile_params produce valid bounds") {
    Rng rng(23);
    std::vector<std::vector<SkewPoint>> sets;
    for (int s = 0; s < 10; ++s) {
        std::vector<SkewPoint> pts;
        for (int i = 0; i < 30; ++i) pts.push_back({rng.uniform(0, 20), rng.uniform(0, 8)});
        sets.push_back(std::move(pts));
    }
    const BinningParams p = quantile_params(sets, 8, 8);
    CHECK(p.birth_min > 0.0);
    CHECK(p.birth_max > p.birth_min);
    CHECK(p.life_max > 0.0);

    // Degenerate all-zero inputs still yield usable params.
    std::vector<std::vector<SkewPoint>> zeros = {{{0.0, 0.0}, {0.0, 0.0}}};
    CHECK_NOTHROW((void)quantile_params(zeros, 8, 8));
}
