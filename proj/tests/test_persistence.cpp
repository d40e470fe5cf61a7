#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "oracles.hpp"
#include "topotrack/errors.hpp"
#include "topotrack/persistence.hpp"
#include "topotrack/random.hpp"

using namespace topotrack;

namespace {

std::vector<PersistencePair> pairs_of(const std::vector<double>& values, bool augmented = false) {
    return morse_filtration(values, augmented).pairs;
}

bool same_pairs(std::vector<PersistencePair> a, std::vector<PersistencePair> b) {
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    return a == b;
}

std::vector<double> random_values(Rng& rng, int n, bool distinct) {
    std::vector<double> v;
    for (int i = 0; i < n; ++i) {
        v.push_back(distinct ? rng.uniform(0, 100) + i * 1e-7 : std::floor(rng.uniform(0, 12)));
    }
    if (distinct) rng.shuffle(v);
    return v;
}

PersistenceDiagram random_diagram(Rng& rng, int max_dots) {
    PersistenceDiagram d;
    const int n = rng.uniform_int(0, max_dots);
    for (int i = 0; i < n; ++i) {
        const double b = rng.uniform(-5, 5);
        d.pairs.push_back({b, b + rng.uniform(0.01, 6)});
    }
    std::sort(d.pairs.begin(), d.pairs.end());
    return d;
}

}  // namespace

TEST_CASE("morse_filtration: monotone sequence") {
    CHECK(same_pairs(pairs_of({1, 2, 3, 4}), {{1, 4}}));
    CHECK(same_pairs(pairs_of({1, 2, 3, 4}, true), {{1, 4}, {2, 2}, {3, 3}, {4, 4}}));
}

TEST_CASE("morse_filtration: one interior minimum") {
    CHECK(same_pairs(pairs_of({1, 3, 2, 4}), {{2, 3}, {1, 4}}));
    CHECK(same_pairs(pairs_of({1, 3, 2, 4}, true), {{2, 3}, {1, 4}, {3, 3}, {4, 4}}));
}

TEST_CASE("morse_filtration: single value") {
    CHECK(same_pairs(pairs_of({5}), {{5, 5}}));
}

TEST_CASE("morse_filtration: errors") {
    CHECK_THROWS_AS((void)morse_filtration(std::vector<double>{}, false),
                    InsufficientDataError);
    CHECK_THROWS_AS((void)morse_filtration(std::vector<double>{1.0, std::nan("")}, false),
                    RejectedInputError);
}

TEST_CASE("morse_filtration: aggressive speed-curve shape") {
    // Curve with minima A < B < C < E and maxima D < G < F < H arranged so the
    // pairing comes out as (C,D), (E,F), (B,G) plus the essential (A,H).
    Rng rng(7);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<double> v(8);
        for (double& x : v) x = rng.uniform(0, 50);
        std::sort(v.begin(), v.end());
        const double A = v[0], B = v[1], C = v[2], E = v[3], D = v[4], G = v[5], F = v[6],
                     H = v[7];
        const std::vector<double> curve = {A, G, C, D, B, F, E, H};
        CHECK(same_pairs(pairs_of(curve), {{C, D}, {E, F}, {B, G}, {A, H}}));
    }
}

TEST_CASE("morse_filtration: normal speed-curve shape") {
    Rng rng(8);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<double> v(4);
        for (double& x : v) x = rng.uniform(0, 50);
        std::sort(v.begin(), v.end());
        const double a = v[0], b = v[1], c = v[2], d = v[3];
        CHECK(same_pairs(pairs_of({a, c, b, d}), {{b, c}, {a, d}}));
    }
}

TEST_CASE("morse_filtration matches the sublevel oracle") {
    Rng rng(9);
    for (int trial = 0; trial < 500; ++trial) {
        const bool distinct = trial % 2 == 0;
        const std::vector<double> v = random_values(rng, rng.uniform_int(1, 50), distinct);
        CHECK(same_pairs(pairs_of(v), oracles::sublevel_diagram(v)));
        if (distinct) {
            CHECK(same_pairs(pairs_of(v, true), oracles::sublevel_diagram(v, true)));
        }
    }
}

TEST_CASE("morse_filtration: structural counts") {
    Rng rng(10);
    for (int trial = 0; trial < 100; ++trial) {
        const int n = rng.uniform_int(1, 60);
        const std::vector<double> v = random_values(rng, n, true);

        int minima = 0;
        for (int i = 0; i < n; ++i) {
            const bool left_up = i == 0 || v[i - 1] > v[i];
            const bool right_up = i == n - 1 || v[i + 1] > v[i];
            if (left_up && right_up) ++minima;
        }
        const PersistenceDiagram plain = morse_filtration(v, false);
        const PersistenceDiagram aug = morse_filtration(v, true);
        CHECK(static_cast<int>(plain.pairs.size()) == minima);
        CHECK(aug.pairs.size() == v.size());
        CHECK(same_pairs(aug.off_diagonal(), plain.off_diagonal()));
    }
}

TEST_CASE("morse_filtration: inserting a non-critical value preserves the plain diagram") {
    Rng rng(11);
    for (int trial = 0; trial < 50; ++trial) {
        const std::vector<double> v = random_values(rng, rng.uniform_int(3, 30), true);
        const std::size_t i = static_cast<std::size_t>(rng.uniform_int(1, (int)v.size() - 1));
        std::vector<double> widened(v.begin(), v.begin() + i);
        widened.push_back(0.5 * (v[i - 1] + v[i]));  // between neighbors: not critical
        widened.insert(widened.end(), v.begin() + i, v.end());
        CHECK(same_pairs(pairs_of(v), pairs_of(widened)));
    }
}

TEST_CASE("wasserstein: identical diagrams have distance zero") {
    Rng rng(12);
    for (double p : {1.0, 2.0, kInfinityOrder}) {
        for (int trial = 0; trial < 10; ++trial) {
            const PersistenceDiagram d = random_diagram(rng, 6);
            CHECK(wasserstein(d, d, p).value == doctest::Approx(0.0).epsilon(1e-12));
        }
    }
}

TEST_CASE("wasserstein: single dot against the empty diagram") {
    PersistenceDiagram d;
    d.pairs.push_back({0.0, 2.0});
    PersistenceDiagram empty;
    CHECK(wasserstein(d, empty, kInfinityOrder).value == doctest::Approx(1.0));
    CHECK(wasserstein(empty, d, kInfinityOrder).value == doctest::Approx(1.0));
    CHECK(wasserstein(d, empty, 1.0).value == doctest::Approx(2.0));
    // Printed form: (sum of L2 displacements)^(1/2) = (sqrt 2)^(1/2).
    CHECK(wasserstein(d, empty, 2.0).value == doctest::Approx(std::pow(2.0, 0.25)));
    // Powered form: (sum of squared L2 displacements)^(1/2) = sqrt 2.
    CHECK(wasserstein(d, empty, 2.0, {true}).value == doctest::Approx(std::sqrt(2.0)));
}

TEST_CASE("wasserstein matches exhaustive enumeration on small diagrams") {
    Rng rng(13);
    for (int trial = 0; trial < 60; ++trial) {
        const PersistenceDiagram d1 = random_diagram(rng, 4);
        const PersistenceDiagram d2 = random_diagram(rng, 4);
        for (double p : {1.0, 2.0, kInfinityOrder}) {
            for (bool powered : {false, true}) {
                const double got = wasserstein(d1, d2, p, {powered}).value;
                const double want = oracles::wasserstein_exhaustive(d1, d2, p, powered);
                CHECK(got == doctest::Approx(want).epsilon(1e-9));
            }
        }
    }
}

TEST_CASE("wasserstein: pseudometric properties on random triples") {
    Rng rng(14);
    for (int trial = 0; trial < 25; ++trial) {
        const PersistenceDiagram a = random_diagram(rng, 4);
        const PersistenceDiagram b = random_diagram(rng, 4);
        const PersistenceDiagram c = random_diagram(rng, 4);
        for (double p : {1.0, 2.0, kInfinityOrder}) {
            const double ab = wasserstein(a, b, p).value;
            const double ba = wasserstein(b, a, p).value;
            const double bc = wasserstein(b, c, p).value;
            const double ac = wasserstein(a, c, p).value;
            CHECK(ab == doctest::Approx(ba).epsilon(1e-9));
            CHECK(ac <= ab + bc + 1e-9);
        }
    }
}

TEST_CASE("wasserstein: augmented diagonal points are absorbed") {
    PersistenceDiagram plain;
    plain.pairs = {{1, 4}, {2, 3}};
    PersistenceDiagram augmented = plain;
    augmented.augmented = true;
    augmented.pairs.push_back({3, 3});
    augmented.pairs.push_back({4, 4});
    std::sort(augmented.pairs.begin(), augmented.pairs.end());
    for (double p : {1.0, 2.0, kInfinityOrder}) {
        CHECK(wasserstein(plain, augmented, p).value == doctest::Approx(0.0));
    }
}

TEST_CASE("stability_check: identical and shifted inputs") {
    Rng rng(15);
    const std::vector<double> f = random_values(rng, 20, true);
    {
        const auto [dist, sup] = stability_check(f, f, kInfinityOrder);
        CHECK(dist == doctest::Approx(0.0));
        CHECK(sup == doctest::Approx(0.0));
    }
    {
        std::vector<double> g = f;
        for (double& x : g) x += 2.5;
        const auto [dist, sup] = stability_check(f, g, kInfinityOrder);
        CHECK(sup == doctest::Approx(2.5));
        CHECK(dist == doctest::Approx(2.5));
    }
    std::vector<double> short_g(f.begin(), f.end() - 1);
    CHECK_THROWS_AS((void)stability_check(f, short_g, kInfinityOrder), RejectedInputError);
}

TEST_CASE("stability: bottleneck distance bounded by noise amplitude") {
    Rng rng(16);
    for (int trial = 0; trial < 100; ++trial) {
        const std::vector<double> f = random_values(rng, rng.uniform_int(5, 40), true);
        const double eps = rng.uniform(0.01, 2.0);
        std::vector<double> g = f;
        for (double& x : g) x += rng.uniform(-eps, eps);
        const auto [dist, sup] = stability_check(f, g, kInfinityOrder);
        CHECK(dist <= sup + 1e-12);
        CHECK(sup <= eps + 1e-12);
    }
}
