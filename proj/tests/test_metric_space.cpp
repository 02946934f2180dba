#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <vector>

#include "fraclab/errors.hpp"
#include "fraclab/json_io.hpp"
#include "fraclab/metric_space.hpp"

using namespace fraclab;

namespace {

FiniteMetricSpace line(std::vector<double> xs, double floor_ = 1e-6) {
    return FiniteMetricSpace::from_points(1, std::move(xs), floor_);
}

}  // namespace

TEST_CASE("from_points computes metric, diam, and detects sorted 1-d input") {
    auto s = line({0.0, 0.25, 1.0});
    CHECK(s.size() == 3);
    CHECK(s.dim() == 1);
    CHECK(s.sorted_1d());
    CHECK(s.diam() == doctest::Approx(1.0));
    CHECK(s.dist(0, 1) == doctest::Approx(0.25));
    CHECK(s.dist(1, 2) == doctest::Approx(0.75));
    CHECK(s.dist(2, 0) == s.dist(0, 2));

    auto unsorted = line({0.5, 0.0, 1.0});
    CHECK_FALSE(unsorted.sorted_1d());
    CHECK(unsorted.diam() == doctest::Approx(1.0));
}

TEST_CASE("from_points in 2-d uses the Euclidean metric") {
    auto s = FiniteMetricSpace::from_points(2, {0.0, 0.0, 3.0, 4.0, 0.0, 4.0}, 1e-6);
    CHECK(s.size() == 3);
    CHECK_FALSE(s.sorted_1d());
    CHECK(s.dist(0, 1) == doctest::Approx(5.0));
    CHECK(s.dist(0, 2) == doctest::Approx(4.0));
    CHECK(s.dist(1, 2) == doctest::Approx(3.0));
    CHECK(s.diam() == doctest::Approx(5.0));
}

TEST_CASE("from_points rejects malformed input") {
    CHECK_THROWS_AS(FiniteMetricSpace::from_points(0, {0.0, 1.0}, 1e-6), ArgumentError);
    CHECK_THROWS_AS(FiniteMetricSpace::from_points(2, {0.0, 1.0, 2.0}, 1e-6), ArgumentError);
    CHECK_THROWS_AS(FiniteMetricSpace::from_points(1, {0.5}, 1e-6), DegenerateInputError);
    CHECK_THROWS_AS(FiniteMetricSpace::from_points(1, {0.0, 1.0}, 0.0), ArgumentError);
    CHECK_THROWS_AS(FiniteMetricSpace::from_points(1, {0.0, std::nan("")}, 1e-6), ArgumentError);
}

TEST_CASE("from_matrix validates and symmetrizes, floor defaults to min gap") {
    std::vector<double> d = {0.0, 1.0, 2.0,
                             1.0, 0.0, 1.5,
                             2.0, 1.5, 0.0};
    auto s = FiniteMetricSpace::from_matrix(3, d);
    CHECK(s.size() == 3);
    CHECK_FALSE(s.has_points());
    CHECK(s.diam() == doctest::Approx(2.0));
    CHECK(s.resolution_floor() == doctest::Approx(1.0));

    SUBCASE("asymmetry rejected") {
        auto bad = d;
        bad[1] = 1.1;
        CHECK_THROWS_AS(FiniteMetricSpace::from_matrix(3, bad), ArgumentError);
    }
    SUBCASE("nonzero diagonal rejected") {
        auto bad = d;
        bad[0] = 0.5;
        CHECK_THROWS_AS(FiniteMetricSpace::from_matrix(3, bad), ArgumentError);
    }
    SUBCASE("triangle violation rejected") {
        std::vector<double> bad = {0.0, 1.0, 9.0,
                                   1.0, 0.0, 1.0,
                                   9.0, 1.0, 0.0};
        CHECK_THROWS_AS(FiniteMetricSpace::from_matrix(3, bad), ArgumentError);
    }
    SUBCASE("negative distance rejected") {
        auto bad = d;
        bad[1] = -1.0;
        bad[3] = -1.0;
        CHECK_THROWS_AS(FiniteMetricSpace::from_matrix(3, bad), ArgumentError);
    }
}

TEST_CASE("ball_members is the closed ball in ascending index order") {
    auto s = line({0.0, 0.1, 0.2, 0.5, 1.0});
    CHECK(ball_members(s, 0, 0.2) == IndexSet{0, 1, 2});
    CHECK(ball_members(s, 3, 0.3) == IndexSet{2, 3});
    CHECK(ball_members(s, 3, 0.5) == IndexSet{0, 1, 2, 3, 4});
    CHECK(ball_members(s, 4, 0.01) == IndexSet{4});
    CHECK_THROWS_AS(ball_members(s, 9, 0.1), ArgumentError);
}

TEST_CASE("greedy_packing keeps pairwise distances strictly above r") {
    auto s = line({0.0, 0.1, 0.2, 0.3, 0.4});

    SUBCASE("exact spacing r merges neighbors") {
        auto p = greedy_packing(s, all_indices(s), 0.1);
        CHECK(p == IndexSet{0, 2, 4});
    }
    SUBCASE("just under the spacing keeps everything") {
        auto p = greedy_packing(s, all_indices(s), 0.0999999);
        CHECK(p == IndexSet{0, 1, 2, 3, 4});
    }
    SUBCASE("subset restriction respected") {
        auto p = greedy_packing(s, IndexSet{1, 3, 4}, 0.11);
        CHECK(p == IndexSet{1, 3});
    }
    SUBCASE("result covers the subset at radius r") {
        auto p = greedy_packing(s, all_indices(s), 0.17);
        for (int i : all_indices(s)) {
            double best = 1e300;
            for (int j : p) best = std::min(best, s.dist(i, j));
            CHECK(best <= 0.17);
        }
    }
    CHECK(covering_count(s, all_indices(s), 0.1) == 3);
}

TEST_CASE("build_net extends a seed to a maximal separated set") {
    auto s = line({0.0, 0.1, 0.2, 0.3, 0.4, 0.5});
    auto net = build_net(s, 0.15);
    CHECK(net == IndexSet{0, 2, 4});

    auto seeded = build_net(s, 0.15, IndexSet{1});
    CHECK(std::find(seeded.begin(), seeded.end(), 1) != seeded.end());
    for (std::size_t a = 0; a < seeded.size(); ++a)
        for (std::size_t b = a + 1; b < seeded.size(); ++b)
            CHECK(s.dist(seeded[a], seeded[b]) > 0.15);
    for (int i : all_indices(s)) {
        double best = 1e300;
        for (int j : seeded) best = std::min(best, s.dist(i, j));
        CHECK(best <= 0.15);
    }
}

TEST_CASE("json round trip is canonical and byte stable") {
    auto s = FiniteMetricSpace::from_points(2, {0.0, 0.0, 1.0 / 3.0, 0.25, 0.9, 0.7}, 1e-5);
    auto j = s.to_json();
    auto back = FiniteMetricSpace::load_json(j);
    CHECK(back.size() == s.size());
    CHECK(back.dim() == s.dim());
    CHECK(back.resolution_floor() == s.resolution_floor());
    CHECK(back.dist(0, 2) == doctest::Approx(s.dist(0, 2)).epsilon(1e-11));
    CHECK(jsonio::canonical_dump(back.to_json()) == jsonio::canonical_dump(j));

    auto m = FiniteMetricSpace::from_matrix(3, {0.0, 1.0, 2.0, 1.0, 0.0, 1.5, 2.0, 1.5, 0.0});
    auto m2 = FiniteMetricSpace::load_json(m.to_json());
    CHECK_FALSE(m2.has_points());
    CHECK(m2.dist(0, 2) == doctest::Approx(2.0));
    CHECK(jsonio::canonical_dump(m2.to_json()) == jsonio::canonical_dump(m.to_json()));
}
