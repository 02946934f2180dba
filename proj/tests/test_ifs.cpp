#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "fraclab/errors.hpp"
#include "fraclab/ifs.hpp"
#include "fraclab/json_io.hpp"

using namespace fraclab;

namespace {

Similitude map1d(double ratio, double shift) {
    Similitude s;
    s.dim = 1;
    s.ratio = ratio;
    s.orthogonal = {1.0};
    s.translation = {shift};
    return s;
}

IfsSystem cantor() {
    IfsSystem ifs;
    ifs.dim = 1;
    ifs.maps = {map1d(1.0 / 3.0, 0.0), map1d(1.0 / 3.0, 2.0 / 3.0)};
    return ifs;
}

constexpr double kLog2Log3 = 0.6309297535714574;

}  // namespace

TEST_CASE("similitude composition and fixed points") {
    auto f = map1d(0.5, 0.25);
    CHECK(f.apply({1.0})[0] == doctest::Approx(0.75));
    CHECK(f.fixed_point()[0] == doctest::Approx(0.5).epsilon(1e-12));

    auto c = cantor();
    auto g = compose(c, Word{1, 2});
    CHECK(g.ratio == doctest::Approx(1.0 / 9.0).epsilon(1e-15));
    CHECK(g.translation[0] == doctest::Approx(2.0 / 9.0).epsilon(1e-15));
    CHECK(g.apply({1.0})[0] == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
    CHECK(word_to_string(Word{1, 2}) == "12");
    CHECK(compose(c, Word{}).ratio == doctest::Approx(1.0));
}

TEST_CASE("map validation enforces contraction and orthogonality") {
    auto bad_ratio = map1d(1.0, 0.0);
    CHECK_THROWS_AS(bad_ratio.validate_map(), ArgumentError);
    auto bad_matrix = map1d(0.5, 0.0);
    bad_matrix.orthogonal = {2.0};
    CHECK_THROWS_AS(bad_matrix.validate_map(), ArgumentError);

    IfsSystem one;
    one.dim = 1;
    one.maps = {map1d(0.5, 0.0)};
    CHECK_THROWS_AS(one.validate(), ArgumentError);

    auto c = cantor();
    c.condensation = Condensation{};
    c.condensation->kind = Condensation::Kind::kPoints;
    CHECK_THROWS_AS(c.validate(), ArgumentError);  // empty point condensation
}

TEST_CASE("stopping words partition the address space at scale rho") {
    IfsSystem ifs;
    ifs.dim = 1;
    ifs.maps = {map1d(0.5, 0.0), map1d(0.25, 0.75)};
    auto words = stopping_words(ifs, 0.25);
    REQUIRE(words.size() == 3);
    CHECK(word_to_string(words[0]) == "11");
    CHECK(word_to_string(words[1]) == "12");
    CHECK(word_to_string(words[2]) == "2");

    // Lip <= rho < Lip of the parent, for every stopping word.
    for (const auto& w : words) {
        double lip = compose(ifs, w).ratio;
        CHECK(lip <= 0.25 + 1e-15);
        Word parent(w.begin(), w.end() - 1);
        CHECK(compose(ifs, parent).ratio > 0.25);
    }

    SUBCASE("telescoping: Moran weights of stopping words sum to one") {
        double d = similarity_dimension(ifs);
        for (double rho : {0.1, 0.01}) {
            double sum = 0.0;
            for (const auto& w : stopping_words(ifs, rho)) sum += std::pow(compose(ifs, w).ratio, d);
            CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
        }
    }
    CHECK_THROWS_AS(stopping_words(ifs, 1e-9, 100), BudgetError);
}

TEST_CASE("similarity dimension solves the Moran equation") {
    CHECK(similarity_dimension(cantor()) == doctest::Approx(kLog2Log3).epsilon(1e-12));

    IfsSystem half;
    half.dim = 1;
    half.maps = {map1d(0.5, 0.0), map1d(0.5, 0.5)};
    CHECK(similarity_dimension(half) == doctest::Approx(1.0).epsilon(1e-12));

    IfsSystem quarter;
    quarter.dim = 1;
    quarter.maps = {map1d(0.25, 0.0), map1d(0.25, 0.75)};
    CHECK(similarity_dimension(quarter) == doctest::Approx(0.5).epsilon(1e-12));

    IfsSystem mixed;
    mixed.dim = 1;
    mixed.maps = {map1d(0.5, 0.0), map1d(0.25, 0.75)};
    double d = similarity_dimension(mixed);
    CHECK(std::pow(0.5, d) + std::pow(0.25, d) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("attractor cloud has the exact leaf geometry") {
    const double delta = std::pow(3.0, -8);
    auto cloud = attractor_points(cantor(), delta);
    CHECK(cloud.size() == 256);
    CHECK(cloud.sorted_1d());
    CHECK(cloud.diam() == doctest::Approx(1.0 - delta).epsilon(1e-12));

    double min_gap = 1e300;
    for (int i = 0; i + 1 < cloud.size(); ++i)
        min_gap = std::min(min_gap, cloud.coord1d(i + 1) - cloud.coord1d(i));
    CHECK(min_gap == doctest::Approx(2.0 * delta).epsilon(1e-12));
}

TEST_CASE("inhomogeneous cloud merges condensation copies into the net") {
    auto ifs = cantor();
    ifs.condensation = Condensation{};
    ifs.condensation->kind = Condensation::Kind::kPoints;
    ifs.condensation->points = {{0.5}};

    const double delta = std::pow(3.0, -6);
    auto cloud = inhomogeneous_points(ifs, delta);
    CHECK(cloud.sorted_1d());
    CHECK(cloud.resolution_floor() == doctest::Approx(delta / 2.0).epsilon(1e-15));
    // 64 leaves plus 2^k copies of the atom for k = 0..6, deduplicated at
    // delta/2 (depth-6 copies collapse into their cells' endpoints).
    CHECK(cloud.size() == 103);

    auto plain = attractor_points(cantor(), delta);
    CHECK(cloud.size() > plain.size());

    CHECK_THROWS_AS(inhomogeneous_points(ifs, 1e-7, 1000), BudgetError);
}

TEST_CASE("condensation generators produce the documented sets") {
    Condensation seq;
    seq.kind = Condensation::Kind::kSequence34;
    seq.seq_J = 20;
    auto pts = seq.generate(0.0, 1);
    REQUIRE(pts.size() == 21);
    std::vector<double> xs;
    for (const auto& p : pts) xs.push_back(p[0]);
    std::sort(xs.begin(), xs.end());
    CHECK(xs.front() == 0.0);
    CHECK(xs.back() == doctest::Approx(0.5).epsilon(1e-15));          // (1 + 1/2) / 3
    CHECK(xs[xs.size() - 2] == doctest::Approx(4.0 / 27.0).epsilon(1e-15));  // (1 + 1/3) / 9
    CHECK_FALSE(seq.sregular());

    Condensation iv;
    iv.kind = Condensation::Kind::kInterval;
    iv.a = 0.4;
    iv.b = 0.6;
    auto net = iv.generate(0.01, 1);
    CHECK(net.size() >= 21);
    std::vector<double> ys;
    for (const auto& p : net) ys.push_back(p[0]);
    std::sort(ys.begin(), ys.end());
    CHECK(ys.front() == doctest::Approx(0.4));
    CHECK(ys.back() == doctest::Approx(0.6));
    for (std::size_t i = 0; i + 1 < ys.size(); ++i) CHECK(ys[i + 1] - ys[i] <= 0.01 + 1e-12);
    CHECK(iv.sregular());
    CHECK(iv.sregular_s() == 1.0);
}

TEST_CASE("dedup merges points below the separation and pools weights") {
    std::vector<std::vector<double>> pts = {{0.0}, {1e-7}, {0.5}, {0.5 + 2e-7}, {1.0}};
    std::vector<double> w = {1.0, 2.0, 3.0, 4.0, 5.0};
    dedup_cloud(1, pts, &w, 1e-6);
    REQUIRE(pts.size() == 3);
    CHECK(w[0] == doctest::Approx(3.0));
    CHECK(w[1] == doctest::Approx(7.0));
    CHECK(w[2] == doctest::Approx(5.0));
}

TEST_CASE("open set condition margins on the standard systems") {
    auto ifs = cantor();
    ifs.condensation = Condensation{};
    ifs.condensation->kind = Condensation::Kind::kInterval;
    ifs.condensation->a = 0.4;
    ifs.condensation->b = 0.6;

    SUBCASE("no open set provided") {
        CHECK_THROWS_AS(check_cosc(ifs), PreconditionError);
    }

    ifs.open_set = std::vector<std::vector<double>>{{0.0}, {1.0}};

    SUBCASE("interval condensation clears every margin") {
        auto rep = check_cosc(ifs);
        CHECK(rep.has_open_set);
        CHECK(rep.containment_ok);
        CHECK(rep.disjoint_ok);
        CHECK(rep.osc_ok);
        CHECK(rep.condensation_ok);
        CHECK(rep.cosc_ok);
        // dist([0.4, 0.6], [0, 1/3] U [2/3, 1]) = 1/15
        CHECK(rep.cosc_margin == doctest::Approx(1.0 / 15.0).epsilon(1e-12));
        CHECK(rep.closure_margin == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
    }

    SUBCASE("sequence condensation touches the boundary") {
        ifs.condensation->kind = Condensation::Kind::kSequence34;
        ifs.condensation->points.clear();
        auto rep = check_cosc(ifs);
        CHECK(rep.osc_ok);
        CHECK_FALSE(rep.condensation_ok);
        CHECK_FALSE(rep.cosc_ok);
        CHECK(rep.cosc_margin == doctest::Approx(0.0));
    }

    SUBCASE("touching image closures are flagged") {
        IfsSystem touch;
        touch.dim = 1;
        touch.maps = {map1d(0.5, 0.0), map1d(0.5, 0.5)};
        touch.condensation = Condensation{};
        touch.condensation->kind = Condensation::Kind::kPoints;
        touch.condensation->points = {{0.3}};
        touch.open_set = std::vector<std::vector<double>>{{0.0}, {1.0}};
        auto rep = check_cosc(touch);
        CHECK(rep.containment_ok);
        CHECK(rep.disjoint_ok);
        CHECK(rep.zero_closure_margin);
        CHECK(rep.closure_margin == doctest::Approx(0.0));
        CHECK_FALSE(rep.cosc_ok);
    }
}

TEST_CASE("ifs json round trip preserves every field") {
    auto ifs = cantor();
    ifs.condensation = Condensation{};
    ifs.condensation->kind = Condensation::Kind::kInterval;
    ifs.condensation->a = 0.4;
    ifs.condensation->b = 0.6;
    ifs.condensation->points = {{1.0 / 6.0}};
    ifs.open_set = std::vector<std::vector<double>>{{0.0}, {1.0}};

    auto j = ifs.to_json();
    auto back = IfsSystem::load_json(j);
    CHECK(back.kappa() == 2);
    CHECK(back.maps[1].translation[0] == ifs.maps[1].translation[0]);
    CHECK(back.condensation->a == 0.4);
    CHECK(back.condensation->points.size() == 1);
    CHECK(back.open_set->size() == 2);
    CHECK(jsonio::canonical_dump(back.to_json()) == jsonio::canonical_dump(j));

    auto seq = cantor();
    seq.condensation = Condensation{};
    seq.condensation->kind = Condensation::Kind::kSequence34;
    seq.condensation->seq_J = 12;
    auto seq2 = IfsSystem::load_json(seq.to_json());
    CHECK(seq2.condensation->kind == Condensation::Kind::kSequence34);
    CHECK(seq2.condensation->seq_J == 12);
}
