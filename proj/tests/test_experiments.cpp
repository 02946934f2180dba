#include "doctest.h"

#include <cmath>
#include <string>
#include <vector>

#include "fraclab/dim_est.hpp"
#include "fraclab/errors.hpp"
#include "fraclab/experiments.hpp"
#include "fraclab/ifs.hpp"
#include "fraclab/json_io.hpp"

using namespace fraclab;

namespace {

constexpr double kLog2Log3 = 0.6309297535714574;

Similitude map1d(double ratio, double shift) {
    Similitude s;
    s.dim = 1;
    s.ratio = ratio;
    s.orthogonal = {1.0};
    s.translation = {shift};
    return s;
}

IfsSystem cantor_with(Condensation::Kind kind) {
    IfsSystem ifs;
    ifs.dim = 1;
    ifs.maps = {map1d(1.0 / 3.0, 0.0), map1d(1.0 / 3.0, 2.0 / 3.0)};
    ifs.condensation = Condensation{};
    ifs.condensation->kind = kind;
    if (kind == Condensation::Kind::kInterval) {
        ifs.condensation->a = 0.4;
        ifs.condensation->b = 0.6;
    } else if (kind == Condensation::Kind::kPoints) {
        ifs.condensation->points = {{0.5}};
    }
    ifs.open_set = std::vector<std::vector<double>>{{0.0}, {1.0}};
    return ifs;
}

SweepConfig sweep(std::vector<std::pair<double, double>> grid, double guard = 10.0) {
    SweepConfig cfg;
    cfg.centers = SweepConfig::kAllCenters;
    cfg.ratio_grid = std::move(grid);
    cfg.guard = guard;
    return cfg;
}

}  // namespace

TEST_CASE("condensation_space materializes interval and sequence sets") {
    auto iv = cantor_with(Condensation::Kind::kInterval);
    auto space = condensation_space(iv, std::pow(3.0, -6));
    REQUIRE(space.has_value());
    CHECK(space->sorted_1d());
    CHECK(space->diam() == doctest::Approx(0.2).epsilon(1e-3));

    auto pt = cantor_with(Condensation::Kind::kPoints);
    CHECK_FALSE(condensation_space(pt, std::pow(3.0, -6)).has_value());

    IfsSystem bare = cantor_with(Condensation::Kind::kInterval);
    bare.condensation.reset();
    CHECK_THROWS_AS(condensation_space(bare, std::pow(3.0, -6)), PreconditionError);
}

TEST_CASE("interval condensation raises the measured dimension to one") {
    auto ifs = cantor_with(Condensation::Kind::kInterval);
    const double delta = std::pow(3.0, -8);
    auto cfg = sweep({{8e-4, 0.19}});

    auto r41 = run_thm41(ifs, delta, cfg, 0.1, false);
    CHECK(r41.name == "thm41");
    CHECK(r41.verdict);
    const double predicted = r41.predicted["value"].get<double>();
    const double measured = r41.measured["value"].get<double>();
    CHECK(predicted > 0.95);
    CHECK(predicted <= 1.0);
    CHECK(measured > 0.95);
    CHECK(measured < 1.11);
    CHECK(std::abs(measured - predicted) <= 0.1);

    auto r42 = run_thm42(ifs, delta, cfg, 0.1, false);
    CHECK(r42.verdict);
    CHECK(r42.measured["value"].get<double>() > 0.9);
    CHECK(r42.predicted["value"].get<double>() > 0.9);
}

TEST_CASE("singleton condensation leaves the dimension at the attractor value") {
    auto ifs = cantor_with(Condensation::Kind::kPoints);
    auto cfg = sweep({{4.5745e-4, 0.999}}, 5.0);
    auto rep = run_thm41(ifs, std::pow(3.0, -8), cfg, 0.1, false);
    CHECK(rep.verdict);
    CHECK(rep.predicted["value"].get<double>() == doctest::Approx(kLog2Log3).epsilon(1e-9));
    CHECK(rep.predicted["assouad_C"].get<double>() == doctest::Approx(0.0));
    const double measured = rep.measured["value"].get<double>();
    CHECK(measured > 0.63);
    CHECK(measured < 0.74);
}

TEST_CASE("isolated atom collapses the lower estimate of the condensation set") {
    auto ifs = cantor_with(Condensation::Kind::kInterval);
    ifs.condensation->points = {{1.0 / 6.0}};  // atom far from [0.4, 0.6]
    auto cfg = sweep({{8e-4, 0.19}});

    // The atom breaks the open set condition, so the gate must be forced.
    CHECK_THROWS_AS(run_thm42(ifs, std::pow(3.0, -8), cfg, 0.1, false), PreconditionError);

    auto rep = run_thm42(ifs, std::pow(3.0, -8), cfg, 0.1, true);
    CHECK_FALSE(rep.verdict);  // intended counterexample
    CHECK(rep.predicted["value"].get<double>() <= 0.15);
    CHECK(rep.measured["value"].get<double>() >= 0.9);
}

TEST_CASE("sequence condensation requires force and reports the gate") {
    auto ifs = cantor_with(Condensation::Kind::kSequence34);
    auto cfg = sweep({{0.01, 0.19}});
    CHECK_THROWS_AS(run_thm41(ifs, std::pow(3.0, -6), cfg, 0.1, false), PreconditionError);
    auto rep = run_thm41(ifs, std::pow(3.0, -6), cfg, 0.1, true);
    CHECK(rep.details.contains("cosc"));
    CHECK_FALSE(rep.details["cosc"]["cosc_ok"].get<bool>());
}

TEST_CASE("descent construction reproduces the closed-form constant") {
    auto ifs = cantor_with(Condensation::Kind::kPoints);

    auto vk = build_vk_descent(ifs, 0.4, 10);
    CHECK(vk.lambda == doctest::Approx(kLog2Log3).epsilon(1e-12));
    CHECK(vk.c0_formula == doctest::Approx(0.8).epsilon(1e-12));
    CHECK(vk.c0_measured == doctest::Approx(0.8).epsilon(1e-9));
    CHECK(vk.atom_share == doctest::Approx(0.2).epsilon(1e-12));
    CHECK_FALSE(vk.boundary_case);
    CHECK(vk.geometric_ok);
    CHECK(static_cast<int>(vk.greedy_word.size()) == 10);
    for (double ratio : vk.step_ratios) CHECK(ratio == doctest::Approx(0.8).epsilon(1e-9));
    CHECK(vk.iso_gap > 0.0);

    SUBCASE("the boundary mass drops the atoms entirely") {
        auto b = build_vk_descent(ifs, 0.5, 8);
        CHECK(b.boundary_case);
        CHECK(b.atom_share == doctest::Approx(0.0));
        for (double ratio : b.step_ratios) CHECK(ratio == doctest::Approx(1.0).epsilon(1e-9));
    }
    SUBCASE("intermediate q keeps a geometric profile") {
        auto m = build_vk_descent(ifs, 0.45, 8);
        CHECK(m.c0_formula == doctest::Approx(0.9).epsilon(1e-12));
        for (double ratio : m.step_ratios) CHECK(ratio == doctest::Approx(0.9).epsilon(1e-9));
    }
}

TEST_CASE("descent experiment verdict checks the strict constant bound") {
    auto ifs = cantor_with(Condensation::Kind::kPoints);
    auto cfg = sweep({}, 1.0);

    auto rep = run_vk_descent(ifs, 0.4, 10, cfg, 0.01);
    CHECK(rep.verdict);
    CHECK(rep.predicted["value"].get<double>() == doctest::Approx(0.8).epsilon(1e-12));
    CHECK(rep.measured["value"].get<double>() == doctest::Approx(0.8).epsilon(1e-9));
    CHECK(rep.measured["upper_reg"]["exponent"].get<double>() > 0.7);

    // q at the boundary runs to completion but cannot pass the strict bound.
    auto boundary = run_vk_descent(ifs, 0.5, 8, cfg, 0.01);
    CHECK_FALSE(boundary.verdict);
    CHECK(boundary.details["boundary_case"].get<bool>());
}

TEST_CASE("descent rejects invalid mass parameters") {
    auto ifs = cantor_with(Condensation::Kind::kPoints);
    CHECK_THROWS_AS(build_vk_descent(ifs, 0.6, 5), ArgumentError);   // kappa q > 1
    CHECK_THROWS_AS(build_vk_descent(ifs, 0.0, 5), ArgumentError);
    CHECK_THROWS_AS(build_vk_descent(ifs, 0.4, 0), ArgumentError);
    CHECK_THROWS_AS(build_vk_descent(ifs, 0.4, 61), ArgumentError);
    auto bare = ifs;
    bare.condensation.reset();
    CHECK_THROWS_AS(build_vk_descent(bare, 0.4, 5), PreconditionError);
}

TEST_CASE("restriction measure is near s-regular on the interval system") {
    auto ifs = cantor_with(Condensation::Kind::kInterval);
    const double delta = std::pow(3.0, -9);
    auto cfg = sweep({{2.6e-4, 0.97}});

    auto rep = run_regularity(ifs, delta, cfg, 0.2, 50.0);
    CHECK(rep.verdict);
    const double lower = rep.measured["value"].get<double>();
    CHECK(lower > 0.80);
    CHECK(lower < 0.90);
    CHECK(rep.predicted["value"].get<double>() == doctest::Approx(1.0));
    CHECK(rep.measured["spread"].get<double>() < 50.0);
    CHECK(rep.measured["regularity"]["c_min"].get<double>() > 0.0);
}

TEST_CASE("restriction cloud weights scale linearly with the measure") {
    auto ifs = cantor_with(Condensation::Kind::kInterval);
    auto cloud = hs_restriction_cloud(ifs, std::pow(3.0, -7), 1.0);
    CHECK(cloud.total() > 0.0);
    CHECK(cloud.space().sorted_1d());

    std::vector<double> w = cloud.weights();
    for (auto& v : w) v *= 7.0;
    auto scaled = WeightedCloud(cloud.space(), w);
    auto cfg = sweep({{2.3e-3, 0.9}});
    CHECK(lower_reg_estimate(cloud, cfg).exponent ==
          doctest::Approx(lower_reg_estimate(scaled, cfg).exponent).epsilon(1e-12));
}

TEST_CASE("regularity preconditions reject untagged or oversized systems") {
    auto pt = cantor_with(Condensation::Kind::kPoints);
    auto cfg = sweep({{2.6e-4, 0.97}});
    CHECK_THROWS_AS(run_regularity(pt, std::pow(3.0, -9), cfg, 0.1, 50.0), PreconditionError);

    auto bare = cantor_with(Condensation::Kind::kInterval);
    bare.condensation.reset();
    CHECK_THROWS_AS(run_regularity(bare, std::pow(3.0, -9), cfg, 0.1, 50.0), PreconditionError);

    IfsSystem fat;
    fat.dim = 1;
    fat.maps = {map1d(0.6, 0.0), map1d(0.6, 0.4)};
    fat.condensation = Condensation{};
    fat.condensation->kind = Condensation::Kind::kInterval;
    fat.condensation->a = 0.4;
    fat.condensation->b = 0.6;
    CHECK_THROWS_AS(run_regularity(fat, std::pow(3.0, -9), cfg, 0.1, 50.0), PreconditionError);
}

TEST_CASE("experiment reports serialize deterministically") {
    auto ifs = cantor_with(Condensation::Kind::kPoints);
    auto cfg = sweep({}, 1.0);
    auto a = run_vk_descent(ifs, 0.4, 8, cfg, 0.01).to_json();
    auto b = run_vk_descent(ifs, 0.4, 8, cfg, 0.01).to_json();
    CHECK(jsonio::canonical_dump(a) == jsonio::canonical_dump(b));
    CHECK(a["name"] == "vk_descent");
    CHECK(a.contains("inputs"));
    CHECK(a.contains("predicted"));
    CHECK(a.contains("measured"));
    CHECK(a["verdict"] == "pass");
}