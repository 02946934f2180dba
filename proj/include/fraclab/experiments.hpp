#pragma once

#include <optional>
#include <string>
#include <vector>

#include "fraclab/dim_est.hpp"
#include "fraclab/ifs.hpp"
#include "fraclab/json_io.hpp"

namespace fraclab {

struct ExperimentReport {
    std::string name;
    jsonio::json inputs = jsonio::json::object();
    jsonio::json predicted = jsonio::json::object();   // carries a primary "value"
    jsonio::json measured = jsonio::json::object();    // carries a primary "value"
    jsonio::json details = jsonio::json::object();
    double tolerance = 0.1;
    bool verdict = false;
    jsonio::json to_json() const;
};

// Condensation cloud as its own metric space at resolution delta (net spacing
// and dedup at delta/2). nullopt when the set collapses to fewer than two
// points (a singleton has every dimension equal to zero).
std::optional<FiniteMetricSpace> condensation_space(const IfsSystem& ifs, double delta);

// dim_A(E_C) against max{dim_A(E), dim_A(C)} under the condensation open set
// condition; force skips the gate to reproduce the no-COSC counterexamples.
ExperimentReport run_thm41(const IfsSystem& ifs, double delta, const SweepConfig& config,
                           double tolerance = 0.1, bool force = false);

// dim_L(E_C) against dim_L(C) under the same gate.
ExperimentReport run_thm42(const IfsSystem& ifs, double delta, const SweepConfig& config,
                           double tolerance = 0.1, bool force = false);

// Greedy-descent measure: mu(phi_w E_C) = q^{|w|}, condensation copies carry
// the conservation remainder q^{|w|} (1 - kappa q), leaves at depth n_max keep
// q^{n_max}. The descent data certifies the mechanism for THIS mu only; a
// "for all measures" quantifier is not finitely checkable.
struct VkDescent {
    WeightedCloud cloud;
    double q = 0.0;
    int n_max = 0;
    double lambda = 0.0;      // exponent used for the Lip^{-lambda} normalizer
    double atom_share = 0.0;  // 1 - kappa * q
    bool boundary_case = false;
    double c0_formula = 0.0;   // q * max_ratio^{-lambda}
    double c0_measured = 0.0;  // max over steps of the greedy min_j ratio
    std::vector<double> step_ratios;
    Word greedy_word;
    double iso_gap = 0.0;  // distance from the root condensation point to the rest
    std::vector<double> decay_values;  // mu(B(x_n, iso_gap Lip_n / 1.01)) Lip_n^{-lambda}
    bool geometric_ok = false;
};

VkDescent build_vk_descent(const IfsSystem& ifs, double q, int n_max);

ExperimentReport run_vk_descent(const IfsSystem& ifs, double q, int n_max, const SweepConfig& config,
                                double tolerance = 0.01);

// Discrete analogue of the s-dimensional Hausdorff measure restricted to E_C:
// each copy's net points weighted by (Lip * net-spacing)^s, attractor points
// weighted zero, normalized to total mass one.
WeightedCloud hs_restriction_cloud(const IfsSystem& ifs, double delta, double s,
                                   std::size_t budget = 8'000'000);

ExperimentReport run_regularity(const IfsSystem& ifs, double delta, const SweepConfig& config,
                                double tolerance = 0.1, double spread_tolerance = 50.0,
                                std::vector<double> radii = {});

// Dispatch a JSON experiment config ({"experiment": "thm41" | "thm42" | "vk"
// | "regularity", "ifs": ..., ...}) to the matching runner. jobs_override > 0
// replaces the config's sweep jobs; force_flag ORs with the config's force.
ExperimentReport run_experiment_config(const jsonio::json& cfg, int jobs_override = 0,
                                       bool force_flag = false);

}  // namespace fraclab
