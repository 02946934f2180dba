#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "fraclab/json_io.hpp"
#include "fraclab/mass_builder.hpp"
#include "fraclab/metric_space.hpp"

namespace fraclab {

// Scale-pair sweep plan shared by all four estimators.
struct SweepConfig {
    // Number of sampled centers; kAllCenters forces every support point and 0
    // selects the default policy (all points up to 2000, then a seeded
    // sample of 2000).
    static constexpr int kAllCenters = -1;
    int centers = 0;
    // Absolute scale pairs (r, R); pairs outside
    // [guard * resolution_floor, diam] or with r >= R are dropped.
    std::vector<std::pair<double, double>> ratio_grid;
    double guard = 10.0;
    std::uint64_t seed = 0;
    int jobs = 0;

    jsonio::json to_json() const;
    static SweepConfig load_json(const jsonio::json& j);
};

enum class DimMode { kAssouad, kLower, kUpperReg, kLowerReg };

std::string dim_mode_name(DimMode mode);

struct DimEstimate {
    DimMode mode = DimMode::kAssouad;
    double exponent = 0.0;
    // Empirical constant normalizing the bound so the witness attains
    // equality; ~1 by construction, reported for the record.
    double constant = 1.0;
    int witness_center = -1;
    double witness_r = 0.0;
    double witness_R = 0.0;
    std::size_t triples = 0;
    jsonio::json to_json() const;
};

// One sweep evaluation; counting rows carry n_hat, measure rows mu_r/mu_R.
struct SweepRow {
    int x_index = -1;
    double r = 0.0;
    double R = 0.0;
    double n_hat = 0.0;
    double mu_r = 0.0;
    double mu_R = 0.0;
    double exponent = 0.0;
    bool counting = true;
};

std::string sweep_csv(const std::vector<SweepRow>& rows);

// Positive-weighted point cloud treated as a measure: mu(B) sums weights of
// the cloud points inside the closed ball.
class WeightedCloud {
public:
    WeightedCloud(FiniteMetricSpace space, std::vector<double> weights);

    const FiniteMetricSpace& space() const { return space_; }
    double weight(int i) const { return weights_[static_cast<std::size_t>(i)]; }
    const std::vector<double>& weights() const { return weights_; }
    double total() const { return total_; }
    double measure_of_ball(int center, double r) const;
    IndexSet support() const;

    jsonio::json to_json() const;
    static WeightedCloud load_json(const jsonio::json& j);

private:
    FiniteMetricSpace space_;
    std::vector<double> weights_;
    std::vector<double> prefix_;  // 1-d fast path over sorted coordinates
    double total_ = 0.0;
};

// sup over sampled (x, r, R) of log N(B(x,R), r) / log(R/r), N from greedy
// packing at separation r.
DimEstimate assouad_estimate(const FiniteMetricSpace& space, const SweepConfig& config,
                             std::vector<SweepRow>* rows = nullptr);

// inf over the same counting sweep.
DimEstimate lower_estimate(const FiniteMetricSpace& space, const SweepConfig& config,
                           std::vector<SweepRow>* rows = nullptr);

// sup over sampled (x, r, R) of log(mu(B(x,R)) / mu(B(x,r))) / log(R/r).
DimEstimate upper_reg_estimate(const MassDistribution& mass, const SweepConfig& config,
                               std::vector<SweepRow>* rows = nullptr);
DimEstimate upper_reg_estimate(const WeightedCloud& cloud, const SweepConfig& config,
                               std::vector<SweepRow>* rows = nullptr);

// inf over the same measure sweep.
DimEstimate lower_reg_estimate(const MassDistribution& mass, const SweepConfig& config,
                               std::vector<SweepRow>* rows = nullptr);
DimEstimate lower_reg_estimate(const WeightedCloud& cloud, const SweepConfig& config,
                               std::vector<SweepRow>* rows = nullptr);

// min/max of mu(B(x, r)) / r^s over sampled centers and the given radii;
// spread = c_max / c_min measures how far the measure is from s-regular.
struct RegularityConstants {
    double s = 0.0;
    double c_min = 0.0;
    double c_max = 0.0;
    double spread = 0.0;
    int witness_min_center = -1;
    double witness_min_r = 0.0;
    int witness_max_center = -1;
    double witness_max_r = 0.0;
    jsonio::json to_json() const;
};

RegularityConstants sregularity_constants(const WeightedCloud& cloud, double s,
                                          const std::vector<double>& radii, const SweepConfig& config);

// Geometric ladder of admissible (r, R) pairs between guard * floor and diam;
// levers (R/r) span from min_lever up to everything the resolution allows.
std::vector<std::pair<double, double>> default_ratio_grid(const FiniteMetricSpace& space, double guard,
                                                          double min_lever = 16.0);

}  // namespace fraclab
