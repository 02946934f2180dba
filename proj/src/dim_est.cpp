#include "fraclab/dim_est.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>

#include "fraclab/errors.hpp"
#include "fraclab/parallel.hpp"
#include "fraclab/rng.hpp"

namespace fraclab {

namespace {

// Index range [lo, hi) of sorted 1-d coordinates inside the closed ball,
// using the same |x - c| <= r predicate as ball_members.
std::pair<std::size_t, std::size_t> ball_range_1d(const std::vector<double>& xs, double c, double r) {
    auto lo = std::lower_bound(xs.begin(), xs.end(), c - r);
    while (lo != xs.begin() && std::abs(*(lo - 1) - c) <= r) --lo;
    while (lo != xs.end() && std::abs(*lo - c) > r) ++lo;
    auto hi = std::upper_bound(lo, xs.end(), c + r);
    while (hi != xs.end() && std::abs(*hi - c) <= r) ++hi;
    while (hi != lo && std::abs(*(hi - 1) - c) > r) --hi;
    return {static_cast<std::size_t>(lo - xs.begin()), static_cast<std::size_t>(hi - xs.begin())};
}

// Greedy packing count of the sorted coordinate range at separation
// strictly > r; equals |greedy_packing| on the same members.
int packing_count_range_1d(const std::vector<double>& xs, std::size_t lo, std::size_t hi, double r) {
    if (lo >= hi) return 0;
    int count = 1;
    auto it = xs.begin() + static_cast<std::ptrdiff_t>(lo);
    const auto end = xs.begin() + static_cast<std::ptrdiff_t>(hi);
    while (true) {
        it = std::upper_bound(it + 1, end, *it + r);
        if (it == end) break;
        ++count;
    }
    return count;
}

std::vector<std::pair<double, double>> admissible_grid(const FiniteMetricSpace& space,
                                                       const SweepConfig& config) {
    if (!(config.guard >= 1.0)) throw ArgumentError("sweep guard must be >= 1");
    if (config.ratio_grid.empty()) throw ArgumentError("sweep needs at least one (r, R) pair");
    const double r_min = config.guard * space.resolution_floor();
    std::vector<std::pair<double, double>> out;
    for (const auto& [r, R] : config.ratio_grid) {
        if (!(r > 0.0) || !(R > r)) throw ArgumentError("every grid pair needs 0 < r < R");
        if (r < r_min * (1.0 - 1e-12)) continue;
        if (R > space.diam() * (1.0 + 1e-12)) continue;
        out.emplace_back(r, R);
    }
    if (out.empty())
        throw ResolutionError("no admissible (r, R) pairs between guard * resolution_floor = " +
                              std::to_string(r_min) + " and diam = " + std::to_string(space.diam()));
    return out;
}

IndexSet pick_centers(const IndexSet& support, const SweepConfig& config) {
    if (support.empty()) throw DegenerateInputError("measure has empty support");
    if (config.centers == SweepConfig::kAllCenters) return support;
    const int target = config.centers > 0 ? config.centers : 2000;
    if (static_cast<int>(support.size()) <= target) return support;
    Rng rng(config.seed);
    IndexSet out;
    out.reserve(static_cast<std::size_t>(target));
    for (int i : rng.sample_indices(static_cast<int>(support.size()), target))
        out.push_back(support[static_cast<std::size_t>(i)]);
    return out;
}

bool is_sup_mode(DimMode mode) { return mode == DimMode::kAssouad || mode == DimMode::kUpperReg; }

DimEstimate reduce_rows(DimMode mode, const std::vector<SweepRow>& rows) {
    const bool sup = is_sup_mode(mode);
    DimEstimate est;
    est.mode = mode;
    est.triples = rows.size();
    std::size_t best = 0;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        if (sup ? rows[i].exponent > rows[best].exponent : rows[i].exponent < rows[best].exponent) best = i;
    }
    const SweepRow& w = rows[best];
    est.exponent = w.exponent;
    est.witness_center = w.x_index;
    est.witness_r = w.r;
    est.witness_R = w.R;
    // Constant normalizing the bound at the sweep's exponent: the witness
    // attains 1 and every other triple sits on the bounded side.
    const bool take_max = mode == DimMode::kAssouad || mode == DimMode::kLowerReg;
    double c = take_max ? -std::numeric_limits<double>::infinity() : std::numeric_limits<double>::infinity();
    for (const auto& row : rows) {
        double v;
        if (row.counting) {
            v = row.n_hat * std::pow(row.r / row.R, est.exponent);
        } else {
            v = (row.mu_r / row.mu_R) * std::pow(row.R / row.r, est.exponent);
        }
        c = take_max ? std::max(c, v) : std::min(c, v);
    }
    est.constant = c;
    return est;
}

DimEstimate counting_estimate(const FiniteMetricSpace& space, const SweepConfig& config, DimMode mode,
                              std::vector<SweepRow>* rows_out) {
    const auto grid = admissible_grid(space, config);
    const IndexSet centers = pick_centers(all_indices(space), config);
    const std::size_t G = grid.size();
    std::vector<SweepRow> rows(centers.size() * G);
    parallel_blocks(static_cast<std::int64_t>(centers.size()), config.jobs,
                    [&](std::int64_t lo, std::int64_t hi, int) {
                        for (std::int64_t ci = lo; ci < hi; ++ci) {
                            const int x = centers[static_cast<std::size_t>(ci)];
                            for (std::size_t gi = 0; gi < G; ++gi) {
                                const auto [r, R] = grid[gi];
                                int n_hat;
                                if (space.sorted_1d()) {
                                    const auto [blo, bhi] = ball_range_1d(space.coords(), space.coord1d(x), R);
                                    n_hat = packing_count_range_1d(space.coords(), blo, bhi, r);
                                } else {
                                    n_hat = static_cast<int>(
                                        greedy_packing(space, ball_members(space, x, R), r).size());
                                }
                                SweepRow row;
                                row.x_index = x;
                                row.r = r;
                                row.R = R;
                                row.n_hat = static_cast<double>(n_hat);
                                row.exponent =
                                    n_hat <= 1 ? 0.0 : std::log(static_cast<double>(n_hat)) / std::log(R / r);
                                row.counting = true;
                                rows[static_cast<std::size_t>(ci) * G + gi] = row;
                            }
                        }
                    });
    DimEstimate est = reduce_rows(mode, rows);
    if (rows_out) *rows_out = std::move(rows);
    return est;
}

DimEstimate measure_estimate(const FiniteMetricSpace& space, const IndexSet& support,
                             const std::function<double(int, double)>& mu, const SweepConfig& config,
                             DimMode mode, std::vector<SweepRow>* rows_out) {
    const auto grid = admissible_grid(space, config);
    const IndexSet centers = pick_centers(support, config);
    const std::size_t G = grid.size();
    std::vector<SweepRow> rows(centers.size() * G);
    parallel_blocks(static_cast<std::int64_t>(centers.size()), config.jobs,
                    [&](std::int64_t lo, std::int64_t hi, int) {
                        for (std::int64_t ci = lo; ci < hi; ++ci) {
                            const int x = centers[static_cast<std::size_t>(ci)];
                            for (std::size_t gi = 0; gi < G; ++gi) {
                                const auto [r, R] = grid[gi];
                                const double mu_r = mu(x, r);
                                const double mu_R = mu(x, R);
                                if (!(mu_r > 0.0))
                                    throw DegenerateInputError("ball B(x_index=" + std::to_string(x) +
                                                               ", r=" + std::to_string(r) +
                                                               ") has zero mass");
                                SweepRow row;
                                row.x_index = x;
                                row.r = r;
                                row.R = R;
                                row.mu_r = mu_r;
                                row.mu_R = mu_R;
                                row.exponent = std::max(0.0, std::log(mu_R / mu_r) / std::log(R / r));
                                row.counting = false;
                                rows[static_cast<std::size_t>(ci) * G + gi] = row;
                            }
                        }
                    });
    DimEstimate est = reduce_rows(mode, rows);
    if (rows_out) *rows_out = std::move(rows);
    return est;
}

IndexSet mass_support(const MassDistribution& mass) { return all_indices(mass.tree->space()); }

}  // namespace

// ==================================================================== //
//  Config / result plumbing                                            //
// ==================================================================== //

jsonio::json SweepConfig::to_json() const {
    jsonio::json j;
    if (centers == kAllCenters)
        j["centers"] = "all";
    else
        j["centers"] = centers;
    j["ratio_grid"] = jsonio::json::array();
    for (const auto& [r, R] : ratio_grid) j["ratio_grid"].push_back(jsonio::json::array({r, R}));
    j["guard"] = guard;
    j["seed"] = seed;
    return j;
}

SweepConfig SweepConfig::load_json(const jsonio::json& j) {
    if (!j.is_object()) throw ArgumentError("sweep config must be a JSON object");
    SweepConfig c;
    if (j.contains("centers")) {
        if (j["centers"].is_string()) {
            if (j["centers"].get<std::string>() != "all")
                throw ArgumentError("centers must be an integer or \"all\"");
            c.centers = kAllCenters;
        } else {
            c.centers = j["centers"].get<int>();
            if (c.centers < 0) throw ArgumentError("centers count must be nonnegative");
        }
    }
    if (j.contains("ratio_grid")) {
        for (const auto& pair : j["ratio_grid"]) {
            if (!pair.is_array() || pair.size() != 2) throw ArgumentError("ratio_grid entries must be [r, R]");
            c.ratio_grid.emplace_back(pair[0].get<double>(), pair[1].get<double>());
        }
    }
    c.guard = j.value("guard", 10.0);
    c.seed = j.value("seed", std::uint64_t{0});
    return c;
}

std::string dim_mode_name(DimMode mode) {
    switch (mode) {
        case DimMode::kAssouad: return "assouad";
        case DimMode::kLower: return "lower";
        case DimMode::kUpperReg: return "upper_reg";
        case DimMode::kLowerReg: return "lower_reg";
    }
    return "unknown";
}

jsonio::json DimEstimate::to_json() const {
    jsonio::json j;
    j["mode"] = dim_mode_name(mode);
    j["exponent"] = exponent;
    j["constant"] = constant;
    j["witness"] = jsonio::json{{"x_index", witness_center}, {"r", witness_r}, {"R", witness_R}};
    j["triples"] = triples;
    return j;
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
    std::ostringstream os;
    const bool counting = rows.empty() ? true : rows.front().counting;
    if (counting)
        os << "x_index,r,R,n_hat,log_ratio_exponent\n";
    else
        os << "x_index,r,R,mu_r,mu_R,log_ratio_exponent\n";
    for (const auto& row : rows) {
        os << row.x_index << ',' << jsonio::format_double(row.r) << ',' << jsonio::format_double(row.R) << ',';
        if (counting)
            os << jsonio::format_double(row.n_hat) << ',';
        else
            os << jsonio::format_double(row.mu_r) << ',' << jsonio::format_double(row.mu_R) << ',';
        os << jsonio::format_double(row.exponent) << '\n';
    }
    return os.str();
}

// ==================================================================== //
//  WeightedCloud                                                       //
// ==================================================================== //

WeightedCloud::WeightedCloud(FiniteMetricSpace space, std::vector<double> weights)
    : space_(std::move(space)), weights_(std::move(weights)) {
    if (static_cast<int>(weights_.size()) != space_.size())
        throw ArgumentError("weight count must equal the point count");
    for (double w : weights_) {
        if (!std::isfinite(w) || w < 0.0) throw ArgumentError("weights must be finite and nonnegative");
        total_ += w;
    }
    if (!(total_ > 0.0)) throw DegenerateInputError("weighted cloud has zero total mass");
    if (space_.sorted_1d()) {
        prefix_.resize(weights_.size() + 1, 0.0);
        for (std::size_t i = 0; i < weights_.size(); ++i) prefix_[i + 1] = prefix_[i] + weights_[i];
    }
}

double WeightedCloud::measure_of_ball(int center, double r) const {
    space_.check_index(center);
    if (r < 0.0) throw ArgumentError("ball radius must be nonnegative");
    if (!prefix_.empty()) {
        const auto [lo, hi] = ball_range_1d(space_.coords(), space_.coord1d(center), r);
        return prefix_[hi] - prefix_[lo];
    }
    double sum = 0.0;
    for (int i = 0; i < space_.size(); ++i)
        if (space_.dist(center, i) <= r) sum += weights_[static_cast<std::size_t>(i)];
    return sum;
}

IndexSet WeightedCloud::support() const {
    IndexSet out;
    for (int i = 0; i < space_.size(); ++i)
        if (weights_[static_cast<std::size_t>(i)] > 0.0) out.push_back(i);
    return out;
}

jsonio::json WeightedCloud::to_json() const {
    jsonio::json j;
    j["space"] = space_.to_json();
    j["weights"] = weights_;
    return j;
}

WeightedCloud WeightedCloud::load_json(const jsonio::json& j) {
    if (!j.is_object() || !j.contains("space") || !j.contains("weights"))
        throw ArgumentError("weighted cloud needs \"space\" and \"weights\"");
    return WeightedCloud(FiniteMetricSpace::load_json(j["space"]),
                         j["weights"].get<std::vector<double>>());
}

// ==================================================================== //
//  Estimators                                                          //
// ==================================================================== //

DimEstimate assouad_estimate(const FiniteMetricSpace& space, const SweepConfig& config,
                             std::vector<SweepRow>* rows) {
    return counting_estimate(space, config, DimMode::kAssouad, rows);
}

DimEstimate lower_estimate(const FiniteMetricSpace& space, const SweepConfig& config,
                           std::vector<SweepRow>* rows) {
    return counting_estimate(space, config, DimMode::kLower, rows);
}

DimEstimate upper_reg_estimate(const MassDistribution& mass, const SweepConfig& config,
                               std::vector<SweepRow>* rows) {
    return measure_estimate(
        mass.tree->space(), mass_support(mass),
        [&mass](int x, double r) { return mass.measure_of_ball(x, r); }, config, DimMode::kUpperReg, rows);
}

DimEstimate upper_reg_estimate(const WeightedCloud& cloud, const SweepConfig& config,
                               std::vector<SweepRow>* rows) {
    return measure_estimate(
        cloud.space(), cloud.support(),
        [&cloud](int x, double r) { return cloud.measure_of_ball(x, r); }, config, DimMode::kUpperReg, rows);
}

DimEstimate lower_reg_estimate(const MassDistribution& mass, const SweepConfig& config,
                               std::vector<SweepRow>* rows) {
    return measure_estimate(
        mass.tree->space(), mass_support(mass),
        [&mass](int x, double r) { return mass.measure_of_ball(x, r); }, config, DimMode::kLowerReg, rows);
}

DimEstimate lower_reg_estimate(const WeightedCloud& cloud, const SweepConfig& config,
                               std::vector<SweepRow>* rows) {
    return measure_estimate(
        cloud.space(), cloud.support(),
        [&cloud](int x, double r) { return cloud.measure_of_ball(x, r); }, config, DimMode::kLowerReg, rows);
}

jsonio::json RegularityConstants::to_json() const {
    jsonio::json j;
    j["s"] = s;
    j["c_min"] = c_min;
    j["c_max"] = c_max;
    j["spread"] = spread;
    j["witness_min"] = jsonio::json{{"x_index", witness_min_center}, {"r", witness_min_r}};
    j["witness_max"] = jsonio::json{{"x_index", witness_max_center}, {"r", witness_max_r}};
    return j;
}

RegularityConstants sregularity_constants(const WeightedCloud& cloud, double s,
                                          const std::vector<double>& radii, const SweepConfig& config) {
    if (!(s > 0.0)) throw ArgumentError("regularity exponent must be positive");
    if (radii.empty()) throw ArgumentError("regularity scan needs at least one radius");
    if (!(config.guard >= 1.0)) throw ArgumentError("sweep guard must be >= 1");
    const FiniteMetricSpace& space = cloud.space();
    std::vector<double> rs;
    for (double r : radii) {
        if (!(r > 0.0)) throw ArgumentError("radii must be positive");
        if (r < config.guard * space.resolution_floor() * (1.0 - 1e-12)) continue;
        if (r > space.diam() * (1.0 + 1e-12)) continue;
        rs.push_back(r);
    }
    if (rs.empty()) throw ResolutionError("no admissible radii between guard * resolution_floor and diam");
    const IndexSet centers = pick_centers(cloud.support(), config);
    const std::size_t G = rs.size();
    std::vector<double> values(centers.size() * G);
    parallel_blocks(static_cast<std::int64_t>(centers.size()), config.jobs,
                    [&](std::int64_t lo, std::int64_t hi, int) {
                        for (std::int64_t ci = lo; ci < hi; ++ci) {
                            const int x = centers[static_cast<std::size_t>(ci)];
                            for (std::size_t gi = 0; gi < G; ++gi)
                                values[static_cast<std::size_t>(ci) * G + gi] =
                                    cloud.measure_of_ball(x, rs[gi]) / std::pow(rs[gi], s);
                        }
                    });
    RegularityConstants out;
    out.s = s;
    std::size_t imin = 0, imax = 0;
    for (std::size_t i = 1; i < values.size(); ++i) {
        if (values[i] < values[imin]) imin = i;
        if (values[i] > values[imax]) imax = i;
    }
    out.c_min = values[imin];
    out.c_max = values[imax];
    out.spread = out.c_min > 0.0 ? out.c_max / out.c_min : std::numeric_limits<double>::infinity();
    out.witness_min_center = centers[imin / G];
    out.witness_min_r = rs[imin % G];
    out.witness_max_center = centers[imax / G];
    out.witness_max_r = rs[imax % G];
    return out;
}

std::vector<std::pair<double, double>> default_ratio_grid(const FiniteMetricSpace& space, double guard,
                                                          double min_lever) {
    if (!(guard >= 1.0)) throw ArgumentError("guard must be >= 1");
    if (!(min_lever > 1.0)) throw ArgumentError("min_lever must exceed 1");
    const double r0 = guard * space.resolution_floor();
    const double D = space.diam();
    if (!(r0 > 0.0) || r0 * min_lever > D)
        throw ResolutionError("space too coarse: no (r, R) pair with R/r >= " + std::to_string(min_lever) +
                              " fits between guard * resolution_floor and diam");
    std::vector<std::pair<double, double>> grid;
    for (double r = r0; static_cast<int>(grid.size()) < 64; r *= 2.0) {
        bool any = false;
        for (double f : {1.0, 0.5, 0.25}) {
            const double R = D * f;
            if (R >= r * min_lever) {
                grid.emplace_back(r, R);
                any = true;
            }
        }
        if (!any) break;
    }
    return grid;
}

}  // namespace fraclab
