#pragma once

#include <atomic>
#include <memory>
#include <string>
#include <vector>

#include "fraclab/cube_tree.hpp"
#include "fraclab/json_io.hpp"

namespace fraclab {

// Parameters of the mass-distribution construction. K is derived from the
// tree's contraction ratio at build time; M is used by the doubling variant
// only (0 = unset).
struct MassParams {
    double t = 0.0;       // target lower-regularity exponent
    double s = 0.0;       // auxiliary packing exponent, t < s
    double c0 = 1.0;      // packing constant for exponent s
    double lambda = 0.125;  // selection-ball ratio, fixed at 1/8
    int M = 0;            // uniform child bound (doubling variant)

    void validate() const;
};

// Largest rho of the form 2^-m satisfying rho < 1/64, rho < sqrt(2) - 5/4,
// and rho < (c0 * 2^-s * lambda^s)^(1/(s-t)).
double choose_rho(double s, double t, double c0);

// Ceiling of rho^-t with a guard against pow overshoot.
int mass_K(double rho, double t);

struct MassDistribution {
    const CubeTree* tree = nullptr;
    bool doubling = false;
    MassParams params;
    int K = 0;
    double eps_uniform = 0.0;                  // doubling variant's annulus weight factor
    std::vector<std::vector<double>> weights;  // weights[k][j] for cube j at level k

    double weight(int level, int cube_idx) const {
        return weights[static_cast<std::size_t>(level)][static_cast<std::size_t>(cube_idx)];
    }
    // Sum of finest-level cube weights over cubes meeting the closed ball
    // B(center, r). Warns (once) when r is below the space's resolution floor.
    double measure_of_ball(int center, double r) const;

    // Largest child/parent weight ratio (decay bound) and, for the doubling
    // variant, the smallest ratio, over every edge.
    double max_edge_ratio() const;
    double min_edge_ratio() const;
    // Largest relative conservation error over all parent cubes.
    double conservation_error() const;

    jsonio::json to_json() const;

private:
    friend MassDistribution build_mass(const CubeTree&, const MassParams&);
    friend MassDistribution build_mass_doubling(const CubeTree&, const MassParams&);
    std::vector<double> finest_prefix_;  // 1-d fast path
    // Shared so the struct stays movable; exchanged atomically because
    // measure_of_ball may run concurrently across sweep threads.
    std::shared_ptr<std::atomic<bool>> warned_below_floor_ = std::make_shared<std::atomic<bool>>(false);
    void finish();
};

// Top-down mass split: on each cube the K children nearest the
// center among those meeting B(center, lambda * rho^k * scale) receive
// (1/(K+1) + eps_kj) of the parent, the rest eps_kj, with
// eps_kj = 1/((K+1) * #children). Child weights then satisfy
// child <= rho^t * parent on every edge.
MassDistribution build_mass(const CubeTree& tree, const MassParams& params);

// Doubling variant: annulus children get the uniform eps = 1/((K+1)M),
// selected children 1/(K+1) + eps~_kj with eps~ fixed by conservation;
// every edge satisfies eps * parent <= child <= rho^t * parent.
MassDistribution build_mass_doubling(const CubeTree& tree, const MassParams& params);

}  // namespace fraclab
