#pragma once

#include <vector>

#include "fraclab/json_io.hpp"
#include "fraclab/metric_space.hpp"

namespace fraclab {

struct Cube {
    int center = -1;             // point index of x_{k,j}
    int parent = -1;             // cube index at level k-1, -1 at root
    std::vector<int> children;   // cube indices at level k+1
    IndexSet members;            // point indices, ascending
    double min_coord = 0.0;      // 1-d member interval cache
    double max_coord = 0.0;
};

struct CubeLevel {
    double separation = 0.0;         // rho^k * diam
    std::vector<Cube> cubes;
    std::vector<int> cube_of_point;  // point index -> cube index at this level
};

struct CubeRef {
    int level = 0;
    int index = 0;
};

// Verification report: partition/nesting are exact construction guarantees,
// the inner/outer sandwich and the chain point are measured on the data.
struct TreeReport {
    bool partition_ok = false;
    bool nesting_ok = false;
    bool sandwich_ok = false;
    bool chain_ok = false;
    double worst_outer_ratio = 0.0;   // max member distance / (C rho^k diam); pass <= 1
    double worst_inner_margin = 0.0;  // min non-member distance / (c rho^k diam); pass > 1 (capped at 2)
    int sandwich_failures = 0;
    int cube_count = 0;
    int chain_point = -1;             // an x0 realizing the per-level ball chain
    jsonio::json to_json() const;
};

// Nested "dyadic cube" partition of a finite metric space built from greedy
// nets at separations rho^k * diam, k = 0..depth. Levels refine exactly:
// every point has one cube per level and cubes nest along parent links.
class CubeTree {
public:
    // Requires 0 < rho < 1/3. Refuses depth below the space's resolution
    // floor (rho^depth * diam >= resolution_floor).
    static CubeTree build(const FiniteMetricSpace& space, double rho, int depth);

    const FiniteMetricSpace& space() const { return *space_; }
    double rho() const { return rho_; }
    double c_const() const { return c_; }       // 1/2 - rho/(1-rho)
    double C_const() const { return C_; }       // 1/(1-rho)
    double scale() const { return space_->diam(); }
    int depth() const { return static_cast<int>(levels_.size()) - 1; }
    const std::vector<CubeLevel>& levels() const { return levels_; }
    const CubeLevel& level(int k) const;
    const Cube& cube(const CubeRef& ref) const { return level(ref.level).cubes[static_cast<std::size_t>(ref.index)]; }

    // Smallest distance from point x to any member of the given cube.
    double cube_min_dist(int level, int cube_idx, int x) const;

    // Level-k cubes whose member set meets the closed ball B(x, r).
    std::vector<CubeRef> cubes_meeting_ball(int k, int x, double r) const;

    TreeReport verify() const;
    jsonio::json to_json() const;

private:
    const FiniteMetricSpace* space_ = nullptr;
    double rho_ = 0.0;
    double c_ = 0.0;
    double C_ = 0.0;
    std::vector<CubeLevel> levels_;
};

}  // namespace fraclab
