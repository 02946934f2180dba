#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "fraclab/json_io.hpp"

namespace fraclab {

// Sorted list of point indices into a FiniteMetricSpace.
using IndexSet = std::vector<int>;

// Finite metric space: a point cloud in R^d with the Euclidean metric, or an
// explicit distance matrix. resolution_floor is the discretization scale
// below which the data no longer represents the underlying space.
class FiniteMetricSpace {
public:
    static FiniteMetricSpace from_points(int dim, std::vector<double> coords_row_major,
                                         double resolution_floor);
    // Validates symmetry, zero diagonal, and the triangle inequality (1e-9).
    // resolution_floor <= 0 defaults to the smallest nonzero distance.
    static FiniteMetricSpace from_matrix(int n, std::vector<double> dist_row_major,
                                         double resolution_floor = 0.0);

    static FiniteMetricSpace load_json(const jsonio::json& j);
    static FiniteMetricSpace load_json_file(const std::string& path);
    jsonio::json to_json() const;

    int size() const { return n_; }
    int dim() const { return dim_; }
    bool has_points() const { return !coords_.empty(); }
    double resolution_floor() const { return resolution_floor_; }
    double diam() const { return diam_; }

    // True when the space is a 1-d point cloud with nondecreasing coordinates;
    // several operations switch to O(log n) interval arithmetic in that case.
    bool sorted_1d() const { return sorted_1d_; }
    double coord1d(int i) const { return coords_[static_cast<std::size_t>(i)]; }
    const std::vector<double>& coords() const { return coords_; }

    double dist(int i, int j) const {
        if (!coords_.empty()) {
            if (dim_ == 1) return std::abs(coords_[static_cast<std::size_t>(i)] - coords_[static_cast<std::size_t>(j)]);
            double s = 0.0;
            const double* a = &coords_[static_cast<std::size_t>(i) * static_cast<std::size_t>(dim_)];
            const double* b = &coords_[static_cast<std::size_t>(j) * static_cast<std::size_t>(dim_)];
            for (int k = 0; k < dim_; ++k) {
                double d = a[k] - b[k];
                s += d * d;
            }
            return std::sqrt(s);
        }
        return dist_[static_cast<std::size_t>(i) * static_cast<std::size_t>(n_) + static_cast<std::size_t>(j)];
    }

    void check_index(int i) const;

private:
    FiniteMetricSpace() = default;
    void finalize();

    int n_ = 0;
    int dim_ = 0;
    std::vector<double> coords_;  // row-major, empty in matrix mode
    std::vector<double> dist_;    // n*n, empty in points mode
    double resolution_floor_ = 0.0;
    double diam_ = 0.0;
    bool sorted_1d_ = false;
};

// Closed ball B(center, r) = { i : d(center, i) <= r }, ascending indices.
IndexSet ball_members(const FiniteMetricSpace& space, int center, double r);

// Maximal subset of `subset` with pairwise distances strictly > r, greedy in
// ascending index order. Every point of `subset` lies within r of the result.
IndexSet greedy_packing(const FiniteMetricSpace& space, const IndexSet& subset, double r);

// Size of the greedy r-net of `subset`: an upper bound on the true covering
// number, within the classical packing-covering factor.
int covering_count(const FiniteMetricSpace& space, const IndexSet& subset, double r);

// Maximal sep-separated subset of all points (greedy, ascending index).
IndexSet build_net(const FiniteMetricSpace& space, double sep);

// Extends `seed` (assumed sep-separated) to a maximal sep-separated set.
IndexSet build_net(const FiniteMetricSpace& space, double sep, const IndexSet& seed);

IndexSet all_indices(const FiniteMetricSpace& space);

}  // namespace fraclab
