#include "fraclab/metric_space.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "fraclab/errors.hpp"
#include "fraclab/rng.hpp"

namespace fraclab {

namespace {

constexpr double kMetricTol = 1e-9;

void require_finite(double v, const char* what) {
    if (!std::isfinite(v)) throw ArgumentError(std::string(what) + " must be finite");
}

}  // namespace

void FiniteMetricSpace::check_index(int i) const {
    if (i < 0 || i >= n_) {
        throw ArgumentError("point index " + std::to_string(i) + " out of range [0, " + std::to_string(n_) + ")");
    }
}

FiniteMetricSpace FiniteMetricSpace::from_points(int dim, std::vector<double> coords_row_major,
                                                 double resolution_floor) {
    if (dim < 1) throw ArgumentError("dim must be >= 1");
    if (coords_row_major.empty() || coords_row_major.size() % static_cast<std::size_t>(dim) != 0) {
        throw ArgumentError("coordinate array size must be a positive multiple of dim");
    }
    auto n = static_cast<int>(coords_row_major.size() / static_cast<std::size_t>(dim));
    if (n < 2) throw DegenerateInputError("a metric space needs at least two points");
    if (!(resolution_floor > 0.0)) throw ArgumentError("resolution_floor must be positive");
    for (double v : coords_row_major) require_finite(v, "coordinate");
    FiniteMetricSpace s;
    s.n_ = n;
    s.dim_ = dim;
    s.coords_ = std::move(coords_row_major);
    s.resolution_floor_ = resolution_floor;
    s.finalize();
    return s;
}

FiniteMetricSpace FiniteMetricSpace::from_matrix(int n, std::vector<double> dist_row_major,
                                                 double resolution_floor) {
    if (n < 2) throw DegenerateInputError("a metric space needs at least two points");
    if (dist_row_major.size() != static_cast<std::size_t>(n) * static_cast<std::size_t>(n)) {
        throw ArgumentError("distance matrix must be n*n");
    }
    auto at = [&](int i, int j) -> double& {
        return dist_row_major[static_cast<std::size_t>(i) * static_cast<std::size_t>(n) + static_cast<std::size_t>(j)];
    };
    for (int i = 0; i < n; ++i) {
        if (std::abs(at(i, i)) > kMetricTol) throw ArgumentError("distance matrix diagonal must be zero");
        at(i, i) = 0.0;
        for (int j = i + 1; j < n; ++j) {
            require_finite(at(i, j), "distance");
            require_finite(at(j, i), "distance");
            if (at(i, j) < 0.0 || at(j, i) < 0.0) throw ArgumentError("distances must be nonnegative");
            if (std::abs(at(i, j) - at(j, i)) > kMetricTol) throw ArgumentError("distance matrix must be symmetric");
            double d = 0.5 * (at(i, j) + at(j, i));
            at(i, j) = d;
            at(j, i) = d;
        }
    }
    // Triangle inequality: exhaustive for small n, seeded sampling above.
    auto check_triple = [&](int i, int j, int k) {
        if (at(i, k) > at(i, j) + at(j, k) + kMetricTol) {
            throw ArgumentError("triangle inequality violated at (" + std::to_string(i) + "," +
                                std::to_string(j) + "," + std::to_string(k) + ")");
        }
    };
    if (static_cast<long long>(n) * n * n <= 400'000'000LL) {
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                for (int k = 0; k < n; ++k) check_triple(i, j, k);
    } else {
        Rng rng(0x66726163ULL);
        for (long long it = 0; it < 20'000'000LL; ++it) {
            int i = static_cast<int>(rng.bounded(static_cast<std::uint64_t>(n)));
            int j = static_cast<int>(rng.bounded(static_cast<std::uint64_t>(n)));
            int k = static_cast<int>(rng.bounded(static_cast<std::uint64_t>(n)));
            check_triple(i, j, k);
        }
    }
    FiniteMetricSpace s;
    s.n_ = n;
    s.dim_ = 0;
    s.dist_ = std::move(dist_row_major);
    if (!(resolution_floor > 0.0)) {
        double min_pos = std::numeric_limits<double>::infinity();
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j)
                if (s.dist_[static_cast<std::size_t>(i) * static_cast<std::size_t>(n) + static_cast<std::size_t>(j)] > 0.0)
                    min_pos = std::min(min_pos, s.dist_[static_cast<std::size_t>(i) * static_cast<std::size_t>(n) + static_cast<std::size_t>(j)]);
        if (!std::isfinite(min_pos)) throw DegenerateInputError("all distances are zero");
        resolution_floor = min_pos;
    }
    s.resolution_floor_ = resolution_floor;
    s.finalize();
    return s;
}

void FiniteMetricSpace::finalize() {
    if (!coords_.empty() && dim_ == 1) {
        sorted_1d_ = std::is_sorted(coords_.begin(), coords_.end());
    }
    if (!coords_.empty()) {
        if (dim_ == 1) {
            auto [lo, hi] = std::minmax_element(coords_.begin(), coords_.end());
            diam_ = *hi - *lo;
        } else {
            double best = 0.0;
            for (int i = 0; i < n_; ++i)
                for (int j = i + 1; j < n_; ++j) best = std::max(best, dist(i, j));
            diam_ = best;
        }
    } else {
        diam_ = *std::max_element(dist_.begin(), dist_.end());
    }
    if (!(diam_ > 0.0)) throw DegenerateInputError("space has zero diameter");
}

FiniteMetricSpace FiniteMetricSpace::load_json(const jsonio::json& j) {
    if (!j.is_object()) throw ArgumentError("space JSON must be an object");
    if (j.contains("points")) {
        if (!j.contains("dim") || !j.contains("resolution_floor")) {
            throw ArgumentError("point-cloud JSON needs keys dim, points, resolution_floor");
        }
        int dim = j.at("dim").get<int>();
        if (dim < 1) throw ArgumentError("dim must be >= 1");
        const auto& pts = j.at("points");
        if (!pts.is_array()) throw ArgumentError("points must be an array");
        std::vector<double> coords;
        coords.reserve(pts.size() * static_cast<std::size_t>(dim));
        for (const auto& row : pts) {
            if (!row.is_array() || row.size() != static_cast<std::size_t>(dim)) {
                throw ArgumentError("each point must have exactly dim coordinates");
            }
            for (const auto& v : row) coords.push_back(v.get<double>());
        }
        return from_points(dim, std::move(coords), j.at("resolution_floor").get<double>());
    }
    if (j.contains("dist")) {
        if (!j.contains("n")) throw ArgumentError("distance-matrix JSON needs keys n, dist");
        int n = j.at("n").get<int>();
        const auto& rows = j.at("dist");
        if (!rows.is_array() || rows.size() != static_cast<std::size_t>(n)) {
            throw ArgumentError("dist must be an n-row array");
        }
        std::vector<double> d;
        d.reserve(static_cast<std::size_t>(n) * static_cast<std::size_t>(n));
        for (const auto& row : rows) {
            if (!row.is_array() || row.size() != static_cast<std::size_t>(n)) {
                throw ArgumentError("dist rows must have length n");
            }
            for (const auto& v : row) d.push_back(v.get<double>());
        }
        double floor = j.value("resolution_floor", 0.0);
        return from_matrix(n, std::move(d), floor);
    }
    throw ArgumentError("space JSON must contain either points or dist");
}

FiniteMetricSpace FiniteMetricSpace::load_json_file(const std::string& path) {
    return load_json(jsonio::read_json_file(path));
}

jsonio::json FiniteMetricSpace::to_json() const {
    jsonio::json j;
    if (!coords_.empty()) {
        j["dim"] = dim_;
        jsonio::json pts = jsonio::json::array();
        for (int i = 0; i < n_; ++i) {
            jsonio::json row = jsonio::json::array();
            for (int k = 0; k < dim_; ++k) row.push_back(coords_[static_cast<std::size_t>(i) * static_cast<std::size_t>(dim_) + static_cast<std::size_t>(k)]);
            pts.push_back(std::move(row));
        }
        j["points"] = std::move(pts);
        j["resolution_floor"] = resolution_floor_;
    } else {
        j["n"] = n_;
        jsonio::json rows = jsonio::json::array();
        for (int i = 0; i < n_; ++i) {
            jsonio::json row = jsonio::json::array();
            for (int k = 0; k < n_; ++k) row.push_back(dist_[static_cast<std::size_t>(i) * static_cast<std::size_t>(n_) + static_cast<std::size_t>(k)]);
            rows.push_back(std::move(row));
        }
        j["dist"] = std::move(rows);
        j["resolution_floor"] = resolution_floor_;
    }
    return j;
}

IndexSet ball_members(const FiniteMetricSpace& space, int center, double r) {
    space.check_index(center);
    if (r < 0.0) throw ArgumentError("ball radius must be nonnegative");
    IndexSet out;
    if (space.sorted_1d()) {
        const auto& c = space.coords();
        double x = space.coord1d(center);
        double m = 1e-12 * (1.0 + std::abs(x) + r);
        auto lo = std::lower_bound(c.begin(), c.end(), x - r - m);
        auto hi = std::upper_bound(c.begin(), c.end(), x + r + m);
        auto i = static_cast<int>(lo - c.begin());
        auto end = static_cast<int>(hi - c.begin());
        while (i < end && std::abs(space.coord1d(i) - x) > r) ++i;
        while (end > i && std::abs(space.coord1d(end - 1) - x) > r) --end;
        out.reserve(static_cast<std::size_t>(end - i));
        for (; i < end; ++i) out.push_back(i);
        return out;
    }
    for (int i = 0; i < space.size(); ++i) {
        if (space.dist(center, i) <= r) out.push_back(i);
    }
    return out;
}

IndexSet greedy_packing(const FiniteMetricSpace& space, const IndexSet& subset, double r) {
    if (!(r > 0.0)) throw ArgumentError("packing separation must be positive");
    IndexSet picked;
    if (space.sorted_1d()) {
        // Ascending indices are ascending coordinates: the nearest selected
        // point is always the last one.
        double last = -std::numeric_limits<double>::infinity();
        for (int i : subset) {
            space.check_index(i);
            double c = space.coord1d(i);
            if (c - last > r) {
                picked.push_back(i);
                last = c;
            }
        }
        return picked;
    }
    for (int i : subset) {
        space.check_index(i);
        bool ok = true;
        for (int p : picked) {
            if (space.dist(i, p) <= r) {
                ok = false;
                break;
            }
        }
        if (ok) picked.push_back(i);
    }
    return picked;
}

int covering_count(const FiniteMetricSpace& space, const IndexSet& subset, double r) {
    return static_cast<int>(greedy_packing(space, subset, r).size());
}

IndexSet all_indices(const FiniteMetricSpace& space) {
    IndexSet all(static_cast<std::size_t>(space.size()));
    for (int i = 0; i < space.size(); ++i) all[static_cast<std::size_t>(i)] = i;
    return all;
}

IndexSet build_net(const FiniteMetricSpace& space, double sep) {
    return greedy_packing(space, all_indices(space), sep);
}

IndexSet build_net(const FiniteMetricSpace& space, double sep, const IndexSet& seed) {
    if (!(sep > 0.0)) throw ArgumentError("net separation must be positive");
    if (seed.empty()) return build_net(space, sep);
    IndexSet added;
    if (space.sorted_1d()) {
        std::size_t sp = 0;
        double last_le = -std::numeric_limits<double>::infinity();
        for (int i = 0; i < space.size(); ++i) {
            double c = space.coord1d(i);
            while (sp < seed.size() &&
                   (space.coord1d(seed[sp]) < c || (space.coord1d(seed[sp]) == c && seed[sp] <= i))) {
                last_le = std::max(last_le, space.coord1d(seed[sp]));
                ++sp;
            }
            if (sp > 0 && seed[sp - 1] == i) continue;  // already a seed member
            double gap_left = c - last_le;
            double gap_right = sp < seed.size() ? space.coord1d(seed[sp]) - c
                                                : std::numeric_limits<double>::infinity();
            if (gap_left > sep && gap_right > sep) {
                added.push_back(i);
                last_le = c;
            }
        }
    } else {
        IndexSet selected = seed;
        for (int i = 0; i < space.size(); ++i) {
            bool ok = true;
            for (int p : selected) {
                if (space.dist(i, p) <= sep) {
                    ok = false;
                    break;
                }
            }
            if (ok) {
                selected.push_back(i);
                added.push_back(i);
            }
        }
    }
    IndexSet out;
    out.reserve(seed.size() + added.size());
    std::merge(seed.begin(), seed.end(), added.begin(), added.end(), std::back_inserter(out));
    return out;
}

}  // namespace fraclab
