#include "fraclab/cube_tree.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "fraclab/errors.hpp"

namespace fraclab {

namespace {

// Nearest net member to point x; ties resolved toward the smaller index.
int nearest_in(const FiniteMetricSpace& space, const IndexSet& net, int x) {
    int best = -1;
    double best_d = std::numeric_limits<double>::infinity();
    auto consider = [&](int p) {
        double d = space.dist(p, x);
        if (d < best_d || (d == best_d && p < best)) {
            best_d = d;
            best = p;
        }
    };
    if (space.sorted_1d()) {
        // Ascending indices are ascending coordinates: only the two net
        // points bracketing x can be nearest.
        double cx = space.coord1d(x);
        auto cmp = [&space](int idx, double v) { return space.coord1d(idx) < v; };
        auto it = std::lower_bound(net.begin(), net.end(), cx, cmp);
        if (it != net.begin()) consider(*(it - 1));
        if (it != net.end()) consider(*it);
        return best;
    }
    for (int p : net) consider(p);
    return best;
}

}  // namespace

const CubeLevel& CubeTree::level(int k) const {
    if (k < 0 || k >= static_cast<int>(levels_.size())) {
        throw ArgumentError("level " + std::to_string(k) + " not in tree (depth " +
                            std::to_string(depth()) + ")");
    }
    return levels_[static_cast<std::size_t>(k)];
}

CubeTree CubeTree::build(const FiniteMetricSpace& space, double rho, int depth) {
    if (!(rho > 0.0 && rho < 1.0 / 3.0)) throw ArgumentError("rho must lie in (0, 1/3)");
    if (depth < 0) throw ArgumentError("depth must be nonnegative");
    double finest = std::pow(rho, depth) * space.diam();
    if (finest < space.resolution_floor()) {
        throw ResolutionError("rho^depth * diam = " + std::to_string(finest) +
                              " is below the resolution floor " + std::to_string(space.resolution_floor()));
    }

    CubeTree tree;
    tree.space_ = &space;
    tree.rho_ = rho;
    tree.c_ = 0.5 - rho / (1.0 - rho);
    tree.C_ = 1.0 / (1.0 - rho);

    // Nested greedy nets, one per level.
    std::vector<IndexSet> nets(static_cast<std::size_t>(depth) + 1);
    nets[0] = build_net(space, space.diam());
    for (int k = 1; k <= depth; ++k) {
        nets[static_cast<std::size_t>(k)] =
            build_net(space, std::pow(rho, k) * space.diam(), nets[static_cast<std::size_t>(k - 1)]);
    }

    tree.levels_.resize(static_cast<std::size_t>(depth) + 1);
    for (int k = 0; k <= depth; ++k) {
        auto& lvl = tree.levels_[static_cast<std::size_t>(k)];
        lvl.separation = std::pow(rho, k) * space.diam();
        lvl.cubes.resize(nets[static_cast<std::size_t>(k)].size());
        for (std::size_t j = 0; j < nets[static_cast<std::size_t>(k)].size(); ++j) {
            lvl.cubes[j].center = nets[static_cast<std::size_t>(k)][j];
        }
    }

    // Parent links: nearest coarser net point, ties to the smaller index.
    for (int k = 1; k <= depth; ++k) {
        const auto& coarse_net = nets[static_cast<std::size_t>(k - 1)];
        auto& coarse = tree.levels_[static_cast<std::size_t>(k - 1)];
        auto& fine = tree.levels_[static_cast<std::size_t>(k)];
        for (std::size_t j = 0; j < fine.cubes.size(); ++j) {
            int p = nearest_in(space, coarse_net, fine.cubes[j].center);
            auto it = std::lower_bound(coarse_net.begin(), coarse_net.end(), p);
            int pj = static_cast<int>(it - coarse_net.begin());
            fine.cubes[j].parent = pj;
            coarse.cubes[static_cast<std::size_t>(pj)].children.push_back(static_cast<int>(j));
        }
    }

    // Finest-level membership: every point joins its nearest finest center.
    auto& finest_lvl = tree.levels_.back();
    const auto& finest_net = nets.back();
    for (int i = 0; i < space.size(); ++i) {
        int p = nearest_in(space, finest_net, i);
        auto it = std::lower_bound(finest_net.begin(), finest_net.end(), p);
        finest_lvl.cubes[static_cast<std::size_t>(it - finest_net.begin())].members.push_back(i);
    }
    // Coarser levels inherit the union of their children's members.
    for (int k = depth - 1; k >= 0; --k) {
        auto& lvl = tree.levels_[static_cast<std::size_t>(k)];
        const auto& below = tree.levels_[static_cast<std::size_t>(k + 1)];
        for (auto& q : lvl.cubes) {
            std::size_t total = 0;
            for (int ch : q.children) total += below.cubes[static_cast<std::size_t>(ch)].members.size();
            q.members.reserve(total);
            for (int ch : q.children) {
                const auto& m = below.cubes[static_cast<std::size_t>(ch)].members;
                q.members.insert(q.members.end(), m.begin(), m.end());
            }
            std::sort(q.members.begin(), q.members.end());
        }
    }

    for (auto& lvl : tree.levels_) {
        lvl.cube_of_point.assign(static_cast<std::size_t>(space.size()), -1);
        for (std::size_t j = 0; j < lvl.cubes.size(); ++j) {
            auto& q = lvl.cubes[j];
            for (int i : q.members) lvl.cube_of_point[static_cast<std::size_t>(i)] = static_cast<int>(j);
            if (space.sorted_1d() && !q.members.empty()) {
                q.min_coord = space.coord1d(q.members.front());
                q.max_coord = space.coord1d(q.members.back());
            }
        }
    }
    return tree;
}

double CubeTree::cube_min_dist(int k, int cube_idx, int x) const {
    const auto& q = level(k).cubes[static_cast<std::size_t>(cube_idx)];
    if (space_->sorted_1d()) {
        // Members are a contiguous ascending-coordinate run.
        double cx = space_->coord1d(x);
        auto lo = q.members.begin();
        auto hi = q.members.end();
        auto it = std::lower_bound(lo, hi, cx, [this](int idx, double v) { return space_->coord1d(idx) < v; });
        double best = std::numeric_limits<double>::infinity();
        if (it != hi) best = std::min(best, space_->dist(*it, x));
        if (it != lo) best = std::min(best, space_->dist(*(it - 1), x));
        return best;
    }
    double best = std::numeric_limits<double>::infinity();
    for (int i : q.members) best = std::min(best, space_->dist(i, x));
    return best;
}

std::vector<CubeRef> CubeTree::cubes_meeting_ball(int k, int x, double r) const {
    space_->check_index(x);
    if (r < 0.0) throw ArgumentError("ball radius must be nonnegative");
    const auto& lvl = level(k);
    std::vector<CubeRef> out;
    if (space_->sorted_1d()) {
        IndexSet in_ball = ball_members(*space_, x, r);
        if (!in_ball.empty()) {
            int first = lvl.cube_of_point[static_cast<std::size_t>(in_ball.front())];
            int last = lvl.cube_of_point[static_cast<std::size_t>(in_ball.back())];
            out.reserve(static_cast<std::size_t>(last - first + 1));
            for (int j = first; j <= last; ++j) out.push_back(CubeRef{k, j});
        }
        return out;
    }
    for (int j = 0; j < static_cast<int>(lvl.cubes.size()); ++j) {
        if (cube_min_dist(k, j, x) <= r) out.push_back(CubeRef{k, j});
    }
    return out;
}

TreeReport CubeTree::verify() const {
    const auto& space = *space_;
    TreeReport rep;
    rep.partition_ok = true;
    rep.nesting_ok = true;
    rep.sandwich_ok = true;
    rep.worst_inner_margin = 2.0;

    // (1) partition: each level's member sets are disjoint and exhaustive.
    for (const auto& lvl : levels_) {
        std::vector<int> seen(static_cast<std::size_t>(space.size()), 0);
        std::size_t total = 0;
        for (const auto& q : lvl.cubes) {
            total += q.members.size();
            for (int i : q.members) seen[static_cast<std::size_t>(i)] += 1;
        }
        if (total != static_cast<std::size_t>(space.size())) rep.partition_ok = false;
        for (int cnt : seen) {
            if (cnt != 1) {
                rep.partition_ok = false;
                break;
            }
        }
    }

    // (2) nesting: every cube's members equal the union of its children's.
    for (int k = 0; k < depth(); ++k) {
        const auto& lvl = levels_[static_cast<std::size_t>(k)];
        const auto& below = levels_[static_cast<std::size_t>(k + 1)];
        for (const auto& q : lvl.cubes) {
            IndexSet merged;
            for (int ch : q.children) {
                const auto& m = below.cubes[static_cast<std::size_t>(ch)].members;
                merged.insert(merged.end(), m.begin(), m.end());
            }
            std::sort(merged.begin(), merged.end());
            if (merged != q.members) rep.nesting_ok = false;
        }
    }

    // (3) inner/outer sandwich with c rho^k and C rho^k radii.
    for (int k = 0; k <= depth(); ++k) {
        const auto& lvl = levels_[static_cast<std::size_t>(k)];
        double inner_r = c_ * lvl.separation;
        double outer_r = C_ * lvl.separation;
        for (const auto& q : lvl.cubes) {
            rep.cube_count += 1;
            bool fail = false;
            double max_member = 0.0;
            if (space.sorted_1d() && !q.members.empty()) {
                double cx = space.coord1d(q.center);
                max_member = std::max(std::abs(q.min_coord - cx), std::abs(q.max_coord - cx));
            } else {
                for (int i : q.members) max_member = std::max(max_member, space.dist(q.center, i));
            }
            rep.worst_outer_ratio = std::max(rep.worst_outer_ratio, max_member / outer_r);
            if (max_member > outer_r) fail = true;

            IndexSet probe = ball_members(space, q.center, std::min(2.0 * inner_r, space.diam()));
            auto mit = q.members.begin();
            for (int i : probe) {
                while (mit != q.members.end() && *mit < i) ++mit;
                bool member = (mit != q.members.end() && *mit == i);
                if (!member) {
                    double ratio = space.dist(q.center, i) / inner_r;
                    rep.worst_inner_margin = std::min(rep.worst_inner_margin, ratio);
                    if (ratio <= 1.0) fail = true;
                }
            }
            if (fail) {
                rep.sandwich_ok = false;
                rep.sandwich_failures += 1;
            }
        }
    }

    // (4) one point whose ball B(x0, c rho^k diam) stays inside its cube at
    // every level. The first net point is the natural candidate.
    auto chain_holds = [&](int x0) {
        for (int k = 0; k <= depth(); ++k) {
            const auto& lvl = levels_[static_cast<std::size_t>(k)];
            int j = lvl.cube_of_point[static_cast<std::size_t>(x0)];
            const auto& members = lvl.cubes[static_cast<std::size_t>(j)].members;
            IndexSet ball = ball_members(space, x0, c_ * lvl.separation);
            if (!std::includes(members.begin(), members.end(), ball.begin(), ball.end())) return false;
        }
        return true;
    };
    std::vector<int> candidates;
    candidates.push_back(0);
    for (const auto& q : levels_.back().cubes) candidates.push_back(q.center);
    for (int x0 : candidates) {
        if (chain_holds(x0)) {
            rep.chain_ok = true;
            rep.chain_point = x0;
            break;
        }
    }
    return rep;
}

jsonio::json TreeReport::to_json() const {
    jsonio::json j;
    j["partition_ok"] = partition_ok;
    j["nesting_ok"] = nesting_ok;
    j["sandwich_ok"] = sandwich_ok;
    j["chain_ok"] = chain_ok;
    j["worst_outer_ratio"] = worst_outer_ratio;
    j["worst_inner_margin"] = worst_inner_margin;
    j["sandwich_failures"] = sandwich_failures;
    j["cube_count"] = cube_count;
    j["chain_point"] = chain_point;
    return j;
}

jsonio::json CubeTree::to_json() const {
    jsonio::json j;
    j["rho"] = rho_;
    j["c"] = c_;
    j["C"] = C_;
    j["scale"] = scale();
    jsonio::json lvls = jsonio::json::array();
    for (std::size_t k = 0; k < levels_.size(); ++k) {
        const auto& lvl = levels_[k];
        jsonio::json lj;
        lj["k"] = static_cast<int>(k);
        lj["separation"] = lvl.separation;
        jsonio::json cubes = jsonio::json::array();
        for (const auto& q : lvl.cubes) {
            jsonio::json cj;
            cj["center"] = q.center;
            cj["parent"] = q.parent;
            cj["children"] = q.children;
            cj["members"] = q.members;
            cubes.push_back(std::move(cj));
        }
        lj["cubes"] = std::move(cubes);
        lvls.push_back(std::move(lj));
    }
    j["levels"] = std::move(lvls);
    return j;
}

}  // namespace fraclab
