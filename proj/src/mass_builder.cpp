#include "fraclab/mass_builder.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>

#include "fraclab/errors.hpp"

namespace fraclab {

namespace {

constexpr double kLambda = 0.125;

// Feasibility of the exponent pair with the actual constants of the tree.
// Violations mean (t, s, c0) is not supported at this contraction ratio.
void check_rho_estimates(const CubeTree& tree, const MassParams& p) {
    double rho = tree.rho();
    double C = tree.C_const();
    if (!(rho * rho + 2.0 * C * rho < 1.0)) {
        throw PreconditionError("constraint rho^2 + 2*C*rho < 1 fails at rho = " + std::to_string(rho));
    }
    if (!((2.0 * C + 4.0) * rho + p.lambda < 8.0 * rho + 0.125)) {
        throw PreconditionError("constraint (2C+4)rho + lambda < 8rho + 1/8 fails at rho = " + std::to_string(rho));
    }
    double capacity = p.c0 * std::pow(C, -p.s) * std::pow(p.lambda, p.s) * std::pow(rho, -p.s);
    double need = std::pow(rho, -p.t);
    if (!(capacity >= need)) {
        throw PreconditionError("capacity constraint c0*C^-s*lambda^s*rho^-s >= rho^-t fails: " +
                                std::to_string(capacity) + " < " + std::to_string(need));
    }
}

}  // namespace

void MassParams::validate() const {
    if (!(t > 0.0 && t < s)) throw ArgumentError("exponents must satisfy 0 < t < s");
    if (!(c0 > 0.0)) throw ArgumentError("c0 must be positive");
    if (lambda != kLambda) throw ArgumentError("lambda is fixed at 1/8");
}

double choose_rho(double s, double t, double c0) {
    if (!(t > 0.0 && t < s)) throw ArgumentError("choose_rho needs 0 < t < s");
    if (!(c0 > 0.0)) throw ArgumentError("choose_rho needs c0 > 0");
    double bound = std::pow(c0 * std::pow(2.0, -s) * std::pow(kLambda, s), 1.0 / (s - t));
    double cap = std::min(1.0 / 64.0, std::sqrt(2.0) - 1.25);
    int m = 7;  // largest power of 1/2 strictly below 1/64
    while (std::ldexp(1.0, -m) >= bound || std::ldexp(1.0, -m) >= cap) {
        ++m;
        if (m > 1000) throw ArgumentError("choose_rho bound underflows (s too close to t?)");
    }
    return std::ldexp(1.0, -m);
}

int mass_K(double rho, double t) {
    // pow can overshoot an exact integer by a few ulp; the guard keeps
    // K = ceil(rho^-t) from landing one too high.
    double raw = std::pow(rho, -t);
    int K = static_cast<int>(std::ceil(raw - 1e-9));
    return K < 1 ? 1 : K;
}

namespace {

MassDistribution build_common(const CubeTree& tree, const MassParams& params, bool doubling) {
    params.validate();
    check_rho_estimates(tree, params);

    MassDistribution md;
    md.tree = &tree;
    md.doubling = doubling;
    md.params = params;
    md.K = mass_K(tree.rho(), params.t);

    int max_children = 0;
    for (int k = 0; k < tree.depth(); ++k) {
        for (const auto& q : tree.level(k).cubes) {
            max_children = std::max(max_children, static_cast<int>(q.children.size()));
        }
    }
    if (doubling) {
        if (params.M < max_children) {
            throw ArgumentError("doubling bound M = " + std::to_string(params.M) +
                                " is below the largest child count " + std::to_string(max_children));
        }
        md.eps_uniform = 1.0 / (static_cast<double>(md.K + 1) * params.M);
    }

    md.weights.resize(static_cast<std::size_t>(tree.depth()) + 1);
    for (int k = 0; k <= tree.depth(); ++k) {
        md.weights[static_cast<std::size_t>(k)].assign(tree.level(k).cubes.size(), 0.0);
    }
    md.weights[0][0] = 1.0;

    for (int k = 0; k < tree.depth(); ++k) {
        const auto& lvl = tree.level(k);
        double select_r = params.lambda * lvl.separation;
        for (std::size_t j = 0; j < lvl.cubes.size(); ++j) {
            const auto& q = lvl.cubes[j];
            double parent_w = md.weights[static_cast<std::size_t>(k)][j];
            auto n_children = static_cast<int>(q.children.size());

            // Children whose cubes meet B(x_{k,j}, lambda * rho^k * scale),
            // ranked by center distance, ties toward the smaller cube index.
            std::vector<std::pair<double, int>> qualifying;
            for (int ch : q.children) {
                if (tree.cube_min_dist(k + 1, ch, q.center) <= select_r) {
                    const auto& child = tree.level(k + 1).cubes[static_cast<std::size_t>(ch)];
                    qualifying.emplace_back(tree.space().dist(child.center, q.center), ch);
                }
            }
            if (static_cast<int>(qualifying.size()) < md.K) {
                throw CapacityError("cube (level " + std::to_string(k) + ", index " + std::to_string(j) +
                                    ") has only " + std::to_string(qualifying.size()) +
                                    " children meeting the selection ball but K = " + std::to_string(md.K) +
                                    "; t is too close to the space's lower dimension at this resolution");
            }
            std::sort(qualifying.begin(), qualifying.end());
            std::vector<char> selected(static_cast<std::size_t>(n_children), 0);
            // Map child cube index -> position in q.children for marking.
            for (int i = 0; i < md.K; ++i) {
                int ch = qualifying[static_cast<std::size_t>(i)].second;
                auto pos = std::lower_bound(q.children.begin(), q.children.end(), ch) - q.children.begin();
                selected[static_cast<std::size_t>(pos)] = 1;
            }

            double eps, center_w;
            if (doubling) {
                eps = md.eps_uniform;
                double eps_tilde = (1.0 / (md.K + 1) - (n_children - md.K) * eps) / md.K;
                if (!(eps_tilde > 0.0)) {
                    throw PreconditionError("derived center weight is nonpositive (M too small?)");
                }
                center_w = 1.0 / (md.K + 1) + eps_tilde;
            } else {
                eps = 1.0 / (static_cast<double>(md.K + 1) * n_children);
                center_w = 1.0 / (md.K + 1) + eps;
            }
            for (int idx = 0; idx < n_children; ++idx) {
                int ch = q.children[static_cast<std::size_t>(idx)];
                double frac = selected[static_cast<std::size_t>(idx)] ? center_w : eps;
                md.weights[static_cast<std::size_t>(k + 1)][static_cast<std::size_t>(ch)] = frac * parent_w;
            }
        }
    }
    return md;
}

}  // namespace

MassDistribution build_mass(const CubeTree& tree, const MassParams& params) {
    MassDistribution md = build_common(tree, params, false);
    md.finish();
    return md;
}

MassDistribution build_mass_doubling(const CubeTree& tree, const MassParams& params) {
    MassDistribution md = build_common(tree, params, true);
    md.finish();
    return md;
}

void MassDistribution::finish() {
    for (double w : weights.back()) {
        if (!(w > 0.0)) throw PreconditionError("finest-level weight is not strictly positive");
    }
    if (tree->space().sorted_1d()) {
        const auto& finest = weights.back();
        finest_prefix_.assign(finest.size() + 1, 0.0);
        for (std::size_t j = 0; j < finest.size(); ++j) finest_prefix_[j + 1] = finest_prefix_[j] + finest[j];
    }
}

double MassDistribution::measure_of_ball(int center, double r) const {
    const auto& space = tree->space();
    space.check_index(center);
    if (r < 0.0) throw ArgumentError("ball radius must be nonnegative");
    if (r < space.resolution_floor() && !warned_below_floor_->exchange(true)) {
        std::cerr << "warning: ball radius " << r << " is below the resolution floor "
                  << space.resolution_floor() << "; measures at this scale reflect the discretization\n";
    }
    int finest = tree->depth();
    if (space.sorted_1d()) {
        IndexSet in_ball = ball_members(space, center, r);
        if (in_ball.empty()) return 0.0;
        const auto& cop = tree->level(finest).cube_of_point;
        int a = cop[static_cast<std::size_t>(in_ball.front())];
        int b = cop[static_cast<std::size_t>(in_ball.back())];
        return finest_prefix_[static_cast<std::size_t>(b) + 1] - finest_prefix_[static_cast<std::size_t>(a)];
    }
    double total = 0.0;
    const auto& lvl = tree->level(finest);
    for (std::size_t j = 0; j < lvl.cubes.size(); ++j) {
        if (tree->cube_min_dist(finest, static_cast<int>(j), center) <= r) {
            total += weights[static_cast<std::size_t>(finest)][j];
        }
    }
    return total;
}

double MassDistribution::max_edge_ratio() const {
    double worst = 0.0;
    for (int k = 0; k < tree->depth(); ++k) {
        const auto& lvl = tree->level(k);
        for (std::size_t j = 0; j < lvl.cubes.size(); ++j) {
            double pw = weights[static_cast<std::size_t>(k)][j];
            for (int ch : lvl.cubes[j].children) {
                worst = std::max(worst, weights[static_cast<std::size_t>(k + 1)][static_cast<std::size_t>(ch)] / pw);
            }
        }
    }
    return worst;
}

double MassDistribution::min_edge_ratio() const {
    double best = std::numeric_limits<double>::infinity();
    for (int k = 0; k < tree->depth(); ++k) {
        const auto& lvl = tree->level(k);
        for (std::size_t j = 0; j < lvl.cubes.size(); ++j) {
            double pw = weights[static_cast<std::size_t>(k)][j];
            for (int ch : lvl.cubes[j].children) {
                best = std::min(best, weights[static_cast<std::size_t>(k + 1)][static_cast<std::size_t>(ch)] / pw);
            }
        }
    }
    return best;
}

double MassDistribution::conservation_error() const {
    double worst = 0.0;
    for (int k = 0; k < tree->depth(); ++k) {
        const auto& lvl = tree->level(k);
        for (std::size_t j = 0; j < lvl.cubes.size(); ++j) {
            if (lvl.cubes[j].children.empty()) continue;
            double pw = weights[static_cast<std::size_t>(k)][j];
            double sum = 0.0;
            for (int ch : lvl.cubes[j].children) {
                sum += weights[static_cast<std::size_t>(k + 1)][static_cast<std::size_t>(ch)];
            }
            worst = std::max(worst, std::abs(sum - pw) / pw);
        }
    }
    return worst;
}

jsonio::json MassDistribution::to_json() const {
    jsonio::json j;
    j["variant"] = doubling ? "doubling" : "plain";
    j["t"] = params.t;
    j["s"] = params.s;
    j["c0"] = params.c0;
    j["lambda"] = params.lambda;
    j["K"] = K;
    if (doubling) {
        j["M"] = params.M;
        j["eps"] = eps_uniform;
    }
    j["rho"] = tree->rho();
    jsonio::json lvls = jsonio::json::array();
    for (std::size_t k = 0; k < weights.size(); ++k) {
        jsonio::json lj;
        lj["k"] = static_cast<int>(k);
        lj["weights"] = weights[k];
        lvls.push_back(std::move(lj));
    }
    j["levels"] = std::move(lvls);
    return j;
}

}  // namespace fraclab
