#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "fraclab/json_io.hpp"
#include "fraclab/metric_space.hpp"

namespace fraclab {

// Contractive similitude x |-> ratio * O * x + translation with O orthogonal.
struct Similitude {
    int dim = 1;
    double ratio = 1.0;
    std::vector<double> orthogonal;   // dim x dim, row-major
    std::vector<double> translation;  // dim

    static Similitude identity(int dim);
    // Validates 0 < ratio < 1 and O * O^T = I within 1e-9 (for IFS maps;
    // compositions and the identity may carry ratio >= 1).
    void validate_map() const;

    std::vector<double> apply(const std::vector<double>& x) const;
    // (*this) after `other`: x |-> this(other(x)).
    Similitude after(const Similitude& other) const;
    // Fixed point z = ratio * O * z + translation (exists since ratio < 1).
    std::vector<double> fixed_point() const;
};

// Index word over {1..kappa}; empty = identity.
using Word = std::vector<int>;

std::string word_to_string(const Word& w);

// Finite condensation set with generator metadata, regenerable at any
// resolution. Interval nets are 1-regular (s = 1); point lists and the
// sequence kind carry no regularity tag.
struct Condensation {
    enum class Kind { kInterval, kPoints, kSequence34 };
    Kind kind = Kind::kPoints;
    double a = 0.0, b = 0.0;                        // interval bounds
    std::vector<std::vector<double>> points;        // explicit points / interval extras
    int seq_J = 20;                                 // sequence34 largest index

    bool sregular() const { return kind == Kind::kInterval && points.empty(); }
    double sregular_s() const { return 1.0; }
    // Materializes the cloud with net spacing <= spacing for interval kinds;
    // explicit points and the sequence ignore the spacing (global dedup
    // enforces the final resolution).
    std::vector<std::vector<double>> generate(double spacing, int dim) const;
    jsonio::json to_json() const;
    static Condensation load_json(const jsonio::json& j);
};

struct IfsSystem {
    int dim = 1;
    std::vector<Similitude> maps;
    std::optional<Condensation> condensation;
    std::optional<std::vector<std::vector<double>>> open_set;  // convex polytope vertices

    int kappa() const { return static_cast<int>(maps.size()); }
    double min_ratio() const;
    double max_ratio() const;
    void validate() const;  // kappa >= 2, each map valid, condensation nonempty

    jsonio::json to_json() const;
    static IfsSystem load_json(const jsonio::json& j);
    static IfsSystem load_json_file(const std::string& path);
};

// phi_word = phi_{w1} o phi_{w2} o ... (left-to-right); compose({}) = identity.
Similitude compose(const IfsSystem& ifs, const Word& word);

// Exactly the words with Lip(phi_w) <= rho < Lip(phi_parent), in
// lexicographic order. Prefix-free cover of the word tree.
std::vector<Word> stopping_words(const IfsSystem& ifs, double rho, std::size_t budget = 1'000'000);

// Unique s > 0 with sum_i ratio_i^s = 1, bisected to |sum - 1| < 1e-12.
double similarity_dimension(const IfsSystem& ifs);

// {phi_w(z0) : w in N(delta)} with z0 the fixed point of phi_1, sorted.
// resolution_floor = delta * diam of the cloud.
FiniteMetricSpace attractor_points(const IfsSystem& ifs, double delta, std::size_t budget = 1'000'000);

// Attractor leaves plus phi_w(C-net) for every word with Lip >= delta,
// each copy sampled at spacing delta/(2 Lip), deduplicated at delta/2.
FiniteMetricSpace inhomogeneous_points(const IfsSystem& ifs, double delta, std::size_t budget = 4'000'000);

// Greedy ascending dedup at the given separation; weights of merged points
// accumulate onto the kept representative. points are rows of length dim.
void dedup_cloud(int dim, std::vector<std::vector<double>>& points, std::vector<double>* weights,
                 double sep);

struct CoscReport {
    bool has_open_set = false;
    bool has_condensation = false;
    bool containment_ok = false;   // phi_i(U) inside U, every i
    bool disjoint_ok = false;      // phi_i(U) pairwise disjoint (open images)
    bool condensation_ok = false;  // dist(C, union cl(phi_i U) + complement of U) > 0
    bool osc_ok = false;           // containment && disjoint
    bool cosc_ok = false;          // osc && condensation_ok
    bool zero_closure_margin = false;  // images touch at closure boundaries
    bool probabilistic = false;        // dim >= 3 sampling fallback was used
    double containment_margin = 0.0;   // most negative = worst escape from cl(U)
    double closure_margin = 0.0;       // smallest gap between image closures
    double cosc_margin = 0.0;          // the distance d-hat
    jsonio::json to_json() const;
};

// Open-set-condition and condensation-open-set-condition check over the
// system's convex open set. Exact in dimensions 1 and 2.
CoscReport check_cosc(const IfsSystem& ifs);

}  // namespace fraclab
