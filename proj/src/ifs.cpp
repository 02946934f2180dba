#include "fraclab/ifs.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <iostream>
#include <numeric>
#include <sstream>

#include "fraclab/errors.hpp"
#include "fraclab/rng.hpp"

namespace fraclab {

namespace {

constexpr double kOrthTol = 1e-9;

std::vector<double> mat_vec(int d, const std::vector<double>& m, const std::vector<double>& x) {
    std::vector<double> y(static_cast<std::size_t>(d), 0.0);
    for (int i = 0; i < d; ++i) {
        double s = 0.0;
        for (int j = 0; j < d; ++j) s += m[static_cast<std::size_t>(i) * d + j] * x[static_cast<std::size_t>(j)];
        y[static_cast<std::size_t>(i)] = s;
    }
    return y;
}

std::vector<double> mat_mat(int d, const std::vector<double>& a, const std::vector<double>& b) {
    std::vector<double> c(static_cast<std::size_t>(d) * d, 0.0);
    for (int i = 0; i < d; ++i)
        for (int k = 0; k < d; ++k) {
            const double aik = a[static_cast<std::size_t>(i) * d + k];
            if (aik == 0.0) continue;
            for (int j = 0; j < d; ++j)
                c[static_cast<std::size_t>(i) * d + j] += aik * b[static_cast<std::size_t>(k) * d + j];
        }
    return c;
}

// Solves A z = rhs by Gaussian elimination with partial pivoting (A is
// d x d and well conditioned here: A = I - ratio * O with ratio < 1).
std::vector<double> solve_linear(int d, std::vector<double> a, std::vector<double> rhs) {
    for (int col = 0; col < d; ++col) {
        int piv = col;
        for (int r = col + 1; r < d; ++r)
            if (std::abs(a[static_cast<std::size_t>(r) * d + col]) >
                std::abs(a[static_cast<std::size_t>(piv) * d + col]))
                piv = r;
        if (std::abs(a[static_cast<std::size_t>(piv) * d + col]) < 1e-14)
            throw DegenerateInputError("singular linear system while solving for a fixed point");
        if (piv != col) {
            for (int j = 0; j < d; ++j)
                std::swap(a[static_cast<std::size_t>(piv) * d + j], a[static_cast<std::size_t>(col) * d + j]);
            std::swap(rhs[static_cast<std::size_t>(piv)], rhs[static_cast<std::size_t>(col)]);
        }
        const double inv = 1.0 / a[static_cast<std::size_t>(col) * d + col];
        for (int r = col + 1; r < d; ++r) {
            const double f = a[static_cast<std::size_t>(r) * d + col] * inv;
            if (f == 0.0) continue;
            for (int j = col; j < d; ++j)
                a[static_cast<std::size_t>(r) * d + j] -= f * a[static_cast<std::size_t>(col) * d + j];
            rhs[static_cast<std::size_t>(r)] -= f * rhs[static_cast<std::size_t>(col)];
        }
    }
    std::vector<double> z(static_cast<std::size_t>(d), 0.0);
    for (int row = d - 1; row >= 0; --row) {
        double s = rhs[static_cast<std::size_t>(row)];
        for (int j = row + 1; j < d; ++j) s -= a[static_cast<std::size_t>(row) * d + j] * z[static_cast<std::size_t>(j)];
        z[static_cast<std::size_t>(row)] = s / a[static_cast<std::size_t>(row) * d + row];
    }
    return z;
}

bool rows_less(const std::vector<double>& a, const std::vector<double>& b) {
    return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

double row_dist(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return std::sqrt(s);
}

std::vector<double> flatten(const std::vector<std::vector<double>>& rows) {
    std::vector<double> flat;
    flat.reserve(rows.size() * (rows.empty() ? 0 : rows.front().size()));
    for (const auto& r : rows) flat.insert(flat.end(), r.begin(), r.end());
    return flat;
}

double cloud_diam_1d(const std::vector<std::vector<double>>& rows) {
    double lo = rows.front()[0], hi = rows.front()[0];
    for (const auto& r : rows) {
        lo = std::min(lo, r[0]);
        hi = std::max(hi, r[0]);
    }
    return hi - lo;
}

double cloud_diam(int dim, const std::vector<std::vector<double>>& rows) {
    if (dim == 1) return cloud_diam_1d(rows);
    double best = 0.0;
    if (rows.size() <= 4000) {
        for (std::size_t i = 0; i < rows.size(); ++i)
            for (std::size_t j = i + 1; j < rows.size(); ++j) best = std::max(best, row_dist(rows[i], rows[j]));
        return best;
    }
    // Bounding-box diagonal upper bound degrades the floor estimate by at
    // most sqrt(dim); acceptable for large higher-dimensional clouds.
    std::vector<double> lo = rows.front(), hi = rows.front();
    for (const auto& r : rows)
        for (int c = 0; c < dim; ++c) {
            lo[static_cast<std::size_t>(c)] = std::min(lo[static_cast<std::size_t>(c)], r[static_cast<std::size_t>(c)]);
            hi[static_cast<std::size_t>(c)] = std::max(hi[static_cast<std::size_t>(c)], r[static_cast<std::size_t>(c)]);
        }
    double s = 0.0;
    for (int c = 0; c < dim; ++c) {
        const double d = hi[static_cast<std::size_t>(c)] - lo[static_cast<std::size_t>(c)];
        s += d * d;
    }
    return std::sqrt(s);
}

}  // namespace

// ==================================================================== //
//  Similitude                                                          //
// ==================================================================== //

Similitude Similitude::identity(int dim) {
    Similitude s;
    s.dim = dim;
    s.ratio = 1.0;
    s.orthogonal.assign(static_cast<std::size_t>(dim) * dim, 0.0);
    for (int i = 0; i < dim; ++i) s.orthogonal[static_cast<std::size_t>(i) * dim + i] = 1.0;
    s.translation.assign(static_cast<std::size_t>(dim), 0.0);
    return s;
}

void Similitude::validate_map() const {
    if (dim < 1) throw ArgumentError("similitude dimension must be >= 1");
    if (!(ratio > 0.0) || !(ratio < 1.0))
        throw ArgumentError("similitude contraction ratio must lie in (0, 1), got " + std::to_string(ratio));
    if (orthogonal.size() != static_cast<std::size_t>(dim) * dim)
        throw ArgumentError("orthogonal part must be a dim x dim matrix");
    if (translation.size() != static_cast<std::size_t>(dim))
        throw ArgumentError("translation length must equal dim");
    for (double v : orthogonal)
        if (!std::isfinite(v)) throw ArgumentError("orthogonal part has a non-finite entry");
    for (double v : translation)
        if (!std::isfinite(v)) throw ArgumentError("translation has a non-finite entry");
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j) {
            double s = 0.0;
            for (int k = 0; k < dim; ++k)
                s += orthogonal[static_cast<std::size_t>(i) * dim + k] * orthogonal[static_cast<std::size_t>(j) * dim + k];
            const double want = (i == j) ? 1.0 : 0.0;
            if (std::abs(s - want) > kOrthTol)
                throw ArgumentError("orthogonal part fails O * O^T = I at entry (" + std::to_string(i) + "," +
                                    std::to_string(j) + ")");
        }
}

std::vector<double> Similitude::apply(const std::vector<double>& x) const {
    std::vector<double> y = mat_vec(dim, orthogonal, x);
    for (int i = 0; i < dim; ++i)
        y[static_cast<std::size_t>(i)] = ratio * y[static_cast<std::size_t>(i)] + translation[static_cast<std::size_t>(i)];
    return y;
}

Similitude Similitude::after(const Similitude& other) const {
    Similitude out;
    out.dim = dim;
    out.ratio = ratio * other.ratio;
    out.orthogonal = mat_mat(dim, orthogonal, other.orthogonal);
    out.translation = apply(other.translation);
    return out;
}

std::vector<double> Similitude::fixed_point() const {
    std::vector<double> a(static_cast<std::size_t>(dim) * dim, 0.0);
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j)
            a[static_cast<std::size_t>(i) * dim + j] =
                (i == j ? 1.0 : 0.0) - ratio * orthogonal[static_cast<std::size_t>(i) * dim + j];
    return solve_linear(dim, std::move(a), translation);
}

std::string word_to_string(const Word& w) {
    bool wide = false;
    for (int letter : w)
        if (letter > 9) wide = true;
    std::ostringstream os;
    for (std::size_t i = 0; i < w.size(); ++i) {
        if (wide && i > 0) os << '.';
        os << w[i];
    }
    return os.str();
}

// ==================================================================== //
//  Condensation                                                        //
// ==================================================================== //

std::vector<std::vector<double>> Condensation::generate(double spacing, int dim) const {
    std::vector<std::vector<double>> out;
    switch (kind) {
        case Kind::kInterval: {
            if (dim != 1) throw ArgumentError("interval condensation requires dim == 1");
            if (!(b > a)) throw ArgumentError("interval condensation needs b > a");
            if (!(spacing > 0.0)) throw ArgumentError("condensation spacing must be positive");
            const double len = b - a;
            const int n = std::max(2, static_cast<int>(std::ceil(len / spacing)) + 1);
            out.reserve(static_cast<std::size_t>(n) + points.size());
            for (int i = 0; i < n; ++i) out.push_back({a + len * static_cast<double>(i) / (n - 1)});
            for (const auto& p : points) out.push_back(p);
            break;
        }
        case Kind::kPoints: {
            if (points.empty()) throw ArgumentError("point condensation needs at least one point");
            out = points;
            break;
        }
        case Kind::kSequence34: {
            if (dim != 1) throw ArgumentError("sequence condensation requires dim == 1");
            if (seq_J < 1) throw ArgumentError("sequence condensation needs J >= 1");
            out.reserve(static_cast<std::size_t>(seq_J) + 1);
            for (int j = 1; j <= seq_J; ++j)
                out.push_back({(1.0 + 1.0 / (j + 1.0)) * std::pow(3.0, -j)});
            out.push_back({0.0});
            break;
        }
    }
    for (const auto& p : out)
        if (p.size() != static_cast<std::size_t>(dim))
            throw ArgumentError("condensation point dimension mismatch");
    return out;
}

jsonio::json Condensation::to_json() const {
    jsonio::json j;
    switch (kind) {
        case Kind::kInterval:
            j["kind"] = "interval";
            j["a"] = a;
            j["b"] = b;
            if (!points.empty()) j["extra_points"] = points;
            break;
        case Kind::kPoints:
            j["kind"] = "points";
            j["points"] = points;
            break;
        case Kind::kSequence34:
            j["kind"] = "sequence34";
            j["J"] = seq_J;
            break;
    }
    return j;
}

Condensation Condensation::load_json(const jsonio::json& j) {
    if (!j.is_object() || !j.contains("kind") || !j["kind"].is_string())
        throw ArgumentError("condensation needs a string \"kind\"");
    Condensation c;
    const std::string kind = j["kind"].get<std::string>();
    if (kind == "interval") {
        c.kind = Kind::kInterval;
        if (!j.contains("a") || !j.contains("b")) throw ArgumentError("interval condensation needs \"a\" and \"b\"");
        c.a = j["a"].get<double>();
        c.b = j["b"].get<double>();
        if (!(c.b > c.a)) throw ArgumentError("interval condensation needs b > a");
        if (j.contains("extra_points")) c.points = j["extra_points"].get<std::vector<std::vector<double>>>();
    } else if (kind == "points") {
        c.kind = Kind::kPoints;
        if (!j.contains("points")) throw ArgumentError("point condensation needs \"points\"");
        c.points = j["points"].get<std::vector<std::vector<double>>>();
        if (c.points.empty()) throw ArgumentError("point condensation needs at least one point");
    } else if (kind == "sequence34") {
        c.kind = Kind::kSequence34;
        c.seq_J = j.value("J", 20);
        if (c.seq_J < 1) throw ArgumentError("sequence condensation needs J >= 1");
    } else {
        throw ArgumentError("unknown condensation kind: " + kind);
    }
    return c;
}

// ==================================================================== //
//  IfsSystem                                                           //
// ==================================================================== //

double IfsSystem::min_ratio() const {
    double m = 1.0;
    for (const auto& s : maps) m = std::min(m, s.ratio);
    return m;
}

double IfsSystem::max_ratio() const {
    double m = 0.0;
    for (const auto& s : maps) m = std::max(m, s.ratio);
    return m;
}

void IfsSystem::validate() const {
    if (dim < 1) throw ArgumentError("system dimension must be >= 1");
    if (maps.size() < 2) throw ArgumentError("an iterated function system needs at least two maps");
    for (const auto& s : maps) {
        if (s.dim != dim) throw ArgumentError("every map must share the system dimension");
        s.validate_map();
    }
    if (condensation && condensation->kind == Condensation::Kind::kPoints && condensation->points.empty())
        throw ArgumentError("point condensation needs at least one point");
    if (open_set) {
        if (open_set->size() < 2) throw ArgumentError("open set needs at least two vertices");
        for (const auto& v : *open_set)
            if (v.size() != static_cast<std::size_t>(dim)) throw ArgumentError("open-set vertex dimension mismatch");
    }
}

jsonio::json IfsSystem::to_json() const {
    jsonio::json j;
    j["dim"] = dim;
    j["maps"] = jsonio::json::array();
    for (const auto& s : maps) {
        jsonio::json m;
        m["ratio"] = s.ratio;
        jsonio::json rows = jsonio::json::array();
        for (int r = 0; r < dim; ++r) {
            jsonio::json row = jsonio::json::array();
            for (int c = 0; c < dim; ++c) row.push_back(s.orthogonal[static_cast<std::size_t>(r) * dim + c]);
            rows.push_back(std::move(row));
        }
        m["orthogonal"] = std::move(rows);
        m["translation"] = s.translation;
        j["maps"].push_back(std::move(m));
    }
    if (condensation) j["condensation"] = condensation->to_json();
    if (open_set) j["open_set"] = jsonio::json{{"vertices", *open_set}};
    return j;
}

IfsSystem IfsSystem::load_json(const jsonio::json& j) {
    if (!j.is_object()) throw ArgumentError("system description must be a JSON object");
    IfsSystem ifs;
    if (!j.contains("dim") || !j["dim"].is_number_integer())
        throw ArgumentError("system description needs an integer \"dim\"");
    ifs.dim = j["dim"].get<int>();
    if (!j.contains("maps") || !j["maps"].is_array())
        throw ArgumentError("system description needs a \"maps\" array");
    for (const auto& m : j["maps"]) {
        Similitude s;
        s.dim = ifs.dim;
        if (!m.contains("ratio")) throw ArgumentError("every map needs a \"ratio\"");
        s.ratio = m["ratio"].get<double>();
        if (m.contains("orthogonal")) {
            const auto& o = m["orthogonal"];
            if (o.is_array() && !o.empty() && o[0].is_array()) {
                for (const auto& row : o)
                    for (const auto& v : row) s.orthogonal.push_back(v.get<double>());
            } else {
                s.orthogonal = o.get<std::vector<double>>();
            }
        } else {
            s.orthogonal = Similitude::identity(ifs.dim).orthogonal;
        }
        if (m.contains("translation"))
            s.translation = m["translation"].get<std::vector<double>>();
        else
            s.translation.assign(static_cast<std::size_t>(ifs.dim), 0.0);
        ifs.maps.push_back(std::move(s));
    }
    if (j.contains("condensation") && !j["condensation"].is_null())
        ifs.condensation = Condensation::load_json(j["condensation"]);
    if (j.contains("open_set") && !j["open_set"].is_null()) {
        const auto& u = j["open_set"];
        if (!u.contains("vertices")) throw ArgumentError("open set needs \"vertices\"");
        ifs.open_set = u["vertices"].get<std::vector<std::vector<double>>>();
    }
    ifs.validate();
    return ifs;
}

IfsSystem IfsSystem::load_json_file(const std::string& path) {
    return load_json(jsonio::read_json_file(path));
}

// ==================================================================== //
//  Words and dimensions                                                //
// ==================================================================== //

Similitude compose(const IfsSystem& ifs, const Word& word) {
    Similitude acc = Similitude::identity(ifs.dim);
    for (int letter : word) {
        if (letter < 1 || letter > ifs.kappa())
            throw ArgumentError("word letter " + std::to_string(letter) + " outside 1.." +
                                std::to_string(ifs.kappa()));
        acc = acc.after(ifs.maps[static_cast<std::size_t>(letter - 1)]);
    }
    return acc;
}

namespace {

// Depth-first visit over the prefix-free stopping set
// { w : Lip(phi_w) <= rho < Lip(phi_parent) } in lexicographic order.
void visit_stopping(const IfsSystem& ifs, double rho, std::size_t budget, Word& word, const Similitude& sim,
                    std::size_t& emitted, const std::function<void(const Word&, const Similitude&)>& fn) {
    if (sim.ratio <= rho) {
        if (++emitted > budget)
            throw BudgetError("stopping set exceeds the word budget of " + std::to_string(budget));
        fn(word, sim);
        return;
    }
    for (int letter = 1; letter <= ifs.kappa(); ++letter) {
        word.push_back(letter);
        visit_stopping(ifs, rho, budget, word, sim.after(ifs.maps[static_cast<std::size_t>(letter - 1)]), emitted,
                       fn);
        word.pop_back();
    }
}

void for_each_stopping(const IfsSystem& ifs, double rho, std::size_t budget,
                       const std::function<void(const Word&, const Similitude&)>& fn) {
    if (!(rho > 0.0) || !(rho < 1.0)) throw ArgumentError("stopping scale must lie in (0, 1)");
    Word word;
    std::size_t emitted = 0;
    visit_stopping(ifs, rho, budget, word, Similitude::identity(ifs.dim), emitted, fn);
}

}  // namespace

std::vector<Word> stopping_words(const IfsSystem& ifs, double rho, std::size_t budget) {
    ifs.validate();
    std::vector<Word> out;
    for_each_stopping(ifs, rho, budget, [&](const Word& w, const Similitude&) { out.push_back(w); });
    return out;
}

double similarity_dimension(const IfsSystem& ifs) {
    ifs.validate();
    const auto f = [&](double s) {
        double sum = 0.0;
        for (const auto& m : ifs.maps) sum += std::pow(m.ratio, s);
        return sum - 1.0;
    };
    double lo = 0.0, hi = 1.0;
    for (int i = 0; i < 128 && f(hi) > 0.0; ++i) hi *= 2.0;
    for (int i = 0; i < 500; ++i) {
        const double mid = 0.5 * (lo + hi);
        const double v = f(mid);
        if (std::abs(v) < 1e-12) return mid;
        (v > 0.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

// ==================================================================== //
//  Point-cloud generation                                              //
// ==================================================================== //

void dedup_cloud(int dim, std::vector<std::vector<double>>& points, std::vector<double>* weights, double sep) {
    if (points.empty()) return;
    std::vector<std::size_t> order(points.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return rows_less(points[a], points[b]); });
    std::vector<std::vector<double>> kept;
    std::vector<double> kept_w;
    kept.reserve(points.size());
    if (weights) kept_w.reserve(points.size());
    for (std::size_t oi : order) {
        bool merged = false;
        if (!kept.empty()) {
            if (dim == 1) {
                if (points[oi][0] - kept.back()[0] <= sep) {
                    if (weights) kept_w.back() += (*weights)[oi];
                    merged = true;
                }
            } else {
                for (std::size_t k = kept.size(); k-- > 0;) {
                    if (points[oi][0] - kept[k][0] > sep) break;
                    if (row_dist(points[oi], kept[k]) <= sep) {
                        if (weights) kept_w[k] += (*weights)[oi];
                        merged = true;
                        break;
                    }
                }
            }
        }
        if (!merged) {
            kept.push_back(points[oi]);
            if (weights) kept_w.push_back((*weights)[oi]);
        }
    }
    points = std::move(kept);
    if (weights) *weights = std::move(kept_w);
}

FiniteMetricSpace attractor_points(const IfsSystem& ifs, double delta, std::size_t budget) {
    ifs.validate();
    const std::vector<double> seed = ifs.maps.front().fixed_point();
    std::vector<std::vector<double>> rows;
    for_each_stopping(ifs, delta, budget,
                      [&](const Word&, const Similitude& sim) { rows.push_back(sim.apply(seed)); });
    std::sort(rows.begin(), rows.end(), rows_less);
    std::size_t dups = 0;
    std::vector<std::vector<double>> unique_rows;
    unique_rows.reserve(rows.size());
    for (auto& r : rows) {
        if (!unique_rows.empty() && row_dist(unique_rows.back(), r) == 0.0)
            ++dups;
        else
            unique_rows.push_back(std::move(r));
    }
    if (dups > 0)
        std::cerr << "warning: " << dups << " coincident attractor points collapsed"
                  << " (coinciding maps give a degenerate system)\n";
    if (unique_rows.size() < 2)
        throw DegenerateInputError("attractor collapsed to fewer than two distinct points");
    const double diam = cloud_diam(ifs.dim, unique_rows);
    if (!(diam > 0.0)) throw DegenerateInputError("attractor has zero diameter");
    return FiniteMetricSpace::from_points(ifs.dim, flatten(unique_rows), delta * diam);
}

FiniteMetricSpace inhomogeneous_points(const IfsSystem& ifs, double delta, std::size_t budget) {
    ifs.validate();
    if (!ifs.condensation)
        throw PreconditionError("inhomogeneous generation needs a condensation set on the system");
    if (!(delta > 0.0) || !(delta < 1.0)) throw ArgumentError("resolution must lie in (0, 1)");
    const std::vector<double> seed = ifs.maps.front().fixed_point();
    std::vector<std::vector<double>> rows;
    std::size_t emitted = 0;
    const auto add_row = [&](std::vector<double> p) {
        if (++emitted > budget)
            throw BudgetError("inhomogeneous cloud exceeds the point budget of " + std::to_string(budget));
        rows.push_back(std::move(p));
    };
    // Attractor leaves at scale delta plus one condensation copy per word
    // with Lip >= delta, each copy sampled densely enough that the final
    // dedup at delta/2 is what sets the resolution.
    const std::function<void(Word&, const Similitude&)> visit = [&](Word& word, const Similitude& sim) {
        if (sim.ratio <= delta) {
            add_row(sim.apply(seed));
            return;
        }
        const double spacing = delta / (2.0 * sim.ratio);
        for (const auto& c : ifs.condensation->generate(spacing, ifs.dim)) add_row(sim.apply(c));
        for (int letter = 1; letter <= ifs.kappa(); ++letter) {
            word.push_back(letter);
            visit(word, sim.after(ifs.maps[static_cast<std::size_t>(letter - 1)]));
            word.pop_back();
        }
    };
    Word word;
    visit(word, Similitude::identity(ifs.dim));
    dedup_cloud(ifs.dim, rows, nullptr, delta / 2.0);
    if (rows.size() < 2) throw DegenerateInputError("inhomogeneous cloud collapsed to fewer than two points");
    return FiniteMetricSpace::from_points(ifs.dim, flatten(rows), delta / 2.0);
}

// ==================================================================== //
//  Open-set conditions                                                 //
// ==================================================================== //

namespace {

struct Interval {
    double lo, hi;
};

Interval interval_of(const std::vector<std::vector<double>>& vertices) {
    double lo = vertices.front()[0], hi = vertices.front()[0];
    for (const auto& v : vertices) {
        lo = std::min(lo, v[0]);
        hi = std::max(hi, v[0]);
    }
    if (!(hi > lo)) throw ArgumentError("open-set interval has zero length");
    return {lo, hi};
}

double dist_to_interval(double x, const Interval& iv) {
    if (x < iv.lo) return iv.lo - x;
    if (x > iv.hi) return x - iv.hi;
    return 0.0;
}

// --- convex polygons (dim == 2), counter-clockwise hulls --------------

using Poly = std::vector<std::vector<double>>;

double cross3(const std::vector<double>& o, const std::vector<double>& a, const std::vector<double>& b) {
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
}

Poly convex_hull(Poly pts) {
    std::sort(pts.begin(), pts.end(), rows_less);
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    if (pts.size() < 3) throw ArgumentError("planar open set needs at least three distinct vertices");
    Poly hull(2 * pts.size());
    std::size_t k = 0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        while (k >= 2 && cross3(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
        hull[k++] = pts[i];
    }
    const std::size_t lower = k + 1;
    for (std::size_t i = pts.size() - 1; i-- > 0;) {
        while (k >= lower && cross3(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
        hull[k++] = pts[i];
    }
    hull.resize(k - 1);
    if (hull.size() < 3) throw ArgumentError("planar open set is degenerate (collinear vertices)");
    return hull;
}

double point_seg_dist(const std::vector<double>& p, const std::vector<double>& a, const std::vector<double>& b) {
    const double vx = b[0] - a[0], vy = b[1] - a[1];
    const double wx = p[0] - a[0], wy = p[1] - a[1];
    const double vv = vx * vx + vy * vy;
    double t = vv > 0.0 ? (wx * vx + wy * vy) / vv : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    const double dx = p[0] - (a[0] + t * vx), dy = p[1] - (a[1] + t * vy);
    return std::sqrt(dx * dx + dy * dy);
}

// Signed distance of p to the hull boundary: positive inside.
double signed_inside_dist(const std::vector<double>& p, const Poly& hull) {
    bool inside = true;
    double boundary = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < hull.size(); ++i) {
        const auto& a = hull[i];
        const auto& b = hull[(i + 1) % hull.size()];
        if (cross3(a, b, p) < 0.0) inside = false;
        boundary = std::min(boundary, point_seg_dist(p, a, b));
    }
    return inside ? boundary : -boundary;
}

// Directed gap between convex polygons along each edge normal of both: the
// largest separation found (negative = overlapping interiors).
double polygon_gap(const Poly& p, const Poly& q) {
    double best = -std::numeric_limits<double>::infinity();
    const auto axis_gap = [&](const Poly& edges) {
        for (std::size_t i = 0; i < edges.size(); ++i) {
            const auto& a = edges[i];
            const auto& b = edges[(i + 1) % edges.size()];
            double nx = b[1] - a[1], ny = a[0] - b[0];
            const double len = std::sqrt(nx * nx + ny * ny);
            if (len == 0.0) continue;
            nx /= len;
            ny /= len;
            double pmin = std::numeric_limits<double>::infinity(), pmax = -pmin;
            for (const auto& v : p) {
                const double s = nx * v[0] + ny * v[1];
                pmin = std::min(pmin, s);
                pmax = std::max(pmax, s);
            }
            double qmin = std::numeric_limits<double>::infinity(), qmax = -qmin;
            for (const auto& v : q) {
                const double s = nx * v[0] + ny * v[1];
                qmin = std::min(qmin, s);
                qmax = std::max(qmax, s);
            }
            best = std::max(best, std::max(qmin - pmax, pmin - qmax));
        }
    };
    axis_gap(p);
    axis_gap(q);
    return best;
}

double polygon_pair_dist(const Poly& p, const Poly& q) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < p.size(); ++i)
        for (std::size_t j = 0; j < q.size(); ++j)
            best = std::min({best, point_seg_dist(p[i], q[j], q[(j + 1) % q.size()]),
                             point_seg_dist(q[j], p[i], p[(i + 1) % p.size()])});
    return best;
}

Poly map_poly(const Similitude& s, const Poly& poly) {
    Poly out;
    out.reserve(poly.size());
    for (const auto& v : poly) out.push_back(s.apply(v));
    return out;
}

std::vector<std::vector<double>> cosc_condensation_points(const Condensation& c, int dim) {
    if (c.kind == Condensation::Kind::kInterval) {
        std::vector<std::vector<double>> pts = c.points;
        pts.push_back({c.a});
        pts.push_back({c.b});
        return pts;
    }
    return c.generate(1.0, dim);
}

}  // namespace

jsonio::json CoscReport::to_json() const {
    jsonio::json j;
    j["has_open_set"] = has_open_set;
    j["has_condensation"] = has_condensation;
    j["containment_ok"] = containment_ok;
    j["containment_margin"] = containment_margin;
    j["disjoint_ok"] = disjoint_ok;
    j["closure_margin"] = closure_margin;
    j["zero_closure_margin"] = zero_closure_margin;
    j["osc_ok"] = osc_ok;
    if (has_condensation) {
        j["condensation_ok"] = condensation_ok;
        j["cosc_margin"] = cosc_margin;
        j["cosc_ok"] = cosc_ok;
    }
    j["probabilistic"] = probabilistic;
    return j;
}

CoscReport check_cosc(const IfsSystem& ifs) {
    ifs.validate();
    if (!ifs.open_set) throw PreconditionError("open-set check needs open-set vertices on the system");
    CoscReport rep;
    rep.has_open_set = true;
    rep.has_condensation = ifs.condensation.has_value();
    const double tol = 1e-12;

    if (ifs.dim == 1) {
        const Interval u = interval_of(*ifs.open_set);
        std::vector<Interval> images;
        rep.containment_margin = std::numeric_limits<double>::infinity();
        for (const auto& m : ifs.maps) {
            const double e0 = m.apply({u.lo})[0];
            const double e1 = m.apply({u.hi})[0];
            const Interval img{std::min(e0, e1), std::max(e0, e1)};
            images.push_back(img);
            rep.containment_margin = std::min({rep.containment_margin, img.lo - u.lo, u.hi - img.hi});
        }
        rep.containment_ok = rep.containment_margin >= -tol;
        std::sort(images.begin(), images.end(), [](const Interval& x, const Interval& y) { return x.lo < y.lo; });
        rep.closure_margin = std::numeric_limits<double>::infinity();
        rep.disjoint_ok = true;
        for (std::size_t i = 0; i + 1 < images.size(); ++i) {
            const double gap = images[i + 1].lo - images[i].hi;
            rep.closure_margin = std::min(rep.closure_margin, gap);
            if (gap < -tol) rep.disjoint_ok = false;
        }
        rep.zero_closure_margin = rep.disjoint_ok && rep.closure_margin <= tol;
        rep.osc_ok = rep.containment_ok && rep.disjoint_ok;
        if (rep.has_condensation) {
            const auto& c = *ifs.condensation;
            rep.cosc_margin = std::numeric_limits<double>::infinity();
            const auto account = [&](double lo, double hi) {
                // Distance of the piece [lo, hi] of C to every image closure
                // and to the complement of U.
                double d = std::min(lo - u.lo, u.hi - hi);
                if (d < 0.0) d = 0.0;
                for (const auto& img : images) {
                    if (hi >= img.lo && lo <= img.hi) {
                        d = 0.0;
                        break;
                    }
                    d = std::min(d, lo > img.hi ? lo - img.hi : img.lo - hi);
                }
                rep.cosc_margin = std::min(rep.cosc_margin, d);
            };
            if (c.kind == Condensation::Kind::kInterval) account(c.a, c.b);
            for (const auto& p : cosc_condensation_points(c, 1))
                if (c.kind != Condensation::Kind::kInterval || !p.empty()) account(p[0], p[0]);
            rep.condensation_ok = rep.cosc_margin > tol;
            rep.cosc_ok = rep.osc_ok && rep.condensation_ok;
        }
        return rep;
    }

    if (ifs.dim == 2) {
        const Poly hull = convex_hull(*ifs.open_set);
        std::vector<Poly> images;
        rep.containment_margin = std::numeric_limits<double>::infinity();
        for (const auto& m : ifs.maps) {
            Poly img = convex_hull(map_poly(m, hull));
            for (const auto& v : img)
                rep.containment_margin = std::min(rep.containment_margin, signed_inside_dist(v, hull));
            images.push_back(std::move(img));
        }
        rep.containment_ok = rep.containment_margin >= -tol;
        rep.closure_margin = std::numeric_limits<double>::infinity();
        rep.disjoint_ok = true;
        for (std::size_t i = 0; i < images.size(); ++i)
            for (std::size_t j = i + 1; j < images.size(); ++j) {
                const double gap = polygon_gap(images[i], images[j]);
                rep.closure_margin = std::min(rep.closure_margin, gap);
                if (gap < -tol) rep.disjoint_ok = false;
            }
        rep.zero_closure_margin = rep.disjoint_ok && rep.closure_margin <= tol;
        rep.osc_ok = rep.containment_ok && rep.disjoint_ok;
        if (rep.has_condensation) {
            rep.cosc_margin = std::numeric_limits<double>::infinity();
            for (const auto& p : cosc_condensation_points(*ifs.condensation, 2)) {
                double d = signed_inside_dist(p, hull);  // <= 0 outside U
                if (d < 0.0) d = 0.0;
                for (const auto& img : images) {
                    const double di = signed_inside_dist(p, img);
                    d = std::min(d, di >= 0.0 ? 0.0 : -di);
                }
                rep.cosc_margin = std::min(rep.cosc_margin, d);
            }
            rep.condensation_ok = rep.cosc_margin > tol;
            rep.cosc_ok = rep.osc_ok && rep.condensation_ok;
        }
        return rep;
    }

    // dim >= 3: direction-sampled certificates; separations found are exact,
    // absence of a separating direction is only probabilistic evidence.
    rep.probabilistic = true;
    const auto& verts = *ifs.open_set;
    Rng rng(0xC05C0DE5ULL);
    std::vector<std::vector<double>> dirs;
    for (int k = 0; k < 512; ++k) {
        std::vector<double> v(static_cast<std::size_t>(ifs.dim));
        double norm = 0.0;
        for (auto& x : v) {
            // Box-Muller from two uniforms keeps the direction isotropic.
            const double u1 = std::max(rng.uniform01(), 1e-300);
            const double u2 = rng.uniform01();
            x = std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
            norm += x * x;
        }
        norm = std::sqrt(norm);
        if (norm == 0.0) continue;
        for (auto& x : v) x /= norm;
        dirs.push_back(std::move(v));
    }
    const auto support = [&](const std::vector<std::vector<double>>& pts, const std::vector<double>& dir) {
        double lo = std::numeric_limits<double>::infinity(), hi = -lo;
        for (const auto& p : pts) {
            double s = 0.0;
            for (int c = 0; c < ifs.dim; ++c) s += p[static_cast<std::size_t>(c)] * dir[static_cast<std::size_t>(c)];
            lo = std::min(lo, s);
            hi = std::max(hi, s);
        }
        return std::pair<double, double>{lo, hi};
    };
    std::vector<std::vector<std::vector<double>>> images;
    for (const auto& m : ifs.maps) {
        std::vector<std::vector<double>> img;
        for (const auto& v : verts) img.push_back(m.apply(v));
        images.push_back(std::move(img));
    }
    rep.containment_margin = std::numeric_limits<double>::infinity();
    for (const auto& img : images)
        for (const auto& dir : dirs) {
            const auto [ulo, uhi] = support(verts, dir);
            const auto [ilo, ihi] = support(img, dir);
            rep.containment_margin = std::min(rep.containment_margin, std::min(ilo - ulo, uhi - ihi));
        }
    rep.containment_ok = rep.containment_margin >= -tol;
    rep.closure_margin = std::numeric_limits<double>::infinity();
    rep.disjoint_ok = true;
    for (std::size_t i = 0; i < images.size(); ++i)
        for (std::size_t j = i + 1; j < images.size(); ++j) {
            double best = -std::numeric_limits<double>::infinity();
            for (const auto& dir : dirs) {
                const auto [alo, ahi] = support(images[i], dir);
                const auto [blo, bhi] = support(images[j], dir);
                best = std::max(best, std::max(blo - ahi, alo - bhi));
            }
            rep.closure_margin = std::min(rep.closure_margin, best);
            if (best < -tol) rep.disjoint_ok = false;
        }
    rep.zero_closure_margin = rep.disjoint_ok && rep.closure_margin <= tol;
    rep.osc_ok = rep.containment_ok && rep.disjoint_ok;
    if (rep.has_condensation) {
        rep.cosc_margin = std::numeric_limits<double>::infinity();
        for (const auto& p : cosc_condensation_points(*ifs.condensation, ifs.dim)) {
            double d = std::numeric_limits<double>::infinity();
            {
                double inside = std::numeric_limits<double>::infinity();
                for (const auto& dir : dirs) {
                    const auto [ulo, uhi] = support(verts, dir);
                    double s = 0.0;
                    for (int c = 0; c < ifs.dim; ++c)
                        s += p[static_cast<std::size_t>(c)] * dir[static_cast<std::size_t>(c)];
                    inside = std::min(inside, std::min(s - ulo, uhi - s));
                }
                d = std::min(d, std::max(inside, 0.0));
            }
            for (const auto& img : images) {
                double gap = -std::numeric_limits<double>::infinity();
                for (const auto& dir : dirs) {
                    const auto [ilo, ihi] = support(img, dir);
                    double s = 0.0;
                    for (int c = 0; c < ifs.dim; ++c)
                        s += p[static_cast<std::size_t>(c)] * dir[static_cast<std::size_t>(c)];
                    gap = std::max(gap, std::max(ilo - s, s - ihi));
                }
                d = std::min(d, std::max(gap, 0.0));
            }
            rep.cosc_margin = std::min(rep.cosc_margin, d);
        }
        rep.condensation_ok = rep.cosc_margin > tol;
        rep.cosc_ok = rep.osc_ok && rep.condensation_ok;
    }
    return rep;
}

}  // namespace fraclab
