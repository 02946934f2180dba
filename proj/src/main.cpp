#include <algorithm>
#include <cmath>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"

#include "fraclab/cube_tree.hpp"
#include "fraclab/dim_est.hpp"
#include "fraclab/errors.hpp"
#include "fraclab/experiments.hpp"
#include "fraclab/ifs.hpp"
#include "fraclab/json_io.hpp"
#include "fraclab/mass_builder.hpp"
#include "fraclab/metric_space.hpp"

namespace {

namespace fs = std::filesystem;
using namespace fraclab;
using jsonio::json;

std::string error_type(const std::exception& e) {
    if (dynamic_cast<const ResolutionError*>(&e)) return "resolution_error";
    if (dynamic_cast<const CapacityError*>(&e)) return "capacity_error";
    if (dynamic_cast<const BudgetError*>(&e)) return "budget_error";
    if (dynamic_cast<const PreconditionError*>(&e)) return "precondition_error";
    if (dynamic_cast<const DegenerateInputError*>(&e)) return "degenerate_input_error";
    if (dynamic_cast<const ArgumentError*>(&e)) return "argument_error";
    if (dynamic_cast<const nlohmann::json::exception*>(&e)) return "argument_error";
    if (dynamic_cast<const std::invalid_argument*>(&e)) return "argument_error";
    return "internal_error";
}

int emit_error(const std::exception& e) {
    json err;
    err["error"]["type"] = error_type(e);
    err["error"]["message"] = e.what();
    std::cerr << jsonio::canonical_dump(err);
    return 1;
}

void write_output(const std::string& path, const json& j) {
    if (path == "-") {
        std::cout << jsonio::canonical_dump(j);
    } else {
        jsonio::write_json_file(path, j);
    }
}

// ---------------------------------------------------------------- generate

struct GenerateArgs {
    std::string ifs_path;
    double delta = 0.0;
    std::string out_path;
    bool attractor_only = false;
    std::size_t budget = 0;
};

void run_generate(const GenerateArgs& a) {
    const IfsSystem ifs = IfsSystem::load_json_file(a.ifs_path);
    const bool inhomogeneous = ifs.condensation.has_value() && !a.attractor_only;
    FiniteMetricSpace space =
        inhomogeneous
            ? inhomogeneous_points(ifs, a.delta, a.budget > 0 ? a.budget : std::size_t{4'000'000})
            : attractor_points(ifs, a.delta, a.budget > 0 ? a.budget : std::size_t{1'000'000});
    json out = space.to_json();
    out["generator"]["kind"] = inhomogeneous ? "inhomogeneous" : "attractor";
    out["generator"]["delta"] = a.delta;
    write_output(a.out_path, out);
}

// ------------------------------------------------------------------- cubes

struct CubesArgs {
    std::string space_path;
    double rho = 0.0;
    int depth = 0;
    std::string out_path;
};

void run_cubes(const CubesArgs& a) {
    const FiniteMetricSpace space = FiniteMetricSpace::load_json_file(a.space_path);
    const CubeTree tree = CubeTree::build(space, a.rho, a.depth);
    json out;
    out["tree"] = tree.to_json();
    out["report"] = tree.verify().to_json();
    write_output(a.out_path, out);
}

// ----------------------------------------------------------- build-measure

struct BuildMeasureArgs {
    std::string space_path;
    double t = 0.0;
    double s = 0.0;
    double c0 = 1.0;
    double rho = 0.0;  // 0 = derive from (s, t, c0)
    int depth = 0;
    bool doubling = false;
    int M = 0;  // doubling only; 0 = max observed child count
    std::string out_path;
};

int max_child_count(const CubeTree& tree) {
    int m = 0;
    for (int k = 0; k < tree.depth(); ++k) {
        for (const Cube& cube : tree.level(k).cubes) {
            m = std::max(m, static_cast<int>(cube.children.size()));
        }
    }
    return m;
}

void run_build_measure(const BuildMeasureArgs& a) {
    const FiniteMetricSpace space = FiniteMetricSpace::load_json_file(a.space_path);
    const double rho = a.rho > 0.0 ? a.rho : choose_rho(a.s, a.t, a.c0);
    const CubeTree tree = CubeTree::build(space, rho, a.depth);
    MassParams params;
    params.t = a.t;
    params.s = a.s;
    params.c0 = a.c0;
    if (a.doubling) {
        params.M = a.M > 0 ? a.M : max_child_count(tree);
    }
    const MassDistribution mass =
        a.doubling ? build_mass_doubling(tree, params) : build_mass(tree, params);
    json out;
    out["space"] = space.to_json();
    out["depth"] = tree.depth();
    const json mass_json = mass.to_json();
    for (const auto& [key, value] : mass_json.items()) {
        out[key] = value;
    }
    write_output(a.out_path, out);
}

// ---------------------------------------------------------------- estimate

struct EstimateArgs {
    std::string mode;
    std::string space_path;
    std::string measure_path;
    std::string sweep_path;
    std::string centers;  // "" = keep config value; "all" or integer otherwise
    double guard = -1.0;  // < 0 = keep config value
    std::int64_t seed = -1;
    std::vector<std::string> pairs;
    int jobs = 0;
    std::string out_path;
    std::string csv_path;
};

// Owns everything a measure estimate needs; the tree borrows the space and
// the distribution borrows the tree, so member order fixes lifetime order.
struct LoadedMeasure {
    std::unique_ptr<FiniteMetricSpace> space;
    std::unique_ptr<CubeTree> tree;
    std::unique_ptr<MassDistribution> mass;
    std::unique_ptr<WeightedCloud> cloud;
};

LoadedMeasure load_measure(const std::string& path) {
    const json j = jsonio::read_json_file(path);
    LoadedMeasure m;
    if (j.contains("variant")) {
        m.space = std::make_unique<FiniteMetricSpace>(FiniteMetricSpace::load_json(j.at("space")));
        const int depth = static_cast<int>(j.at("levels").size()) - 1;
        m.tree = std::make_unique<CubeTree>(
            CubeTree::build(*m.space, j.at("rho").get<double>(), depth));
        MassParams params;
        params.t = j.at("t").get<double>();
        params.s = j.at("s").get<double>();
        params.c0 = j.at("c0").get<double>();
        params.lambda = j.at("lambda").get<double>();
        const bool doubling = j.at("variant").get<std::string>() == "doubling";
        if (doubling) params.M = j.at("M").get<int>();
        m.mass = std::make_unique<MassDistribution>(
            doubling ? build_mass_doubling(*m.tree, params) : build_mass(*m.tree, params));
        // The file's weights must agree with the deterministic rebuild;
        // anything else means the file was edited or mismatched.
        for (const json& level : j.at("levels")) {
            const int k = level.at("k").get<int>();
            const auto& stored = level.at("weights");
            const auto& rebuilt = m.mass->weights.at(static_cast<std::size_t>(k));
            if (stored.size() != rebuilt.size()) {
                throw ArgumentError("measure file level " + std::to_string(k) +
                                    " has " + std::to_string(stored.size()) +
                                    " weights, rebuild has " + std::to_string(rebuilt.size()));
            }
            for (std::size_t i = 0; i < rebuilt.size(); ++i) {
                const double sv = stored[i].get<double>();
                if (std::abs(sv - rebuilt[i]) > 1e-9 * std::max(1.0, std::abs(sv))) {
                    throw ArgumentError("measure file weight at level " + std::to_string(k) +
                                        ", cube " + std::to_string(i) +
                                        " does not match its deterministic rebuild");
                }
            }
        }
        return m;
    }
    if (j.contains("weights")) {
        m.cloud = std::make_unique<WeightedCloud>(WeightedCloud::load_json(j));
        return m;
    }
    throw ArgumentError("measure file " + path +
                        " is neither a mass distribution (\"variant\") nor a weighted cloud (\"weights\")");
}

std::pair<double, double> parse_pair(const std::string& text) {
    const auto sep = text.find_first_of(",:");
    if (sep == std::string::npos) {
        throw ArgumentError("--pair expects \"r,R\", got \"" + text + "\"");
    }
    std::size_t used = 0;
    double r = 0.0, R = 0.0;
    try {
        r = std::stod(text.substr(0, sep), &used);
        R = std::stod(text.substr(sep + 1), &used);
    } catch (const std::exception&) {
        throw ArgumentError("--pair expects numeric \"r,R\", got \"" + text + "\"");
    }
    return {r, R};
}

SweepConfig sweep_from_args(const EstimateArgs& a) {
    SweepConfig cfg;
    if (!a.sweep_path.empty()) {
        cfg = SweepConfig::load_json(jsonio::read_json_file(a.sweep_path));
    }
    if (!a.centers.empty()) {
        if (a.centers == "all") {
            cfg.centers = SweepConfig::kAllCenters;
        } else {
            try {
                cfg.centers = std::stoi(a.centers);
            } catch (const std::exception&) {
                throw ArgumentError("--centers expects \"all\" or an integer, got \"" + a.centers + "\"");
            }
            if (cfg.centers < 0) throw ArgumentError("--centers must be >= 0 or \"all\"");
        }
    }
    if (a.guard >= 0.0) cfg.guard = a.guard;
    if (a.seed >= 0) cfg.seed = static_cast<std::uint64_t>(a.seed);
    if (!a.pairs.empty()) {
        cfg.ratio_grid.clear();
        for (const std::string& p : a.pairs) cfg.ratio_grid.push_back(parse_pair(p));
    }
    if (a.jobs > 0) cfg.jobs = a.jobs;
    return cfg;
}

void run_estimate(const EstimateArgs& a) {
    SweepConfig cfg = sweep_from_args(a);
    const bool counting = a.mode == "assouad" || a.mode == "lower";
    const bool regularity = a.mode == "uppereg" || a.mode == "lowreg";
    if (!counting && !regularity) {
        throw ArgumentError("--mode must be one of assouad|lower|uppereg|lowreg, got \"" + a.mode + "\"");
    }

    std::vector<SweepRow> rows;
    DimEstimate est;
    json input_info;
    if (counting) {
        if (a.space_path.empty()) {
            throw ArgumentError("mode " + a.mode + " needs --space");
        }
        const FiniteMetricSpace space = FiniteMetricSpace::load_json_file(a.space_path);
        if (cfg.ratio_grid.empty()) cfg.ratio_grid = default_ratio_grid(space, cfg.guard);
        est = a.mode == "assouad" ? assouad_estimate(space, cfg, &rows)
                                  : lower_estimate(space, cfg, &rows);
        input_info["space"] = a.space_path;
        input_info["points"] = space.size();
    } else {
        if (a.measure_path.empty()) {
            throw ArgumentError("mode " + a.mode + " needs --measure");
        }
        const LoadedMeasure m = load_measure(a.measure_path);
        const FiniteMetricSpace& space = m.mass ? m.tree->space() : m.cloud->space();
        if (cfg.ratio_grid.empty()) cfg.ratio_grid = default_ratio_grid(space, cfg.guard);
        if (m.mass) {
            est = a.mode == "uppereg" ? upper_reg_estimate(*m.mass, cfg, &rows)
                                      : lower_reg_estimate(*m.mass, cfg, &rows);
        } else {
            est = a.mode == "uppereg" ? upper_reg_estimate(*m.cloud, cfg, &rows)
                                      : lower_reg_estimate(*m.cloud, cfg, &rows);
        }
        input_info["measure"] = a.measure_path;
        input_info["points"] = space.size();
    }

    json out;
    out["input"] = input_info;
    out["config"] = cfg.to_json();
    out["estimate"] = est.to_json();
    write_output(a.out_path, out);
    if (!a.csv_path.empty()) {
        jsonio::write_text_file(a.csv_path, sweep_csv(rows));
    }
}

// -------------------------------------------------------------------- cosc

struct CoscArgs {
    std::string ifs_path;
    std::string out_path = "-";
};

void run_cosc_cmd(const CoscArgs& a) {
    const IfsSystem ifs = IfsSystem::load_json_file(a.ifs_path);
    write_output(a.out_path, check_cosc(ifs).to_json());
}

// --------------------------------------------------------------- reproduce

struct ReproduceArgs {
    std::string which;
    std::string config_path = "configs";
    std::string out_dir;
    int jobs = 0;
    bool force = false;
};

std::vector<fs::path> collect_configs(const std::string& config_path, const std::string& which) {
    std::vector<fs::path> files;
    const fs::path p(config_path);
    if (fs::is_directory(p)) {
        for (const auto& entry : fs::directory_iterator(p)) {
            if (entry.path().extension() == ".json") files.push_back(entry.path());
        }
        std::sort(files.begin(), files.end());
        if (which != "all") {
            std::erase_if(files, [&](const fs::path& f) {
                const json cfg = jsonio::read_json_file(f.string());
                return cfg.value("experiment", std::string()) != which;
            });
        }
    } else if (fs::is_regular_file(p)) {
        files.push_back(p);
    } else {
        throw ArgumentError("config path " + config_path + " is neither a file nor a directory");
    }
    if (files.empty()) {
        throw ArgumentError("no experiment configs for \"" + which + "\" under " + config_path);
    }
    return files;
}

int run_reproduce(const ReproduceArgs& a) {
    const std::vector<fs::path> files = collect_configs(a.config_path, a.which);
    fs::create_directories(a.out_dir);

    std::string summary = "# Reproduction summary\n\n";
    summary += "| config | experiment | predicted | measured | verdict | expected | ok |\n";
    summary += "|---|---|---|---|---|---|---|\n";
    bool all_ok = true;
    for (const fs::path& file : files) {
        const json cfg = jsonio::read_json_file(file.string());
        if (a.which != "all" && cfg.value("experiment", std::string()) != a.which) {
            throw ArgumentError("config " + file.string() + " is not a " + a.which + " experiment");
        }
        const ExperimentReport report = run_experiment_config(cfg, a.jobs, a.force);
        const json rj = report.to_json();
        const std::string stem = file.stem().string();
        jsonio::write_json_file((fs::path(a.out_dir) / (stem + ".report.json")).string(), rj);

        // A config may document an intended failure (a counterexample run);
        // reproduction succeeds when the verdict matches the expectation.
        const std::string expected = cfg.value("expected_verdict", std::string("pass"));
        const std::string verdict = rj.at("verdict").get<std::string>();
        const bool ok = verdict == expected;
        all_ok = all_ok && ok;
        summary += "| " + stem + " | " + cfg.at("experiment").get<std::string>() + " | " +
                   jsonio::format_double(rj.at("predicted").at("value").get<double>()) + " | " +
                   jsonio::format_double(rj.at("measured").at("value").get<double>()) + " | " +
                   verdict + " | " + expected + " | " + (ok ? "yes" : "NO") + " |\n";
    }
    jsonio::write_text_file((fs::path(a.out_dir) / "summary.md").string(), summary);
    std::cout << summary;
    return all_ok ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"fraclab: finite-scale Assouad dimension and regularity experiments"};
    app.require_subcommand(1);
    int exit_code = 0;

    auto* gen = app.add_subcommand("generate", "Sample a point cloud from an iterated function system");
    auto gen_args = std::make_shared<GenerateArgs>();
    gen->add_option("--ifs", gen_args->ifs_path, "IFS description (JSON)")->required();
    gen->add_option("--delta", gen_args->delta, "target resolution")->required();
    gen->add_option("--out", gen_args->out_path, "output point-cloud JSON (\"-\" = stdout)")->required();
    gen->add_flag("--attractor-only", gen_args->attractor_only,
                  "ignore the condensation set and sample the plain attractor");
    gen->add_option("--budget", gen_args->budget, "point budget cap");
    gen->callback([gen_args] { run_generate(*gen_args); });

    auto* cubes = app.add_subcommand("cubes", "Build the nested cube partition of a point cloud");
    auto cubes_args = std::make_shared<CubesArgs>();
    cubes->add_option("--space", cubes_args->space_path, "point-cloud JSON")->required();
    cubes->add_option("--rho", cubes_args->rho, "level contraction ratio, 0 < rho < 1/3")->required();
    cubes->add_option("--depth", cubes_args->depth, "number of refinement levels")->required();
    cubes->add_option("--out", cubes_args->out_path, "output JSON (\"-\" = stdout)")->required();
    cubes->callback([cubes_args] { run_cubes(*cubes_args); });

    auto* bm = app.add_subcommand("build-measure", "Construct a mass distribution with prescribed regularity");
    auto bm_args = std::make_shared<BuildMeasureArgs>();
    bm->add_option("--space", bm_args->space_path, "point-cloud JSON")->required();
    bm->add_option("--t", bm_args->t, "target lower-regularity exponent")->required();
    bm->add_option("--s", bm_args->s, "auxiliary packing exponent, t < s")->required();
    bm->add_option("--c0", bm_args->c0, "packing constant for exponent s");
    bm->add_option("--rho", bm_args->rho, "cube contraction ratio (0 = derive from t, s, c0)");
    bm->add_option("--depth", bm_args->depth, "cube tree depth")->required();
    bm->add_flag("--doubling", bm_args->doubling, "build the doubling variant");
    bm->add_option("--M", bm_args->M, "uniform child bound (doubling; 0 = max observed)");
    bm->add_option("--out", bm_args->out_path, "output measure JSON (\"-\" = stdout)")->required();
    bm->callback([bm_args] { run_build_measure(*bm_args); });

    auto* est = app.add_subcommand("estimate", "Estimate a dimension or regularity exponent");
    auto est_args = std::make_shared<EstimateArgs>();
    est->add_option("--mode", est_args->mode, "assouad|lower|uppereg|lowreg")->required();
    est->add_option("--space", est_args->space_path, "point-cloud JSON (assouad/lower)");
    est->add_option("--measure", est_args->measure_path, "measure JSON (uppereg/lowreg)");
    est->add_option("--sweep", est_args->sweep_path, "sweep configuration JSON");
    est->add_option("--centers", est_args->centers, "center count or \"all\"");
    est->add_option("--guard", est_args->guard, "resolution guard factor (>= 1)");
    est->add_option("--seed", est_args->seed, "center-sampling seed");
    est->add_option("--pair", est_args->pairs, "scale pair \"r,R\" (repeatable)");
    est->add_option("--jobs", est_args->jobs, "worker threads (FRACLAB_JOBS overrides)");
    est->add_option("--out", est_args->out_path, "output estimate JSON (\"-\" = stdout)")->required();
    est->add_option("--csv", est_args->csv_path, "also write the sweep rows as CSV");
    est->callback([est_args] { run_estimate(*est_args); });

    auto* cosc = app.add_subcommand("cosc", "Check the condensation open set condition");
    auto cosc_args = std::make_shared<CoscArgs>();
    cosc->add_option("--ifs", cosc_args->ifs_path, "IFS description (JSON)")->required();
    cosc->add_option("--out", cosc_args->out_path, "output report JSON (default stdout)");
    cosc->callback([cosc_args] { run_cosc_cmd(*cosc_args); });

    auto* rep = app.add_subcommand("reproduce", "Re-run bundled experiments and verify their verdicts");
    auto rep_args = std::make_shared<ReproduceArgs>();
    rep->add_option("which", rep_args->which, "thm41|thm42|vk|regularity|all")
        ->required()
        ->check(CLI::IsMember({"thm41", "thm42", "vk", "regularity", "all"}));
    rep->add_option("--config", rep_args->config_path, "experiment config file or directory");
    rep->add_option("--out", rep_args->out_dir, "output directory for reports")->required();
    rep->add_option("--jobs", rep_args->jobs, "worker threads (FRACLAB_JOBS overrides)");
    rep->add_flag("--force", rep_args->force, "run even when the open set check fails");
    rep->callback([rep_args, &exit_code] { exit_code = run_reproduce(*rep_args); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);
        json err;
        err["error"]["type"] = "argument_error";
        err["error"]["message"] = e.what();
        std::cerr << jsonio::canonical_dump(err);
        return 1;
    } catch (const std::exception& e) {
        return emit_error(e);
    }
    return exit_code;
}
