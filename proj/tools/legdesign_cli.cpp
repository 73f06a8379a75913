// legdesign: evolve, inspect and distil legged-robot design archives.
//
// Exit codes: 0 success, 1 usage/config/input error, 2 infeasible design
// space during initialization, 3 requested archive cell is empty.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include <CLI11.hpp>

#include <legdesign/analysis/design_rules.hpp>
#include <legdesign/analysis/mann_whitney.hpp>
#include <legdesign/evolution.hpp>
#include <legdesign/io.hpp>

namespace fs = std::filesystem;
using namespace legdesign;
using nlohmann::json;

namespace {

    constexpr int kExitOk = 0;
    constexpr int kExitInput = 1;
    constexpr int kExitInfeasible = 2;
    constexpr int kExitEmptyCell = 3;

    const std::vector<std::string> kSymbols{"d1", "d2", "d3", "d4", "d5", "d6"};

    std::vector<std::string> names()
    {
        const auto& n = feature_names();
        return {n.begin(), n.end()};
    }

    void write_file(const fs::path& p, const std::string& text)
    {
        std::ofstream f(p, std::ios::binary);
        if (!f)
            throw std::runtime_error("cannot write " + p.string());
        f << text;
    }

    // ---- run ----------------------------------------------------------------

    struct RunArgs {
        std::string config;
        std::string profile;
        std::optional<std::uint64_t> seed;
        std::optional<int> workers;
        std::string out;
        bool quiet = false;
    };

    int cmd_run(const RunArgs& a)
    {
        ConfigFile cfg;
        try {
            json j = json::object();
            if (!a.config.empty()) {
                std::ifstream f(a.config);
                if (!f)
                    throw ConfigError("cannot open config file " + a.config);
                try {
                    j = json::parse(f);
                } catch (const json::exception& e) {
                    throw ConfigError(std::string("config parse error: ") + e.what());
                }
                if (!j.is_object())
                    throw ConfigError("config must be a JSON object");
            }
            std::string profile = a.profile;
            if (profile.empty())
                profile = j.contains("profile") && j["profile"].is_string() ? j["profile"].get<std::string>() : "desk";
            cfg = profile_config(profile);
            apply_config(cfg, j);
            cfg.profile = profile;
            if (a.seed)
                cfg.run.master_seed = *a.seed;
            if (a.workers)
                cfg.run.workers = *a.workers;
            if (!a.out.empty())
                cfg.output_dir = a.out;
            if (!cfg.run.valid())
                throw ConfigError("config values out of range");
        } catch (const ConfigError& e) {
            std::cerr << "error: " << e.what() << "\n";
            return kExitInput;
        }

        const fs::path out = cfg.output_dir;
        std::error_code ec;
        fs::create_directories(out, ec);
        if (ec) {
            std::cerr << "error: cannot create output directory " << out << ": " << ec.message() << "\n";
            return kExitInput;
        }
        write_file(out / "config.json", config_to_json(cfg).dump(2) + "\n");

        const int total = cfg.run.generations;
        auto progress = [&](const MetricsRow& r) {
            if (a.quiet)
                return;
            std::fprintf(stderr, "gen %d/%d  evals %llu  coverage %.4f  best %.6g  mean %.6g  min %.6g\n",
                r.generation, total, static_cast<unsigned long long>(r.evaluations_total), r.coverage, r.best_fitness,
                r.mean_fitness, r.min_fitness);
        };

        RunResult res;
        try {
            res = run(cfg.run, progress);
        } catch (const InfeasibleSpaceError& e) {
            std::cerr << "error: " << e.what() << "\n";
            return kExitInfeasible;
        }

        std::ostringstream archive, metrics;
        write_archive_jsonl(archive, res.archive);
        write_metrics_csv(metrics, res.metrics);
        write_file(out / "archive.jsonl", archive.str());
        write_file(out / "metrics.csv", metrics.str());
        if (!a.quiet) {
            std::fprintf(stderr, "done: %zu elites, %llu init attempts, %llu simulator calls -> %s\n",
                res.archive.size(), static_cast<unsigned long long>(res.init_attempts),
                static_cast<unsigned long long>(res.sim_calls), out.string().c_str());
        }
        return kExitOk;
    }

    // ---- rules --------------------------------------------------------------

    struct RulesArgs {
        std::vector<std::string> archives;
        double top = 0.10;
        double threshold = 0.2;
        std::string out = ".";
        bool per_archive = false;
    };

    struct Tagged {
        Elite elite;
        std::size_t source = 0;
    };

    // Highest fitness first; ties go to the earlier input, then earlier insertion.
    std::vector<Tagged> top_of(std::vector<Tagged> v, double q)
    {
        std::sort(v.begin(), v.end(), [](const Tagged& a, const Tagged& b) {
            if (a.elite.fitness != b.elite.fitness)
                return a.elite.fitness > b.elite.fitness;
            if (a.source != b.source)
                return a.source < b.source;
            return a.elite.serial < b.elite.serial;
        });
        const auto n = static_cast<std::size_t>(std::ceil(q * static_cast<double>(v.size()) - 1e-9));
        v.resize(std::min(n, v.size()));
        return v;
    }

    int cmd_rules(const RulesArgs& a)
    {
        if (!(a.top > 0.0 && a.top <= 1.0)) {
            std::cerr << "error: --top must be in (0, 1]\n";
            return kExitInput;
        }
        std::vector<std::vector<Tagged>> inputs;
        try {
            for (std::size_t i = 0; i < a.archives.size(); i++) {
                const Archive arc = load_archive(a.archives[i]);
                std::vector<Tagged> v;
                for (const auto& [key, e] : arc.cells())
                    v.push_back({e, i});
                inputs.push_back(std::move(v));
            }
        } catch (const std::exception& e) {
            std::cerr << "error: " << e.what() << "\n";
            return kExitInput;
        }

        std::vector<Tagged> chosen;
        if (a.per_archive) {
            for (auto& v : inputs)
                for (auto& t : top_of(std::move(v), a.top))
                    chosen.push_back(std::move(t));
        } else {
            std::vector<Tagged> pool;
            for (auto& v : inputs)
                pool.insert(pool.end(), v.begin(), v.end());
            chosen = top_of(std::move(pool), a.top);
        }

        const auto n = static_cast<Eigen::Index>(chosen.size());
        Eigen::MatrixXd samples(n, kFeatureDims);
        for (Eigen::Index i = 0; i < n; i++)
            samples.row(i) = chosen[static_cast<std::size_t>(i)].elite.features.transpose();

        if (n < 10)
            std::cerr << "warning: only " << n << " sample(s) selected; rules will be unreliable or absent\n";

        std::vector<analysis::DesignRule> rules;
        json meta = {{"inputs", a.archives}, {"top", a.top}, {"threshold", a.threshold}, {"per_archive", a.per_archive},
            {"samples", n}};
        if (n >= 2) {
            try {
                rules = analysis::extract_rules(samples, a.threshold);
                const Eigen::VectorXd s = analysis::scales(samples);
                const Eigen::VectorXd mean = samples.colwise().mean().transpose();
                meta["means"] = std::vector<double>(mean.data(), mean.data() + mean.size());
                meta["scales"] = std::vector<double>(s.data(), s.data() + s.size());
            } catch (const analysis::DegenerateColumnError& e) {
                std::cerr << "warning: " << e.what() << "; no rules extracted\n";
            }
        }

        const auto feature_labels = names();
        json jr = json::array();
        for (const auto& r : rules) {
            json terms = json::array();
            for (const auto& t : r.terms) {
                terms.push_back({{"feature", kSymbols[static_cast<std::size_t>(t.feature)]},
                    {"name", feature_labels[static_cast<std::size_t>(t.feature)]},
                    {"coefficient", t.coefficient},
                    {"mean", t.mean},
                    {"weight", t.weight}});
            }
            jr.push_back({{"target", kSymbols[static_cast<std::size_t>(r.target)]},
                {"target_name", feature_labels[static_cast<std::size_t>(r.target)]},
                {"intercept", r.intercept},
                {"eigenvalue", r.eigenvalue},
                {"sqrt_eigenvalue", r.sqrt_eigenvalue},
                {"mean_error_percent", r.mean_error_percent},
                {"terms", terms}});
        }
        meta["rules"] = jr;

        std::error_code ec;
        fs::create_directories(a.out, ec);
        const std::string text = analysis::format_rules(rules, feature_labels, kSymbols);
        try {
            write_file(fs::path(a.out) / "rules.txt", text);
            write_file(fs::path(a.out) / "rules.json", meta.dump(2) + "\n");
        } catch (const std::exception& e) {
            std::cerr << "error: " << e.what() << "\n";
            return kExitInput;
        }
        std::cout << text;
        return kExitOk;
    }

    // ---- inspect ------------------------------------------------------------

    struct InspectArgs {
        std::string archive;
        std::string cell;
        int best = 0;
        std::string trace;
    };

    json describe(const Elite& e, const GridSpec& spec)
    {
        json j = to_json(e, spec);
        j["robot"] = to_json(expand(e.morphology));
        return j;
    }

    int cmd_inspect(const InspectArgs& a)
    {
        Archive arc;
        try {
            arc = load_archive(a.archive);
        } catch (const std::exception& e) {
            std::cerr << "error: " << e.what() << "\n";
            return kExitInput;
        }

        std::vector<Elite> picked;
        if (!a.cell.empty()) {
            CellIndex cell{};
            std::stringstream ss(a.cell);
            std::string tok;
            int d = 0;
            try {
                for (; std::getline(ss, tok, ','); d++) {
                    if (d >= kFeatureDims)
                        throw std::invalid_argument("too many indices");
                    std::size_t used = 0;
                    const int v = std::stoi(tok, &used);
                    if (used != tok.size() || v < 0 || v >= arc.spec().bins[static_cast<std::size_t>(d)])
                        throw std::invalid_argument("index out of range");
                    cell[static_cast<std::size_t>(d)] = v;
                }
                if (d != kFeatureDims)
                    throw std::invalid_argument("expected 6 indices");
            } catch (const std::exception& e) {
                std::cerr << "error: bad --cell '" << a.cell << "': " << e.what() << "\n";
                return kExitInput;
            }
            const Elite* e = arc.find(cell);
            if (!e) {
                std::cerr << "cell " << a.cell << " is empty\n";
                return kExitEmptyCell;
            }
            picked.push_back(*e);
        } else {
            if (arc.empty()) {
                std::cerr << "archive is empty\n";
                return kExitEmptyCell;
            }
            const double q = std::min(1.0, static_cast<double>(a.best) / static_cast<double>(arc.size()));
            picked = arc.top_fraction(q);
            picked.resize(std::min<std::size_t>(picked.size(), static_cast<std::size_t>(a.best)));
        }

        if (picked.size() == 1) {
            std::cout << describe(picked[0], arc.spec()).dump(2) << "\n";
        } else {
            json arr = json::array();
            for (const auto& e : picked)
                arr.push_back(describe(e, arc.spec()));
            std::cout << arr.dump(2) << "\n";
        }

        if (!a.trace.empty()) {
            // Re-simulate under the run's own settings when its config.json sits next to the archive.
            ConfigFile run_cfg = profile_config("desk");
            run_cfg.run.sim = SimConfig{};
            run_cfg.run.mass = MassModel{};
            const auto echo = std::filesystem::path(a.archive).parent_path() / "config.json";
            if (std::filesystem::exists(echo)) {
                try {
                    std::ifstream in(echo);
                    apply_config(run_cfg, json::parse(in));
                } catch (const std::exception& ex) {
                    std::cerr << "error: " << echo.string() << ": " << ex.what() << "\n";
                    return kExitInput;
                }
            }
            const RobotModel model = expand(picked[0].morphology, run_cfg.run.mass);
            SimConfig sc = run_cfg.run.sim;
            sc.record_log = true;
            const SimResult res = simulate(model, picked[0].controller, sc);
            std::ofstream f(a.trace);
            if (!f) {
                std::cerr << "error: cannot write " << a.trace << "\n";
                return kExitInput;
            }
            write_trace_csv(f, model, res);
        }
        return kExitOk;
    }

    // ---- compare ------------------------------------------------------------

    int cmd_compare(const std::vector<std::string>& sets)
    {
        std::vector<std::pair<std::string, std::vector<double>>> groups;
        try {
            for (const auto& s : sets) {
                const auto eq = s.find('=');
                if (eq == std::string::npos || eq == 0 || eq + 1 == s.size())
                    throw std::invalid_argument("--set expects label=file[,file...], got '" + s + "'");
                std::vector<double> best;
                std::stringstream ss(s.substr(eq + 1));
                for (std::string file; std::getline(ss, file, ',');) {
                    const auto rows = load_metrics(file);
                    if (rows.empty())
                        throw std::invalid_argument(file + ": no metrics rows");
                    best.push_back(rows.back().best_fitness);
                }
                groups.emplace_back(s.substr(0, eq), std::move(best));
            }
        } catch (const std::exception& e) {
            std::cerr << "error: " << e.what() << "\n";
            return kExitInput;
        }
        if (groups.size() < 2) {
            std::cerr << "error: compare needs at least two --set groups\n";
            return kExitInput;
        }

        for (const auto& [label, v] : groups) {
            std::printf("%s (n=%zu):", label.c_str(), v.size());
            for (double x : v)
                std::printf(" %.6g", x);
            std::printf("\n");
        }
        for (std::size_t i = 0; i < groups.size(); i++) {
            for (std::size_t k = i + 1; k < groups.size(); k++) {
                const auto r = analysis::mann_whitney_u(groups[i].second, groups[k].second);
                std::printf("%s vs %s: U=%g (U_%s=%g) p=%.4g [%s] %s\n", groups[i].first.c_str(),
                    groups[k].first.c_str(), r.u, groups[i].first.c_str(), r.u_a, r.p_two_sided,
                    r.exact ? "exact" : "normal", r.p_two_sided < 0.05 ? "significant at p<0.05" : "not significant");
            }
        }
        return kExitOk;
    }

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Evolve, inspect and distil legged-robot design archives"};
    app.require_subcommand(1);

    RunArgs run_args;
    auto* run_cmd = app.add_subcommand("run", "Run MAP-Elites and write archive.jsonl, metrics.csv and config.json");
    run_cmd->add_option("config", run_args.config, "Flat JSON config file");
    run_cmd->add_option("--profile", run_args.profile, "Base profile")->check(CLI::IsMember({"desk", "paper"}));
    run_cmd->add_option("--seed", run_args.seed, "Master seed");
    run_cmd->add_option("--workers", run_args.workers, "Parallel evaluation threads")->check(CLI::PositiveNumber);
    run_cmd->add_option("--out", run_args.out, "Output directory");
    run_cmd->add_flag("--quiet", run_args.quiet, "No progress output");

    RulesArgs rules_args;
    auto* rules_cmd = app.add_subcommand("rules", "Extract linear design rules from archives");
    rules_cmd->add_option("archives", rules_args.archives, "archive.jsonl files")->required();
    rules_cmd->add_option("--top", rules_args.top, "Fraction of fittest elites used")->capture_default_str();
    rules_cmd->add_option("--threshold", rules_args.threshold, "Largest sqrt(eigenvalue) kept")->capture_default_str();
    rules_cmd->add_option("--out", rules_args.out, "Output directory")->capture_default_str();
    rules_cmd->add_flag("--per-archive", rules_args.per_archive, "Take the top fraction of each archive before pooling");

    InspectArgs inspect_args;
    auto* inspect_cmd = app.add_subcommand("inspect", "Print elites as JSON");
    inspect_cmd->add_option("archive", inspect_args.archive, "archive.jsonl file")->required();
    auto* cell_opt = inspect_cmd->add_option("--cell", inspect_args.cell, "Cell index i,j,k,l,m,n");
    auto* best_opt = inspect_cmd->add_option("--best", inspect_args.best, "Print the N fittest elites")->check(CLI::PositiveNumber);
    cell_opt->excludes(best_opt);
    inspect_cmd->add_option("--trace", inspect_args.trace, "Write a per-step CSV trace of the first elite");

    std::vector<std::string> sets;
    auto* compare_cmd = app.add_subcommand("compare", "Mann-Whitney U test on final best fitness between sets of runs");
    compare_cmd->add_option("--set", sets, "label=metrics.csv[,metrics.csv...]")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitInput;
    }

    try {
        if (*run_cmd)
            return cmd_run(run_args);
        if (*rules_cmd)
            return cmd_rules(rules_args);
        if (*inspect_cmd) {
            if (inspect_args.cell.empty() && inspect_args.best == 0) {
                std::cerr << "error: inspect needs --cell or --best\n";
                return kExitInput;
            }
            return cmd_inspect(inspect_args);
        }
        if (*compare_cmd)
            return cmd_compare(sets);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInput;
    }
    return kExitInput;
}
