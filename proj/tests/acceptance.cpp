// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any fail.

#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <numbers>
#include <sstream>
#include <string>

#include <legdesign/analysis/design_rules.hpp>
#include <legdesign/analysis/mann_whitney.hpp>
#include <legdesign/evolution.hpp>
#include <legdesign/io.hpp>

using namespace legdesign;
using Clock = std::chrono::steady_clock;

namespace {

    // Tolerances and budgets.
    constexpr int kDominanceSamples = 200;
    constexpr double kMinStrictImprovement = 0.30;
    constexpr double kDominanceBudgetS = 300.0;
    constexpr int kRepeats = 5;
    constexpr double kAlpha = 0.05;
    constexpr int kBinSamples = 100000;
    constexpr int kAccountingGenerations = 10;
    constexpr double kEnergyRelTol = 1e-9;
    constexpr double kAmplitudeTol = 1e-12;
    constexpr int kGaitSpecs = 10000;
    constexpr double kMassRelTol = 1e-9;
    constexpr double kMotorMassSpread = 2.5;
    constexpr int kRuleSamples = 1000;
    constexpr double kCoefficientTol = 0.05;
    constexpr double kResidualTol = 1e-9;
    constexpr double kNoiseFreeError = 1e-10;
    constexpr int kEigenTrials = 1000;
    constexpr double kEigenTol = 1e-9;
    constexpr double kDeskBudgetS = 600.0;
    constexpr int kExactLimit = 8;

    double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

    struct Outcome {
        bool pass = false;
        std::string detail;
    };

    int failures = 0;

    void report(int id, const char* name, const Outcome& o)
    {
        std::printf("[%s] %2d %s: %s\n", o.pass ? "PASS" : "FAIL", id, name, o.detail.c_str());
        std::fflush(stdout);
        if (!o.pass)
            failures++;
    }

    std::string fmt(const char* f, auto... args)
    {
        char buf[512];
        std::snprintf(buf, sizeof buf, f, args...);
        return buf;
    }

    class CountingBackend final : public SimulatorBackend {
    public:
        SimResult simulate(const RobotModel& m, const ControllerGenome& c, const SimConfig& cfg) const override
        {
            calls++;
            return legdesign::simulate(m, c, cfg);
        }
        mutable std::atomic<std::uint64_t> calls{0};
    };

    std::string archive_text(const Archive& a)
    {
        std::ostringstream os;
        write_archive_jsonl(os, a);
        return os.str();
    }

    std::string metrics_text(const std::vector<MetricsRow>& rows)
    {
        std::ostringstream os;
        write_metrics_csv(os, rows);
        return os.str();
    }

    // ---- 1 ----
    Outcome es_dominance()
    {
        const auto t0 = Clock::now();
        RunConfig st = RunConfig::desk();
        st.scheme = Scheme::Static;
        RunConfig es = st;
        es.scheme = Scheme::Es;

        int found = 0, dominated = 0, strict = 0;
        std::uint64_t drawn = 0;
        for (std::uint64_t i = 0; found < kDominanceSamples; i++) {
            Rng rng(derive_seed(777, 1, i));
            const MorphologyGenome m = random_morphology(rng);
            drawn++;
            const EvaluatedCandidate fixed = evaluate(m, default_controller(), st, 0);
            if (!fixed.feasible())
                continue;
            found++;
            const EvaluatedCandidate tuned = evaluate(m, default_controller(), es, derive_seed(777, 2, i));
            dominated += tuned.fitness >= fixed.fitness;
            strict += tuned.fitness > fixed.fitness;
        }
        const double elapsed = seconds_since(t0);
        const double frac = static_cast<double>(strict) / found;
        return {dominated == found && frac >= kMinStrictImprovement && elapsed < kDominanceBudgetS,
            fmt("%d/%d ES >= STATIC, %.1f%% strictly better (need %.0f%%), %llu morphologies drawn, %.1f s", dominated,
                found, 100.0 * frac, 100.0 * kMinStrictImprovement, static_cast<unsigned long long>(drawn), elapsed)};
    }

    // ---- 2 and 9 share desk runs ----
    struct DeskRuns {
        std::vector<double> es_best, static_best;
        std::string es_seed1_archive, es_seed1_metrics;
        double es_seconds = 0.0;
    };

    DeskRuns desk_runs()
    {
        DeskRuns d;
        for (int s = 1; s <= kRepeats; s++) {
            RunConfig cfg = RunConfig::desk();
            cfg.master_seed = static_cast<std::uint64_t>(s);
            cfg.scheme = Scheme::Static;
            d.static_best.push_back(run(cfg).metrics.back().best_fitness);
            cfg.scheme = Scheme::Es;
            const auto t0 = Clock::now();
            const RunResult r = run(cfg);
            d.es_seconds = std::max(d.es_seconds, seconds_since(t0));
            d.es_best.push_back(r.metrics.back().best_fitness);
            if (s == 1) {
                d.es_seed1_archive = archive_text(r.archive);
                d.es_seed1_metrics = metrics_text(r.metrics);
            }
        }
        return d;
    }

    Outcome scheme_ordering(const DeskRuns& d)
    {
        const auto r = analysis::mann_whitney_u(d.es_best, d.static_best);
        std::string es, st;
        for (double x : d.es_best)
            es += fmt(" %.4g", x);
        for (double x : d.static_best)
            st += fmt(" %.4g", x);
        return {r.u_a > r.u_b && r.p_two_sided < kAlpha,
            fmt("ES best {%s } vs STATIC best {%s }: U_ES=%g, p=%.4g (%s)", es.c_str(), st.c_str(), r.u_a, r.p_two_sided,
                r.exact ? "exact" : "normal")};
    }

    // ---- 3 ----
    Outcome archive_laws()
    {
        RunConfig cfg = RunConfig::desk();
        cfg.scheme = Scheme::Static;
        cfg.master_seed = 11;
        cfg.record_inserts = true;
        const RunResult r = run(cfg);

        bool ok = true;
        std::string why;
        Archive replay(cfg.grid);
        std::map<CellIndex, double> best;
        double cov = 0.0;
        for (const auto& ev : r.inserts) {
            const auto it = best.find(ev.cell);
            const double before = it == best.end() ? -1.0 : it->second;
            const bool improves = ev.fitness > before;
            const bool outcome_ok = it == best.end() ? ev.outcome == InsertOutcome::NewCell
                                                     : ev.outcome == (improves ? InsertOutcome::Replaced : InsertOutcome::RejectedLowerFitness);
            if (!outcome_ok) {
                ok = false;
                why = "insert outcome disagrees with replay";
            }
            best[ev.cell] = std::max(before, ev.fitness);
            const double now = static_cast<double>(best.size()) / static_cast<double>(cfg.grid.total_cells());
            if (now < cov || best[ev.cell] < before) {
                ok = false;
                why = "non-monotone replay";
            }
            cov = now;
        }
        for (const auto& [key, e] : r.archive.cells()) {
            if (bin_index(e.features, cfg.grid) != key || best.at(key) != e.fitness) {
                ok = false;
                why = "final archive disagrees with replay";
            }
        }
        if (best.size() != r.archive.size() || r.archive.size() > 15625) {
            ok = false;
            why = "cell count mismatch";
        }
        for (std::size_t i = 1; i < r.metrics.size(); i++)
            if (r.metrics[i].coverage < r.metrics[i - 1].coverage) {
                ok = false;
                why = "coverage series decreased";
            }

        // Binning against a linear scan over bin edges.
        Rng rng(12);
        int mismatches = 0;
        for (int i = 0; i < kBinSamples; i++) {
            FeatureVector f;
            CellIndex scan{};
            for (int d = 0; d < kFeatureDims; d++) {
                const double lo = cfg.grid.lo[d], hi = cfg.grid.hi[d], pad = 0.25 * (hi - lo);
                f[d] = cfg.grid.integer[d] ? std::round(uniform(rng, lo - 1, hi + 1)) : uniform(rng, lo - pad, hi + pad);
                int b = 0;
                if (cfg.grid.integer[d]) {
                    while (b + 1 < cfg.grid.bins[d] && f[d] >= lo + b + 0.5)
                        b++;
                } else {
                    const double w = (hi - lo) / cfg.grid.bins[d];
                    while (b + 1 < cfg.grid.bins[d] && f[d] >= lo + (b + 1) * w)
                        b++;
                }
                scan[d] = b;
            }
            mismatches += bin_index(f, cfg.grid) != scan;
        }
        if (mismatches)
            ok = false;
        return {ok, fmt("%zu inserts replayed, %zu cells, %d/%d binning mismatches%s%s", r.inserts.size(),
                        r.archive.size(), mismatches, kBinSamples, why.empty() ? "" : "; ", why.c_str())};
    }

    // ---- 4 ----
    Outcome accounting()
    {
        bool ok = true;
        std::string detail;
        std::uint64_t gen_calls[2]{};
        int k = 0;
        for (Scheme s : {Scheme::Static, Scheme::Es}) {
            RunConfig cfg = RunConfig::desk();
            cfg.scheme = s;
            cfg.generations = kAccountingGenerations;
            cfg.master_seed = 21;
            CountingBackend backend;
            const RunResult r = run(cfg, {}, backend);
            const std::uint64_t per = s == Scheme::Es ? 21 : 1;
            const std::uint64_t expected
                = (r.init_attempts + static_cast<std::uint64_t>(kAccountingGenerations * cfg.offspring_per_generation)) * per;
            ok &= backend.calls == expected && r.sim_calls == expected && r.metrics.back().evaluations_total == expected;
            gen_calls[k++] = backend.calls - r.init_attempts * per;
            detail += fmt("%s: %llu calls = (%llu init + %d x %d) x %llu; ", to_string(s).c_str(),
                static_cast<unsigned long long>(backend.calls.load()), static_cast<unsigned long long>(r.init_attempts),
                kAccountingGenerations, cfg.offspring_per_generation, static_cast<unsigned long long>(per));
        }
        ok &= gen_calls[1] == 21 * gen_calls[0];
        detail += fmt("generation-phase ratio ES/STATIC = %g", static_cast<double>(gen_calls[1]) / gen_calls[0]);
        return {ok, detail};
    }

    // ---- 5 ----
    Outcome energy_oracle()
    {
        RunConfig cfg = RunConfig::desk();
        cfg.scheme = Scheme::Static;
        SimConfig sc = cfg.sim;
        sc.record_log = true;
        double worst_e = 0.0, worst_cot = 0.0;
        int traces = 0;
        for (std::uint64_t i = 0; traces < 20; i++) {
            Rng rng(derive_seed(55, 0, i));
            const MorphologyGenome m = random_morphology(rng);
            const RobotModel model = expand(m);
            const SimResult res = simulate(model, default_controller(), sc);
            if (res.terminated != Termination::None || res.distance <= 0.0)
                continue;
            traces++;
            // Replay the CSV trace: power columns times the step length.
            std::stringstream csv;
            write_trace_csv(csv, model, res);
            std::string line;
            std::getline(csv, line);
            std::vector<std::string> header;
            for (std::stringstream hs(line); std::getline(hs, line, ',');)
                header.push_back(line);
            double e = 0.0, d = 0.0, e_col = 0.0, prev_t = 0.0;
            while (std::getline(csv, line)) {
                std::vector<double> v;
                std::stringstream ls(line);
                for (std::string c; std::getline(ls, c, ',');)
                    v.push_back(std::stod(c));
                const double dt = v[0] - prev_t;
                prev_t = v[0];
                for (std::size_t c = 0; c < header.size(); c++)
                    if (header[c].rfind("power_", 0) == 0)
                        e += std::abs(v[c]) * dt;
                d = v[v.size() - 2];
                e_col = v.back();
            }
            const double cot = e / (model.total_mass * sc.gravity * d);
            worst_e = std::max(worst_e, std::abs(e - res.energy) / res.energy);
            worst_e = std::max(worst_e, std::abs(e_col - res.energy) / res.energy);
            worst_cot = std::max(worst_cot,
                std::abs(cot - cost_of_transport(res, model.total_mass, sc.gravity)) / cot);
        }

        Rng rng(56);
        double worst_b = 0.0;
        for (int i = 0; i < kGaitSpecs; i++) {
            Rng r2(rng());
            const ControllerGenome c = random_controller(r2);
            const std::array<double, kLinksPerLeg> w{uniform(rng, 0, 1.5), uniform(rng, 0, 1.5), uniform(rng, 0, 1.5)};
            const auto g = make_gait<double>(c, w);
            for (int l = 0; l < kLinksPerLeg; l++) {
                const double b = w[l] / c.stride_freq;
                const double t_crest = (std::numbers::pi / 2.0 - c.phase_offset[l]) / c.stride_freq + g.period();
                worst_b = std::max(worst_b, std::abs(g.amplitude(l) - b));
                worst_b = std::max(worst_b, std::abs(joint_target(g, l, 0.0, t_crest) - (c.vert_offset[l] + b)));
                worst_b = std::max(worst_b, std::abs(g.amplitude(l) * g.stride_freq - w[l]));
            }
        }
        return {worst_e <= kEnergyRelTol && worst_cot <= kEnergyRelTol && worst_b <= kAmplitudeTol,
            fmt("%d traces: max rel energy err %.2e, max rel CoT err %.2e; %d gait specs: max amplitude err %.2e", traces,
                worst_e, worst_cot, kGaitSpecs, worst_b)};
    }

    // ---- 6 ----
    Outcome mass_model()
    {
        const double unit = motor_mass(13000.0, 1.0);
        double worst = 0.0;
        for (std::uint64_t i = 0; i < 2000; i++) {
            Rng rng(derive_seed(66, 0, i));
            const RobotModel m = expand(random_morphology(rng));
            const Eigen::Vector3d e = m.body.extents;
            double parts = 7.5 + 170.0 * 8.0 * e.x() * e.y() * e.z();
            for (const auto& leg : m.legs) {
                for (const auto& l : leg.links) {
                    const double wall = std::min(m.tube_thickness, l.width / 2.0);
                    parts += 1600.0 * l.length * (l.width * l.width - std::pow(l.width - 2.0 * wall, 2)) + 0.2
                        + std::sqrt(l.joint.max_torque * l.joint.max_ang_vel / 13000.0);
                }
            }
            worst = std::max(worst, std::abs(parts - m.total_mass) / parts);
        }
        // ECX19L-class motor: 200 W for 0.108 kg.
        const double ecx = motor_mass(200.0, 1.0);
        const double spread = std::max(ecx / 0.108, 0.108 / ecx);
        return {unit == 1.0 && worst <= kMassRelTol && spread <= kMotorMassSpread,
            fmt("motor_mass(13000 W) = %.17g kg; part-sum max rel err %.2e over 2000 robots; 200 W motor %.4f kg vs 0.108 kg (x%.2f)",
                unit, worst, ecx, spread)};
    }

    // ---- 7 ----
    Outcome rule_recovery()
    {
        Rng rng(77);
        Eigen::MatrixXd clean(kRuleSamples, 3);
        for (int i = 0; i < kRuleSamples; i++) {
            clean(i, 0) = uniform(rng, -1.0, 1.0);
            clean(i, 1) = uniform(rng, -1.0, 1.0);
            clean(i, 2) = 2.0 * clean(i, 0) + 3.0 * clean(i, 1);
        }
        const double s3 = analysis::scales(clean)(2);
        Eigen::MatrixXd noisy = clean;
        for (int i = 0; i < kRuleSamples; i++)
            noisy(i, 2) += gaussian(rng, 0.01 * s3);

        const auto rules = analysis::extract_rules(noisy);
        bool ok = rules.size() == 1 && rules[0].sqrt_eigenvalue <= 0.2 && rules[0].target == 2 && rules[0].terms.size() == 2;
        double c1 = 0, c2 = 0, brute = 0;
        if (ok) {
            for (const auto& t : rules[0].terms)
                (t.feature == 0 ? c1 : c2) = t.coefficient;
            ok &= std::abs(c1 / 2.0 - 1.0) <= kCoefficientTol && std::abs(c2 / 3.0 - 1.0) <= kCoefficientTol;
            const Eigen::Vector3d mean = noisy.colwise().mean();
            const double s = analysis::scales(noisy)(2);
            for (int i = 0; i < kRuleSamples; i++) {
                const double pred = mean(2) + c1 * (noisy(i, 0) - mean(0)) + c2 * (noisy(i, 1) - mean(1));
                brute += std::abs(pred - noisy(i, 2));
            }
            brute = brute / kRuleSamples / s * 100.0;
            ok &= std::abs(brute - rules[0].mean_error_percent) <= kResidualTol;
        }
        const auto exact = analysis::extract_rules(clean);
        const bool clean_ok = exact.size() == 1 && exact[0].mean_error_percent < kNoiseFreeError;
        return {ok && clean_ok,
            fmt("%zu rule(s); target x%d, coefficients (%.4f, %.4f), sqrt(e)=%.4f, error %.6f%% vs brute %.6f%%; noise-free error %.2e%%",
                rules.size(), rules.empty() ? 0 : rules[0].target + 1, c1, c2, rules.empty() ? 0.0 : rules[0].sqrt_eigenvalue,
                rules.empty() ? 0.0 : rules[0].mean_error_percent, brute, exact.empty() ? -1.0 : exact[0].mean_error_percent)};
    }

    // ---- 8 ----
    Outcome eigensolver()
    {
        Rng rng(88);
        double worst_orth = 0.0, worst_rec = 0.0;
        for (int t = 0; t < kEigenTrials; t++) {
            Eigen::MatrixXd a(6, 6);
            for (int i = 0; i < 6; i++)
                for (int j = 0; j <= i; j++)
                    a(i, j) = a(j, i) = uniform(rng, -10.0, 10.0);
            const auto e = analysis::jacobi_eigen(a);
            worst_orth = std::max(worst_orth, (e.vectors.transpose() * e.vectors - Eigen::MatrixXd::Identity(6, 6)).norm());
            worst_rec = std::max(worst_rec, (e.vectors * e.values.asDiagonal() * e.vectors.transpose() - a).norm() / a.norm());
        }
        return {worst_orth < kEigenTol && worst_rec < kEigenTol,
            fmt("%d matrices: max orthonormality residual %.2e, max relative reconstruction residual %.2e", kEigenTrials,
                worst_orth, worst_rec)};
    }

    // ---- 9 ----
    Outcome determinism(const DeskRuns& d)
    {
        bool ok = true;
        std::string detail = fmt("desk ES seed 1, workers 1: %.1f s single-core", d.es_seconds);
        for (int w : {1, 4, 8}) {
            RunConfig cfg = RunConfig::desk();
            cfg.master_seed = 1;
            cfg.workers = w;
            const RunResult r = run(cfg);
            const bool same = archive_text(r.archive) == d.es_seed1_archive && metrics_text(r.metrics) == d.es_seed1_metrics;
            ok &= same;
            detail += fmt("; workers %d %s", w, same ? "identical" : "DIFFERENT");
        }
        ok &= d.es_seconds < kDeskBudgetS;
        return {ok, detail};
    }

    // ---- 10 ----
    double relabel_p(const std::vector<double>& a, const std::vector<double>& b)
    {
        std::vector<double> pooled = a;
        pooled.insert(pooled.end(), b.begin(), b.end());
        const int n = static_cast<int>(pooled.size()), na = static_cast<int>(a.size());
        auto u_for = [&](unsigned mask) {
            double u = 0.0;
            for (int i = 0; i < n; i++)
                if (mask >> i & 1u)
                    for (int j = 0; j < n; j++)
                        if (!(mask >> j & 1u))
                            u += pooled[i] > pooled[j] ? 1.0 : (pooled[i] == pooled[j] ? 0.5 : 0.0);
            return u;
        };
        const double mean = 0.5 * na * (n - na);
        const double obs = std::abs(u_for((1u << na) - 1u) - mean);
        double hit = 0, total = 0;
        for (unsigned mask = 0; mask < (1u << n); mask++) {
            if (std::popcount(mask) != na)
                continue;
            total++;
            hit += std::abs(u_for(mask) - mean) >= obs - 1e-9;
        }
        return hit / total;
    }

    Outcome mann_whitney_exact()
    {
        Rng rng(1010);
        double worst = 0.0;
        int cases = 0;
        for (int m = 1; m <= kExactLimit; m++) {
            for (int n = 1; n <= kExactLimit; n++) {
                for (bool ties : {false, true}) {
                    std::vector<double> a(static_cast<std::size_t>(m)), b(static_cast<std::size_t>(n));
                    for (auto& x : a)
                        x = ties ? std::floor(uniform(rng, 0, 4)) : uniform(rng, 0, 10);
                    for (auto& x : b)
                        x = ties ? std::floor(uniform(rng, 0.5, 4.5)) : uniform(rng, 1, 11);
                    const auto r = analysis::mann_whitney_u(a, b);
                    worst = std::max(worst, std::abs(r.p_two_sided - relabel_p(a, b)));
                    worst = r.exact ? worst : 1.0;
                    cases++;
                }
            }
        }
        return {worst < 1e-12, fmt("%d sample-size/tie cases up to (8,8): max |p - enumeration| = %.2e", cases, worst)};
    }

} // namespace

int main()
{
    const auto t0 = Clock::now();
    report(3, "archive laws", archive_laws());
    report(4, "evaluation accounting", accounting());
    report(5, "energy and CoT oracle", energy_oracle());
    report(6, "mass model", mass_model());
    report(7, "rule recovery", rule_recovery());
    report(8, "eigensolver", eigensolver());
    report(10, "Mann-Whitney exact mode", mann_whitney_exact());
    report(1, "ES dominance", es_dominance());
    const DeskRuns desk = desk_runs();
    report(2, "relative scheme ordering", scheme_ordering(desk));
    report(9, "determinism", determinism(desk));
    std::printf("%d criteria failed, %.1f s total\n", failures, seconds_since(t0));
    return failures == 0 ? 0 : 1;
}
