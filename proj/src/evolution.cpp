#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <optional>
#include <thread>

#include <legdesign/evolution.hpp>

namespace legdesign {

    namespace {

        // Retry budget per child when offspring regeneration is switched on.
        constexpr int kMaxOffspringRetries = 100;
        constexpr int kMinInitBatch = 32;

        // Runs fn(i) for i in [0, n) on up to `workers` threads. Results must be
        // written to slot i only, so the outcome is independent of scheduling.
        template <typename Fn>
        void parallel_for(std::size_t n, int workers, Fn&& fn)
        {
            const auto nthreads = static_cast<std::size_t>(std::clamp<long>(workers, 1, static_cast<long>(std::max<std::size_t>(n, 1))));
            if (nthreads <= 1) {
                for (std::size_t i = 0; i < n; i++)
                    fn(i);
                return;
            }
            std::atomic<std::size_t> next{0};
            std::exception_ptr error;
            std::mutex error_mutex;
            std::vector<std::jthread> pool;
            pool.reserve(nthreads);
            for (std::size_t t = 0; t < nthreads; t++) {
                pool.emplace_back([&] {
                    for (std::size_t i = next++; i < n; i = next++) {
                        try {
                            fn(i);
                        } catch (...) {
                            std::lock_guard lock(error_mutex);
                            if (!error)
                                error = std::current_exception();
                        }
                    }
                });
            }
            pool.clear();
            if (error)
                std::rethrow_exception(error);
        }

        double score(const EvaluatedCandidate& c) { return c.feasible() ? c.fitness : 0.0; }

        Elite to_elite(const EvaluatedCandidate& c, int generation, std::uint64_t seed)
        {
            Elite e;
            e.morphology = c.morphology;
            e.controller = c.controller;
            e.fitness = c.fitness;
            e.features = c.features;
            e.generation_born = generation;
            e.eval_seed = seed;
            return e;
        }

        MetricsRow metrics_row(int generation, std::uint64_t sims, const Archive& a)
        {
            const FitnessSummary s = summarize(a);
            return {generation, sims, a.coverage(), s.best, s.mean, s.min};
        }

    } // namespace

    std::string to_string(Scheme s)
    {
        switch (s) {
        case Scheme::Static: return "STATIC";
        case Scheme::Genome: return "GENOME";
        case Scheme::Es: return "ES";
        }
        return "?";
    }

    Scheme scheme_from_string(const std::string& s)
    {
        std::string u = s;
        std::transform(u.begin(), u.end(), u.begin(), [](unsigned char ch) { return static_cast<char>(std::toupper(ch)); });
        if (u == "STATIC")
            return Scheme::Static;
        if (u == "GENOME")
            return Scheme::Genome;
        if (u == "ES")
            return Scheme::Es;
        throw std::invalid_argument("unknown scheme '" + s + "' (expected STATIC, GENOME or ES)");
    }

    RunConfig RunConfig::paper()
    {
        RunConfig c;
        c.constraints = kEvaluatorConstraints;
        return c;
    }

    RunConfig RunConfig::desk()
    {
        RunConfig c = paper();
        c.init_population = 100;
        c.offspring_per_generation = 30;
        c.generations = 200;
        return c;
    }

    bool RunConfig::valid() const
    {
        return init_population >= 1 && offspring_per_generation >= 1 && generations >= 0 && es_iterations >= 0
            && workers >= 1 && max_init_attempts_factor >= 1 && rates.valid() && grid.valid() && sim.valid();
    }

    EvaluatedCandidate evaluate_with(const MorphologyGenome& m, const ControllerGenome& c, const RunConfig& cfg,
        const SimulatorBackend& backend)
    {
        EvaluatedCandidate out;
        out.morphology = m;
        out.controller = c;
        const RobotModel model = expand(m, cfg.mass);
        out.features = features(model, m);
        SimConfig sim_cfg = cfg.sim;
        sim_cfg.record_log = false;
        out.sim = backend.simulate(model, c, sim_cfg);
        out.sim_calls = 1;
        out.constraints = check_constraints(model, out.sim, cfg.constraints);
        out.fitness = out.constraints.pass() ? fitness(out.sim, model.total_mass, cfg.sim.gravity) : 0.0;
        return out;
    }

    namespace {

        struct EsSearch {
            EvaluatedCandidate best;
            std::vector<double> trajectory;
            int calls = 0;
        };

        EsSearch es_search(const MorphologyGenome& m, const RunConfig& cfg, std::uint64_t seed,
            const SimulatorBackend& backend)
        {
            Rng rng(seed);
            EsSearch s;
            s.best = evaluate_with(m, default_controller(), cfg, backend);
            s.calls = 1;
            s.trajectory.push_back(score(s.best));
            for (int it = 0; it < cfg.es_iterations; it++) {
                EvaluatedCandidate child = evaluate_with(m, mutate_controller(s.best.controller, rng), cfg, backend);
                s.calls++;
                if (score(child) > score(s.best))
                    s.best = std::move(child);
                s.trajectory.push_back(score(s.best));
            }
            s.best.sim_calls = s.calls;
            return s;
        }

    } // namespace

    EsResult es_optimize(const MorphologyGenome& m, const RunConfig& cfg, std::uint64_t seed,
        const SimulatorBackend& backend)
    {
        EsSearch s = es_search(m, cfg, seed, backend);
        return {s.best.controller, score(s.best), std::move(s.trajectory), s.calls};
    }

    EvaluatedCandidate evaluate(const MorphologyGenome& m, const ControllerGenome& genome_controller,
        const RunConfig& cfg, std::uint64_t seed, const SimulatorBackend& backend)
    {
        switch (cfg.scheme) {
        case Scheme::Static: return evaluate_with(m, default_controller(), cfg, backend);
        case Scheme::Genome: return evaluate_with(m, genome_controller, cfg, backend);
        // The surviving parent's evaluation is reused, so ES costs exactly 1 + iterations calls.
        case Scheme::Es: return es_search(m, cfg, seed, backend).best;
        }
        throw std::logic_error("evaluate: bad scheme");
    }

    RunResult run(const RunConfig& cfg, const ProgressFn& progress, const SimulatorBackend& backend)
    {
        if (!cfg.valid())
            throw std::invalid_argument("run: invalid configuration");

        RunResult out{Archive(cfg.grid), {}, 0, 0, 0, {}};
        Archive& archive = out.archive;
        auto insert = [&](const EvaluatedCandidate& c, int generation, std::uint64_t seed) {
            const InsertOutcome o = archive.insert(to_elite(c, generation, seed));
            if (cfg.record_inserts)
                out.inserts.push_back({generation, bin_index(c.features, cfg.grid), c.fitness, o});
        };

        // Initial population: attempt a draws from stream (master, 0, a).
        const std::uint64_t cap = static_cast<std::uint64_t>(cfg.max_init_attempts_factor) * static_cast<std::uint64_t>(cfg.init_population);
        int accepted = 0;
        while (accepted < cfg.init_population) {
            if (out.init_attempts >= cap)
                throw InfeasibleSpaceError("initialization: fewer than " + std::to_string(cfg.init_population)
                    + " feasible designs in " + std::to_string(cap) + " attempts");
            const auto batch = static_cast<std::size_t>(std::min<std::uint64_t>(
                std::max(cfg.init_population - accepted, kMinInitBatch), cap - out.init_attempts));
            const std::uint64_t first = out.init_attempts;
            std::vector<EvaluatedCandidate> results(batch);
            std::vector<std::uint64_t> seeds(batch);
            parallel_for(batch, cfg.workers, [&](std::size_t i) {
                Rng rng(derive_seed(cfg.master_seed, 0, first + i));
                const MorphologyGenome m = random_morphology(rng);
                const ControllerGenome c = random_controller(rng);
                seeds[i] = rng();
                results[i] = evaluate(m, c, cfg, seeds[i], backend);
            });
            out.init_attempts += batch;
            for (std::size_t i = 0; i < batch; i++) {
                out.sim_calls += static_cast<std::uint64_t>(results[i].sim_calls);
                if (accepted < cfg.init_population && results[i].feasible()) {
                    insert(results[i], 0, seeds[i]);
                    accepted++;
                }
            }
        }
        out.metrics.push_back(metrics_row(0, out.sim_calls, archive));
        if (progress)
            progress(out.metrics.back());

        // Generation g, child i draws from stream (master, g, i).
        const auto n = static_cast<std::size_t>(cfg.offspring_per_generation);
        for (int g = 1; g <= cfg.generations; g++) {
            std::vector<std::optional<EvaluatedCandidate>> results(n);
            std::vector<std::uint64_t> seeds(n);
            std::vector<int> calls(n, 0);
            parallel_for(n, cfg.workers, [&](std::size_t i) {
                Rng rng(derive_seed(cfg.master_seed, static_cast<std::uint64_t>(g), i));
                const Elite& parent = archive.select_random(rng);
                const int tries = cfg.regenerate_rejected_offspring ? kMaxOffspringRetries : 1;
                for (int t = 0; t < tries; t++) {
                    const MorphologyGenome m = mutate_morphology(parent.morphology, cfg.rates, rng);
                    const ControllerGenome c = cfg.scheme == Scheme::Genome ? mutate_controller(parent.controller, rng)
                                                                            : parent.controller;
                    seeds[i] = rng();
                    EvaluatedCandidate cand = evaluate(m, c, cfg, seeds[i], backend);
                    calls[i] += cand.sim_calls;
                    if (cand.feasible()) {
                        results[i] = std::move(cand);
                        break;
                    }
                }
            });
            for (std::size_t i = 0; i < n; i++) {
                out.sim_calls += static_cast<std::uint64_t>(calls[i]);
                if (results[i])
                    insert(*results[i], g, seeds[i]);
                else
                    out.offspring_rejected++;
            }
            out.metrics.push_back(metrics_row(g, out.sim_calls, archive));
            if (progress)
                progress(out.metrics.back());
        }
        return out;
    }

} // namespace legdesign
