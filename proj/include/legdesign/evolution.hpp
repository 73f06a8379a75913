#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include <legdesign/archive.hpp>
#include <legdesign/genome.hpp>
#include <legdesign/phenotype.hpp>
#include <legdesign/simulator.hpp>

namespace legdesign {

    enum class Scheme { Static, Genome, Es };

    std::string to_string(Scheme s);
    Scheme scheme_from_string(const std::string& s);

    /// Constraint thresholds used by the shipped profiles. The reduced-order
    /// evaluator cannot reach 1 m/s at 2 m standing height, so the profiles
    /// relax speed and height; mass keeps the 60 kg budget.
    inline constexpr ConstraintConfig kEvaluatorConstraints{60.0, 0.2, 1.4};

    struct RunConfig {
        Scheme scheme = Scheme::Es;
        int init_population = 400;
        int offspring_per_generation = 60;
        int generations = 4000;
        int es_iterations = 20;
        MutationRates rates{};
        GridSpec grid = GridSpec::standard();
        SimConfig sim{};
        ConstraintConfig constraints{};
        MassModel mass{};
        std::uint64_t master_seed = 1;
        int workers = 1;
        // Off by default: only the initial population is regenerated on rejection.
        bool regenerate_rejected_offspring = false;
        int max_init_attempts_factor = 1000;
        bool record_inserts = false;

        /// Full-scale protocol: 400 initial, 60 offspring, 4000 generations.
        static RunConfig paper();
        /// Desk-scale protocol: 100 initial, 30 offspring, 200 generations.
        static RunConfig desk();

        bool valid() const;
    };

    struct EvaluatedCandidate {
        MorphologyGenome morphology;
        ControllerGenome controller;
        double fitness = 0.0;
        FeatureVector features = FeatureVector::Zero();
        ConstraintReport constraints;
        SimResult sim; // summary only, no per-step log
        int sim_calls = 0;

        bool feasible() const { return constraints.pass(); }
    };

    struct EsResult {
        ControllerGenome controller;
        double fitness = 0.0;                // 0 when the final controller is infeasible
        std::vector<double> trajectory;      // parent score after each iteration, starting with the parent itself
        int sim_calls = 0;
    };

    /// Scores one (morphology, controller) pair: expand, simulate, check constraints.
    EvaluatedCandidate evaluate_with(const MorphologyGenome& m, const ControllerGenome& c, const RunConfig& cfg,
        const SimulatorBackend& backend);

    /// 1+1 ES from the midpoint controller. Infeasible controllers score 0 and a
    /// child replaces the parent only when strictly better.
    EsResult es_optimize(const MorphologyGenome& m, const RunConfig& cfg, std::uint64_t seed,
        const SimulatorBackend& backend = ReducedOrderBackend{});

    /// Evaluates `m` under the configured scheme. `genome_controller` is used
    /// only by the GENOME scheme.
    EvaluatedCandidate evaluate(const MorphologyGenome& m, const ControllerGenome& genome_controller,
        const RunConfig& cfg, std::uint64_t seed, const SimulatorBackend& backend = ReducedOrderBackend{});

    struct MetricsRow {
        int generation = 0;
        std::uint64_t evaluations_total = 0;
        double coverage = 0.0;
        double best_fitness = 0.0;
        double mean_fitness = 0.0;
        double min_fitness = 0.0;
    };

    /// One archive insertion, in application order.
    struct InsertEvent {
        int generation = 0;
        CellIndex cell{};
        double fitness = 0.0;
        InsertOutcome outcome = InsertOutcome::NewCell;
    };

    struct RunResult {
        Archive archive;
        std::vector<MetricsRow> metrics;
        std::uint64_t init_attempts = 0;
        std::uint64_t sim_calls = 0;
        std::uint64_t offspring_rejected = 0;
        std::vector<InsertEvent> inserts; // filled when RunConfig::record_inserts is set
    };

    class InfeasibleSpaceError : public std::runtime_error {
    public:
        using std::runtime_error::runtime_error;
    };

    using ProgressFn = std::function<void(const MetricsRow&)>;

    RunResult run(const RunConfig& cfg, const ProgressFn& progress = {},
        const SimulatorBackend& backend = ReducedOrderBackend{});

} // namespace legdesign
