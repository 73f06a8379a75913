#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <vector>

#include <legdesign/genome.hpp>
#include <legdesign/phenotype.hpp>
#include <legdesign/rng.hpp>

namespace legdesign {

    constexpr int kFeatureDims = 6;

    /// Regular grid over the six descriptors. Dimensions flagged `integer`
    /// map value v to bin round(v) - lo.
    struct GridSpec {
        std::array<double, kFeatureDims> lo{};
        std::array<double, kFeatureDims> hi{};
        std::array<int, kFeatureDims> bins{};
        std::array<bool, kFeatureDims> integer{};

        static GridSpec standard();
        bool valid() const;
        long total_cells() const;
    };

    using CellIndex = std::array<int, kFeatureDims>;

    CellIndex bin_index(const FeatureVector& f, const GridSpec& spec);

    struct Elite {
        MorphologyGenome morphology;
        ControllerGenome controller;
        double fitness = 0.0;
        FeatureVector features = FeatureVector::Zero();
        int generation_born = 0;
        std::uint64_t eval_seed = 0;
        std::uint64_t serial = 0; // assigned by the archive on insertion
    };

    enum class InsertOutcome { NewCell, Replaced, RejectedLowerFitness, RejectedInvalid };

    /// Sparse MAP-Elites archive: at most one elite per cell, cell fitness never decreases.
    class Archive {
    public:
        explicit Archive(GridSpec spec = GridSpec::standard());

        InsertOutcome insert(Elite e);

        /// Restores a stored elite verbatim (serial included). Throws if its key
        /// does not match its features or the cell is taken.
        void restore(const Elite& e);

        const GridSpec& spec() const { return _spec; }
        std::size_t size() const { return _cells.size(); }
        bool empty() const { return _cells.empty(); }
        double coverage() const;

        const Elite* find(const CellIndex& cell) const;
        const std::map<CellIndex, Elite>& cells() const { return _cells; }

        /// Uniform over occupied cells.
        const Elite& select_random(Rng& rng) const;

        /// The ceil(q N) fittest elites, descending; ties go to the earlier insertion.
        std::vector<Elite> top_fraction(double q) const;

        std::uint64_t inserts() const { return _inserts; }
        std::uint64_t replacements() const { return _replacements; }
        std::uint64_t rejections() const { return _rejections; }

    private:
        GridSpec _spec;
        std::map<CellIndex, Elite> _cells;
        std::vector<CellIndex> _order; // occupied cells in first-fill order
        std::uint64_t _next_serial = 0;
        std::uint64_t _inserts = 0;
        std::uint64_t _replacements = 0;
        std::uint64_t _rejections = 0;
    };

    struct FitnessSummary {
        double best = 0.0;
        double mean = 0.0;
        double min = 0.0;
    };

    FitnessSummary summarize(const Archive& a);

} // namespace legdesign
