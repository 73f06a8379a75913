#include <algorithm>
#include <cmath>

#include <legdesign/archive.hpp>

namespace legdesign {

    GridSpec GridSpec::standard()
    {
        GridSpec s;
        s.lo = {2.0, 50.0, 2.0, 0.001, -0.2, -0.2};
        s.hi = {2.8, 75.0, 6.0, 0.01, 0.2, 0.2};
        s.bins = {5, 5, 5, 5, 5, 5};
        s.integer = {false, false, true, false, false, false};
        return s;
    }

    bool GridSpec::valid() const
    {
        for (int d = 0; d < kFeatureDims; d++) {
            if (!(lo[d] < hi[d]) || bins[d] < 1)
                return false;
            if (integer[d] && static_cast<long>(std::lround(hi[d] - lo[d])) + 1 != bins[d])
                return false;
        }
        return true;
    }

    long GridSpec::total_cells() const
    {
        long n = 1;
        for (int b : bins)
            n *= b;
        return n;
    }

    CellIndex bin_index(const FeatureVector& f, const GridSpec& spec)
    {
        CellIndex idx{};
        for (int d = 0; d < kFeatureDims; d++) {
            const double x = f[d];
            if (std::isnan(x))
                throw std::invalid_argument("bin_index: NaN feature in dimension " + std::to_string(d + 1));
            long i;
            if (spec.integer[d])
                i = std::lround(x - spec.lo[d]);
            else
                i = static_cast<long>(std::floor((x - spec.lo[d]) / (spec.hi[d] - spec.lo[d]) * spec.bins[d]));
            idx[d] = static_cast<int>(std::clamp<long>(i, 0, spec.bins[d] - 1));
        }
        return idx;
    }

    Archive::Archive(GridSpec spec) : _spec(spec)
    {
        if (!_spec.valid())
            throw std::invalid_argument("Archive: invalid grid spec");
    }

    InsertOutcome Archive::insert(Elite e)
    {
        if (std::isnan(e.fitness) || e.fitness < 0.0 || !e.features.allFinite()) {
            _rejections++;
            return InsertOutcome::RejectedInvalid;
        }
        const CellIndex key = bin_index(e.features, _spec);
        auto it = _cells.find(key);
        if (it == _cells.end()) {
            e.serial = _next_serial++;
            _cells.emplace(key, std::move(e));
            _order.push_back(key);
            _inserts++;
            return InsertOutcome::NewCell;
        }
        if (e.fitness > it->second.fitness) {
            e.serial = _next_serial++;
            it->second = std::move(e);
            _replacements++;
            return InsertOutcome::Replaced;
        }
        _rejections++;
        return InsertOutcome::RejectedLowerFitness;
    }

    void Archive::restore(const Elite& e)
    {
        const CellIndex key = bin_index(e.features, _spec);
        if (_cells.contains(key))
            throw std::invalid_argument("Archive::restore: duplicate cell");
        _cells.emplace(key, e);
        _order.push_back(key);
        _next_serial = std::max(_next_serial, e.serial + 1);
    }

    double Archive::coverage() const { return static_cast<double>(_cells.size()) / static_cast<double>(_spec.total_cells()); }

    const Elite* Archive::find(const CellIndex& cell) const
    {
        auto it = _cells.find(cell);
        return it == _cells.end() ? nullptr : &it->second;
    }

    const Elite& Archive::select_random(Rng& rng) const
    {
        if (_order.empty())
            throw std::logic_error("Archive::select_random: archive is empty");
        const auto i = std::uniform_int_distribution<std::size_t>(0, _order.size() - 1)(rng);
        return _cells.at(_order[i]);
    }

    std::vector<Elite> Archive::top_fraction(double q) const
    {
        if (!(q > 0.0 && q <= 1.0))
            throw std::invalid_argument("Archive::top_fraction: q must be in (0, 1]");
        std::vector<Elite> all;
        all.reserve(_cells.size());
        for (const auto& [key, e] : _cells)
            all.push_back(e);
        std::sort(all.begin(), all.end(), [](const Elite& a, const Elite& b) {
            if (a.fitness != b.fitness)
                return a.fitness > b.fitness;
            return a.serial < b.serial;
        });
        const auto n = static_cast<std::size_t>(std::ceil(q * static_cast<double>(all.size()) - 1e-9));
        all.resize(std::min(n, all.size()));
        return all;
    }

    FitnessSummary summarize(const Archive& a)
    {
        FitnessSummary s;
        if (a.empty())
            return s;
        s.best = -std::numeric_limits<double>::infinity();
        s.min = std::numeric_limits<double>::infinity();
        for (const auto& [key, e] : a.cells()) {
            s.best = std::max(s.best, e.fitness);
            s.min = std::min(s.min, e.fitness);
            s.mean += e.fitness;
        }
        s.mean /= static_cast<double>(a.size());
        return s;
    }

} // namespace legdesign
