#pragma once

// Grid search over (gamma, J, h, dt1, dt2) with independent coupling
// realizations per cell. Work items are (cell, realization) pairs whose seeds
// are a pure function of their indices, so results do not depend on the
// number of workers or the order items finish in.

#include "qrc/error.hpp"
#include "qrc/parallel.hpp"
#include "qrc/pipeline.hpp"
#include "qrc/random.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

namespace qrc::sweep {

struct SweepGrid
{
    std::vector<double> gamma_values{0.0, 0.2, 0.4, 0.6, 0.8, 0.95};
    std::vector<double> j_values{1e-3, 1e-2, 1e-1, 1.0, 10.0};
    std::vector<double> h_values{1e-3, 1e-2, 1e-1, 1.0, 10.0};
    std::vector<double> dt1_values{0.25, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0};
    std::vector<double> dt2_values{0.25, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0};
    /// false: single evolution time dt1, dt2 ignored.
    bool multiplexed = true;
    int n_realizations = 30;
    std::uint64_t master_seed = 0;

    void validate() const
    {
        if (gamma_values.empty() || j_values.empty() || h_values.empty() || dt1_values.empty() ||
            (multiplexed && dt2_values.empty()))
            throw InvalidArgument("every sweep axis needs at least one value");
        if (n_realizations < 1)
            throw InvalidArgument("n_realizations must be at least 1");
    }

    [[nodiscard]] std::size_t n_cells() const noexcept
    {
        return gamma_values.size() * j_values.size() * h_values.size() * dt1_values.size() *
               (multiplexed ? dt2_values.size() : 1);
    }
};

struct CellParams
{
    double gamma = 0.0;
    double j = 0.0;
    double h = 0.0;
    double dt1 = 0.0;
    std::optional<double> dt2;

    [[nodiscard]] auto key() const { return std::make_tuple(gamma, j, h, dt1, dt2.value_or(-1.0)); }
};

inline constexpr std::array<const char*, 5> kAxisNames{"gamma", "J", "h", "dt1", "dt2"};

/// Value of a named axis; throws for unknown names.
[[nodiscard]] inline std::optional<double> axis_value(const CellParams& p, const std::string& axis)
{
    if (axis == "gamma")
        return p.gamma;
    if (axis == "J")
        return p.j;
    if (axis == "h")
        return p.h;
    if (axis == "dt1")
        return p.dt1;
    if (axis == "dt2")
        return p.dt2;
    throw InvalidArgument("unknown sweep axis '" + axis + "' (expected gamma, J, h, dt1 or dt2)");
}

struct SweepCell
{
    CellParams params;
    std::vector<std::optional<long>> vpts; // nullopt: realization failed
    std::optional<double> mean_vpt;        // missing when no realization succeeded or all VPTs are zero
    std::optional<double> rel_err;         // std / mean over successful realizations
    int n_ok = 0;
    int n_run = 0; // realizations attempted; below vpts.size() only after cancellation

    [[nodiscard]] bool missing() const noexcept { return !mean_vpt.has_value(); }
    [[nodiscard]] bool complete() const noexcept { return n_run == static_cast<int>(vpts.size()); }
};

/// Cell in row-major order over (gamma, J, h, dt1, dt2), dt2 fastest.
[[nodiscard]] inline CellParams cell_params(const SweepGrid& g, std::size_t index)
{
    CellParams p;
    const std::size_t n2 = g.multiplexed ? g.dt2_values.size() : 1;
    if (g.multiplexed)
        p.dt2 = g.dt2_values[index % n2];
    index /= n2;
    p.dt1 = g.dt1_values[index % g.dt1_values.size()];
    index /= g.dt1_values.size();
    p.h = g.h_values[index % g.h_values.size()];
    index /= g.h_values.size();
    p.j = g.j_values[index % g.j_values.size()];
    index /= g.j_values.size();
    p.gamma = g.gamma_values[index];
    return p;
}

[[nodiscard]] inline std::uint64_t realization_seed(std::uint64_t master, std::size_t cell, int realization)
{
    return mix_seed({master, static_cast<std::uint64_t>(cell), static_cast<std::uint64_t>(realization)});
}

/// Fixed part of every grid run: the data and the hyperparameters not swept.
struct SweepTask
{
    pipeline::DatasetSpec data;
    pipeline::ModelConfig base;
    double epsilon = 0.3;
};

[[nodiscard]] inline pipeline::ModelConfig cell_model(const pipeline::ModelConfig& base, const CellParams& p)
{
    auto cfg = base;
    cfg.gamma = p.gamma;
    cfg.coupling_scale = p.j;
    cfg.transverse_field = p.h;
    cfg.times = p.dt2 ? std::vector<double>{p.dt1, *p.dt2} : std::vector<double>{p.dt1};
    return cfg;
}

/// Aggregates realizations: mean and population std over successes.
inline void summarize(SweepCell& cell)
{
    std::vector<double> ok;
    for (const auto& v : cell.vpts)
        if (v)
            ok.push_back(static_cast<double>(*v));
    cell.n_ok = static_cast<int>(ok.size());
    cell.mean_vpt.reset();
    cell.rel_err.reset();
    if (ok.empty())
        return;
    double mean = 0.0;
    for (double v : ok)
        mean += v;
    mean /= static_cast<double>(ok.size());
    if (mean == 0.0)
        return;
    double var = 0.0;
    for (double v : ok)
        var += (v - mean) * (v - mean);
    var /= static_cast<double>(ok.size());
    cell.mean_vpt = mean;
    cell.rel_err = std::sqrt(var) / mean;
}

/// Runs every (cell, realization) item. When `cancel` becomes true, items not
/// yet started are skipped; cells with skipped items report complete() == false.
[[nodiscard]] inline std::vector<SweepCell> run_sweep(const SweepGrid& grid, const SweepTask& task, int workers = 1,
                                                      const std::atomic<bool>* cancel = nullptr)
{
    grid.validate();
    const auto n_cells = grid.n_cells();
    const auto n_real = static_cast<std::size_t>(grid.n_realizations);
    std::vector<SweepCell> table(n_cells);
    for (std::size_t c = 0; c < n_cells; ++c) {
        table[c].params = cell_params(grid, c);
        table[c].vpts.assign(n_real, std::nullopt);
    }
    std::vector<char> attempted(n_cells * n_real, 0);
    parallel_for(n_cells * n_real, workers, [&](std::size_t item) {
        if (cancel && cancel->load())
            return;
        attempted[item] = 1;
        const auto c = item / n_real;
        const auto r = static_cast<int>(item % n_real);
        try {
            const auto res = pipeline::run(task.data, cell_model(task.base, table[c].params),
                                           realization_seed(grid.master_seed, c, r), task.epsilon);
            table[c].vpts[static_cast<std::size_t>(r)] = res.vpt_steps;
        } catch (const std::exception&) {
            table[c].vpts[static_cast<std::size_t>(r)] = std::nullopt;
        }
    });
    for (std::size_t c = 0; c < n_cells; ++c) {
        for (std::size_t r = 0; r < n_real; ++r)
            table[c].n_run += attempted[c * n_real + r];
        summarize(table[c]);
    }
    return table;
}

/// Highest mean VPT; ties go to the smaller relative error, then to the
/// lexicographically smaller (gamma, J, h, dt1, dt2).
[[nodiscard]] inline const SweepCell& select_best(const std::vector<SweepCell>& table)
{
    const SweepCell* best = nullptr;
    for (const auto& cell : table) {
        if (cell.missing())
            continue;
        if (!best) {
            best = &cell;
            continue;
        }
        const double rb = best->rel_err.value_or(0.0), rc = cell.rel_err.value_or(0.0);
        if (*cell.mean_vpt > *best->mean_vpt ||
            (*cell.mean_vpt == *best->mean_vpt && (rc < rb || (rc == rb && cell.params.key() < best->params.key()))))
            best = &cell;
    }
    if (!best)
        throw InvalidArgument("no sweep cell has a valid mean VPT");
    return *best;
}

enum class HeatmapMetric
{
    mean_vpt,
    rel_err,
};

struct Heatmap
{
    std::string row_axis;
    std::string col_axis;
    std::vector<double> row_values;
    std::vector<double> col_values;
    std::vector<std::vector<std::optional<double>>> values; // [row][col]
};

/// Dense matrix over two axes. Axes fixed in `slice` must match exactly; any
/// other axis is reduced by taking the best cell (select_best) per matrix entry.
[[nodiscard]] inline Heatmap export_heatmap(const std::vector<SweepCell>& table, const std::string& row_axis,
                                            const std::string& col_axis, const std::map<std::string, double>& slice,
                                            HeatmapMetric metric = HeatmapMetric::mean_vpt)
{
    if (table.empty())
        throw InvalidArgument("empty sweep table");
    if (row_axis == col_axis)
        throw InvalidArgument("heatmap axes must differ");
    for (const auto& [name, v] : slice)
        (void)axis_value(table.front().params, name);

    Heatmap hm{row_axis, col_axis, {}, {}, {}};
    std::vector<const SweepCell*> selected;
    for (const auto& cell : table) {
        bool match = true;
        for (const auto& [name, v] : slice) {
            const auto value = axis_value(cell.params, name);
            if (!value || *value != v)
                match = false;
        }
        const auto rv = axis_value(cell.params, row_axis);
        const auto cv = axis_value(cell.params, col_axis);
        if (!match || !rv || !cv)
            continue;
        selected.push_back(&cell);
        hm.row_values.push_back(*rv);
        hm.col_values.push_back(*cv);
    }
    if (selected.empty())
        throw InvalidArgument("requested slice matches no sweep cells");
    for (auto* axis : {&hm.row_values, &hm.col_values}) {
        std::sort(axis->begin(), axis->end());
        axis->erase(std::unique(axis->begin(), axis->end()), axis->end());
    }

    const auto index_of = [](const std::vector<double>& v, double x) {
        return static_cast<std::size_t>(std::lower_bound(v.begin(), v.end(), x) - v.begin());
    };
    std::vector<std::vector<std::vector<SweepCell>>> groups(
        hm.row_values.size(), std::vector<std::vector<SweepCell>>(hm.col_values.size()));
    for (const auto* cell : selected)
        groups[index_of(hm.row_values, *axis_value(cell->params, row_axis))]
              [index_of(hm.col_values, *axis_value(cell->params, col_axis))]
                  .push_back(*cell);

    hm.values.assign(hm.row_values.size(), std::vector<std::optional<double>>(hm.col_values.size()));
    for (std::size_t i = 0; i < groups.size(); ++i)
        for (std::size_t j = 0; j < groups[i].size(); ++j) {
            const auto& g = groups[i][j];
            if (g.empty() || std::all_of(g.begin(), g.end(), [](const SweepCell& c) { return c.missing(); }))
                continue;
            const auto& best = select_best(g);
            hm.values[i][j] = metric == HeatmapMetric::mean_vpt ? best.mean_vpt : best.rel_err;
        }
    return hm;
}

} // namespace qrc::sweep
