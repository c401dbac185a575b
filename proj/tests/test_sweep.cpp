#include "qrc/dynsys/integrator.hpp"
#include "qrc/dynsys/systems.hpp"
#include "qrc/io.hpp"
#include "qrc/sweep.hpp"

#include <gtest/gtest.h>

#include <set>
#include <sstream>

using namespace qrc;
using namespace qrc::sweep;

namespace {

const SweepTask& small_task()
{
    static const SweepTask task = [] {
        Eigen::VectorXd y0(3);
        y0 << 1, 1, 1;
        const auto traj =
            dynsys::integrate(dynsys::Lorenz63System{}, y0, 100.0 + 0.02 * 599, dynsys::IntegratorConfig{}, 0.02, 100.0);
        return SweepTask{pipeline::make_dataset(traj, {20, 500, 60}), pipeline::ModelConfig{}, 0.3};
    }();
    return task;
}

SweepCell cell(double gamma, double mean, double rel)
{
    SweepCell c;
    c.params = {gamma, 0.01, 0.1, 1.0, 2.0};
    c.mean_vpt = mean;
    c.rel_err = rel;
    c.n_ok = 1;
    return c;
}

std::string sweep_csv(const std::vector<SweepCell>& t)
{
    std::ostringstream os;
    io::write_sweep_csv(os, t);
    return os.str();
}

} // namespace

TEST(Seeds, MixingIsStableAndDistinct)
{
    EXPECT_EQ(realization_seed(0, 3, 4), realization_seed(0, 3, 4));
    std::set<std::uint64_t> seen;
    for (std::size_t c = 0; c < 20; ++c)
        for (int r = 0; r < 20; ++r)
            seen.insert(realization_seed(7, c, r));
    EXPECT_EQ(seen.size(), 400u);
    EXPECT_NE(realization_seed(0, 1, 0), realization_seed(1, 1, 0));
}

TEST(Grid, CellEnumeration)
{
    SweepGrid g;
    g.gamma_values = {0.1, 0.2};
    g.j_values = {1.0};
    g.h_values = {2.0};
    g.dt1_values = {0.5, 1.0};
    g.dt2_values = {3.0, 4.0, 5.0};
    EXPECT_EQ(g.n_cells(), 12u);
    const auto p = cell_params(g, 7); // gamma index 1, dt1 index 0, dt2 index 1
    EXPECT_EQ(p.gamma, 0.2);
    EXPECT_EQ(p.dt1, 0.5);
    EXPECT_EQ(*p.dt2, 4.0);
    g.multiplexed = false;
    EXPECT_EQ(g.n_cells(), 4u);
    EXPECT_FALSE(cell_params(g, 3).dt2.has_value());
    g.n_realizations = 0;
    EXPECT_THROW(g.validate(), InvalidArgument);
}

TEST(Grid, DefaultsContainBestKnownCells)
{
    const SweepGrid g;
    const auto has = [](const std::vector<double>& v, double x) { return std::find(v.begin(), v.end(), x) != v.end(); };
    EXPECT_TRUE(has(g.j_values, 0.01) && has(g.h_values, 0.1));
    EXPECT_TRUE(has(g.dt1_values, 2.0) && has(g.dt2_values, 1.0));
    EXPECT_TRUE(has(g.dt1_values, 0.5) && has(g.dt2_values, 2.0));
    EXPECT_EQ(g.n_realizations, 30);
}

TEST(Summary, StatisticsOverSuccesses)
{
    SweepCell c;
    c.vpts = {10L, std::nullopt, 30L};
    summarize(c);
    EXPECT_EQ(c.n_ok, 2);
    EXPECT_DOUBLE_EQ(*c.mean_vpt, 20.0);
    EXPECT_DOUBLE_EQ(*c.rel_err, 0.5);

    c.vpts = {7L, 7L, 7L};
    summarize(c);
    EXPECT_EQ(*c.rel_err, 0.0);

    c.vpts = {0L, 0L};
    summarize(c);
    EXPECT_TRUE(c.missing());
    EXPECT_FALSE(c.rel_err.has_value());

    c.vpts = {std::nullopt};
    summarize(c);
    EXPECT_TRUE(c.missing());
    EXPECT_EQ(c.n_ok, 0);
}

TEST(Best, ArgmaxAndTieBreaks)
{
    EXPECT_EQ(select_best({cell(0.1, 10, 0.2)}).params.gamma, 0.1);
    EXPECT_EQ(select_best({cell(0.1, 10, 0.2), cell(0.2, 12, 0.9)}).params.gamma, 0.2);
    EXPECT_EQ(select_best({cell(0.1, 10, 0.3), cell(0.2, 10, 0.1)}).params.gamma, 0.2);
    EXPECT_EQ(select_best({cell(0.4, 10, 0.1), cell(0.2, 10, 0.1)}).params.gamma, 0.2);
    SweepCell gone;
    gone.params.gamma = 0.9;
    EXPECT_EQ(select_best({gone, cell(0.3, 1, 0.0)}).params.gamma, 0.3);
    EXPECT_THROW((void)select_best({gone}), InvalidArgument);
}

TEST(Axes, NamedAccess)
{
    const CellParams p{0.1, 0.2, 0.3, 0.4, std::nullopt};
    EXPECT_EQ(*axis_value(p, "gamma"), 0.1);
    EXPECT_EQ(*axis_value(p, "J"), 0.2);
    EXPECT_EQ(*axis_value(p, "h"), 0.3);
    EXPECT_EQ(*axis_value(p, "dt1"), 0.4);
    EXPECT_FALSE(axis_value(p, "dt2").has_value());
    EXPECT_THROW((void)axis_value(p, "lambda"), InvalidArgument);
}

TEST(Heatmap, SliceAndReduction)
{
    std::vector<SweepCell> t;
    for (double g : {0.2, 0.4})
        for (double d1 : {1.0, 2.0})
            for (double d2 : {1.0, 2.0}) {
                SweepCell c;
                c.params = {g, 0.01, 0.1, d1, d2};
                c.mean_vpt = 10 * g + d1 + 0.1 * d2;
                c.rel_err = 0.05;
                c.n_ok = 1;
                t.push_back(c);
            }
    t[0].mean_vpt.reset();
    t[0].rel_err.reset();

    const auto sliced = export_heatmap(t, "dt1", "dt2", {{"gamma", 0.2}});
    ASSERT_EQ(sliced.values.size(), 2u);
    EXPECT_FALSE(sliced.values[0][0].has_value());
    EXPECT_DOUBLE_EQ(*sliced.values[1][0], 2.0 + 2.0 + 0.1);

    const auto reduced = export_heatmap(t, "dt1", "dt2", {});
    EXPECT_DOUBLE_EQ(*reduced.values[0][0], 4.0 + 1.0 + 0.1);

    const auto err = export_heatmap(t, "dt1", "dt2", {{"gamma", 0.4}}, HeatmapMetric::rel_err);
    EXPECT_DOUBLE_EQ(*err.values[1][1], 0.05);

    EXPECT_THROW((void)export_heatmap(t, "dt1", "dt1", {}), InvalidArgument);
    EXPECT_THROW((void)export_heatmap(t, "dt1", "bogus", {}), InvalidArgument);
    EXPECT_THROW((void)export_heatmap(t, "dt1", "dt2", {{"gamma", 0.7}}), InvalidArgument);

    std::ostringstream os;
    io::write_heatmap_csv(os, sliced);
    EXPECT_EQ(os.str(), "dt1\\dt2,1,2\n1,,3.2000000000000002\n2,4.0999999999999996,4.2000000000000002\n");
}

TEST(Heatmap, SingleCell)
{
    const auto hm = export_heatmap({cell(0.1, 5, 0.0)}, "J", "h", {});
    ASSERT_EQ(hm.values.size(), 1u);
    ASSERT_EQ(hm.values[0].size(), 1u);
    EXPECT_EQ(*hm.values[0][0], 5.0);
}

TEST(RunSweep, DegenerateGridMatchesDirectRun)
{
    SweepGrid g;
    g.gamma_values = {0.6};
    g.j_values = {0.01};
    g.h_values = {0.1};
    g.dt1_values = {0.5};
    g.dt2_values = {2.0};
    g.n_realizations = 1;
    g.master_seed = 99;
    const auto table = run_sweep(g, small_task());
    ASSERT_EQ(table.size(), 1u);
    const auto direct = pipeline::run(small_task().data, cell_model(small_task().base, table[0].params),
                                      realization_seed(99, 0, 0));
    EXPECT_EQ(*table[0].vpts[0], direct.vpt_steps);
    EXPECT_TRUE(table[0].complete());
}

TEST(RunSweep, ScheduleIndependent)
{
    SweepGrid g;
    g.gamma_values = {0.3, 0.6};
    g.j_values = {0.01, 1.0};
    g.h_values = {0.1};
    g.dt1_values = {0.5, 2.0};
    g.dt2_values = {1.0};
    g.n_realizations = 2;
    const auto one = sweep_csv(run_sweep(g, small_task(), 1));
    EXPECT_EQ(one, sweep_csv(run_sweep(g, small_task(), 2)));
    EXPECT_EQ(one, sweep_csv(run_sweep(g, small_task(), 8)));
}

TEST(RunSweep, CancellationLeavesIncompleteCells)
{
    SweepGrid g;
    g.gamma_values = {0.6};
    g.j_values = {0.01};
    g.h_values = {0.1};
    g.dt1_values = {0.5, 1.0};
    g.dt2_values = {2.0};
    g.n_realizations = 1;
    const std::atomic<bool> stop{true};
    const auto table = run_sweep(g, small_task(), 1, &stop);
    for (const auto& c : table) {
        EXPECT_FALSE(c.complete());
        EXPECT_TRUE(c.missing());
    }
}

TEST(RunSweep, FailuresBecomeMissing)
{
    SweepGrid g;
    g.gamma_values = {0.0};
    g.j_values = {0.01};
    g.h_values = {0.1};
    g.dt1_values = {0.0};
    g.multiplexed = false;
    g.n_realizations = 2;
    const auto table = run_sweep(g, small_task());
    EXPECT_TRUE(table[0].missing());
    EXPECT_EQ(table[0].n_ok, 0);
    EXPECT_TRUE(table[0].complete());
}
