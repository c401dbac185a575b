#include "qrc/config.hpp"
#include "qrc/io.hpp"

#include <gtest/gtest.h>

#include <sstream>

using namespace qrc;
using nlohmann::json;

TEST(Config, EmptyObjectGivesDefaults)
{
    const auto c = config::from_json(json::object());
    EXPECT_EQ(c.system, config::SystemKind::lorenz63);
    EXPECT_EQ(c.dt_sample(), 0.02);
    EXPECT_EQ(c.n_test(), 500);
    EXPECT_EQ(c.model_config().times, (std::vector<double>{0.5, 2.0}));
    EXPECT_EQ(c.ns5.system.variant, dynsys::Ns5Variant::conserving);
    EXPECT_EQ(c.sweep.n_realizations, 30);
    EXPECT_EQ(c.metric.epsilon, 0.3);
}

TEST(Config, SystemDependentDefaults)
{
    const auto c = config::from_json({{"system", "ns5"}});
    EXPECT_EQ(c.dt_sample(), 0.01);
    EXPECT_EQ(c.n_test(), 2500);
    EXPECT_EQ(c.model_config().times, (std::vector<double>{2.0, 1.0}));
    const auto d = config::from_json({{"system", "ns5"}, {"model", {{"times", {4.0}}}}, {"dataset", {{"n_test", 7}}}});
    EXPECT_EQ(d.model_config().times, (std::vector<double>{4.0}));
    EXPECT_EQ(d.n_test(), 7);
}

TEST(Config, UnknownKeysRejected)
{
    EXPECT_THROW((void)config::from_json({{"bogus", 1}}), InvalidArgument);
    EXPECT_THROW((void)config::from_json({{"model", {{"gama", 0.5}}}}), InvalidArgument);
    EXPECT_THROW((void)config::from_json({{"system", "duffing"}}), InvalidArgument);
    EXPECT_THROW((void)config::from_json({{"model", {{"gamma", "high"}}}}), InvalidArgument);
    EXPECT_THROW((void)config::from_json({{"ns5", {{"variant", "x"}}}}), InvalidArgument);
    EXPECT_THROW((void)config::from_json({{"heatmap", {{"axes", {"dt1"}}}}}), InvalidArgument);
    EXPECT_THROW((void)config::from_json(json::array()), InvalidArgument);
}

TEST(Config, RoundTripThroughJson)
{
    const json in{{"system", "ns5"},
                  {"ns5", {{"forcing", 28.718}, {"variant", "as_written"}}},
                  {"model", {{"gamma", 0.95}, {"times", {0.25, 16.0}}, {"J", 1e-3}}},
                  {"sweep", {{"gamma", {0.1, 0.2}}, {"n_realizations", 3}}},
                  {"heatmap", {{"axes", {"J", "h"}}, {"slice", {{"dt1", 2.0}}}}},
                  {"seed", 12345678901234ULL}};
    const auto c = config::from_json(in);
    const auto out = config::to_json(c);
    const auto again = config::from_json(out);
    EXPECT_EQ(config::to_json(again).dump(), out.dump());
    EXPECT_EQ(again.seed, 12345678901234ULL);
    EXPECT_EQ(again.sweep.master_seed, 12345678901234ULL);
    EXPECT_EQ(again.ns5.system.variant, dynsys::Ns5Variant::as_written);
    EXPECT_EQ(again.heatmap.slice.at("dt1"), 2.0);
}

TEST(Config, ManifestSectionIgnored)
{
    json m = config::to_json(config::from_json(json::object()));
    m["manifest"] = {{"version", "x"}, {"sigmas", {1.0, 2.0}}};
    EXPECT_NO_THROW((void)config::from_json(m));
}

TEST(Config, ShortestRoundTripDoubles)
{
    const double x = 0.1 + 0.2;
    const auto c = config::from_json({{"model", {{"ridge_lambda", x}}}});
    const auto back = config::from_json(json::parse(config::to_json(c).dump()));
    EXPECT_EQ(back.model.ridge_lambda, x);
}

TEST(Config, BifurcationRange)
{
    auto c = config::from_json(json::object());
    const auto f = c.bifurcation_forcing();
    EXPECT_EQ(f.front(), 22.0);
    EXPECT_NEAR(f.back(), 35.0, 1e-9);
    EXPECT_EQ(f.size(), 131u);
    c.bifurcation.forcing = {24.0};
    EXPECT_EQ(c.bifurcation_forcing(), std::vector<double>{24.0});
}

TEST(Csv, SeventeenDigits)
{
    EXPECT_EQ(io::fmt(0.1), "0.10000000000000001");
    EXPECT_EQ(io::fmt(std::optional<double>{}), "");
    EXPECT_EQ(io::fmt(2.0), "2");
}

TEST(Csv, TrajectoryRoundTrip)
{
    dynsys::Trajectory t;
    t.dt_sample = 0.1;
    t.times = Eigen::VectorXd::LinSpaced(5, 1.0, 1.4);
    t.states = Eigen::MatrixXd::Random(5, 2);
    std::stringstream ss;
    io::write_trajectory_csv(ss, t, {"a", "b"});
    EXPECT_EQ(ss.str().substr(0, 6), "t,a,b\n");
    const auto back = io::read_trajectory_csv(ss);
    EXPECT_EQ(back.states, t.states);
    EXPECT_EQ(back.times, t.times);
    EXPECT_NEAR(back.dt_sample, 0.1, 1e-15);
}

TEST(Csv, TrajectoryReaderErrors)
{
    std::stringstream header("x,a\n0,1\n1,2\n");
    EXPECT_THROW((void)io::read_trajectory_csv(header), InvalidArgument);
    std::stringstream ragged("t,a\n0,1\n1,2,3\n");
    EXPECT_THROW((void)io::read_trajectory_csv(ragged), InvalidArgument);
    std::stringstream uneven("t,a\n0,1\n1,2\n3,3\n");
    EXPECT_THROW((void)io::read_trajectory_csv(uneven), InvalidArgument);
    std::stringstream junk("t,a\n0,1\n1,abc\n");
    EXPECT_THROW((void)io::read_trajectory_csv(junk), InvalidArgument);
    EXPECT_THROW((void)io::read_trajectory_csv(std::string("/nonexistent/path.csv")), InvalidArgument);
}

TEST(Csv, BifurcationAndForecastLayouts)
{
    std::ostringstream b;
    io::write_bifurcation_csv(b, {{24.0, {1.5, 2.5}, std::nullopt}, {25.0, {}, std::string("x")}});
    EXPECT_EQ(b.str(), "F,extremum\n24,1.5\n24,2.5\n");

    std::ostringstream f;
    Eigen::MatrixXd p(1, 2), t(1, 2);
    p << 1, 2;
    t << 3, 4;
    io::write_forecast_csv(f, p, t, Eigen::VectorXd::Constant(1, 0.5), {"x", "y"});
    EXPECT_EQ(f.str(), "step,t,x_pred,x_true,y_pred,y_true\n0,0.5,1,3,2,4\n");
}

TEST(Csv, SweepLayout)
{
    sweep::SweepCell c;
    c.params = {0.6, 0.01, 0.1, 0.5, std::nullopt};
    c.mean_vpt = 12.5;
    c.rel_err = 0.25;
    c.n_ok = 3;
    std::ostringstream os;
    io::write_sweep_csv(os, {c});
    EXPECT_EQ(os.str(), "gamma,J,h,dt1,dt2,mean_vpt,rel_err,n_ok\n0.59999999999999998,0.01,0.10000000000000001,0.5,,12.5,0.25,3\n");
}
