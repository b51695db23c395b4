#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include "skynoma/experiment.hpp"

using namespace skynoma;
namespace fs = std::filesystem;

namespace {

ExperimentPlan plan_of(const std::string& text) {
    std::istringstream in(text);
    return parse_plan(in);
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("skynoma_test_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

int run_cli(const std::string& args) {
    const std::string cmd = std::string(SKYNOMA_CLI) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST(Plan, RangeSweepExpands) {
    const auto p = plan_of("sweep.noma.r1 = 0.1:0.1:2.4\nplan.metrics = OP_D1\nplan.engines = both\n");
    ASSERT_EQ(p.sweeps.size(), 1u);
    EXPECT_EQ(p.sweeps[0].values.size(), 24u);
    EXPECT_EQ(p.sweeps[0].values.front(), "0.1");
    EXPECT_EQ(p.sweeps[0].values.back(), "2.4");
    EXPECT_EQ(p.engines.size(), 2u);
}

TEST(Plan, SweepsSortedByPathAndGridOrdered) {
    const auto p = plan_of("sweep.scheme.type = DT, RT\nsweep.geometry.dist_sd1 = 20, 400\n");
    ASSERT_EQ(p.sweeps.size(), 2u);
    EXPECT_EQ(p.sweeps[0].path, "geometry.dist_sd1");
    EXPECT_EQ(p.sweeps[1].path, "scheme.type");
    const auto pts = sweep_points(p);
    ASSERT_EQ(pts.size(), 4u);
    EXPECT_EQ(pts[1], (SweepPoint{"20", "RT"}));
}

TEST(Plan, UnknownPathNamed) {
    try {
        plan_of("sweep.noma.r7 = 1, 2\n");
        FAIL();
    } catch (const InvalidConfig& e) {
        EXPECT_NE(std::string(e.what()).find("noma.r7"), std::string::npos);
    }
    EXPECT_THROW(plan_of("plan.metrics = OP_D3\n"), InvalidConfig);
    EXPECT_THROW(plan_of("plan.engines = quantum\n"), InvalidConfig);
    EXPECT_THROW(plan_of("plan.colour = red\n"), InvalidConfig);
    EXPECT_THROW(plan_of("noma.a1 = 2\n"), InvalidConfig);
}

TEST(Plan, BadSweepValueFailsAtItsPoint) {
    const auto p = plan_of("sweep.noma.a1 = 0.5, 1.5\n");
    EXPECT_NO_THROW(config_at(p, {"0.5"}));
    EXPECT_THROW(config_at(p, {"1.5"}), InvalidConfig);
}

TEST(Experiment, EmptySweepSingleRow) {
    auto p = plan_of("plan.metrics = OP_D1\n");
    const auto rows = run_experiment_rows(p);
    ASSERT_EQ(rows.size(), 1u);
    const std::string csv = results_csv(p, rows);
    EXPECT_EQ(csv.substr(0, csv.find('\n')), "metric,engine,value,half_width,config_hash");
    EXPECT_EQ(rows[0].config_hash, config_hash(p.base));
}

TEST(Experiment, CsvLayoutAndRecomputableHash) {
    auto p = plan_of(
        "scheme.type = DT\nsweep.noma.r1 = 0.5, 1\nplan.metrics = OP_D1, OP_D2\nplan.engines = both\n"
        "plan.trials = 300\nplan.seed = 3\ngeometry.window_radius = 3000\n");
    const auto rows = run_experiment_rows(p);
    ASSERT_EQ(rows.size(), 2u * 2u * 2u);
    const std::string csv = results_csv(p, rows);
    std::istringstream in(csv);
    std::string header;
    std::getline(in, header);
    EXPECT_EQ(header, "noma.r1,metric,engine,value,half_width,config_hash");
    std::string line;
    int n = 0;
    while (std::getline(in, line)) {
        ++n;
        const bool mc = line.find(",mc,") != std::string::npos;
        // Analytical rows leave the half-width empty.
        EXPECT_EQ(line.find(",,") != std::string::npos, !mc) << line;
    }
    EXPECT_EQ(n, 8);
    for (const auto& r : rows) {
        SystemConfig c = p.base;
        set_field(c, "noma.r1", r.point[0]);
        EXPECT_EQ(config_hash(c), r.config_hash);
    }
}

TEST(Experiment, SignificantDigits) {
    EXPECT_EQ(format_sig10(1.0 / 3.0), "0.3333333333");
    EXPECT_EQ(format_sig10(2.0), "2");
    EXPECT_EQ(format_sig10(kInf), "inf");
    EXPECT_EQ(format_cell("0.30000000000000004"), "0.3");
    EXPECT_EQ(format_cell("NTFP"), "NTFP");
}

TEST(Experiment, RerunIsByteIdentical) {
    const fs::path a = scratch("rerun_a"), b = scratch("rerun_b");
    auto p = plan_of("sweep.noma.r1 = 0.5, 1\nplan.engines = both\nplan.trials = 200\ngeometry.window_radius = 3000\n");
    p.output_dir = a.string();
    run_experiment(p);
    p.output_dir = b.string();
    run_experiment(p);
    EXPECT_EQ(slurp(a / "results.csv"), slurp(b / "results.csv"));
    EXPECT_TRUE(fs::exists(a / "plot.py"));
    EXPECT_NE(slurp(a / "plot.py").find("results.csv"), std::string::npos);
}

TEST(Experiment, UnwritableOutputIsIoError) {
    auto p = plan_of("");
    p.output_dir = "/proc/skynoma_cannot_write_here";
    EXPECT_THROW(run_experiment(p), IoError);
}

TEST(Summary, BestPerDistanceWithTieBreak) {
    auto p = plan_of(
        "sweep.deployment.platform = NTFP, RSU\nsweep.scheme.type = DT, RT, HT\n"
        "sweep.geometry.dist_sd1 = 20, 400, 3000\nsweep.geometry.dist_sd2 = 3010\nplan.metrics = OP_D1\n");
    const fs::path dir = scratch("summary");
    p.output_dir = dir.string();
    run_experiment(p);
    const CsvTable t = read_csv(dir / "results.csv");
    const std::string out = summarize_best(t, {true, User::d1, 1e-3});
    EXPECT_EQ(out.rfind("# objective=min OP_D1", 0), 0u);
    EXPECT_NE(out.find("DT<RT<HT then NTFP<RSU"), std::string::npos);
    std::istringstream in(out);
    std::string line;
    std::getline(in, line);
    std::getline(in, line);
    EXPECT_EQ(line, "geometry.dist_sd1,geometry.dist_sd2,best,value");
    std::getline(in, line);
    EXPECT_EQ(line.substr(0, line.find(",", line.find(",") + 1)), "20,3010");
    EXPECT_NE(line.find("RSU+HT"), std::string::npos) << line;
    std::getline(in, line);
    // Far away the aerial relay wins; hybrid never loses to relaying alone.
    EXPECT_NE(line.find("NTFP+"), std::string::npos) << line;
    std::getline(in, line);
    // Once the direct path is dead, hybrid and relay tie and relay is preferred.
    EXPECT_NE(line.find("NTFP+RT"), std::string::npos) << line;
}

TEST(Summary, MissingDimensionsRejected) {
    CsvTable t;
    t.header = {"scheme.type", "metric", "engine", "value", "half_width", "config_hash"};
    t.rows = {{"DT", "OP_D1", "analytical", "0.5", "", "x"}};
    EXPECT_THROW(summarize_best(t, {}), InvalidConfig);
    t.header[0] = "deployment.platform";
    EXPECT_THROW(summarize_best(t, {}), InvalidConfig);
}

TEST(Summary, SingleCellDegeneratePlan) {
    CsvTable t;
    t.header = {"deployment.platform", "scheme.type", "metric", "engine", "value", "half_width", "config_hash"};
    t.rows = {{"RSU", "RT", "AAR_D1", "analytical", "0.7", "", "x"}};
    const std::string out = summarize_best(t, {false, User::d1, 1e-3});
    std::istringstream in(out);
    std::string line;
    int n = 0;
    while (std::getline(in, line)) ++n;
    EXPECT_EQ(n, 3);
    EXPECT_NE(out.find("RSU+RT,0.7"), std::string::npos);
}

TEST(Cli, ExitCodes) {
    const fs::path dir = scratch("cli");
    {
        std::ofstream(dir / "ok.cfg") << "noma.r1 = 0.7\n";
        std::ofstream(dir / "bad.cfg") << "noma.a1 = 1.2\n";
        std::ofstream(dir / "plan.txt") << "sweep.noma.r1 = 0.5, 1\nplan.metrics = OP_D1\n";
        std::ofstream(dir / "badplan.txt") << "sweep.noma.zz = 1\n";
    }
    EXPECT_EQ(run_cli("validate " + (dir / "ok.cfg").string()), 0);
    EXPECT_EQ(run_cli("validate " + (dir / "bad.cfg").string()), 2);
    EXPECT_EQ(run_cli("validate " + (dir / "missing.cfg").string()), 4);
    EXPECT_EQ(run_cli("crosspoints " + (dir / "ok.cfg").string()), 0);
    EXPECT_EQ(run_cli("run " + (dir / "badplan.txt").string()), 2);
    EXPECT_EQ(run_cli("run " + (dir / "plan.txt").string() + " --out " + (dir / "out").string()), 0);
    EXPECT_TRUE(fs::exists(dir / "out" / "results.csv"));
    EXPECT_EQ(run_cli("summarize " + (dir / "out").string() + " --objective op --user d1"), 2);
    EXPECT_EQ(run_cli("frobnicate"), 2);
}
