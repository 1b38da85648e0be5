#include <doctest.h>

#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <vector>

#include "hamlearn/harness.hpp"

using namespace hamlearn;

namespace {

// Small configuration that keeps every recovery cheap.
ExperimentConfig tiny_config() {
    ExperimentConfig cfg;
    cfg.family = Family::XYZ;
    cfg.n = 2;
    cfg.schedule = Schedule{0.05, 1.0, 3};
    cfg.R = 2;
    cfg.K = 2;
    cfg.S = 1;
    cfg.realizations = 2;
    cfg.master_seed = 11;
    cfg.recovery.hidden1 = 8;
    cfg.recovery.hidden2 = 8;
    cfg.recovery.max_iterations = 40;
    return cfg;
}

}  // namespace

TEST_SUITE("harness") {

TEST_CASE("parallel_for runs every index exactly once") {
    const int N = 97;
    std::vector<std::atomic<int>> hits(N);
    for (auto& h : hits) h = 0;
    parallel_for(N, 8, [&](int i) { hits[static_cast<std::size_t>(i)]++; });
    for (auto& h : hits) CHECK(h == 1);

    parallel_for(0, 4, [&](int) { FAIL("must not run"); });

    CHECK_THROWS_AS(parallel_for(10, 3,
                                 [](int i) {
                                     if (i == 4) throw std::runtime_error("boom");
                                 }),
                    std::runtime_error);
}

TEST_CASE("default configuration matches the desk preset") {
    ExperimentConfig cfg;
    CHECK(cfg.n == 3);
    CHECK(cfg.realizations == 5);
    CHECK(cfg.R == 32);
    CHECK(cfg.K == 25);
    CHECK(cfg.S == 1);
    CHECK(cfg.schedule.m_t == 8);
    CHECK(cfg.schedule.dt == 0.01);
    CHECK(cfg.schedule.alpha == 1.0);
}

TEST_CASE("realization models are independent of the sweep axis") {
    ExperimentConfig a = tiny_config();
    ExperimentConfig b = tiny_config();
    b.schedule.alpha = 0.3;
    b.R = 7;
    ModelHamiltonian ma = realization_model(a, 1);
    ModelHamiltonian mb = realization_model(b, 1);
    REQUIRE(ma.terms().size() == mb.terms().size());
    for (std::size_t i = 0; i < ma.terms().size(); ++i)
        CHECK(ma.terms()[i].coeff == mb.terms()[i].coeff);

    ModelHamiltonian other = realization_model(a, 2);
    bool differs = false;
    for (std::size_t i = 0; i < ma.terms().size(); ++i)
        differs = differs || ma.terms()[i].coeff != other.terms()[i].coeff;
    CHECK(differs);
}

TEST_CASE("prefix curve structure") {
    ExperimentConfig cfg = tiny_config();
    ModelHamiltonian model = realization_model(cfg, 1);
    std::vector<PrefixPoint> points = recovery_vs_total_time(model, cfg, 0, 1);
    REQUIRE(points.size() == 3);
    std::vector<double> times = schedule_times(cfg.schedule);
    double acc = 0;
    for (std::size_t i = 0; i < points.size(); ++i) {
        acc += times[i];
        CHECK(points[i].m == static_cast<int>(i) + 1);
        CHECK(points[i].realization == 1);
        CHECK(points[i].total_time == doctest::Approx(acc).epsilon(1e-14));
        CHECK_FALSE(points[i].diverged);
        CHECK(std::isfinite(points[i].epsilon));
    }
}

TEST_CASE("independent-prefix mode regenerates data per point") {
    ExperimentConfig cfg = tiny_config();
    ModelHamiltonian model = realization_model(cfg, 1);
    std::vector<PrefixPoint> prefix = recovery_vs_total_time(model, cfg, 0, 1);
    cfg.independent_prefixes = true;
    std::vector<PrefixPoint> indep = recovery_vs_total_time(model, cfg, 0, 1);
    REQUIRE(indep.size() == prefix.size());
    // Same time axis, different draws for the shorter prefixes.
    CHECK(indep.back().total_time == doctest::Approx(prefix.back().total_time));
    bool differs = false;
    for (std::size_t i = 0; i + 1 < indep.size(); ++i)
        differs = differs || indep[i].epsilon != prefix[i].epsilon;
    CHECK(differs);
}

TEST_CASE("beta fit on synthetic points") {
    std::vector<PrefixPoint> points;
    for (int r = 1; r <= 3; ++r) {
        for (int m = 1; m <= 5; ++m) {
            PrefixPoint pt;
            pt.realization = r;
            pt.m = m;
            pt.total_time = 0.01 * m * m;
            pt.epsilon = 2.0 * std::pow(pt.total_time, -0.7);
            points.push_back(pt);
        }
    }
    // Poison one point; the fit must skip it.
    points[4].diverged = true;
    points[4].epsilon = std::numeric_limits<double>::quiet_NaN();

    double beta = 0, beta_se = 0;
    int n_points = 0;
    std::string error;
    REQUIRE(fit_beta(points, beta, beta_se, n_points, error));
    CHECK(n_points == 14);
    CHECK(beta == doctest::Approx(0.7).epsilon(1e-10));
    CHECK(beta_se >= 0.0);

    std::vector<PrefixPoint> few(points.begin(), points.begin() + 2);
    CHECK_FALSE(fit_beta(few, beta, beta_se, n_points, error));
    CHECK_FALSE(error.empty());
    CHECK(std::isnan(beta));
}

TEST_CASE("alpha sweep shape, determinism, and scheduling independence") {
    ExperimentConfig cfg = tiny_config();
    std::vector<double> alphas = {0.5, 1.0};
    SweepResult serial = sweep_alpha(cfg, alphas);
    REQUIRE(serial.cells.size() == 2);
    CHECK(serial.realizations == 2);
    for (const auto& cell : serial.cells) {
        CHECK(cell.points.size() == 2u * 3u);  // realizations x prefixes
        CHECK(cell.seed == cfg.master_seed);
        CHECK(cell.ok);
        CHECK(std::isfinite(cell.beta));
        CHECK(cell.beta_stderr > 0.0);
        CHECK(cell.n_points >= 3);
    }
    CHECK(serial.cells[0].axis_value == 0.5);
    CHECK(serial.cells[1].axis_value == 1.0);

    ExperimentConfig parallel_cfg = cfg;
    parallel_cfg.jobs = 4;
    SweepResult parallel = sweep_alpha(parallel_cfg, alphas);
    CHECK(sweep_csv(parallel) == sweep_csv(serial));
    CHECK(sweep_points_csv(parallel) == sweep_points_csv(serial));

    CHECK_THROWS_AS(sweep_alpha(cfg, {-1.5}), std::invalid_argument);
    CHECK_THROWS_AS(sweep_alpha(cfg, {}), std::invalid_argument);
}

TEST_CASE("spread sweep varies R only") {
    ExperimentConfig cfg = tiny_config();
    SweepResult result = sweep_spread(cfg, {1, 3});
    REQUIRE(result.cells.size() == 2);
    CHECK(result.cells[0].axis_value == 1.0);
    CHECK(result.cells[1].axis_value == 3.0);
    for (const auto& cell : result.cells) CHECK(cell.points.size() == 6);
    CHECK_THROWS_AS(sweep_spread(cfg, {0}), std::invalid_argument);
}

TEST_CASE("CSV formats") {
    SweepResult result;
    result.realizations = 1;
    SweepCell cell;
    cell.axis_value = 0.3;
    cell.beta = 0.654;
    cell.beta_stderr = 0.01;
    cell.n_points = 12;
    cell.seed = 42;
    cell.ok = true;
    PrefixPoint pt;
    pt.realization = 1;
    pt.m = 2;
    pt.total_time = 0.03;
    pt.epsilon = 1.5;
    cell.points.push_back(pt);
    result.cells.push_back(cell);

    std::string csv = sweep_csv(result);
    CHECK(csv == "axis_value,beta,beta_stderr,n_points,seed\n0.3,0.654,0.01,12,42\n");
    std::string points = sweep_points_csv(result);
    CHECK(points ==
          "axis_value,realization,m,total_time,epsilon,diverged\n0.3,1,2,0.03,1.5,0\n");

    // Failed cells stay visible with nan markers.
    result.cells[0].ok = false;
    result.cells[0].beta = std::numeric_limits<double>::quiet_NaN();
    result.cells[0].beta_stderr = std::numeric_limits<double>::quiet_NaN();
    result.cells[0].n_points = 1;
    CHECK(sweep_csv(result).find("0.3,nan,nan,1,42") != std::string::npos);

    FisherReport report;
    report.times = {0.01};
    report.mean_cfi = {2.5};
    report.stderr_cfi = {0.5};
    report.R = 4;
    report.K = 3;
    report.seed = 9;
    CHECK(fisher_csv(report) == "t,mean_cfi,stderr_cfi,R,K,seed\n0.01,2.5,0.5,4,3,9\n");
}

TEST_CASE("atomic file writes") {
    namespace fs = std::filesystem;
    fs::path dir = fs::temp_directory_path() / "hamlearn_harness_test";
    fs::remove_all(dir);
    std::string target = (dir / "sub" / "out.csv").string();
    write_file_atomic(target, "hello\n");
    std::ifstream in(target);
    std::stringstream buf;
    buf << in.rdbuf();
    CHECK(buf.str() == "hello\n");
    CHECK_FALSE(fs::exists(target + ".tmp"));
    fs::remove_all(dir);
}

}
