#include "hamlearn/harness.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "hamlearn/numerics.hpp"
#include "hamlearn/rng.hpp"

namespace hamlearn {

namespace {

std::uint64_t u64(int v) { return static_cast<std::uint64_t>(v); }

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

MeasurementDataset restrict_prefix(const MeasurementDataset& full, int m) {
    MeasurementDataset sub = full;
    sub.schedule.m_t = m;
    sub.records.clear();
    sub.weights.clear();
    for (std::size_t i = 0; i < full.records.size(); ++i) {
        if (full.records[i].j > m) continue;
        sub.records.push_back(full.records[i]);
        if (!full.weights.empty()) sub.weights.push_back(full.weights[i]);
    }
    return sub;
}

}  // namespace

void parallel_for(int count, int jobs, const std::function<void(int)>& fn) {
    if (count <= 0) return;
    int workers = std::max(1, std::min(jobs, count));
    if (workers == 1) {
        for (int i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    auto drain = [&] {
        while (!failed.load(std::memory_order_relaxed)) {
            int i = next.fetch_add(1, std::memory_order_relaxed);
            if (i >= count) return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
                failed.store(true, std::memory_order_relaxed);
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) pool.emplace_back(drain);
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

ModelHamiltonian realization_model(const ExperimentConfig& cfg, int realization) {
    ParameterSpec spec;
    spec.family = cfg.family;
    spec.n = cfg.n;
    spec.disorder = cfg.disorder;
    spec.seed = derive_seed(cfg.master_seed, {seed_stream::model, u64(realization)});
    return build_model(spec);
}

std::vector<PrefixPoint> recovery_vs_total_time(const ModelHamiltonian& H_true,
                                                const ExperimentConfig& cfg, int cell_index,
                                                int realization) {
    std::vector<double> times = schedule_times(cfg.schedule);
    std::vector<PrefixPoint> out;
    out.reserve(times.size());

    std::optional<MeasurementDataset> full;
    if (!cfg.independent_prefixes) {
        std::uint64_t seed =
            derive_seed(cfg.master_seed, {seed_stream::cell, u64(cell_index), u64(realization)});
        full = generate_dataset(H_true, cfg.R, cfg.K, cfg.S, cfg.schedule, seed);
    }

    KahanSum t_total;
    for (int m = 1; m <= cfg.schedule.m_t; ++m) {
        t_total.add(times[static_cast<std::size_t>(m - 1)]);
        MeasurementDataset sub;
        if (cfg.independent_prefixes) {
            Schedule s = cfg.schedule;
            s.m_t = m;
            std::uint64_t seed = derive_seed(
                cfg.master_seed, {seed_stream::cell, u64(cell_index), u64(realization), u64(m)});
            sub = generate_dataset(H_true, cfg.R, cfg.K, cfg.S, s, seed);
        } else {
            sub = restrict_prefix(*full, m);
        }
        RecoveryConfig rc = cfg.recovery;
        rc.seed =
            derive_seed(cfg.master_seed, {seed_stream::net, u64(cell_index), u64(realization), u64(m)});

        PrefixPoint pt;
        pt.realization = realization;
        pt.m = m;
        pt.total_time = t_total.value();
        pt.epsilon = std::numeric_limits<double>::quiet_NaN();
        try {
            pt.epsilon = run_recovery(sub, rc).epsilon;
        } catch (const RecoveryDivergence&) {
            pt.diverged = true;
        }
        out.push_back(pt);
    }
    return out;
}

bool fit_beta(const std::vector<PrefixPoint>& points, double& beta, double& beta_stderr,
              int& n_points, std::string& error) {
    std::vector<double> t, eps;
    for (const auto& pt : points) {
        if (pt.diverged || !std::isfinite(pt.epsilon) || pt.epsilon <= 0 || pt.total_time <= 0)
            continue;
        t.push_back(pt.total_time);
        eps.push_back(pt.epsilon);
    }
    n_points = static_cast<int>(t.size());
    beta = std::numeric_limits<double>::quiet_NaN();
    beta_stderr = std::numeric_limits<double>::quiet_NaN();
    if (n_points < 3) {
        error = "fewer than 3 usable points";
        return false;
    }
    FitResult fit = loglog_slope_fit(t, eps);
    beta = -fit.slope;
    beta_stderr = fit.stderr_slope;
    error.clear();
    return true;
}

namespace {

SweepResult run_sweep(const ExperimentConfig& base, const std::vector<double>& axis,
                      const std::function<void(ExperimentConfig&, double)>& apply) {
    if (axis.empty()) throw std::invalid_argument("sweep needs at least one axis value");
    if (base.realizations < 1) throw std::invalid_argument("sweep needs at least one realization");
    int cells = static_cast<int>(axis.size());
    int reals = base.realizations;

    std::vector<std::vector<std::vector<PrefixPoint>>> points(
        static_cast<std::size_t>(cells),
        std::vector<std::vector<PrefixPoint>>(static_cast<std::size_t>(reals)));

    parallel_for(cells * reals, base.jobs, [&](int task) {
        int ci = task / reals;
        int realization = task % reals + 1;
        ExperimentConfig cfg = base;
        apply(cfg, axis[static_cast<std::size_t>(ci)]);
        ModelHamiltonian model = realization_model(cfg, realization);
        points[static_cast<std::size_t>(ci)][static_cast<std::size_t>(realization - 1)] =
            recovery_vs_total_time(model, cfg, ci, realization);
    });

    SweepResult result;
    result.realizations = reals;
    result.cells.resize(static_cast<std::size_t>(cells));
    for (int ci = 0; ci < cells; ++ci) {
        SweepCell& cell = result.cells[static_cast<std::size_t>(ci)];
        cell.axis_value = axis[static_cast<std::size_t>(ci)];
        cell.seed = base.master_seed;
        for (int r = 0; r < reals; ++r)
            for (const auto& pt : points[static_cast<std::size_t>(ci)][static_cast<std::size_t>(r)])
                cell.points.push_back(pt);
        cell.ok = fit_beta(cell.points, cell.beta, cell.beta_stderr, cell.n_points, cell.error);
    }
    return result;
}

}  // namespace

SweepResult sweep_alpha(const ExperimentConfig& cfg, const std::vector<double>& alphas) {
    for (double a : alphas)
        if (!(a > -1.0)) throw std::invalid_argument("sweep_alpha: alpha must exceed -1");
    return run_sweep(cfg, alphas,
                     [](ExperimentConfig& c, double a) { c.schedule.alpha = a; });
}

SweepResult sweep_spread(const ExperimentConfig& cfg, const std::vector<int>& spread_counts) {
    std::vector<double> axis;
    axis.reserve(spread_counts.size());
    for (int r : spread_counts) {
        if (r < 1) throw std::invalid_argument("sweep_spread: R must be at least 1");
        axis.push_back(static_cast<double>(r));
    }
    return run_sweep(cfg, axis, [](ExperimentConfig& c, double r) {
        c.R = static_cast<int>(std::lround(r));
    });
}

std::string sweep_csv(const SweepResult& result) {
    std::ostringstream out;
    out << "axis_value,beta,beta_stderr,n_points,seed\n";
    for (const auto& cell : result.cells)
        out << fmt(cell.axis_value) << ',' << fmt(cell.beta) << ',' << fmt(cell.beta_stderr)
            << ',' << cell.n_points << ',' << cell.seed << '\n';
    return out.str();
}

std::string sweep_points_csv(const SweepResult& result) {
    std::ostringstream out;
    out << "axis_value,realization,m,total_time,epsilon,diverged\n";
    for (const auto& cell : result.cells)
        for (const auto& pt : cell.points)
            out << fmt(cell.axis_value) << ',' << pt.realization << ',' << pt.m << ','
                << fmt(pt.total_time) << ',' << fmt(pt.epsilon) << ',' << (pt.diverged ? 1 : 0)
                << '\n';
    return out.str();
}

std::string fisher_csv(const FisherReport& report) {
    std::ostringstream out;
    out << "t,mean_cfi,stderr_cfi,R,K,seed\n";
    for (std::size_t i = 0; i < report.times.size(); ++i)
        out << fmt(report.times[i]) << ',' << fmt(report.mean_cfi[i]) << ','
            << fmt(report.stderr_cfi[i]) << ',' << report.R << ',' << report.K << ','
            << report.seed << '\n';
    return out.str();
}

void write_file_atomic(const std::string& path, const std::string& text) {
    std::filesystem::path target(path);
    if (target.has_parent_path()) std::filesystem::create_directories(target.parent_path());
    std::filesystem::path tmp = target;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
        out << text;
        if (!out.flush()) throw std::runtime_error("write failed for " + tmp.string());
    }
    std::filesystem::rename(tmp, target);
}

}  // namespace hamlearn
