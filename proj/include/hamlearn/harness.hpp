#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "hamlearn/dataset.hpp"
#include "hamlearn/fisher.hpp"
#include "hamlearn/pauli.hpp"
#include "hamlearn/recovery.hpp"

namespace hamlearn {

// Full description of one ensemble experiment: model family, schedule,
// measurement budget, and recovery settings shared by every cell of a sweep.
struct ExperimentConfig {
    Family family = Family::XYZ;
    int n = 3;
    Schedule schedule{};  // dt = 0.01, alpha = 1.0, m_t = 8
    int R = 32;
    int K = 25;
    int S = 1;
    int realizations = 5;
    std::uint64_t master_seed = 1;
    std::optional<GaussianDisorder> disorder;
    RecoveryConfig recovery{};
    // Prefix mode reuses one dataset per realization, restricting to records
    // with j <= m; independent mode regenerates a fresh dataset per m.
    bool independent_prefixes = false;
    int jobs = 1;
};

// One recovered point of the epsilon-vs-total-time curve.
struct PrefixPoint {
    int realization = 0;  // 1-based
    int m = 0;            // schedule prefix length
    double total_time = 0.0;
    double epsilon = 0.0;
    bool diverged = false;
};

// One sweep cell: a single axis value (alpha or R) with its pooled points and
// power-law fit epsilon ~ T_tot^{-beta}.
struct SweepCell {
    double axis_value = 0.0;
    double beta = 0.0;
    double beta_stderr = 0.0;
    int n_points = 0;  // points entering the fit
    std::uint64_t seed = 0;
    std::vector<PrefixPoint> points;
    bool ok = false;
    std::string error;
};

struct SweepResult {
    std::vector<SweepCell> cells;
    int realizations = 0;
};

// Runs fn(i) for i in [0, count) across up to jobs threads. Deterministic
// output requires each task to write only its own slot; the first exception
// is captured and rethrown after all threads join.
void parallel_for(int count, int jobs, const std::function<void(int)>& fn);

// Recovery over growing schedule prefixes for one model realization.
// cell_index and realization feed the seed derivation so every cell of a
// sweep is independently reproducible; the model itself is drawn from
// (master_seed, realization) only, so cells of one sweep share model draws.
std::vector<PrefixPoint> recovery_vs_total_time(const ModelHamiltonian& H_true,
                                                const ExperimentConfig& cfg, int cell_index,
                                                int realization);

// Model for one realization: seed derived from (master_seed, realization).
ModelHamiltonian realization_model(const ExperimentConfig& cfg, int realization);

// Fits beta (epsilon ~ T_tot^{-beta}) from pooled points, skipping diverged
// or non-finite entries; requires >= 3 usable points.
bool fit_beta(const std::vector<PrefixPoint>& points, double& beta, double& beta_stderr,
              int& n_points, std::string& error);

// Sweeps over the scheduling exponent (cells share model realizations).
SweepResult sweep_alpha(const ExperimentConfig& cfg, const std::vector<double>& alphas);

// Sweeps over the spread-ensemble size R at fixed alpha.
SweepResult sweep_spread(const ExperimentConfig& cfg, const std::vector<int>& spread_counts);

// CSV emitters. Sweep rows: axis_value,beta,beta_stderr,n_points,seed with
// nan beta on failed fits. Point rows carry the raw (T_tot, epsilon) curve.
std::string sweep_csv(const SweepResult& result);
std::string sweep_points_csv(const SweepResult& result);
std::string fisher_csv(const FisherReport& report);

// Writes text to path via a temp file + rename so readers never observe a
// partially written file.
void write_file_atomic(const std::string& path, const std::string& text);

}  // namespace hamlearn
