#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "hamlearn/pauli.hpp"
#include "hamlearn/sim.hpp"

namespace hamlearn {

inline constexpr double kProbabilityFloor = 1e-12;

struct Schedule {
    double dt = 0.01;
    double alpha = 1.0;
    int m_t = 8;
};

// t_k = dt * k^alpha for k = 1..m_t, each computed directly (no cumulative rounding)
std::vector<double> schedule_times(const Schedule& s);
double total_time(const Schedule& s);

struct ScalingLaw {
    double gamma0;
    double alpha;
    double p;     // cumulative-information exponent (alpha*gamma0 + 1)/(alpha + 1)
    double beta;  // error exponent p/2
};

ScalingLaw predicted_exponents(double alpha, double gamma0);

struct FitResult {
    double slope;
    double stderr_slope;
    double intercept;
};

// OLS fit of ln y against ln x; stderr is the OLS standard error of the slope
FitResult loglog_slope_fit(const std::vector<double>& xs, const std::vector<double>& ys);

// Sum_b (dp_b)^2 / max(p_b, floor). Outcomes with p below the floor keep the
// floored denominator, so exact zeros with zero derivative contribute nothing.
double classical_fisher(const Eigen::VectorXd& probs, const Eigen::VectorXd& dprobs,
                        double p_floor = kProbabilityFloor);

// M_jk = Sum_b dp_bj dp_bk / max(p_b, floor); symmetric PSD Gram matrix whose
// diagonal equals classical_fisher per direction.
Eigen::MatrixXd fisher_matrix(const Eigen::VectorXd& probs, const Eigen::MatrixXd& dprobs,
                              double p_floor = kProbabilityFloor);

struct FisherReport {
    std::vector<double> times;
    std::vector<double> mean_cfi;                 // per time, averaged over directions and ensemble
    std::vector<double> stderr_cfi;               // standard error over the R*K ensemble
    std::vector<std::vector<double>> samples;     // per time, per (state, basis) sample
    std::optional<Eigen::MatrixXd> fisher_matrix; // ensemble mean, filled for single-time runs
    int R = 0;
    int K = 0;
    std::uint64_t seed = 0;
};

// Ensemble-averaged classical Fisher information with exact probabilities:
// for each probe time, averages over R spread states times K random product
// Pauli bases (fresh per state), and over the given parameter directions.
FisherReport ensemble_cfi_curve(const ModelHamiltonian& H, const std::vector<Matrix>& directions,
                                const std::vector<double>& times, int R, int K,
                                std::uint64_t master_seed);

// Effective cumulative-information exponent over a geometric family of
// schedule lengths (m_t/8 up to m_t): log-log regression of I_tot = Sum t_k^g0
// against T_tot = Sum t_k, both evaluated by direct summation.
double empirical_cumulative_exponent(const Schedule& s, double gamma0);

// Single-schedule effective exponent ln(I_tot / C) / ln(T_tot) with the
// closed-form prefactor C = dt^g0/(a*g0+1) * ((a+1)/dt)^p; its deviation from
// the predicted p decays like 1/m_t.
double pointwise_cumulative_exponent(const Schedule& s, double gamma0);

struct DiagonalizationScan {
    std::vector<int> R_list;
    std::vector<double> rho_raw;         // mean |offdiag| / mean diag of the ensemble Fisher matrix
    std::vector<double> rho_normalized;  // mean |M_jk| / sqrt(M_jj M_kk)
    std::vector<double> min_diagonal;    // smallest diagonal entry per R
    double eta;                          // fitted decay rho ~ R^(-eta)
    double eta_stderr;
};

DiagonalizationScan diagonalization_scan(const ModelHamiltonian& H,
                                         const std::vector<Matrix>& directions, double t,
                                         const std::vector<int>& R_list, int K,
                                         std::uint64_t seed);

}  // namespace hamlearn
