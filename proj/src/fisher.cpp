#include "hamlearn/fisher.hpp"

#include <cmath>
#include <stdexcept>

#include "hamlearn/numerics.hpp"

namespace hamlearn {

std::vector<double> schedule_times(const Schedule& s) {
    if (s.dt <= 0) throw std::invalid_argument("schedule_times: dt must be positive");
    if (s.alpha <= -1) throw std::invalid_argument("schedule_times: alpha must exceed -1");
    if (s.m_t < 1) throw std::invalid_argument("schedule_times: m_t must be positive");
    std::vector<double> times(static_cast<std::size_t>(s.m_t));
    for (int k = 1; k <= s.m_t; ++k)
        times[static_cast<std::size_t>(k - 1)] = s.dt * std::pow(static_cast<double>(k), s.alpha);
    return times;
}

double total_time(const Schedule& s) {
    KahanSum acc;
    for (double t : schedule_times(s)) acc.add(t);
    return acc.value();
}

ScalingLaw predicted_exponents(double alpha, double gamma0) {
    if (alpha <= -1) throw std::invalid_argument("predicted_exponents: alpha must exceed -1");
    double p = (alpha * gamma0 + 1.0) / (alpha + 1.0);
    return {gamma0, alpha, p, p / 2.0};
}

FitResult loglog_slope_fit(const std::vector<double>& xs, const std::vector<double>& ys) {
    if (xs.size() != ys.size()) throw std::invalid_argument("loglog_slope_fit: length mismatch");
    std::size_t n = xs.size();
    if (n < 3) throw std::invalid_argument("loglog_slope_fit: need at least 3 points");
    std::vector<double> lx(n), ly(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (xs[i] <= 0 || ys[i] <= 0)
            throw std::invalid_argument("loglog_slope_fit: data must be strictly positive");
        lx[i] = std::log(xs[i]);
        ly[i] = std::log(ys[i]);
    }
    double mx = kahan_total(lx) / static_cast<double>(n);
    double my = kahan_total(ly) / static_cast<double>(n);
    KahanSum sxx, sxy;
    for (std::size_t i = 0; i < n; ++i) {
        sxx.add((lx[i] - mx) * (lx[i] - mx));
        sxy.add((lx[i] - mx) * (ly[i] - my));
    }
    if (sxx.value() <= 0) throw std::invalid_argument("loglog_slope_fit: degenerate abscissae");
    double slope = sxy.value() / sxx.value();
    double intercept = my - slope * mx;
    KahanSum rss;
    for (std::size_t i = 0; i < n; ++i) {
        double r = ly[i] - intercept - slope * lx[i];
        rss.add(r * r);
    }
    double s2 = rss.value() / static_cast<double>(n - 2);
    return {slope, std::sqrt(s2 / sxx.value()), intercept};
}

double classical_fisher(const Eigen::VectorXd& probs, const Eigen::VectorXd& dprobs,
                        double p_floor) {
    if (probs.size() != dprobs.size())
        throw std::invalid_argument("classical_fisher: length mismatch");
    KahanSum acc;
    for (Eigen::Index b = 0; b < probs.size(); ++b)
        acc.add(dprobs(b) * dprobs(b) / std::max(probs(b), p_floor));
    return acc.value();
}

Eigen::MatrixXd fisher_matrix(const Eigen::VectorXd& probs, const Eigen::MatrixXd& dprobs,
                              double p_floor) {
    if (probs.size() != dprobs.rows())
        throw std::invalid_argument("fisher_matrix: outcome count mismatch");
    Eigen::Index q = dprobs.cols();
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(q, q);
    for (Eigen::Index b = 0; b < probs.size(); ++b) {
        double w = 1.0 / std::max(probs(b), p_floor);
        M.noalias() += w * dprobs.row(b).transpose() * dprobs.row(b);
    }
    return M;
}

FisherReport ensemble_cfi_curve(const ModelHamiltonian& H, const std::vector<Matrix>& directions,
                                const std::vector<double>& times, int R, int K,
                                std::uint64_t master_seed) {
    if (R < 1 || K < 1) throw std::invalid_argument("ensemble_cfi_curve: R and K must be >= 1");
    if (directions.empty()) throw std::invalid_argument("ensemble_cfi_curve: no directions");
    SpectralDecomposition sd = eig_hermitian(H.matrix());
    int n = H.n();
    auto n_dirs = static_cast<double>(directions.size());

    FisherReport report;
    report.times = times;
    report.R = R;
    report.K = K;
    report.seed = master_seed;
    report.samples.assign(times.size(), {});
    for (auto& s : report.samples) s.reserve(static_cast<std::size_t>(R) * K);

    bool want_matrix = times.size() == 1;
    Eigen::MatrixXd matrix_acc;
    if (want_matrix)
        matrix_acc = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(directions.size()),
                                           static_cast<Eigen::Index>(directions.size()));

    for (int r = 1; r <= R; ++r) {
        Rng state_rng(derive_seed(master_seed, {seed_stream::fisher, seed_stream::spread,
                                                static_cast<std::uint64_t>(r)}));
        SpreadState psi = sample_spread_state(n, state_rng);
        for (int k = 1; k <= K; ++k) {
            Rng basis_rng(derive_seed(master_seed, {seed_stream::fisher, seed_stream::bases,
                                                    static_cast<std::uint64_t>(r),
                                                    static_cast<std::uint64_t>(k)}));
            PauliBasis basis = sample_basis(n, basis_rng);
            for (std::size_t ti = 0; ti < times.size(); ++ti) {
                Vector evolved = evolve(psi.vector, sd, times[ti]);
                Eigen::VectorXd probs = outcome_probabilities(evolved, basis);
                Eigen::MatrixXd dp = probability_derivatives(psi.vector, sd, directions,
                                                             times[ti], basis);
                KahanSum per_dir;
                for (Eigen::Index a = 0; a < dp.cols(); ++a)
                    per_dir.add(classical_fisher(probs, dp.col(a)));
                report.samples[ti].push_back(per_dir.value() / n_dirs);
                if (want_matrix) matrix_acc += fisher_matrix(probs, dp);
            }
        }
    }

    auto n_samples = static_cast<double>(R) * K;
    for (std::size_t ti = 0; ti < times.size(); ++ti) {
        double mean = kahan_total(report.samples[ti]) / n_samples;
        KahanSum var;
        for (double v : report.samples[ti]) var.add((v - mean) * (v - mean));
        double stderr_mean = n_samples > 1
            ? std::sqrt(var.value() / (n_samples - 1.0) / n_samples)
            : 0.0;
        report.mean_cfi.push_back(mean);
        report.stderr_cfi.push_back(stderr_mean);
    }
    if (want_matrix) report.fisher_matrix = matrix_acc / n_samples;
    return report;
}

namespace {

// I_tot = Sum t_k^g0 and T_tot = Sum t_k by direct summation
std::pair<double, double> cumulative_sums(const Schedule& s, double gamma0) {
    KahanSum T, I;
    for (double t : schedule_times(s)) {
        T.add(t);
        I.add(std::pow(t, gamma0));
    }
    return {I.value(), T.value()};
}

}  // namespace

double empirical_cumulative_exponent(const Schedule& s, double gamma0) {
    constexpr int kPoints = 9;
    int lo = std::max(2, s.m_t / 8);
    if (s.m_t < lo) throw std::invalid_argument("empirical_cumulative_exponent: m_t too small");
    std::vector<int> family;
    for (int i = 0; i < kPoints; ++i) {
        double f = static_cast<double>(i) / (kPoints - 1);
        int m = static_cast<int>(std::lround(lo * std::pow(static_cast<double>(s.m_t) / lo, f)));
        if (family.empty() || m > family.back()) family.push_back(m);
    }
    std::vector<double> Is, Ts;
    for (int m : family) {
        auto [I, T] = cumulative_sums({s.dt, s.alpha, m}, gamma0);
        Is.push_back(I);
        Ts.push_back(T);
    }
    return loglog_slope_fit(Ts, Is).slope;
}

double pointwise_cumulative_exponent(const Schedule& s, double gamma0) {
    auto [I, T] = cumulative_sums(s, gamma0);
    double p = predicted_exponents(s.alpha, gamma0).p;
    double C = std::pow(s.dt, gamma0) / (s.alpha * gamma0 + 1.0)
             * std::pow((s.alpha + 1.0) / s.dt, p);
    return std::log(I / C) / std::log(T);
}

DiagonalizationScan diagonalization_scan(const ModelHamiltonian& H,
                                         const std::vector<Matrix>& directions, double t,
                                         const std::vector<int>& R_list, int K,
                                         std::uint64_t seed) {
    if (directions.size() < 2)
        throw std::invalid_argument("diagonalization_scan: need at least two directions");
    SpectralDecomposition sd = eig_hermitian(H.matrix());
    int n = H.n();
    auto q = static_cast<Eigen::Index>(directions.size());

    DiagonalizationScan scan;
    scan.R_list = R_list;
    for (int R : R_list) {
        if (R < 1) throw std::invalid_argument("diagonalization_scan: R must be >= 1");
        Eigen::MatrixXd M = Eigen::MatrixXd::Zero(q, q);
        for (int r = 1; r <= R; ++r) {
            Rng state_rng(derive_seed(seed, {seed_stream::fisher, seed_stream::spread,
                                             static_cast<std::uint64_t>(R),
                                             static_cast<std::uint64_t>(r)}));
            SpreadState psi = sample_spread_state(n, state_rng);
            for (int k = 1; k <= K; ++k) {
                Rng basis_rng(derive_seed(seed, {seed_stream::fisher, seed_stream::bases,
                                                 static_cast<std::uint64_t>(R),
                                                 static_cast<std::uint64_t>(r),
                                                 static_cast<std::uint64_t>(k)}));
                PauliBasis basis = sample_basis(n, basis_rng);
                Vector evolved = evolve(psi.vector, sd, t);
                Eigen::VectorXd probs = outcome_probabilities(evolved, basis);
                Eigen::MatrixXd dp = probability_derivatives(psi.vector, sd, directions, t, basis);
                M += fisher_matrix(probs, dp);
            }
        }
        M /= static_cast<double>(R) * K;

        KahanSum off_raw, off_norm, diag;
        for (Eigen::Index j = 0; j < q; ++j) {
            diag.add(M(j, j));
            for (Eigen::Index l = 0; l < q; ++l) {
                if (j == l) continue;
                off_raw.add(std::abs(M(j, l)));
                off_norm.add(std::abs(M(j, l)) / std::sqrt(M(j, j) * M(l, l)));
            }
        }
        auto n_off = static_cast<double>(q) * (q - 1);
        scan.rho_raw.push_back(off_raw.value() / n_off / (diag.value() / static_cast<double>(q)));
        scan.rho_normalized.push_back(off_norm.value() / n_off);
        scan.min_diagonal.push_back(M.diagonal().minCoeff());
    }

    std::vector<double> Rs(R_list.begin(), R_list.end());
    FitResult fit = loglog_slope_fit(Rs, scan.rho_raw);
    scan.eta = -fit.slope;
    scan.eta_stderr = fit.stderr_slope;
    return scan;
}

}  // namespace hamlearn
