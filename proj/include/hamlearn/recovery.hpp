#pragma once

#include <cstdint>
#include <stdexcept>
#include <utility>
#include <vector>

#include "hamlearn/dataset.hpp"

namespace hamlearn {

struct NetActivations {
    Eigen::VectorXd a1;
    Eigen::VectorXd a2;
    Eigen::VectorXd y;
};

// Overparametrized embedding of the candidate Hamiltonian: a fixed constant
// input pushed through two tanh layers and a linear head of width d^2. The
// network input never changes; its weights are the optimization variables.
class EmbeddingNet {
public:
    EmbeddingNet(int output_dim, int hidden1, int hidden2, double input_c, double input_p,
                 double weight_init_scale, std::uint64_t seed);

    int output_dim() const { return static_cast<int>(b3_.size()); }
    int num_params() const;

    void forward(NetActivations& acts) const;
    Eigen::VectorXd forward() const;
    // Pulls an output-space gradient back to a flat parameter gradient;
    // acts must come from forward() at the current weights.
    Eigen::VectorXd backward(const NetActivations& acts, const Eigen::VectorXd& gy) const;

    Eigen::VectorXd params() const;
    void set_params(const Eigen::VectorXd& flat);

private:
    Eigen::VectorXd x_;
    Eigen::MatrixXd W1_, W2_, W3_;
    Eigen::VectorXd b1_, b2_, b3_;
};

// y (length d^2) -> traceless Hermitian d x d matrix: first d entries fill the
// real diagonal, then (re, im) pairs fill the strict lower triangle row-major
// over i > j; the upper triangle is the conjugate; finally (tr/d) I is
// subtracted. Measurement probabilities cannot see the trace component, so
// candidates live in the traceless gauge throughout.
Matrix assemble_hermitian(const Eigen::VectorXd& y);

// Adjoint of assemble_hermitian: maps the matrix-space gradient Gamma
// (defined by dLoss = 2 Re sum_uv Gamma_uv dH_uv) to d(loss)/dy.
Eigen::VectorXd assemble_hermitian_pullback(const Matrix& gamma);

struct RecoveryConfig {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double adam_eps = 1e-8;
    int max_iterations = 5000;
    int convergence_window = 50;
    double convergence_threshold = 1e-6;
    double p_floor = kProbabilityFloor;
    double weight_init_scale = 1.0;
    int hidden1 = 200;
    int hidden2 = 400;
    double input_c = 1.0;
    double input_p = 0.0;
    std::uint64_t seed = 0;
};

std::string recovery_config_to_json(const RecoveryConfig& cfg);
RecoveryConfig recovery_config_from_json(const std::string& text);

struct RecoveryResult {
    Matrix h_hat;
    std::vector<double> loss_trace;
    double epsilon;  // NaN when the dataset carries no true model
    int iterations;
    bool converged;
};

std::string recovery_result_to_json(const RecoveryResult& result, const RecoveryConfig& cfg,
                                    const std::string& dataset_fingerprint);

struct RecoveryDivergence : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Mean negative log-likelihood of the dataset's records under candidate H,
// with probabilities floored inside the log. One eigendecomposition of H is
// shared across all records.
double nll_loss(const Matrix& H, const MeasurementDataset& ds, double p_floor = kProbabilityFloor);

// Loss and its analytic gradient over all net weights, chained through the
// Hermitian assembly and the Daleckii-Krein derivative of exp(-iHt).
std::pair<double, Eigen::VectorXd> loss_gradient(const EmbeddingNet& net,
                                                 const MeasurementDataset& ds,
                                                 double p_floor = kProbabilityFloor);

RecoveryResult run_recovery(const MeasurementDataset& ds, const RecoveryConfig& cfg);

// Mean absolute entrywise deviation over all d^2 entries, after projecting
// both matrices to the traceless gauge.
double reconstruction_error(const Matrix& H_true, const Matrix& H_hat);

}  // namespace hamlearn
