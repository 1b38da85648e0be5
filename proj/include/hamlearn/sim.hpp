#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "hamlearn/pauli.hpp"
#include "hamlearn/rng.hpp"

namespace hamlearn {

// Product probe state built from independent single-qubit Haar rotations
// Rz(xi) Ry(chi) Rz(phi) applied to |0>, one triple per qubit.
struct SpreadState {
    int n = 0;
    std::vector<std::array<double, 3>> angles;  // (xi, chi, phi) per qubit
    Vector vector;
};

SpreadState sample_spread_state(int n, Rng& rng);
SpreadState spread_state_from_angles(const std::vector<std::array<double, 3>>& angles);

struct PauliBasis {
    std::string axes;  // over {X, Y, Z}, one per qubit

    int n() const { return static_cast<int>(axes.size()); }
};

PauliBasis sample_basis(int n, Rng& rng);

struct SpectralDecomposition {
    Eigen::VectorXd eigenvalues;  // ascending
    Matrix eigenvectors;          // unitary, columns
};

SpectralDecomposition eig_hermitian(const Matrix& H);

// V diag(exp(-i lambda t)) V^dag |state>
Vector evolve(const Vector& state, const SpectralDecomposition& sd, double t);

// Per-qubit rotation taking the measured axis' eigenbasis to the computational
// basis: W_Z = I, W_X = Hadamard, W_Y = H S^dag with S^dag = diag(1, -i).
// Outcome bit 0 corresponds to the +1 eigenvalue of the measured axis.
void apply_basis_rotation(Vector& state, const PauliBasis& basis);
Matrix basis_rotation(const PauliBasis& basis);
// Applies the basis rotation to every column: returns W * M without forming W.
Matrix rotate_columns(Matrix M, const PauliBasis& basis);

// p(b) = |<b| W |state>|^2 over the 2^n bitstrings in lexicographic order
Eigen::VectorXd outcome_probabilities(const Vector& state, const PauliBasis& basis);

// Inverse-CDF sample over bitstrings in lexicographic order
std::uint64_t sample_outcome(const Eigen::VectorXd& probs, Rng& rng);

// Exact derivatives dp_b / dtheta_a of measured-outcome probabilities after
// evolution for time t, one column per generator direction. Uses the
// Daleckii-Krein spectral formula for the derivative of exp(-iHt), which is
// exact at any t (not a short-time expansion); degenerate eigenvalue pairs
// take the analytic limit -i t exp(-i lambda t).
Eigen::MatrixXd probability_derivatives(const Vector& psi0, const SpectralDecomposition& sd,
                                        const std::vector<Matrix>& directions, double t,
                                        const PauliBasis& basis);
Eigen::MatrixXd probability_derivatives(const Vector& psi0, const ModelHamiltonian& H,
                                        const std::vector<Matrix>& directions, double t,
                                        const PauliBasis& basis);

// Divided-difference matrix F of the Daleckii-Krein formula for exp(-i H t):
// F_kl = (e^{-i l_k t} - e^{-i l_l t}) / (l_k - l_l), with the -i t e^{-i l_k t}
// limit when |l_k - l_l| <= 1e-9 * max|l|. Shared by the recovery gradient.
Matrix daleckii_krein_factor(const Eigen::VectorXd& eigenvalues, double t);

}  // namespace hamlearn
