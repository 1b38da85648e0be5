#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace hamlearn {

using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

// Tensor-factor convention used everywhere: qubit 1 is the leftmost factor and
// the most significant bit of a computational-basis index. The bit of qubit q
// in basis state b is (b >> (n - q)) & 1.

struct PauliString {
    std::string letters;  // over {I, X, Y, Z}, one per qubit

    int n() const { return static_cast<int>(letters.size()); }
};

bool valid_pauli_string(const PauliString& s);

// 2x2 Pauli matrix for letter in {I, X, Y, Z}
Matrix pauli_matrix(char letter);

// Dense d x d matrix of a Pauli string (d = 2^n), qubit 1 leftmost. Built in
// O(d) from the fact that each row has exactly one nonzero entry, of modulus 1.
Matrix string_matrix(const PauliString& s);

inline constexpr int kMaxQubits = 12;  // dense 4096-dim budget

enum class Family { XYZ, XYZ2, XYZ3, XXZ, CUSTOM };

std::string family_name(Family f);
Family family_from_name(const std::string& name);

struct PauliTerm {
    double coeff;
    PauliString string;
};

struct GaussianDisorder {
    double mean = 0.0;
    double sigma = 0.1;
};

struct ParameterSpec {
    Family family = Family::XYZ;
    int n = 3;
    double low = -1.0;   // uniform coupling/field bounds
    double high = 1.0;
    std::optional<GaussianDisorder> disorder;  // replaces the uniform coupling draw
    double delta_low = -0.5;   // XXZ anisotropy bounds
    double delta_high = 0.5;
    std::uint64_t seed = 0;
};

class ModelHamiltonian {
public:
    ModelHamiltonian(int n, Family family, std::uint64_t seed, std::vector<PauliTerm> terms);

    int n() const { return n_; }
    int dim() const { return 1 << n_; }
    Family family() const { return family_; }
    std::uint64_t seed() const { return seed_; }
    const std::vector<PauliTerm>& terms() const { return terms_; }
    const Matrix& matrix() const { return matrix_; }

private:
    int n_;
    Family family_;
    std::uint64_t seed_;
    std::vector<PauliTerm> terms_;  // duplicates merged, identity excluded
    Matrix matrix_;
};

ModelHamiltonian build_model(const ParameterSpec& spec);

// Per-term Pauli-string matrices with coefficients stripped: the parameter
// directions H_j of H(theta) = sum_j theta_j H_j, in stable term order.
std::vector<std::pair<Matrix, std::string>> term_generators(const ModelHamiltonian& H);

std::string model_to_json(const ModelHamiltonian& H);
ModelHamiltonian model_from_json(const std::string& text);

}  // namespace hamlearn
