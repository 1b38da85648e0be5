#include "oracle.hpp"

#include <boost/math/distributions/chi_squared.hpp>

#include <cmath>
#include <complex>
#include <stdexcept>

namespace oracle {

using cd = std::complex<double>;

Matrix expm(const Matrix& A) {
    double norm = A.cwiseAbs().rowwise().sum().maxCoeff();  // induced infinity norm
    int squarings = 0;
    double scaled = norm;
    while (scaled > 0.5) {
        scaled /= 2.0;
        ++squarings;
    }
    Matrix B = A / std::pow(2.0, squarings);
    Matrix result = Matrix::Identity(A.rows(), A.cols());
    Matrix term = result;
    for (int k = 1; k < 60; ++k) {
        term = (term * B / static_cast<double>(k)).eval();
        result += term;
        if (term.cwiseAbs().maxCoeff() < 1e-18) break;
    }
    for (int s = 0; s < squarings; ++s) result = (result * result).eval();
    return result;
}

Matrix kron(const Matrix& a, const Matrix& b) {
    Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

namespace {

Matrix one_qubit(char letter) {
    Matrix m(2, 2);
    switch (letter) {
        case 'I': m << 1, 0, 0, 1; break;
        case 'X': m << 0, 1, 1, 0; break;
        case 'Y': m << cd(0, 0), cd(0, -1), cd(0, 1), cd(0, 0); break;
        case 'Z': m << 1, 0, 0, -1; break;
        default: throw std::invalid_argument("oracle: bad Pauli letter");
    }
    return m;
}

Matrix one_qubit_rotation(char axis) {
    const double s = 1.0 / std::sqrt(2.0);
    Matrix m(2, 2);
    switch (axis) {
        case 'Z': m << 1, 0, 0, 1; break;
        case 'X': m << s, s, s, -s; break;
        case 'Y': m << cd(s, 0), cd(0, -s), cd(s, 0), cd(0, s); break;
        default: throw std::invalid_argument("oracle: bad basis axis");
    }
    return m;
}

}  // namespace

Matrix pauli_string_matrix(const std::string& letters) {
    Matrix out = one_qubit(letters.at(0));
    for (std::size_t q = 1; q < letters.size(); ++q) out = kron(out, one_qubit(letters[q]));
    return out;
}

Matrix basis_matrix(const hamlearn::PauliBasis& basis) {
    Matrix out = one_qubit_rotation(basis.axes.at(0));
    for (std::size_t q = 1; q < basis.axes.size(); ++q)
        out = kron(out, one_qubit_rotation(basis.axes[q]));
    return out;
}

Vector evolve_expm(const Matrix& H, const Vector& psi, double t) {
    return expm(cd(0, -t) * H) * psi;
}

Eigen::VectorXd outcome_probabilities(const Matrix& H, const Vector& psi,
                                      const hamlearn::PauliBasis& basis, double t) {
    Vector rotated = basis_matrix(basis) * evolve_expm(H, psi, t);
    return rotated.cwiseAbs2();
}

Eigen::MatrixXd fd_probability_derivatives(const Matrix& H, const std::vector<Matrix>& directions,
                                           const Vector& psi, const hamlearn::PauliBasis& basis,
                                           double t, double step) {
    Eigen::MatrixXd out(psi.size(), static_cast<Eigen::Index>(directions.size()));
    for (std::size_t a = 0; a < directions.size(); ++a) {
        Eigen::VectorXd plus = outcome_probabilities(H + step * directions[a], psi, basis, t);
        Eigen::VectorXd minus = outcome_probabilities(H - step * directions[a], psi, basis, t);
        out.col(static_cast<Eigen::Index>(a)) = (plus - minus) / (2.0 * step);
    }
    return out;
}

Eigen::VectorXd fd_loss_gradient(const hamlearn::EmbeddingNet& net,
                                 const hamlearn::MeasurementDataset& ds, double p_floor,
                                 double step) {
    hamlearn::EmbeddingNet probe = net;
    Eigen::VectorXd base = net.params();
    Eigen::VectorXd grad(base.size());
    for (Eigen::Index i = 0; i < base.size(); ++i) {
        Eigen::VectorXd p = base;
        p(i) = base(i) + step;
        probe.set_params(p);
        double plus = hamlearn::nll_loss(hamlearn::assemble_hermitian(probe.forward()), ds, p_floor);
        p(i) = base(i) - step;
        probe.set_params(p);
        double minus = hamlearn::nll_loss(hamlearn::assemble_hermitian(probe.forward()), ds, p_floor);
        grad(i) = (plus - minus) / (2.0 * step);
    }
    return grad;
}

Matrix random_hermitian(int d, hamlearn::Rng& rng) {
    Matrix A(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) A(i, j) = cd(rng.uniform(-1, 1), rng.uniform(-1, 1));
    return (A + A.adjoint()).eval() / 2.0;
}

double chi_square_p(const std::vector<double>& observed, const std::vector<double>& expected) {
    if (observed.size() != expected.size() || observed.empty())
        throw std::invalid_argument("chi_square_p: bad bins");
    double pooled_obs = 0, pooled_exp = 0;
    std::vector<std::pair<double, double>> bins;
    for (std::size_t i = 0; i < observed.size(); ++i) {
        if (expected[i] < 5.0) {
            pooled_obs += observed[i];
            pooled_exp += expected[i];
        } else {
            bins.emplace_back(observed[i], expected[i]);
        }
    }
    if (pooled_exp > 0) bins.emplace_back(pooled_obs, pooled_exp);
    if (bins.size() < 2) throw std::invalid_argument("chi_square_p: too few usable bins");
    double stat = 0;
    for (auto& [obs, exp] : bins) stat += (obs - exp) * (obs - exp) / exp;
    boost::math::chi_squared dist(static_cast<double>(bins.size() - 1));
    return boost::math::cdf(boost::math::complement(dist, stat));
}

}  // namespace oracle
