#include "hamlearn/sim.hpp"

#include <cmath>
#include <stdexcept>

namespace hamlearn {

using cd = std::complex<double>;

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

std::array<cd, 2> single_qubit_spread(double xi, double chi, double phi) {
    cd global = std::exp(cd(0, -phi / 2.0));
    return {global * std::exp(cd(0, -xi / 2.0)) * std::cos(chi / 2.0),
            global * std::exp(cd(0, xi / 2.0)) * std::sin(chi / 2.0)};
}

}  // namespace

SpreadState sample_spread_state(int n, Rng& rng) {
    if (n < 1 || n > kMaxQubits) throw std::invalid_argument("sample_spread_state: bad qubit count");
    std::vector<std::array<double, 3>> angles;
    angles.reserve(static_cast<std::size_t>(n));
    for (int q = 0; q < n; ++q) {
        double u = rng.uniform();
        double phi = rng.uniform(0.0, kTwoPi);
        double xi = rng.uniform(0.0, kTwoPi);
        angles.push_back({xi, std::acos(1.0 - 2.0 * u), phi});
    }
    return spread_state_from_angles(angles);
}

SpreadState spread_state_from_angles(const std::vector<std::array<double, 3>>& angles) {
    int n = static_cast<int>(angles.size());
    if (n < 1 || n > kMaxQubits) throw std::invalid_argument("spread_state_from_angles: bad qubit count");
    Vector v(1);
    v(0) = 1.0;
    for (const auto& [xi, chi, phi] : angles) {
        auto q = single_qubit_spread(xi, chi, phi);
        Vector next(2 * v.size());
        for (Eigen::Index i = 0; i < v.size(); ++i) {
            next(2 * i) = v(i) * q[0];
            next(2 * i + 1) = v(i) * q[1];
        }
        v = std::move(next);
    }
    return {n, angles, std::move(v)};
}

PauliBasis sample_basis(int n, Rng& rng) {
    static const char axes[3] = {'X', 'Y', 'Z'};
    std::string s(static_cast<std::size_t>(n), 'Z');
    for (int q = 0; q < n; ++q) s[q] = axes[rng.uniform_int(3)];
    return {s};
}

SpectralDecomposition eig_hermitian(const Matrix& H) {
    if (H.rows() != H.cols()) throw std::invalid_argument("eig_hermitian: matrix not square");
    double scale = H.cwiseAbs().maxCoeff();
    if ((H - H.adjoint()).cwiseAbs().maxCoeff() > 1e-10 * std::max(1.0, scale))
        throw std::invalid_argument("eig_hermitian: matrix not Hermitian");
    Eigen::SelfAdjointEigenSolver<Matrix> solver(H);
    if (solver.info() != Eigen::Success) throw std::runtime_error("eig_hermitian: decomposition failed");
    return {solver.eigenvalues(), solver.eigenvectors()};
}

Vector evolve(const Vector& state, const SpectralDecomposition& sd, double t) {
    Vector eta = sd.eigenvectors.adjoint() * state;
    for (Eigen::Index k = 0; k < eta.size(); ++k)
        eta(k) *= std::exp(cd(0, -sd.eigenvalues(k) * t));
    return sd.eigenvectors * eta;
}

namespace {

// In-place per-qubit 2x2 kernel on a statevector; qubit q pairs indices at
// stride 2^(n-q) (qubit 1 = most significant bit).
void apply_kernel(Vector& v, int n, int q, const std::array<cd, 4>& u) {
    long stride = 1L << (n - q);
    long d = v.size();
    for (long base = 0; base < d; base += 2 * stride) {
        for (long off = 0; off < stride; ++off) {
            long i0 = base + off;
            long i1 = i0 + stride;
            cd a = v(i0), b = v(i1);
            v(i0) = u[0] * a + u[1] * b;
            v(i1) = u[2] * a + u[3] * b;
        }
    }
}

const std::array<cd, 4>& kernel_for(char axis) {
    static const double s = 1.0 / std::sqrt(2.0);
    static const std::array<cd, 4> wx = {cd(s), cd(s), cd(s), cd(-s)};
    static const std::array<cd, 4> wy = {cd(s), cd(0, -s), cd(s), cd(0, s)};
    static const std::array<cd, 4> wz = {cd(1), cd(0), cd(0), cd(1)};
    switch (axis) {
        case 'X': return wx;
        case 'Y': return wy;
        case 'Z': return wz;
        default: throw std::invalid_argument("basis axis must be one of X, Y, Z");
    }
}

}  // namespace

void apply_basis_rotation(Vector& state, const PauliBasis& basis) {
    int n = basis.n();
    if (state.size() != (1L << n)) throw std::invalid_argument("apply_basis_rotation: dimension mismatch");
    for (int q = 1; q <= n; ++q) {
        if (basis.axes[q - 1] == 'Z') continue;
        apply_kernel(state, n, q, kernel_for(basis.axes[q - 1]));
    }
}

Matrix basis_rotation(const PauliBasis& basis) {
    long d = 1L << basis.n();
    return rotate_columns(Matrix::Identity(d, d), basis);
}

Matrix rotate_columns(Matrix M, const PauliBasis& basis) {
    Vector col(M.rows());
    for (Eigen::Index c = 0; c < M.cols(); ++c) {
        col = M.col(c);
        apply_basis_rotation(col, basis);
        M.col(c) = col;
    }
    return M;
}

Eigen::VectorXd outcome_probabilities(const Vector& state, const PauliBasis& basis) {
    Vector rotated = state;
    apply_basis_rotation(rotated, basis);
    return rotated.cwiseAbs2();
}

std::uint64_t sample_outcome(const Eigen::VectorXd& probs, Rng& rng) {
    double u = rng.uniform();
    double acc = 0.0;
    Eigen::Index last = probs.size() - 1;
    for (Eigen::Index b = 0; b < last; ++b) {
        acc += probs(b);
        if (u < acc) return static_cast<std::uint64_t>(b);
    }
    return static_cast<std::uint64_t>(last);
}

Matrix daleckii_krein_factor(const Eigen::VectorXd& eigenvalues, double t) {
    Eigen::Index d = eigenvalues.size();
    double tau = 1e-9 * std::max(eigenvalues.cwiseAbs().maxCoeff(), 1e-300);
    Vector phases(d);
    for (Eigen::Index k = 0; k < d; ++k) phases(k) = std::exp(cd(0, -eigenvalues(k) * t));
    Matrix F(d, d);
    for (Eigen::Index k = 0; k < d; ++k) {
        for (Eigen::Index l = 0; l < d; ++l) {
            double gap = eigenvalues(k) - eigenvalues(l);
            F(k, l) = std::abs(gap) > tau ? (phases(k) - phases(l)) / gap
                                          : cd(0, -t) * phases(k);
        }
    }
    return F;
}

Eigen::MatrixXd probability_derivatives(const Vector& psi0, const SpectralDecomposition& sd,
                                        const std::vector<Matrix>& directions, double t,
                                        const PauliBasis& basis) {
    Eigen::Index d = psi0.size();
    const Matrix& V = sd.eigenvectors;
    Vector eta = V.adjoint() * psi0;

    Vector amp = evolve(psi0, sd, t);
    apply_basis_rotation(amp, basis);

    Matrix F = daleckii_krein_factor(sd.eigenvalues, t);

    Eigen::MatrixXd dp(d, static_cast<Eigen::Index>(directions.size()));
    for (std::size_t a = 0; a < directions.size(); ++a) {
        Matrix A = V.adjoint() * directions[a] * V;
        Vector dpsi = V * (A.cwiseProduct(F) * eta);
        apply_basis_rotation(dpsi, basis);
        for (Eigen::Index b = 0; b < d; ++b)
            dp(b, static_cast<Eigen::Index>(a)) = 2.0 * std::real(std::conj(amp(b)) * dpsi(b));
    }
    return dp;
}

Eigen::MatrixXd probability_derivatives(const Vector& psi0, const ModelHamiltonian& H,
                                        const std::vector<Matrix>& directions, double t,
                                        const PauliBasis& basis) {
    return probability_derivatives(psi0, eig_hermitian(H.matrix()), directions, t, basis);
}

}  // namespace hamlearn
