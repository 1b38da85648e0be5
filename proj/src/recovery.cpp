#include "hamlearn/recovery.hpp"

#include <json.hpp>

#include <cmath>

#include "hamlearn/numerics.hpp"

namespace hamlearn {

using cd = std::complex<double>;

EmbeddingNet::EmbeddingNet(int output_dim, int hidden1, int hidden2, double input_c,
                           double input_p, double weight_init_scale, std::uint64_t seed) {
    if (output_dim < 1 || hidden1 < 1 || hidden2 < 1)
        throw std::invalid_argument("EmbeddingNet: layer widths must be positive");
    double x_val = std::pow(input_c / static_cast<double>(output_dim), input_p);
    x_ = Eigen::VectorXd::Constant(output_dim, x_val);

    Rng rng(seed);
    auto init = [&](Eigen::MatrixXd& W, int rows, int cols) {
        double s = weight_init_scale / std::sqrt(static_cast<double>(cols));
        W.resize(rows, cols);
        for (int r = 0; r < rows; ++r)
            for (int c = 0; c < cols; ++c) W(r, c) = rng.uniform(-s, s);
    };
    init(W1_, hidden1, output_dim);
    init(W2_, hidden2, hidden1);
    init(W3_, output_dim, hidden2);
    b1_ = Eigen::VectorXd::Zero(hidden1);
    b2_ = Eigen::VectorXd::Zero(hidden2);
    b3_ = Eigen::VectorXd::Zero(output_dim);
}

int EmbeddingNet::num_params() const {
    return static_cast<int>(W1_.size() + b1_.size() + W2_.size() + b2_.size() + W3_.size() +
                            b3_.size());
}

void EmbeddingNet::forward(NetActivations& acts) const {
    acts.a1 = (W1_ * x_ + b1_).array().tanh().matrix();
    acts.a2 = (W2_ * acts.a1 + b2_).array().tanh().matrix();
    acts.y = W3_ * acts.a2 + b3_;
}

Eigen::VectorXd EmbeddingNet::forward() const {
    NetActivations acts;
    forward(acts);
    return acts.y;
}

Eigen::VectorXd EmbeddingNet::backward(const NetActivations& acts,
                                       const Eigen::VectorXd& gy) const {
    Eigen::VectorXd ga2 = W3_.transpose() * gy;
    Eigen::VectorXd gz2 = (ga2.array() * (1.0 - acts.a2.array().square())).matrix();
    Eigen::VectorXd ga1 = W2_.transpose() * gz2;
    Eigen::VectorXd gz1 = (ga1.array() * (1.0 - acts.a1.array().square())).matrix();

    Eigen::VectorXd flat(num_params());
    Eigen::Index at = 0;
    auto put_matrix = [&](const Eigen::MatrixXd& G) {
        Eigen::Map<Eigen::VectorXd>(flat.data() + at, G.size()) =
            Eigen::Map<const Eigen::VectorXd>(G.data(), G.size());
        at += G.size();
    };
    auto put_vector = [&](const Eigen::VectorXd& g) {
        flat.segment(at, g.size()) = g;
        at += g.size();
    };
    put_matrix(gz1 * x_.transpose());
    put_vector(gz1);
    put_matrix(gz2 * acts.a1.transpose());
    put_vector(gz2);
    put_matrix(gy * acts.a2.transpose());
    put_vector(gy);
    return flat;
}

Eigen::VectorXd EmbeddingNet::params() const {
    Eigen::VectorXd flat(num_params());
    Eigen::Index at = 0;
    auto take = [&](const auto& M) {
        Eigen::Map<Eigen::VectorXd>(flat.data() + at, M.size()) =
            Eigen::Map<const Eigen::VectorXd>(M.data(), M.size());
        at += M.size();
    };
    take(W1_); take(b1_); take(W2_); take(b2_); take(W3_); take(b3_);
    return flat;
}

void EmbeddingNet::set_params(const Eigen::VectorXd& flat) {
    if (flat.size() != num_params()) throw std::invalid_argument("set_params: size mismatch");
    Eigen::Index at = 0;
    auto give = [&](auto& M) {
        Eigen::Map<Eigen::VectorXd>(M.data(), M.size()) =
            flat.segment(at, M.size());
        at += M.size();
    };
    give(W1_); give(b1_); give(W2_); give(b2_); give(W3_); give(b3_);
}

Matrix assemble_hermitian(const Eigen::VectorXd& y) {
    auto d = static_cast<Eigen::Index>(std::lround(std::sqrt(static_cast<double>(y.size()))));
    if (d * d != y.size()) throw std::invalid_argument("assemble_hermitian: length is not a square");
    Matrix H(d, d);
    for (Eigen::Index i = 0; i < d; ++i) H(i, i) = y(i);
    Eigen::Index at = d;
    for (Eigen::Index i = 1; i < d; ++i) {
        for (Eigen::Index j = 0; j < i; ++j) {
            cd v(y(at), y(at + 1));
            at += 2;
            H(i, j) = v;
            H(j, i) = std::conj(v);
        }
    }
    double tr = y.head(d).sum() / static_cast<double>(d);
    for (Eigen::Index i = 0; i < d; ++i) H(i, i) -= tr;
    return H;
}

Eigen::VectorXd assemble_hermitian_pullback(const Matrix& gamma) {
    Eigen::Index d = gamma.rows();
    Eigen::VectorXd gy(d * d);
    double tr_re = gamma.trace().real();
    for (Eigen::Index i = 0; i < d; ++i)
        gy(i) = 2.0 * gamma(i, i).real() - 2.0 / static_cast<double>(d) * tr_re;
    Eigen::Index at = d;
    for (Eigen::Index i = 1; i < d; ++i) {
        for (Eigen::Index j = 0; j < i; ++j) {
            gy(at++) = 2.0 * (gamma(i, j) + gamma(j, i)).real();
            gy(at++) = -2.0 * gamma(i, j).imag() + 2.0 * gamma(j, i).imag();
        }
    }
    return gy;
}

namespace {

cd row_dot(const Matrix& M, Eigen::Index row, const Vector& v) {
    cd acc(0, 0);
    for (Eigen::Index l = 0; l < v.size(); ++l) acc += M(row, l) * v(l);
    return acc;
}

void validate_dataset(const MeasurementDataset& ds, Eigen::Index d) {
    if (ds.records.empty()) throw std::invalid_argument("dataset has no records");
    if (static_cast<int>(ds.spread_states.size()) != ds.R ||
        static_cast<int>(ds.bases.size()) != ds.K)
        throw std::invalid_argument("dataset metadata incomplete: spread states or bases missing");
    if (!ds.weights.empty() && ds.weights.size() != ds.records.size())
        throw std::invalid_argument("dataset weights do not match records");
    for (const auto& rec : ds.records) {
        if (rec.r < 1 || rec.r > ds.R || rec.j < 1 || rec.j > ds.schedule.m_t || rec.k < 1 ||
            rec.k > ds.K || rec.outcome >= static_cast<std::uint32_t>(d))
            throw std::invalid_argument("dataset record indices out of range");
    }
}

// Shared NLL evaluation. When gamma_out is set, also accumulates the
// matrix-space gradient Gamma of the mean NLL with respect to H.
//
// With H = V diag(lam) V^dag, the model amplitude of record (r, j, k, b) is
// A = row_b(W_k V) . (e^{-i lam t_j} .* V^dag psi_r), and the derivative of A
// along a Hermitian perturbation dH is row_b(W_k V) [(V^dag dH V) .* F_j]
// (V^dag psi_r) with F_j the divided-difference matrix. Grouping records by
// (r, j) lets the per-record terms z accumulate first; the right-hand factor
// of the outer product is the unevolved V^dag psi_r, because the evolution
// phases already live inside F_j.
double loss_core(const Matrix& H, const MeasurementDataset& ds, double p_floor,
                 Matrix* gamma_out) {
    Eigen::Index d = H.rows();
    validate_dataset(ds, d);
    SpectralDecomposition sd = eig_hermitian(H);
    const Matrix& V = sd.eigenvectors;
    std::vector<double> times = ds.times();
    auto m = static_cast<std::size_t>(ds.schedule.m_t);

    std::vector<Matrix> T;
    T.reserve(ds.bases.size());
    for (const auto& basis : ds.bases) T.push_back(rotate_columns(V, basis));

    std::vector<Vector> eta;
    eta.reserve(ds.spread_states.size());
    for (const auto& st : ds.spread_states) eta.push_back(V.adjoint() * st.vector);

    // psit[(r-1)*m + (j-1)] = e^{-i lam t_j} .* eta_r
    std::vector<Vector> psit(static_cast<std::size_t>(ds.R) * m);
    for (std::size_t j = 0; j < m; ++j) {
        Vector phase(d);
        for (Eigen::Index l = 0; l < d; ++l)
            phase(l) = std::exp(cd(0, -sd.eigenvalues(l) * times[j]));
        for (int r = 0; r < ds.R; ++r)
            psit[static_cast<std::size_t>(r) * m + j] =
                phase.cwiseProduct(eta[static_cast<std::size_t>(r)]);
    }

    double w_total = ds.weights.empty() ? static_cast<double>(ds.records.size())
                                        : kahan_total(ds.weights);
    if (w_total <= 0) throw std::invalid_argument("dataset has no weight");

    std::vector<Vector> zacc;
    if (gamma_out)
        zacc.assign(static_cast<std::size_t>(ds.R) * m, Vector::Zero(d));

    KahanSum loss;
    for (std::size_t idx = 0; idx < ds.records.size(); ++idx) {
        const auto& rec = ds.records[idx];
        double w_rec = ds.weights.empty() ? 1.0 : ds.weights[idx];
        std::size_t group = static_cast<std::size_t>(rec.r - 1) * m + static_cast<std::size_t>(rec.j - 1);
        const Vector& state = psit[group];
        const Matrix& Tk = T[static_cast<std::size_t>(rec.k - 1)];
        cd A = row_dot(Tk, rec.outcome, state);
        double P = std::norm(A);
        loss.add(-w_rec * std::log(std::max(P, p_floor)));
        if (gamma_out && P > p_floor) {
            cd w = -w_rec / (w_total * P) * std::conj(A);
            Vector& z = zacc[group];
            for (Eigen::Index l = 0; l < d; ++l) z(l) += w * Tk(rec.outcome, l);
        }
    }

    if (gamma_out) {
        Matrix O = Matrix::Zero(d, d);
        Matrix Oj(d, d);
        for (std::size_t j = 0; j < m; ++j) {
            Oj.setZero();
            for (int r = 0; r < ds.R; ++r)
                Oj.noalias() += zacc[static_cast<std::size_t>(r) * m + j] *
                                eta[static_cast<std::size_t>(r)].transpose();
            O += Oj.cwiseProduct(daleckii_krein_factor(sd.eigenvalues, times[j]));
        }
        *gamma_out = V.conjugate() * O * V.transpose();
    }
    return loss.value() / w_total;
}

}  // namespace

double nll_loss(const Matrix& H, const MeasurementDataset& ds, double p_floor) {
    return loss_core(H, ds, p_floor, nullptr);
}

std::pair<double, Eigen::VectorXd> loss_gradient(const EmbeddingNet& net,
                                                 const MeasurementDataset& ds, double p_floor) {
    NetActivations acts;
    net.forward(acts);
    Matrix H = assemble_hermitian(acts.y);
    Matrix gamma;
    double loss = loss_core(H, ds, p_floor, &gamma);
    Eigen::VectorXd gy = assemble_hermitian_pullback(gamma);
    return {loss, net.backward(acts, gy)};
}

RecoveryResult run_recovery(const MeasurementDataset& ds, const RecoveryConfig& cfg) {
    if (cfg.lr <= 0 || cfg.max_iterations < 1 || cfg.convergence_window < 1 ||
        cfg.convergence_threshold <= 0 || cfg.convergence_threshold >= 1)
        throw std::invalid_argument("run_recovery: invalid configuration");
    long d = 1L << ds.n;
    EmbeddingNet net(static_cast<int>(d * d), cfg.hidden1, cfg.hidden2, cfg.input_c, cfg.input_p,
                     cfg.weight_init_scale, cfg.seed);

    Eigen::VectorXd p = net.params();
    Eigen::VectorXd m1 = Eigen::VectorXd::Zero(p.size());
    Eigen::VectorXd m2 = Eigen::VectorXd::Zero(p.size());

    RecoveryResult result;
    result.loss_trace.reserve(static_cast<std::size_t>(cfg.max_iterations));
    result.converged = false;

    NetActivations acts;
    Matrix gamma;
    for (int it = 1; it <= cfg.max_iterations; ++it) {
        net.forward(acts);
        Matrix H = assemble_hermitian(acts.y);
        double loss = loss_core(H, ds, cfg.p_floor, &gamma);
        if (!std::isfinite(loss))
            throw RecoveryDivergence("run_recovery: loss diverged at iteration " +
                                     std::to_string(it));
        Eigen::VectorXd g = net.backward(acts, assemble_hermitian_pullback(gamma));

        m1 = cfg.beta1 * m1 + (1.0 - cfg.beta1) * g;
        m2 = (cfg.beta2 * m2.array() + (1.0 - cfg.beta2) * g.array().square()).matrix();
        double c1 = 1.0 - std::pow(cfg.beta1, it);
        double c2 = 1.0 - std::pow(cfg.beta2, it);
        p.array() -= cfg.lr * (m1.array() / c1) / ((m2.array() / c2).sqrt() + cfg.adam_eps);
        net.set_params(p);

        result.loss_trace.push_back(loss);
        auto sz = result.loss_trace.size();
        if (it > cfg.convergence_window + 10) {
            double prev = result.loss_trace[sz - 1 - static_cast<std::size_t>(cfg.convergence_window)];
            if (std::abs(loss - prev) / std::max(std::abs(prev), 1e-12) < cfg.convergence_threshold) {
                result.converged = true;
                break;
            }
        }
    }

    result.iterations = static_cast<int>(result.loss_trace.size());
    result.h_hat = assemble_hermitian(net.forward());
    result.epsilon = ds.true_model
                         ? reconstruction_error(ds.true_model->matrix(), result.h_hat)
                         : std::numeric_limits<double>::quiet_NaN();
    return result;
}

double reconstruction_error(const Matrix& H_true, const Matrix& H_hat) {
    if (H_true.rows() != H_hat.rows() || H_true.cols() != H_hat.cols())
        throw std::invalid_argument("reconstruction_error: dimension mismatch");
    Eigen::Index d = H_true.rows();
    cd shift = (H_true.trace() - H_hat.trace()) / static_cast<double>(d);
    KahanSum acc;
    for (Eigen::Index i = 0; i < d; ++i)
        for (Eigen::Index j = 0; j < d; ++j)
            acc.add(std::abs(H_true(i, j) - H_hat(i, j) - (i == j ? shift : cd(0, 0))));
    return acc.value() / static_cast<double>(d * d);
}

std::string recovery_config_to_json(const RecoveryConfig& cfg) {
    nlohmann::json j;
    j["lr"] = cfg.lr;
    j["beta1"] = cfg.beta1;
    j["beta2"] = cfg.beta2;
    j["adam_eps"] = cfg.adam_eps;
    j["max_iterations"] = cfg.max_iterations;
    j["convergence_window"] = cfg.convergence_window;
    j["convergence_threshold"] = cfg.convergence_threshold;
    j["p_floor"] = cfg.p_floor;
    j["weight_init_scale"] = cfg.weight_init_scale;
    j["hidden1"] = cfg.hidden1;
    j["hidden2"] = cfg.hidden2;
    j["input_c"] = cfg.input_c;
    j["input_p"] = cfg.input_p;
    j["seed"] = cfg.seed;
    return j.dump();
}

RecoveryConfig recovery_config_from_json(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text);
    RecoveryConfig d;
    RecoveryConfig cfg;
    cfg.lr = j.value("lr", d.lr);
    cfg.beta1 = j.value("beta1", d.beta1);
    cfg.beta2 = j.value("beta2", d.beta2);
    cfg.adam_eps = j.value("adam_eps", d.adam_eps);
    cfg.max_iterations = j.value("max_iterations", d.max_iterations);
    cfg.convergence_window = j.value("convergence_window", d.convergence_window);
    cfg.convergence_threshold = j.value("convergence_threshold", d.convergence_threshold);
    cfg.p_floor = j.value("p_floor", d.p_floor);
    cfg.weight_init_scale = j.value("weight_init_scale", d.weight_init_scale);
    cfg.hidden1 = j.value("hidden1", d.hidden1);
    cfg.hidden2 = j.value("hidden2", d.hidden2);
    cfg.input_c = j.value("input_c", d.input_c);
    cfg.input_p = j.value("input_p", d.input_p);
    cfg.seed = j.value("seed", d.seed);
    return cfg;
}

std::string recovery_result_to_json(const RecoveryResult& result, const RecoveryConfig& cfg,
                                    const std::string& dataset_fingerprint) {
    nlohmann::json j;
    j["epsilon"] = result.epsilon;
    j["iterations"] = result.iterations;
    j["converged"] = result.converged;
    j["loss_trace"] = result.loss_trace;
    nlohmann::json h = nlohmann::json::array();
    for (Eigen::Index i = 0; i < result.h_hat.rows(); ++i)
        for (Eigen::Index c = 0; c < result.h_hat.cols(); ++c)
            h.push_back({result.h_hat(i, c).real(), result.h_hat(i, c).imag()});
    j["h_hat"] = std::move(h);
    j["config"] = nlohmann::json::parse(recovery_config_to_json(cfg));
    j["dataset_fingerprint"] = dataset_fingerprint;
    return j.dump();
}

}  // namespace hamlearn
