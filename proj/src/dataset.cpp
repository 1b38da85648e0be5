#include "hamlearn/dataset.hpp"

#include <json.hpp>

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace hamlearn {

namespace {

void check_counts(int R, int K, int S, int m_t) {
    if (R < 1 || K < 1 || S < 1 || m_t < 1)
        throw std::invalid_argument("dataset generation: R, K, S, m_t must all be >= 1");
}

std::vector<PauliBasis> sample_bases(int n, int K, std::uint64_t master_seed) {
    Rng rng(derive_seed(master_seed, {seed_stream::bases}));
    std::vector<PauliBasis> bases;
    bases.reserve(static_cast<std::size_t>(K));
    for (int k = 0; k < K; ++k) bases.push_back(sample_basis(n, rng));
    return bases;
}

std::vector<SpreadState> sample_states(int n, int R, std::uint64_t master_seed) {
    std::vector<SpreadState> states;
    states.reserve(static_cast<std::size_t>(R));
    for (int r = 1; r <= R; ++r) {
        Rng rng(derive_seed(master_seed, {seed_stream::spread, static_cast<std::uint64_t>(r)}));
        states.push_back(sample_spread_state(n, rng));
    }
    return states;
}

}  // namespace

MeasurementDataset generate_dataset(const ModelHamiltonian& H_true, int R, int K, int S,
                                    const Schedule& schedule, std::uint64_t master_seed) {
    check_counts(R, K, S, schedule.m_t);
    int n = H_true.n();

    MeasurementDataset ds;
    ds.family = H_true.family();
    ds.n = n;
    ds.true_model = H_true;
    ds.master_seed = master_seed;
    ds.schedule = schedule;
    ds.R = R;
    ds.K = K;
    ds.S = S;
    ds.bases = sample_bases(n, K, master_seed);
    ds.spread_states = sample_states(n, R, master_seed);

    SpectralDecomposition sd = eig_hermitian(H_true.matrix());
    std::vector<double> times = schedule_times(schedule);
    ds.records.reserve(static_cast<std::size_t>(R) * schedule.m_t * K * S);
    for (int r = 1; r <= R; ++r) {
        for (int j = 1; j <= schedule.m_t; ++j) {
            Vector evolved = evolve(ds.spread_states[static_cast<std::size_t>(r - 1)].vector, sd,
                                    times[static_cast<std::size_t>(j - 1)]);
            for (int k = 1; k <= K; ++k) {
                Eigen::VectorXd probs =
                    outcome_probabilities(evolved, ds.bases[static_cast<std::size_t>(k - 1)]);
                for (int s = 1; s <= S; ++s) {
                    Rng rng(derive_seed(master_seed, {seed_stream::sample,
                                                      static_cast<std::uint64_t>(r),
                                                      static_cast<std::uint64_t>(j),
                                                      static_cast<std::uint64_t>(k),
                                                      static_cast<std::uint64_t>(s)}));
                    auto b = static_cast<std::uint32_t>(sample_outcome(probs, rng));
                    ds.records.push_back({r, j, k, s, b});
                }
            }
        }
    }
    return ds;
}

MeasurementDataset exact_probability_dataset(
    const ModelHamiltonian& H_true, int R, int K, const Schedule& schedule,
    std::uint64_t master_seed, const std::optional<std::vector<PauliBasis>>& fixed_bases) {
    check_counts(R, K, 1, schedule.m_t);
    int n = H_true.n();
    if (fixed_bases) {
        if (static_cast<int>(fixed_bases->size()) != K)
            throw std::invalid_argument("exact_probability_dataset: basis count mismatch");
        for (const auto& b : *fixed_bases)
            if (b.n() != n) throw std::invalid_argument("exact_probability_dataset: basis size mismatch");
    }

    MeasurementDataset ds;
    ds.family = H_true.family();
    ds.n = n;
    ds.true_model = H_true;
    ds.master_seed = master_seed;
    ds.schedule = schedule;
    ds.R = R;
    ds.K = K;
    ds.S = 1;
    ds.bases = fixed_bases ? *fixed_bases : sample_bases(n, K, master_seed);
    ds.spread_states = sample_states(n, R, master_seed);

    SpectralDecomposition sd = eig_hermitian(H_true.matrix());
    std::vector<double> times = schedule_times(schedule);
    long d = 1L << n;
    ds.records.reserve(static_cast<std::size_t>(R) * schedule.m_t * K * d);
    ds.weights.reserve(ds.records.capacity());
    for (int r = 1; r <= R; ++r) {
        for (int j = 1; j <= schedule.m_t; ++j) {
            Vector evolved = evolve(ds.spread_states[static_cast<std::size_t>(r - 1)].vector, sd,
                                    times[static_cast<std::size_t>(j - 1)]);
            for (int k = 1; k <= K; ++k) {
                Eigen::VectorXd probs =
                    outcome_probabilities(evolved, ds.bases[static_cast<std::size_t>(k - 1)]);
                for (long b = 0; b < d; ++b) {
                    ds.records.push_back({r, j, k, 1, static_cast<std::uint32_t>(b)});
                    ds.weights.push_back(probs(b));
                }
            }
        }
    }
    return ds;
}

MeasurementDataset regenerate_dataset(const MeasurementDataset& ds) {
    if (!ds.true_model)
        throw std::invalid_argument("regenerate_dataset: dataset carries no true model");
    if (!ds.weights.empty())
        throw std::invalid_argument("regenerate_dataset: weighted datasets are not regenerable");
    return generate_dataset(*ds.true_model, ds.R, ds.K, ds.S, ds.schedule, ds.master_seed);
}

std::string outcome_to_bitstring(std::uint32_t outcome, int n) {
    std::string bits(static_cast<std::size_t>(n), '0');
    for (int q = 1; q <= n; ++q)
        if ((outcome >> (n - q)) & 1u) bits[static_cast<std::size_t>(q - 1)] = '1';
    return bits;
}

std::uint32_t bitstring_to_outcome(const std::string& bits) {
    std::uint32_t outcome = 0;
    for (char c : bits) {
        if (c != '0' && c != '1') throw std::invalid_argument("bad bitstring: " + bits);
        outcome = (outcome << 1) | static_cast<std::uint32_t>(c - '0');
    }
    return outcome;
}

std::string dataset_to_json(const MeasurementDataset& ds) {
    if (!ds.weights.empty())
        throw std::invalid_argument("dataset_to_json: weighted datasets are in-memory only");
    nlohmann::json meta;
    meta["family"] = family_name(ds.family);
    meta["n"] = ds.n;
    meta["model"] = ds.true_model ? nlohmann::json::parse(model_to_json(*ds.true_model))
                                  : nlohmann::json();
    meta["master_seed"] = ds.master_seed;
    meta["dt"] = ds.schedule.dt;
    meta["alpha"] = ds.schedule.alpha;
    meta["m_t"] = ds.schedule.m_t;
    meta["R"] = ds.R;
    meta["K"] = ds.K;
    meta["S"] = ds.S;
    nlohmann::json bases = nlohmann::json::array();
    for (const auto& b : ds.bases) bases.push_back(b.axes);
    meta["bases"] = std::move(bases);
    nlohmann::json angles = nlohmann::json::array();
    for (const auto& st : ds.spread_states) {
        nlohmann::json per_state = nlohmann::json::array();
        for (const auto& [xi, chi, phi] : st.angles) per_state.push_back({xi, chi, phi});
        angles.push_back(std::move(per_state));
    }
    meta["spread_angles"] = std::move(angles);

    nlohmann::json records = nlohmann::json::array();
    for (const auto& rec : ds.records)
        records.push_back({rec.r, rec.j, rec.k, rec.s, outcome_to_bitstring(rec.outcome, ds.n)});

    nlohmann::json j;
    j["metadata"] = std::move(meta);
    j["records"] = std::move(records);
    return j.dump();
}

MeasurementDataset dataset_from_json(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text);
    const nlohmann::json& meta = j.at("metadata");

    MeasurementDataset ds;
    ds.family = family_from_name(meta.at("family").get<std::string>());
    ds.n = meta.at("n").get<int>();
    if (!meta.at("model").is_null()) ds.true_model = model_from_json(meta.at("model").dump());
    ds.master_seed = meta.at("master_seed").get<std::uint64_t>();
    ds.schedule = {meta.at("dt").get<double>(), meta.at("alpha").get<double>(),
                   meta.at("m_t").get<int>()};
    ds.R = meta.at("R").get<int>();
    ds.K = meta.at("K").get<int>();
    ds.S = meta.at("S").get<int>();
    for (const auto& b : meta.at("bases")) ds.bases.push_back({b.get<std::string>()});
    for (const auto& per_state : meta.at("spread_angles")) {
        std::vector<std::array<double, 3>> angles;
        for (const auto& triple : per_state)
            angles.push_back({triple.at(0).get<double>(), triple.at(1).get<double>(),
                              triple.at(2).get<double>()});
        ds.spread_states.push_back(spread_state_from_angles(angles));
    }
    for (const auto& rec : j.at("records")) {
        ds.records.push_back({rec.at(0).get<int>(), rec.at(1).get<int>(), rec.at(2).get<int>(),
                              rec.at(3).get<int>(),
                              bitstring_to_outcome(rec.at(4).get<std::string>())});
    }

    if (static_cast<int>(ds.bases.size()) != ds.K ||
        static_cast<int>(ds.spread_states.size()) != ds.R ||
        ds.records.size() != static_cast<std::size_t>(ds.R) * ds.schedule.m_t * ds.K * ds.S)
        throw std::invalid_argument("dataset_from_json: inconsistent counts");
    return ds;
}

void save_dataset(const MeasurementDataset& ds, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("save_dataset: cannot open " + path);
    out << dataset_to_json(ds) << '\n';
    if (!out) throw std::runtime_error("save_dataset: write failed for " + path);
}

MeasurementDataset load_dataset(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("load_dataset: cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return dataset_from_json(buf.str());
}

std::string dataset_fingerprint(const MeasurementDataset& ds) {
    std::string text = dataset_to_json(ds);
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace hamlearn
