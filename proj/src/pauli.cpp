#include "hamlearn/pauli.hpp"

#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <map>
#include <stdexcept>

#include "hamlearn/rng.hpp"

namespace hamlearn {

using cd = std::complex<double>;

bool valid_pauli_string(const PauliString& s) {
    if (s.letters.empty()) return false;
    return std::all_of(s.letters.begin(), s.letters.end(), [](char c) {
        return c == 'I' || c == 'X' || c == 'Y' || c == 'Z';
    });
}

Matrix pauli_matrix(char letter) {
    Matrix m(2, 2);
    switch (letter) {
        case 'I': m << 1, 0, 0, 1; break;
        case 'X': m << 0, 1, 1, 0; break;
        case 'Y': m << 0, cd(0, -1), cd(0, 1), 0; break;
        case 'Z': m << 1, 0, 0, -1; break;
        default: throw std::invalid_argument("pauli_matrix: letter must be one of I, X, Y, Z");
    }
    return m;
}

Matrix string_matrix(const PauliString& s) {
    if (!valid_pauli_string(s)) throw std::invalid_argument("string_matrix: invalid Pauli string");
    int n = s.n();
    if (n > kMaxQubits) throw std::invalid_argument("string_matrix: qubit count exceeds dense budget");
    long d = 1L << n;

    // Column index of the single nonzero in each row: row ^ flip, where flip
    // has a bit set for every X or Y factor.
    long flip = 0;
    for (int q = 1; q <= n; ++q) {
        char letter = s.letters[q - 1];
        if (letter == 'X' || letter == 'Y') flip |= 1L << (n - q);
    }

    Matrix m = Matrix::Zero(d, d);
    for (long row = 0; row < d; ++row) {
        cd entry(1.0, 0.0);
        for (int q = 1; q <= n; ++q) {
            int bit = static_cast<int>((row >> (n - q)) & 1);
            switch (s.letters[q - 1]) {
                case 'Z': if (bit) entry = -entry; break;
                case 'Y': entry *= bit ? cd(0, 1) : cd(0, -1); break;
                default: break;  // I and X contribute factor 1
            }
        }
        m(row, row ^ flip) = entry;
    }
    return m;
}

std::string family_name(Family f) {
    switch (f) {
        case Family::XYZ: return "XYZ";
        case Family::XYZ2: return "XYZ2";
        case Family::XYZ3: return "XYZ3";
        case Family::XXZ: return "XXZ";
        case Family::CUSTOM: return "CUSTOM";
    }
    throw std::logic_error("family_name: unreachable");
}

Family family_from_name(const std::string& name) {
    std::string up(name);
    for (char& c : up) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    if (up == "XYZ") return Family::XYZ;
    if (up == "XYZ2") return Family::XYZ2;
    if (up == "XYZ3") return Family::XYZ3;
    if (up == "XXZ") return Family::XXZ;
    if (up == "CUSTOM") return Family::CUSTOM;
    throw std::invalid_argument("unknown Hamiltonian family: " + name);
}

ModelHamiltonian::ModelHamiltonian(int n, Family family, std::uint64_t seed,
                                   std::vector<PauliTerm> terms)
    : n_(n), family_(family), seed_(seed) {
    if (n < 1 || n > kMaxQubits) throw std::invalid_argument("ModelHamiltonian: bad qubit count");

    // Merge duplicate strings and drop the identity so the generator list
    // stays linearly independent and the matrix traceless.
    std::map<std::string, double> merged;
    std::vector<std::string> order;
    for (const auto& t : terms) {
        if (!valid_pauli_string(t.string) || t.string.n() != n)
            throw std::invalid_argument("ModelHamiltonian: term string does not match qubit count");
        if (t.string.letters == std::string(static_cast<std::size_t>(n), 'I'))
            throw std::invalid_argument("ModelHamiltonian: identity term not allowed");
        auto [it, inserted] = merged.try_emplace(t.string.letters, 0.0);
        if (inserted) order.push_back(t.string.letters);
        it->second += t.coeff;
    }
    terms_.reserve(order.size());
    for (const auto& s : order) terms_.push_back({merged.at(s), PauliString{s}});

    long d = 1L << n;
    matrix_ = Matrix::Zero(d, d);
    for (const auto& t : terms_) matrix_ += t.coeff * string_matrix(t.string);
}

namespace {

std::string pair_string(int n, int i, int j, char a, char b) {
    std::string s(static_cast<std::size_t>(n), 'I');
    s[i - 1] = a;
    s[j - 1] = b;
    return s;
}

std::string site_string(int n, int i, char a) {
    std::string s(static_cast<std::size_t>(n), 'I');
    s[i - 1] = a;
    return s;
}

std::string triple_string(int n, int i, char a) {
    std::string s(static_cast<std::size_t>(n), 'I');
    s[i - 1] = a;
    s[i] = a;
    s[i + 1] = a;
    return s;
}

double draw_coupling(const ParameterSpec& spec, Rng& rng) {
    if (spec.disorder) return rng.normal(spec.disorder->mean, spec.disorder->sigma);
    return rng.uniform(spec.low, spec.high);
}

}  // namespace

ModelHamiltonian build_model(const ParameterSpec& spec) {
    if (spec.low >= spec.high) throw std::invalid_argument("build_model: bounds must satisfy low < high");
    if (spec.disorder && spec.disorder->sigma < 0)
        throw std::invalid_argument("build_model: sigma must be >= 0");
    int n = spec.n;
    int min_n = (spec.family == Family::XYZ2 || spec.family == Family::XYZ3) ? 3 : 2;
    if (spec.family == Family::CUSTOM)
        throw std::invalid_argument("build_model: CUSTOM models are constructed from explicit terms");
    if (n < min_n || n > kMaxQubits)
        throw std::invalid_argument("build_model: invalid qubit count for family " + family_name(spec.family));

    Rng rng(spec.seed);
    std::vector<PauliTerm> terms;
    const char axes[3] = {'X', 'Y', 'Z'};

    // Draw order is part of the reproducibility contract: nearest-neighbour
    // couplings (x, y, z per bond), then fields, then extended terms.
    auto add_nearest = [&] {
        for (int i = 1; i <= n - 1; ++i)
            for (char a : axes)
                terms.push_back({draw_coupling(spec, rng), PauliString{pair_string(n, i, i + 1, a, a)}});
    };

    switch (spec.family) {
        case Family::XYZ:
            add_nearest();
            for (int i = 1; i <= n; ++i)
                terms.push_back({rng.uniform(spec.low, spec.high), PauliString{site_string(n, i, 'X')}});
            break;
        case Family::XYZ2:
            add_nearest();
            for (int i = 1; i <= n; ++i)
                for (char a : axes)
                    terms.push_back({rng.uniform(spec.low, spec.high), PauliString{site_string(n, i, a)}});
            for (int i = 1; i <= n - 2; ++i)
                for (char a : axes)
                    terms.push_back({draw_coupling(spec, rng), PauliString{pair_string(n, i, i + 2, a, a)}});
            break;
        case Family::XYZ3:
            add_nearest();
            for (int i = 1; i <= n; ++i)
                for (char a : axes)
                    terms.push_back({rng.uniform(spec.low, spec.high), PauliString{site_string(n, i, a)}});
            for (int i = 1; i <= n - 2; ++i)
                for (char a : axes)
                    terms.push_back({draw_coupling(spec, rng), PauliString{triple_string(n, i, a)}});
            break;
        case Family::XXZ: {
            double delta = rng.uniform(spec.delta_low, spec.delta_high);
            for (int i = 1; i <= n - 1; ++i) {
                terms.push_back({1.0, PauliString{pair_string(n, i, i + 1, 'X', 'X')}});
                terms.push_back({1.0, PauliString{pair_string(n, i, i + 1, 'Y', 'Y')}});
                terms.push_back({delta, PauliString{pair_string(n, i, i + 1, 'Z', 'Z')}});
            }
            break;
        }
        case Family::CUSTOM:
            break;  // unreachable, rejected above
    }

    return ModelHamiltonian(n, spec.family, spec.seed, std::move(terms));
}

std::vector<std::pair<Matrix, std::string>> term_generators(const ModelHamiltonian& H) {
    std::vector<std::pair<Matrix, std::string>> out;
    out.reserve(H.terms().size());
    for (const auto& t : H.terms()) out.emplace_back(string_matrix(t.string), t.string.letters);
    return out;
}

std::string model_to_json(const ModelHamiltonian& H) {
    nlohmann::json j;
    j["family"] = family_name(H.family());
    j["n"] = H.n();
    j["seed"] = H.seed();
    nlohmann::json terms = nlohmann::json::array();
    for (const auto& t : H.terms()) {
        terms.push_back({{"coeff", t.coeff}, {"string", t.string.letters}});
    }
    j["terms"] = std::move(terms);
    return j.dump();
}

ModelHamiltonian model_from_json(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text);
    int n = j.at("n").get<int>();
    Family family = family_from_name(j.at("family").get<std::string>());
    auto seed = j.at("seed").get<std::uint64_t>();
    std::vector<PauliTerm> terms;
    for (const auto& t : j.at("terms")) {
        terms.push_back({t.at("coeff").get<double>(), PauliString{t.at("string").get<std::string>()}});
    }
    return ModelHamiltonian(n, family, seed, std::move(terms));
}

}  // namespace hamlearn
