#include <doctest.h>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <set>

#include "hamlearn/dataset.hpp"
#include "hamlearn/recovery.hpp"
#include "oracle.hpp"

using namespace hamlearn;

namespace {

ModelHamiltonian test_model(int n = 2, std::uint64_t seed = 404) {
    ParameterSpec spec;
    spec.family = Family::XYZ;
    spec.n = n;
    spec.seed = seed;
    return build_model(spec);
}

}  // namespace

TEST_SUITE("dataset") {

TEST_CASE("bitstring codec uses qubit 1 as the most significant bit") {
    CHECK(outcome_to_bitstring(0, 3) == "000");
    CHECK(outcome_to_bitstring(4, 3) == "100");
    CHECK(outcome_to_bitstring(5, 3) == "101");
    CHECK(bitstring_to_outcome("101") == 5);
    CHECK(bitstring_to_outcome("0001") == 1);
    CHECK_THROWS_AS(bitstring_to_outcome("10a"), std::invalid_argument);
}

TEST_CASE("generation produces the full index grid") {
    ModelHamiltonian model = test_model();
    Schedule schedule{0.01, 1.0, 3};
    MeasurementDataset ds = generate_dataset(model, 4, 5, 2, schedule, 11);
    CHECK(ds.records.size() == 4u * 3u * 5u * 2u);
    CHECK(ds.bases.size() == 5);
    CHECK(ds.spread_states.size() == 4);
    CHECK(ds.weights.empty());

    std::set<std::tuple<int, int, int, int>> keys;
    for (const auto& rec : ds.records) {
        CHECK(rec.r >= 1);
        CHECK(rec.r <= 4);
        CHECK(rec.j >= 1);
        CHECK(rec.j <= 3);
        CHECK(rec.k >= 1);
        CHECK(rec.k <= 5);
        CHECK(rec.s >= 1);
        CHECK(rec.s <= 2);
        CHECK(rec.outcome < 4);
        keys.insert({rec.r, rec.j, rec.k, rec.s});
    }
    CHECK(keys.size() == ds.records.size());  // every grid point exactly once
}

TEST_CASE("desk-scale counts") {
    ModelHamiltonian model = test_model();
    MeasurementDataset ds = generate_dataset(model, 32, 25, 1, Schedule{0.01, 1.0, 8}, 3);
    CHECK(ds.records.size() == 6400);
}

TEST_CASE("same seed gives byte-identical JSON, different seeds differ") {
    ModelHamiltonian model = test_model();
    Schedule schedule{0.01, 1.0, 4};
    std::string a = dataset_to_json(generate_dataset(model, 3, 4, 1, schedule, 21));
    std::string b = dataset_to_json(generate_dataset(model, 3, 4, 1, schedule, 21));
    std::string c = dataset_to_json(generate_dataset(model, 3, 4, 1, schedule, 22));
    CHECK(a == b);
    CHECK(a != c);
}

TEST_CASE("JSON round trip is lossless") {
    ModelHamiltonian model = test_model();
    MeasurementDataset ds = generate_dataset(model, 3, 4, 2, Schedule{0.02, 0.5, 3}, 31);
    std::string first = dataset_to_json(ds);
    MeasurementDataset back = dataset_from_json(first);
    CHECK(dataset_to_json(back) == first);
    CHECK(back.n == ds.n);
    CHECK(back.R == ds.R);
    CHECK(back.schedule.alpha == ds.schedule.alpha);
    REQUIRE(back.true_model.has_value());
    CHECK((back.true_model->matrix() - ds.true_model->matrix()).cwiseAbs().maxCoeff() == 0.0);
    // Angle-reconstructed states match the originals exactly
    for (std::size_t r = 0; r < ds.spread_states.size(); ++r)
        CHECK((back.spread_states[r].vector - ds.spread_states[r].vector).cwiseAbs().maxCoeff() ==
              0.0);
}

TEST_CASE("save and load through a file") {
    ModelHamiltonian model = test_model();
    MeasurementDataset ds = generate_dataset(model, 2, 3, 1, Schedule{0.01, 1.0, 2}, 41);
    std::string path = (std::filesystem::temp_directory_path() / "hamlearn_ds_test.json").string();
    save_dataset(ds, path);
    MeasurementDataset back = load_dataset(path);
    CHECK(dataset_to_json(back) == dataset_to_json(ds));
    std::remove(path.c_str());
}

TEST_CASE("regeneration from metadata is byte-identical") {
    ModelHamiltonian model = test_model(3, 77);
    MeasurementDataset ds = generate_dataset(model, 4, 3, 2, Schedule{0.01, 0.7, 3}, 51);
    MeasurementDataset again = regenerate_dataset(ds);
    CHECK(dataset_to_json(again) == dataset_to_json(ds));
    CHECK(dataset_fingerprint(again) == dataset_fingerprint(ds));
}

TEST_CASE("fingerprint tracks content") {
    ModelHamiltonian model = test_model();
    MeasurementDataset ds = generate_dataset(model, 2, 2, 1, Schedule{0.01, 1.0, 2}, 61);
    std::string fp = dataset_fingerprint(ds);
    CHECK(fp.size() == 16);
    MeasurementDataset tweaked = ds;
    tweaked.records[0].outcome ^= 1u;
    CHECK(dataset_fingerprint(tweaked) != fp);
}

TEST_CASE("sampled frequencies match exact probabilities") {
    ModelHamiltonian model = test_model(2, 88);
    Schedule schedule{0.05, 1.0, 1};
    const int S = 10000;
    MeasurementDataset ds = generate_dataset(model, 1, 1, S, schedule, 71);

    SpectralDecomposition sd = eig_hermitian(model.matrix());
    Vector evolved = evolve(ds.spread_states[0].vector, sd, ds.times()[0]);
    Eigen::VectorXd probs = outcome_probabilities(evolved, ds.bases[0]);

    std::vector<double> observed(4, 0.0), expected(4, 0.0);
    for (const auto& rec : ds.records) observed[rec.outcome] += 1.0;
    for (int b = 0; b < 4; ++b) expected[b] = probs(b) * S;
    CHECK(oracle::chi_square_p(observed, expected) > 0.01);
}

TEST_CASE("exact-probability datasets carry the full distribution") {
    ModelHamiltonian model = test_model(2, 93);
    Schedule schedule{0.02, 1.0, 2};
    MeasurementDataset ds = exact_probability_dataset(model, 2, 3, schedule, 81);
    CHECK(ds.records.size() == 2u * 2u * 3u * 4u);
    REQUIRE(ds.weights.size() == ds.records.size());

    // Weights of each (r, j, k) cell sum to one.
    double cell_sum = 0;
    for (std::size_t i = 0; i < ds.records.size(); ++i) {
        const auto& rec = ds.records[i];
        if (rec.r == 1 && rec.j == 1 && rec.k == 1) cell_sum += ds.weights[i];
    }
    CHECK(cell_sum == doctest::Approx(1.0).epsilon(1e-12));

    // The NLL of the truth equals the mean outcome entropy of the data.
    double loss = nll_loss(model.matrix(), ds, kProbabilityFloor);
    double entropy = 0, total = 0;
    for (std::size_t i = 0; i < ds.records.size(); ++i) {
        if (ds.weights[i] > 0) entropy -= ds.weights[i] * std::log(ds.weights[i]);
        total += ds.weights[i];
    }
    CHECK(loss == doctest::Approx(entropy / total).epsilon(1e-10));

    CHECK_THROWS_AS(dataset_to_json(ds), std::invalid_argument);
    CHECK_THROWS_AS(regenerate_dataset(ds), std::invalid_argument);
}

TEST_CASE("fixed bases are honored") {
    ModelHamiltonian model = test_model(2, 95);
    std::vector<PauliBasis> bases = {{"XZ"}, {"YY"}};
    MeasurementDataset ds =
        exact_probability_dataset(model, 1, 2, Schedule{0.01, 1.0, 1}, 91, bases);
    CHECK(ds.bases[0].axes == "XZ");
    CHECK(ds.bases[1].axes == "YY");
    CHECK_THROWS_AS(
        exact_probability_dataset(model, 1, 3, Schedule{0.01, 1.0, 1}, 91, bases),
        std::invalid_argument);
}

TEST_CASE("malformed JSON is rejected") {
    ModelHamiltonian model = test_model();
    MeasurementDataset ds = generate_dataset(model, 2, 2, 1, Schedule{0.01, 1.0, 2}, 99);
    nlohmann::json j = nlohmann::json::parse(dataset_to_json(ds));
    j["records"].erase(0);  // count no longer matches R*m_t*K*S
    CHECK_THROWS_AS(dataset_from_json(j.dump()), std::invalid_argument);
}

}
