#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "hamlearn/fisher.hpp"
#include "hamlearn/pauli.hpp"
#include "hamlearn/sim.hpp"

namespace hamlearn {

// One measurement record. Indices are 1-based, matching the generation loops
// (spread state r, schedule slot j, basis k, shot s) and the wire format.
struct DatasetRecord {
    int r;
    int j;
    int k;
    int s;
    std::uint32_t outcome;  // bitstring as an integer, qubit 1 = most significant bit
};

struct MeasurementDataset {
    Family family = Family::CUSTOM;
    int n = 0;
    std::optional<ModelHamiltonian> true_model;
    std::uint64_t master_seed = 0;
    Schedule schedule;
    int R = 0;
    int K = 0;
    int S = 0;
    std::vector<PauliBasis> bases;            // K entries, sampled once and reused
    std::vector<SpreadState> spread_states;   // R entries
    std::vector<DatasetRecord> records;       // R * m_t * K * S entries
    // Optional per-record weights for exact-probability (infinite-shot) data;
    // empty means unit weights. In-memory only, never serialized.
    std::vector<double> weights;

    std::vector<double> times() const { return schedule_times(schedule); }
};

// Algorithm: sample K product Pauli bases once, R spread states once, then for
// each (state, time, basis, shot) draw one bitstring from the evolved state.
// Every draw uses a seed derived from (master_seed, indices), so the dataset
// is a pure function of its metadata.
MeasurementDataset generate_dataset(const ModelHamiltonian& H_true, int R, int K, int S,
                                    const Schedule& schedule, std::uint64_t master_seed);

// Weighted-record variant carrying the exact outcome distribution of every
// (state, time, basis) cell: one record per outcome, weighted by its model
// probability. Equivalent to the infinite-shot limit of generate_dataset.
MeasurementDataset exact_probability_dataset(
    const ModelHamiltonian& H_true, int R, int K, const Schedule& schedule,
    std::uint64_t master_seed,
    const std::optional<std::vector<PauliBasis>>& fixed_bases = std::nullopt);

// Rebuilds the dataset from its own metadata (true model, counts, schedule,
// master seed); the result serializes byte-identically to the original.
MeasurementDataset regenerate_dataset(const MeasurementDataset& ds);

std::string dataset_to_json(const MeasurementDataset& ds);
MeasurementDataset dataset_from_json(const std::string& text);
void save_dataset(const MeasurementDataset& ds, const std::string& path);
MeasurementDataset load_dataset(const std::string& path);

// FNV-1a hash of the canonical serialization, as fixed-width hex
std::string dataset_fingerprint(const MeasurementDataset& ds);

std::string outcome_to_bitstring(std::uint32_t outcome, int n);
std::uint32_t bitstring_to_outcome(const std::string& bits);

}  // namespace hamlearn
