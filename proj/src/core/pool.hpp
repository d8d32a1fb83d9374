#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "core/model.hpp"

namespace chshforge {

// Target correlations, one per quartet pair.
struct QuantumTargets {
    std::array<double, 4> per_pair{};

    // The singlet values: +1/sqrt(2) at (1A,1B), -1/sqrt(2) elsewhere.
    static QuantumTargets singlet();
};

struct PoolEntry {
    std::uint64_t trial_index = 0; // 1-based, consecutive
    int pair = 0;                  // 0..3
    std::uint64_t seed = 0;        // reproduces the model via random_model
    LhvModel model;

    bool operator==(const PoolEntry&) const = default;
};

// Deterministic function of (seed, space_size, universe). Weights are
// normalized positive uniforms; table entries are independent fair signs.
// The returned model always validates.
LhvModel random_model(std::uint64_t seed, std::size_t space_size,
                      const SettingUniverse& universe);

// Same outputs, writing into an existing model to reuse its buffers. The
// hunt burns through millions of models; rebuilding the point names and
// reallocating the tables each time would dominate its runtime.
void random_model_into(LhvModel& scratch, std::uint64_t seed, std::size_t space_size,
                       const SettingUniverse& universe);

// One independently seeded model per trial, pair chosen uniformly from the
// quartet. Trial n derives everything from substream (master_seed, n), so
// generation order cannot change the pool.
std::vector<PoolEntry> draw_pool(std::uint64_t master_seed, std::size_t n_trials,
                                 const SettingUniverse& universe, std::size_t space_size,
                                 int threads = 1);

// Same, with an explicit pair per trial.
std::vector<PoolEntry> draw_pool(std::uint64_t master_seed, const std::vector<int>& schedule,
                                 const SettingUniverse& universe, std::size_t space_size,
                                 int threads = 1);

struct SelectionResult {
    // Earliest trial whose scheduled pair is q and whose model's own
    // correlation at q lands within tol of the target.
    std::array<std::optional<std::uint64_t>, 4> trial_for_pair;
    std::vector<int> missing;

    bool complete() const { return missing.empty(); }
};

SelectionResult select_matching_trials(const std::vector<PoolEntry>& pool,
                                       const QuantumTargets& targets, double tol);

// Two-point model with weights (p, 1-p), p = (1+c)/2, whose outcome product
// at `pair` is +1 on the first point and -1 on the second, so its
// correlation there is exactly 2p-1 = c. Both parties output +1 at every
// non-target setting.
LhvModel construct_target_model(int pair, double c, const SettingUniverse& universe);

// One model per quartet pair, selected after both settings are known.
// Deliberately NOT an LhvModel: no single (A, B, rho) over one hidden
// variable reproduces it in general, which is why its CHSH value can
// escape [-2, 2].
struct StitchedModel {
    SettingUniverse universe;
    std::array<LhvModel, 4> per_pair;
};

// Throws DomainError when the four models do not share one universe.
StitchedModel stitch(const std::array<LhvModel, 4>& per_pair);

// S* = E_{M11}(q11) - E_{M12}(q12) - E_{M21}(q21) - E_{M22}(q22), each
// correlation taken from the component assigned to that pair. No bound is
// asserted: values up to 4 are reachable.
double chsh_nonlocal(const StitchedModel& stitched);

// One summary object per line: trial_index, pair, seed, the four quartet
// correlations, and the model's S.
std::string pool_manifest_jsonl(const std::vector<PoolEntry>& pool);

// Demo report: targets, per-component correlation/S (and source trial when
// selected from a pool), and S*.
std::string stitched_report_json(const StitchedModel& stitched, const QuantumTargets& targets,
                                 const std::array<std::optional<std::uint64_t>, 4>* source_trials = nullptr);

} // namespace chshforge
