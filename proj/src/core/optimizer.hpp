#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "core/model.hpp"
#include "core/pool.hpp"

namespace chshforge {

// Single-point model reduced to its four quartet table values.
struct DeterministicStrategy {
    int a1 = 0;
    int a2 = 0;
    int b1 = 0;
    int b2 = 0;
};

struct StrategyOutcome {
    DeterministicStrategy strategy;
    int s = 0; // exact integer S, always -2 or +2
};

// All 16 deterministic strategies with exact integer S. Eight give +2 and
// eight give -2; nothing in between and nothing beyond.
std::vector<StrategyOutcome> enumerate_deterministic();

// S as the weight-averaged per-point integrand: the combined-integral route.
// Independent of the four-correlation route in chsh_value; the two must
// agree to 1e-12 on every model.
double brute_force_chsh(const LhvModel& model);

struct Histogram {
    double lo = -2.2;
    double hi = 2.2;
    double width = 0.05;
    std::vector<std::uint64_t> counts; // 88 buckets; out-of-range clamps to the edges

    Histogram();
    void add(double s);
    std::uint64_t total() const;
};

// A model whose |S| crossed the violation threshold. Finding one would
// falsify the bound (or expose a bug); the full model is preserved for
// reproduction.
struct Falsification {
    std::uint64_t index = 0;
    std::uint64_t seed = 0;
    double s = 0.0;
    std::string model_json;
};

struct HuntReport {
    std::uint64_t n_models = 0;
    std::size_t space_size = 0;
    std::uint64_t master_seed = 0;
    double max_abs_s = -1.0;
    std::uint64_t argmax_index = 0;
    std::uint64_t argmax_seed = 0;
    Histogram histogram;
    std::uint64_t violations = 0;
    double max_route_delta = 0.0; // worst disagreement between the two S routes
    std::optional<Falsification> falsification;

    // Commutative, associative combine; the merged result is independent
    // of chunk order and thread count.
    void merge(const HuntReport& other);
};

// |S| must exceed 2 by more than this to count as a violation; anything
// closer is floating-point dust, not a counterexample.
inline constexpr double kViolationTol = 1e-9;

// Mass random search for a bound violation: `count` models on independent
// substreams of master_seed, fanned out over `threads` (0 = hardware) in
// chunks of `chunk_size`. Expected outcome on every run: zero violations.
HuntReport hunt(std::uint64_t master_seed, std::uint64_t count, std::size_t space_size,
                const SettingUniverse& universe, int threads = 0,
                std::uint64_t chunk_size = 8192);

// Entry with the largest |S|, earliest trial on ties.
std::pair<std::uint64_t, double> max_over_pool(const std::vector<PoolEntry>& pool);

std::string hunt_report_json(const HuntReport& report);
// Empty string when the report holds no falsification.
std::string falsification_json(const HuntReport& report);

} // namespace chshforge
