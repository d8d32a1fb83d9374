#include "core/pool.hpp"

#include <cmath>
#include <thread>
#include <utility>

#include "json.hpp"

#include "core/correlation.hpp"
#include "core/error.hpp"
#include "core/rng.hpp"
#include "core/serialize.hpp"
#include "core/sum.hpp"

namespace chshforge {

using nlohmann::json;

QuantumTargets QuantumTargets::singlet() {
    const double c = 1.0 / std::sqrt(2.0);
    return {{+c, -c, -c, -c}};
}

void random_model_into(LhvModel& scratch, std::uint64_t seed, std::size_t space_size,
                       const SettingUniverse& universe) {
    if (space_size < 1) {
        throw DomainError("space_size must be at least 1");
    }
    if (scratch.universe != universe) {
        scratch.universe = universe;
    }
    if (scratch.space.points.size() != space_size) {
        scratch.space.points.resize(space_size);
        for (std::size_t p = 0; p < space_size; ++p) {
            scratch.space.points[p] = "p" + std::to_string(p);
        }
    }
    scratch.space.weights.resize(space_size);
    scratch.alice_table.resize(space_size * universe.alice_settings.size());
    scratch.bob_table.resize(space_size * universe.bob_settings.size());

    SplitMix64 rng(seed);

    // Positive integer raws normalized by their compensated total. The
    // division distributes the rounding, so the weights sum to 1 within a
    // few ulp no matter how many points there are.
    CompensatedSum total;
    for (std::size_t p = 0; p < space_size; ++p) {
        const double raw = static_cast<double>((rng.next_u64() >> 11) + 1);
        scratch.space.weights[p] = raw;
        total.add(raw);
    }
    const double norm = total.value();
    for (std::size_t p = 0; p < space_size; ++p) {
        scratch.space.weights[p] /= norm;
    }

    for (auto& v : scratch.alice_table) v = static_cast<std::int8_t>(rng.next_sign());
    for (auto& v : scratch.bob_table) v = static_cast<std::int8_t>(rng.next_sign());
}

LhvModel random_model(std::uint64_t seed, std::size_t space_size,
                      const SettingUniverse& universe) {
    LhvModel m;
    random_model_into(m, seed, space_size, universe);
    return m;
}

namespace {

std::vector<PoolEntry> draw_pool_impl(std::uint64_t master_seed, std::size_t n_trials,
                                      const std::vector<int>* schedule,
                                      const SettingUniverse& universe, std::size_t space_size,
                                      int threads) {
    if (n_trials == 0) {
        throw DomainError("a pool needs at least one trial");
    }
    if (schedule != nullptr) {
        for (const int pair : *schedule) {
            if (pair < 0 || pair >= kNumPairs) {
                throw DomainError("schedule pair " + std::to_string(pair) + " is not in 0..3");
            }
        }
    }
    if (space_size < 1) {
        throw DomainError("space_size must be at least 1");
    }

    std::vector<PoolEntry> pool(n_trials);
    const auto fill_range = [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            SplitMix64 rng(substream_seed(master_seed, i));
            PoolEntry& entry = pool[i];
            entry.trial_index = i + 1;
            entry.pair = schedule != nullptr ? (*schedule)[i]
                                             : static_cast<int>(rng.next_below(4));
            entry.seed = rng.next_u64();
            random_model_into(entry.model, entry.seed, space_size, universe);
        }
    };

    const std::size_t want =
        threads <= 0 ? std::max(1u, std::thread::hardware_concurrency())
                     : static_cast<std::size_t>(threads);
    const std::size_t n_workers = std::min(want, n_trials);
    if (n_workers <= 1) {
        fill_range(0, n_trials);
        return pool;
    }

    std::vector<std::thread> workers;
    workers.reserve(n_workers);
    const std::size_t per = (n_trials + n_workers - 1) / n_workers;
    for (std::size_t w = 0; w < n_workers; ++w) {
        const std::size_t begin = w * per;
        const std::size_t end = std::min(begin + per, n_trials);
        if (begin >= end) break;
        workers.emplace_back(fill_range, begin, end);
    }
    for (auto& worker : workers) worker.join();
    return pool;
}

} // namespace

std::vector<PoolEntry> draw_pool(std::uint64_t master_seed, std::size_t n_trials,
                                 const SettingUniverse& universe, std::size_t space_size,
                                 int threads) {
    return draw_pool_impl(master_seed, n_trials, nullptr, universe, space_size, threads);
}

std::vector<PoolEntry> draw_pool(std::uint64_t master_seed, const std::vector<int>& schedule,
                                 const SettingUniverse& universe, std::size_t space_size,
                                 int threads) {
    return draw_pool_impl(master_seed, schedule.size(), &schedule, universe, space_size,
                          threads);
}

SelectionResult select_matching_trials(const std::vector<PoolEntry>& pool,
                                       const QuantumTargets& targets, double tol) {
    if (!(tol > 0.0)) {
        throw DomainError("matching tolerance must be positive");
    }
    SelectionResult result;
    for (const auto& entry : pool) {
        const std::size_t pair = static_cast<std::size_t>(entry.pair);
        auto& chosen = result.trial_for_pair[pair];
        if (chosen.has_value() && *chosen <= entry.trial_index) continue;
        const double e = correlation_at_pair(entry.model, entry.pair);
        if (std::fabs(e - targets.per_pair[pair]) <= tol) {
            chosen = entry.trial_index;
        }
    }
    for (int pair = 0; pair < kNumPairs; ++pair) {
        if (!result.trial_for_pair[static_cast<std::size_t>(pair)].has_value()) {
            result.missing.push_back(pair);
        }
    }
    return result;
}

LhvModel construct_target_model(int pair, double c, const SettingUniverse& universe) {
    if (pair < 0 || pair >= kNumPairs) {
        throw DomainError("setting pair index " + std::to_string(pair) + " is not in 0..3");
    }
    if (!(c >= -1.0 && c <= 1.0)) {
        throw DomainError("target correlation must be in [-1, 1]");
    }

    // Resolving both columns also audits that the quartet really is in the
    // universe; alice's column is not otherwise needed since her table
    // stays constant.
    (void)alice_column(universe, pair_alice_setting(universe, pair));
    const std::size_t cb = bob_column(universe, pair_bob_setting(universe, pair));
    const double p = (1.0 + c) / 2.0;

    LhvModel m;
    m.space.points = {"hit", "miss"};
    m.space.weights = {p, 1.0 - p};
    m.universe = universe;
    // Everything +1 except Bob's target setting on the second point, which
    // flips the product there to -1: E(pair) = p - (1 - p) = c exactly.
    m.alice_table.assign(2 * universe.alice_settings.size(), 1);
    m.bob_table.assign(2 * universe.bob_settings.size(), 1);
    m.bob_table[universe.bob_settings.size() + cb] = -1;
    return m;
}

StitchedModel stitch(const std::array<LhvModel, 4>& per_pair) {
    for (int pair = 1; pair < kNumPairs; ++pair) {
        if (!(per_pair[static_cast<std::size_t>(pair)].universe == per_pair[0].universe)) {
            throw DomainError("stitched components must share one setting universe");
        }
    }
    return {per_pair[0].universe, per_pair};
}

double chsh_nonlocal(const StitchedModel& stitched) {
    double s = 0.0;
    for (int pair = 0; pair < kNumPairs; ++pair) {
        const double e =
            correlation_at_pair(stitched.per_pair[static_cast<std::size_t>(pair)], pair);
        s += kChshSigns[static_cast<std::size_t>(pair)] * e;
    }
    return s;
}

std::string pool_manifest_jsonl(const std::vector<PoolEntry>& pool) {
    std::string out;
    for (const auto& entry : pool) {
        const auto e = quartet_correlations(entry.model);
        json line;
        line["trial_index"] = entry.trial_index;
        line["pair"] = kPairNames[static_cast<std::size_t>(entry.pair)];
        line["seed"] = entry.seed;
        json correlations = json::object();
        for (int pair = 0; pair < kNumPairs; ++pair) {
            correlations[kPairNames[static_cast<std::size_t>(pair)]] =
                e[static_cast<std::size_t>(pair)];
        }
        line["correlations"] = std::move(correlations);
        line["chsh"] = e[0] - e[1] - e[2] - e[3];
        out += line.dump();
        out += '\n';
    }
    return out;
}

std::string stitched_report_json(const StitchedModel& stitched, const QuantumTargets& targets,
                              const std::array<std::optional<std::uint64_t>, 4>* source_trials) {
    json doc;
    json target_obj = json::object();
    json components = json::array();
    double s_star = 0.0;
    for (int pair = 0; pair < kNumPairs; ++pair) {
        const std::size_t idx = static_cast<std::size_t>(pair);
        const auto& component = stitched.per_pair[idx];
        const double e = correlation_at_pair(component, pair);
        s_star += kChshSigns[idx] * e;

        target_obj[kPairNames[idx]] = targets.per_pair[idx];
        json row;
        row["pair"] = kPairNames[idx];
        row["target"] = targets.per_pair[idx];
        row["achieved"] = e;
        row["chsh"] = chsh_value_unchecked(component);
        if (source_trials != nullptr && (*source_trials)[idx].has_value()) {
            row["source_trial"] = *(*source_trials)[idx];
        }
        components.push_back(std::move(row));
    }
    doc["targets"] = std::move(target_obj);
    doc["components"] = std::move(components);
    doc["s_star"] = s_star;
    return doc.dump(2);
}

} // namespace chshforge
