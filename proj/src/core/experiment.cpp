#include "core/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>

#include "json.hpp"

#include "core/correlation.hpp"
#include "core/error.hpp"
#include "core/rng.hpp"

namespace chshforge {

using nlohmann::json;

std::vector<int> round_robin_schedule(std::size_t n_trials) {
    std::vector<int> schedule(n_trials);
    for (std::size_t i = 0; i < n_trials; ++i) {
        schedule[i] = static_cast<int>(i % kNumPairs);
    }
    return schedule;
}

std::vector<int> uniform_schedule(std::uint64_t seed, std::size_t n_trials) {
    SplitMix64 rng(seed);
    std::vector<int> schedule(n_trials);
    for (auto& pair : schedule) {
        pair = static_cast<int>(rng.next_below(4));
    }
    return schedule;
}

std::vector<int> blocked_schedule(std::size_t n_per_pair) {
    std::vector<int> schedule;
    schedule.reserve(n_per_pair * kNumPairs);
    for (int pair = 0; pair < kNumPairs; ++pair) {
        schedule.insert(schedule.end(), n_per_pair, pair);
    }
    return schedule;
}

std::vector<TrialRecord> run_trials(const LhvModel& model, const std::vector<int>& schedule,
                                    std::uint64_t seed) {
    if (schedule.empty()) {
        throw DomainError("trial schedule is empty");
    }
    for (const int pair : schedule) {
        if (pair < 0 || pair >= kNumPairs) {
            throw DomainError("schedule pair " + std::to_string(pair) + " is not in 0..3");
        }
    }

    const auto& u = model.universe;
    const std::size_t stride_a = u.alice_settings.size();
    const std::size_t stride_b = u.bob_settings.size();
    const std::array<std::size_t, 2> qa{alice_column(u, u.quartet_alice[0]),
                                        alice_column(u, u.quartet_alice[1])};
    const std::array<std::size_t, 2> qb{bob_column(u, u.quartet_bob[0]),
                                        bob_column(u, u.quartet_bob[1])};

    const std::size_t n_points = model.space.points.size();
    std::vector<TrialRecord> records(schedule.size());
    for (std::size_t t = 0; t < schedule.size(); ++t) {
        SplitMix64 rng(substream_seed(seed, t));
        const double u01 = rng.next_double();

        // Inverse-CDF walk over the weights; the tail catch-all absorbs the
        // sliver the running sum may leave below 1.
        std::size_t point = n_points - 1;
        double cum = 0.0;
        for (std::size_t p = 0; p + 1 < n_points; ++p) {
            cum += model.space.weights[p];
            if (u01 < cum) {
                point = p;
                break;
            }
        }

        const int pair = schedule[t];
        records[t].n = t + 1;
        records[t].pair = pair;
        records[t].a_out = model.alice_table[point * stride_a + qa[static_cast<std::size_t>(pair / 2)]];
        records[t].b_out = model.bob_table[point * stride_b + qb[static_cast<std::size_t>(pair % 2)]];
    }
    return records;
}

std::array<std::optional<PairStats>, 4> empirical_correlations(
    const std::vector<TrialRecord>& records) {
    std::array<std::int64_t, 4> sums{};
    std::array<std::uint64_t, 4> counts{};
    for (const auto& r : records) {
        const std::size_t pair = static_cast<std::size_t>(r.pair);
        sums[pair] += r.a_out * r.b_out;
        counts[pair]++;
    }

    std::array<std::optional<PairStats>, 4> stats;
    for (std::size_t pair = 0; pair < 4; ++pair) {
        if (counts[pair] == 0) continue;
        const double n = static_cast<double>(counts[pair]);
        const double mean = static_cast<double>(sums[pair]) / n;
        double stderr_value = 0.0;
        if (counts[pair] > 1) {
            // Products are +-1, so the sum of squares is just n.
            const double variance = std::max(0.0, (n - n * mean * mean) / (n - 1.0));
            stderr_value = std::sqrt(variance / n);
        }
        stats[pair] = PairStats{mean, stderr_value, counts[pair]};
    }
    return stats;
}

std::pair<double, double> empirical_chsh(const std::vector<TrialRecord>& records) {
    const auto stats = empirical_correlations(records);
    std::string missing;
    for (std::size_t pair = 0; pair < 4; ++pair) {
        if (!stats[pair].has_value()) {
            if (!missing.empty()) missing += ", ";
            missing += kPairNames[pair];
        }
    }
    if (!missing.empty()) {
        throw DomainError("no trials at pair(s): " + missing);
    }

    double s_hat = 0.0;
    double variance = 0.0;
    for (std::size_t pair = 0; pair < 4; ++pair) {
        s_hat += kChshSigns[pair] * stats[pair]->mean;
        variance += stats[pair]->stderr_ * stats[pair]->stderr_;
    }
    return {s_hat, std::sqrt(variance)};
}

FluctuationReport fluctuation_demo(const LhvModel& model, std::uint64_t n_per_pair,
                                   std::uint64_t runs, std::uint64_t seed) {
    if (n_per_pair < 1) {
        throw DomainError("n_per_pair must be at least 1");
    }
    if (runs < 1) {
        throw DomainError("runs must be at least 1");
    }

    FluctuationReport report;
    report.exact_s = chsh_value(model);
    report.n_per_pair = n_per_pair;
    report.runs = runs;

    const auto schedule = blocked_schedule(n_per_pair);
    for (std::uint64_t run = 0; run < runs; ++run) {
        const auto records = run_trials(model, schedule, substream_seed(seed, run));
        const auto [s_hat, s_err] = empirical_chsh(records);
        (void)s_err;
        if (std::fabs(s_hat) > 2.0) {
            report.exceed_count++;
        }
    }
    report.fraction = static_cast<double>(report.exceed_count) / static_cast<double>(runs);
    return report;
}

std::string trials_to_csv(const std::vector<TrialRecord>& records) {
    std::string out = "n,pair,a_out,b_out\n";
    for (const auto& r : records) {
        out += std::to_string(r.n);
        out += ',';
        out += kPairNames[static_cast<std::size_t>(r.pair)];
        out += ',';
        out += std::to_string(r.a_out);
        out += ',';
        out += std::to_string(r.b_out);
        out += '\n';
    }
    return out;
}

std::string empirical_report_json(const std::vector<TrialRecord>& records,
                                  const LhvModel* model) {
    const auto stats = empirical_correlations(records);

    json doc;
    doc["n_records"] = records.size();
    json pairs = json::object();
    bool all_present = true;
    for (std::size_t pair = 0; pair < 4; ++pair) {
        if (!stats[pair].has_value()) {
            pairs[kPairNames[pair]] = nullptr;
            all_present = false;
            continue;
        }
        json row;
        row["count"] = stats[pair]->count;
        row["mean"] = stats[pair]->mean;
        row["stderr"] = stats[pair]->stderr_;
        if (model != nullptr) {
            row["exact"] = correlation_at_pair(*model, static_cast<int>(pair));
        }
        pairs[kPairNames[pair]] = std::move(row);
    }
    doc["pairs"] = std::move(pairs);

    if (all_present) {
        const auto [s_hat, s_err] = empirical_chsh(records);
        doc["s_hat"] = s_hat;
        doc["s_stderr"] = s_err;
    } else {
        doc["s_hat"] = nullptr;
        doc["s_stderr"] = nullptr;
    }
    if (model != nullptr) {
        doc["exact_s"] = chsh_value_unchecked(*model);
    }
    return doc.dump(2);
}

std::string fluctuation_report_json(const FluctuationReport& report) {
    json doc;
    doc["exact_s"] = report.exact_s;
    doc["n_per_pair"] = report.n_per_pair;
    doc["runs"] = report.runs;
    doc["exceed_count"] = report.exceed_count;
    doc["fraction"] = report.fraction;
    return doc.dump(2);
}

} // namespace chshforge
