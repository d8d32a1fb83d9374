#include "core/optimizer.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <thread>

#include "json.hpp"

#include "core/correlation.hpp"
#include "core/error.hpp"
#include "core/rng.hpp"
#include "core/serialize.hpp"
#include "core/sum.hpp"

namespace chshforge {

using nlohmann::json;

std::vector<StrategyOutcome> enumerate_deterministic() {
    std::vector<StrategyOutcome> outcomes;
    outcomes.reserve(16);
    for (int a1 = -1; a1 <= 1; a1 += 2) {
        for (int a2 = -1; a2 <= 1; a2 += 2) {
            for (int b1 = -1; b1 <= 1; b1 += 2) {
                for (int b2 = -1; b2 <= 1; b2 += 2) {
                    StrategyOutcome o;
                    o.strategy = {a1, a2, b1, b2};
                    o.s = a1 * b1 - a1 * b2 - a2 * b1 - a2 * b2;
                    outcomes.push_back(o);
                }
            }
        }
    }
    return outcomes;
}

double brute_force_chsh(const LhvModel& model) {
    const auto& u = model.universe;
    const std::size_t stride_a = u.alice_settings.size();
    const std::size_t stride_b = u.bob_settings.size();
    const std::size_t ca1 = alice_column(u, u.quartet_alice[0]);
    const std::size_t ca2 = alice_column(u, u.quartet_alice[1]);
    const std::size_t cb1 = bob_column(u, u.quartet_bob[0]);
    const std::size_t cb2 = bob_column(u, u.quartet_bob[1]);

    CompensatedSum sum;
    for (std::size_t p = 0; p < model.space.points.size(); ++p) {
        const int a1 = model.alice_table[p * stride_a + ca1];
        const int a2 = model.alice_table[p * stride_a + ca2];
        const int b1 = model.bob_table[p * stride_b + cb1];
        const int b2 = model.bob_table[p * stride_b + cb2];
        const int integrand = a1 * (b1 - b2) - a2 * (b1 + b2);
        sum.add(model.space.weights[p] * integrand);
    }
    return sum.value();
}

Histogram::Histogram() : counts(88, 0) {}

void Histogram::add(double s) {
    int bucket = static_cast<int>(std::floor((s - lo) / width));
    if (bucket < 0) bucket = 0;
    const int last = static_cast<int>(counts.size()) - 1;
    if (bucket > last) bucket = last;
    counts[static_cast<std::size_t>(bucket)]++;
}

std::uint64_t Histogram::total() const {
    std::uint64_t n = 0;
    for (const auto c : counts) n += c;
    return n;
}

void HuntReport::merge(const HuntReport& other) {
    n_models += other.n_models;
    violations += other.violations;
    for (std::size_t b = 0; b < histogram.counts.size(); ++b) {
        histogram.counts[b] += other.histogram.counts[b];
    }
    if (other.max_route_delta > max_route_delta) {
        max_route_delta = other.max_route_delta;
    }
    if (other.max_abs_s > max_abs_s
        || (other.max_abs_s == max_abs_s && other.argmax_index < argmax_index)) {
        max_abs_s = other.max_abs_s;
        argmax_index = other.argmax_index;
        argmax_seed = other.argmax_seed;
    }
    if (other.falsification.has_value()
        && (!falsification.has_value() || other.falsification->index < falsification->index)) {
        falsification = other.falsification;
    }
}

namespace {

// Sequential scan of [begin, end); indices inside one worker only ever
// grow, so a strict > keeps the earliest argmax on ties.
void hunt_range(HuntReport& local, LhvModel& scratch, std::uint64_t master_seed,
                std::uint64_t begin, std::uint64_t end, std::size_t space_size,
                const SettingUniverse& universe) {
    for (std::uint64_t i = begin; i < end; ++i) {
        const std::uint64_t seed = substream_seed(master_seed, i);
        random_model_into(scratch, seed, space_size, universe);

        const double s = chsh_value_unchecked(scratch);
        const double delta = std::fabs(s - brute_force_chsh(scratch));
        if (delta > local.max_route_delta) {
            local.max_route_delta = delta;
        }

        const double abs_s = std::fabs(s);
        if (abs_s > local.max_abs_s) {
            local.max_abs_s = abs_s;
            local.argmax_index = i;
            local.argmax_seed = seed;
        }
        local.histogram.add(s);
        local.n_models++;

        if (abs_s > 2.0 + kViolationTol) {
            local.violations++;
            if (!local.falsification.has_value()) {
                local.falsification = Falsification{i, seed, s, dump_model_json(scratch, -1)};
            }
        }
    }
}

} // namespace

HuntReport hunt(std::uint64_t master_seed, std::uint64_t count, std::size_t space_size,
                const SettingUniverse& universe, int threads, std::uint64_t chunk_size) {
    if (count < 1) {
        throw DomainError("hunt needs at least one model");
    }
    if (space_size < 1) {
        throw DomainError("hidden variable space needs at least one point");
    }
    if (chunk_size == 0) {
        chunk_size = 8192;
    }

    std::uint64_t n_workers;
    if (threads > 0) {
        n_workers = static_cast<std::uint64_t>(threads);
    } else {
        const unsigned hw = std::thread::hardware_concurrency();
        n_workers = hw > 0 ? hw : 1;
    }
    const std::uint64_t n_chunks = (count + chunk_size - 1) / chunk_size;
    if (n_workers > n_chunks) n_workers = n_chunks;

    HuntReport merged;
    merged.space_size = space_size;
    merged.master_seed = master_seed;

    if (n_workers <= 1) {
        LhvModel scratch;
        hunt_range(merged, scratch, master_seed, 0, count, space_size, universe);
        return merged;
    }

    std::atomic<std::uint64_t> next_chunk{0};
    std::vector<HuntReport> locals(n_workers);
    std::vector<std::thread> workers;
    workers.reserve(n_workers);
    for (std::uint64_t w = 0; w < n_workers; ++w) {
        workers.emplace_back([&, w] {
            LhvModel scratch;
            for (;;) {
                const std::uint64_t chunk = next_chunk.fetch_add(1);
                if (chunk >= n_chunks) break;
                const std::uint64_t begin = chunk * chunk_size;
                const std::uint64_t end = std::min(count, begin + chunk_size);
                hunt_range(locals[w], scratch, master_seed, begin, end, space_size, universe);
            }
        });
    }
    for (auto& t : workers) t.join();
    for (const auto& local : locals) merged.merge(local);
    return merged;
}

std::pair<std::uint64_t, double> max_over_pool(const std::vector<PoolEntry>& pool) {
    if (pool.empty()) {
        throw DomainError("pool is empty");
    }
    double best_abs = -1.0;
    std::uint64_t best_trial = 0;
    double best_value = 0.0;
    for (const auto& entry : pool) {
        const double s = chsh_value(entry.model);
        const double abs_s = std::fabs(s);
        if (abs_s > best_abs || (abs_s == best_abs && entry.trial_index < best_trial)) {
            best_abs = abs_s;
            best_trial = entry.trial_index;
            best_value = s;
        }
    }
    return {best_trial, best_value};
}

std::string hunt_report_json(const HuntReport& report) {
    json doc;
    doc["n_models"] = report.n_models;
    doc["space_size"] = report.space_size;
    doc["master_seed"] = report.master_seed;
    doc["max_abs_s"] = report.max_abs_s;
    doc["argmax_index"] = report.argmax_index;
    doc["argmax_seed"] = report.argmax_seed;
    doc["violations"] = report.violations;
    doc["max_route_delta"] = report.max_route_delta;

    json hist;
    hist["lo"] = report.histogram.lo;
    hist["hi"] = report.histogram.hi;
    hist["width"] = report.histogram.width;
    hist["counts"] = report.histogram.counts;
    doc["histogram"] = std::move(hist);

    if (report.falsification.has_value()) {
        json f;
        f["index"] = report.falsification->index;
        f["seed"] = report.falsification->seed;
        f["s"] = report.falsification->s;
        f["model"] = json::parse(report.falsification->model_json);
        doc["falsification"] = std::move(f);
    }
    return doc.dump(2);
}

std::string falsification_json(const HuntReport& report) {
    if (!report.falsification.has_value()) {
        return "";
    }
    json doc;
    doc["index"] = report.falsification->index;
    doc["seed"] = report.falsification->seed;
    doc["s"] = report.falsification->s;
    doc["model"] = json::parse(report.falsification->model_json);
    return doc.dump(2);
}

} // namespace chshforge
