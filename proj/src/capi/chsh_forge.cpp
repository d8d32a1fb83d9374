#include "chsh_forge.h"

#include <cstdlib>
#include <cstring>
#include <exception>
#include <fstream>
#include <new>
#include <sstream>
#include <string>
#include <utility>

#include "json.hpp"

#include "core/correlation.hpp"
#include "core/error.hpp"
#include "core/experiment.hpp"
#include "core/model.hpp"
#include "core/optimizer.hpp"
#include "core/pool.hpp"
#include "core/serialize.hpp"

using nlohmann::json;

struct chshf_model {
    chshforge::LhvModel m;
};

namespace {

thread_local std::string t_last_error;

void set_error(std::string msg) { t_last_error = std::move(msg); }

int invalid_argument(const char* msg) {
    set_error(msg);
    return CHSHF_ERR_INVALID_ARGUMENT;
}

char* alloc_string(const std::string& s) {
    char* out = static_cast<char*>(std::malloc(s.size() + 1));
    if (out == nullptr) {
        throw std::bad_alloc();
    }
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

// Runs the body and maps exceptions onto status codes. Outputs are only
// assigned inside the body after everything that can throw, so a failing
// call leaves them untouched.
template <typename Fn>
int guarded(Fn&& fn) {
    try {
        t_last_error.clear();
        fn();
        return CHSHF_OK;
    } catch (const chshforge::ParseError& e) {
        set_error(e.what());
        return CHSHF_ERR_PARSE;
    } catch (const chshforge::BoundViolation& e) {
        set_error(e.what());
        return CHSHF_ERR_BOUND;
    } catch (const chshforge::DomainError& e) {
        set_error(e.what());
        return CHSHF_ERR_DOMAIN;
    } catch (const std::bad_alloc&) {
        set_error("out of memory");
        return CHSHF_ERR_INTERNAL;
    } catch (const std::exception& e) {
        set_error(e.what());
        return CHSHF_ERR_INTERNAL;
    } catch (...) {
        set_error("unknown failure");
        return CHSHF_ERR_INTERNAL;
    }
}

} // namespace

extern "C" {

const char* chshf_version(void) { return "0.1.0"; }

const char* chshf_last_error(void) { return t_last_error.c_str(); }

void chshf_string_free(char* s) { std::free(s); }

int chshf_model_parse(const char* json_text, chshf_model** out) {
    if (json_text == nullptr) return invalid_argument("json_text is null");
    if (out == nullptr) return invalid_argument("out is null");
    return guarded([&] {
        auto model = chshforge::parse_model_json(json_text);
        *out = new chshf_model{std::move(model)};
    });
}

int chshf_model_from_file(const char* path, chshf_model** out) {
    if (path == nullptr) return invalid_argument("path is null");
    if (out == nullptr) return invalid_argument("out is null");

    std::ifstream in(path, std::ios::binary);
    if (!in) {
        set_error(std::string("cannot read '") + path + "'");
        return CHSHF_ERR_IO;
    }
    std::ostringstream text;
    text << in.rdbuf();
    if (in.bad()) {
        set_error(std::string("read failed on '") + path + "'");
        return CHSHF_ERR_IO;
    }
    return guarded([&] {
        auto model = chshforge::parse_model_json(text.str());
        *out = new chshf_model{std::move(model)};
    });
}

void chshf_model_free(chshf_model* m) { delete m; }

int chshf_model_dump(const chshf_model* m, int indent, char** out_json) {
    if (m == nullptr) return invalid_argument("model is null");
    if (out_json == nullptr) return invalid_argument("out_json is null");
    return guarded([&] { *out_json = alloc_string(chshforge::dump_model_json(m->m, indent)); });
}

int chshf_model_validate(const chshf_model* m, char** out_report_json, int* out_ok) {
    if (m == nullptr) return invalid_argument("model is null");
    if (out_report_json == nullptr) return invalid_argument("out_report_json is null");
    if (out_ok == nullptr) return invalid_argument("out_ok is null");
    return guarded([&] {
        const auto report = chshforge::validate_model(m->m);
        char* text = alloc_string(chshforge::validation_report_json(report));
        *out_report_json = text;
        *out_ok = report.ok() ? 1 : 0;
    });
}

int chshf_model_chsh(const chshf_model* m, double* out_s) {
    if (m == nullptr) return invalid_argument("model is null");
    if (out_s == nullptr) return invalid_argument("out_s is null");
    return guarded([&] { *out_s = chshforge::chsh_value(m->m); });
}

int chshf_model_chsh_integrand(const chshf_model* m, double* out_s) {
    if (m == nullptr) return invalid_argument("model is null");
    if (out_s == nullptr) return invalid_argument("out_s is null");
    return guarded([&] { *out_s = chshforge::brute_force_chsh(m->m); });
}

int chshf_model_correlations(const chshf_model* m, double out_e[4]) {
    if (m == nullptr) return invalid_argument("model is null");
    if (out_e == nullptr) return invalid_argument("out_e is null");
    return guarded([&] {
        const auto e = chshforge::quartet_correlations(m->m);
        for (int q = 0; q < 4; ++q) out_e[q] = e[static_cast<std::size_t>(q)];
    });
}

int chshf_model_correlation(const chshf_model* m, const char* alice_setting,
                            const char* bob_setting, double* out_e) {
    if (m == nullptr) return invalid_argument("model is null");
    if (alice_setting == nullptr) return invalid_argument("alice_setting is null");
    if (bob_setting == nullptr) return invalid_argument("bob_setting is null");
    if (out_e == nullptr) return invalid_argument("out_e is null");
    return guarded([&] { *out_e = chshforge::correlation(m->m, alice_setting, bob_setting); });
}

int chshf_model_verify_json(const chshf_model* m, double factor_tol, char** out_json) {
    if (m == nullptr) return invalid_argument("model is null");
    if (out_json == nullptr) return invalid_argument("out_json is null");
    return guarded([&] {
        *out_json = alloc_string(chshforge::verify_report_json(m->m, factor_tol));
    });
}

int chshf_model_estimate(const chshf_model* m, uint64_t n_per_pair, uint64_t seed,
                         char** out_report_json, char** out_trials_csv) {
    if (m == nullptr) return invalid_argument("model is null");
    return guarded([&] {
        const auto schedule = chshforge::blocked_schedule(n_per_pair);
        const auto records = chshforge::run_trials(m->m, schedule, seed);

        char* report = nullptr;
        if (out_report_json != nullptr) {
            report = alloc_string(chshforge::empirical_report_json(records, &m->m));
        }
        char* log = nullptr;
        if (out_trials_csv != nullptr) {
            try {
                log = alloc_string(chshforge::trials_to_csv(records));
            } catch (...) {
                std::free(report);
                throw;
            }
        }
        if (out_report_json != nullptr) *out_report_json = report;
        if (out_trials_csv != nullptr) *out_trials_csv = log;
    });
}

int chshf_model_fluctuation(const chshf_model* m, uint64_t n_per_pair, uint64_t runs,
                            uint64_t seed, char** out_report_json) {
    if (m == nullptr) return invalid_argument("model is null");
    if (out_report_json == nullptr) return invalid_argument("out_report_json is null");
    return guarded([&] {
        const auto report = chshforge::fluctuation_demo(m->m, n_per_pair, runs, seed);
        *out_report_json = alloc_string(chshforge::fluctuation_report_json(report));
    });
}

int chshf_pool_manifest(uint64_t master_seed, uint64_t n_trials, size_t space_size,
                        char** out_jsonl) {
    if (out_jsonl == nullptr) return invalid_argument("out_jsonl is null");
    return guarded([&] {
        const auto pool = chshforge::draw_pool(master_seed, static_cast<std::size_t>(n_trials),
                                               chshforge::minimal_universe(), space_size);
        *out_jsonl = alloc_string(chshforge::pool_manifest_jsonl(pool));
    });
}

int chshf_pool_select(uint64_t master_seed, uint64_t n_trials, size_t space_size,
                      double tol, char** out_report_json, int* out_complete) {
    if (out_report_json == nullptr) return invalid_argument("out_report_json is null");
    return guarded([&] {
        const auto universe = chshforge::minimal_universe();
        const auto pool = chshforge::draw_pool(master_seed, static_cast<std::size_t>(n_trials),
                                               universe, space_size);
        const auto targets = chshforge::QuantumTargets::singlet();
        const auto sel = chshforge::select_matching_trials(pool, targets, tol);

        json doc;
        doc["master_seed"] = master_seed;
        doc["n_trials"] = n_trials;
        doc["space_size"] = space_size;
        doc["tol"] = tol;
        doc["complete"] = sel.complete();

        json missing = json::array();
        for (const int pair : sel.missing) {
            missing.push_back(chshforge::kPairNames[static_cast<std::size_t>(pair)]);
        }
        doc["missing"] = std::move(missing);

        json matches = json::object();
        for (int q = 0; q < chshforge::kNumPairs; ++q) {
            const auto& picked = sel.trial_for_pair[static_cast<std::size_t>(q)];
            if (!picked.has_value()) {
                matches[chshforge::kPairNames[static_cast<std::size_t>(q)]] = nullptr;
                continue;
            }
            const auto& entry = pool[static_cast<std::size_t>(*picked - 1)];
            json row;
            row["trial_index"] = entry.trial_index;
            row["seed"] = entry.seed;
            row["target"] = targets.per_pair[static_cast<std::size_t>(q)];
            row["achieved"] = chshforge::correlation_at_pair(entry.model, q);
            matches[chshforge::kPairNames[static_cast<std::size_t>(q)]] = std::move(row);
        }
        doc["matches"] = std::move(matches);

        if (sel.complete()) {
            std::array<chshforge::LhvModel, 4> per_pair;
            for (int q = 0; q < chshforge::kNumPairs; ++q) {
                const auto trial = *sel.trial_for_pair[static_cast<std::size_t>(q)];
                per_pair[static_cast<std::size_t>(q)] =
                    pool[static_cast<std::size_t>(trial - 1)].model;
            }
            const auto stitched = chshforge::stitch(per_pair);
            doc["stitched"] = json::parse(
                chshforge::stitched_report_json(stitched, targets, &sel.trial_for_pair));
        }

        char* text = alloc_string(doc.dump(2));
        *out_report_json = text;
        if (out_complete != nullptr) *out_complete = sel.complete() ? 1 : 0;
    });
}

int chshf_stitch_demo(int extremal, char** out_report_json) {
    if (out_report_json == nullptr) return invalid_argument("out_report_json is null");
    return guarded([&] {
        chshforge::QuantumTargets targets;
        if (extremal != 0) {
            targets.per_pair = {1.0, -1.0, -1.0, -1.0};
        } else {
            targets = chshforge::QuantumTargets::singlet();
        }
        const auto universe = chshforge::minimal_universe();
        std::array<chshforge::LhvModel, 4> per_pair;
        for (int q = 0; q < chshforge::kNumPairs; ++q) {
            per_pair[static_cast<std::size_t>(q)] = chshforge::construct_target_model(
                q, targets.per_pair[static_cast<std::size_t>(q)], universe);
        }
        const auto stitched = chshforge::stitch(per_pair);
        *out_report_json = alloc_string(chshforge::stitched_report_json(stitched, targets));
    });
}

int chshf_enumerate_json(char** out_json) {
    if (out_json == nullptr) return invalid_argument("out_json is null");
    return guarded([&] {
        json rows = json::array();
        for (const auto& o : chshforge::enumerate_deterministic()) {
            json row;
            row["a1"] = o.strategy.a1;
            row["a2"] = o.strategy.a2;
            row["b1"] = o.strategy.b1;
            row["b2"] = o.strategy.b2;
            row["s"] = o.s;
            rows.push_back(std::move(row));
        }
        json doc;
        doc["strategies"] = std::move(rows);
        *out_json = alloc_string(doc.dump(2));
    });
}

int chshf_enumerate_csv(char** out_csv) {
    if (out_csv == nullptr) return invalid_argument("out_csv is null");
    return guarded([&] {
        std::string csv = "a1,a2,b1,b2,s\n";
        for (const auto& o : chshforge::enumerate_deterministic()) {
            csv += std::to_string(o.strategy.a1) + ',' + std::to_string(o.strategy.a2) + ','
                 + std::to_string(o.strategy.b1) + ',' + std::to_string(o.strategy.b2) + ','
                 + std::to_string(o.s) + '\n';
        }
        *out_csv = alloc_string(csv);
    });
}

int chshf_hunt(uint64_t master_seed, uint64_t count, size_t space_size, int threads,
               uint64_t chunk_size, char** out_report_json, char** out_falsification_json,
               uint64_t* out_violations) {
    return guarded([&] {
        const auto report = chshforge::hunt(master_seed, count, space_size,
                                            chshforge::minimal_universe(), threads, chunk_size);

        char* text = nullptr;
        if (out_report_json != nullptr) {
            text = alloc_string(chshforge::hunt_report_json(report));
        }
        char* fals = nullptr;
        if (out_falsification_json != nullptr && report.falsification.has_value()) {
            try {
                fals = alloc_string(chshforge::falsification_json(report));
            } catch (...) {
                std::free(text);
                throw;
            }
        }
        if (out_report_json != nullptr) *out_report_json = text;
        if (out_falsification_json != nullptr) *out_falsification_json = fals;
        if (out_violations != nullptr) *out_violations = report.violations;
    });
}

} // extern "C"
