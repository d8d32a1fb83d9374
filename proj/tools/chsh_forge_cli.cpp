// chsh-forge: CHSH toolkit for local hidden-variable models, driven entirely
// through the C API. Exit codes: 0 success, 1 usage, 2 input, 3 falsification,
// 4 insufficient pool.

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "chsh_forge.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitInput = 2;
constexpr int kExitFalsification = 3;
constexpr int kExitInsufficientPool = 4;

constexpr double kCliBoundTol = 1e-9;
constexpr double kRouteTol = 1e-12;

struct OwnedString {
    char* s = nullptr;
    ~OwnedString() { chshf_string_free(s); }
};

struct OwnedModel {
    chshf_model* m = nullptr;
    ~OwnedModel() { chshf_model_free(m); }
};

int status_exit(int status) {
    switch (status) {
    case CHSHF_OK:
        return kExitOk;
    case CHSHF_ERR_INVALID_ARGUMENT:
        return kExitUsage;
    case CHSHF_ERR_BOUND:
        return kExitFalsification;
    default:
        return kExitInput;
    }
}

int fail(int status) {
    std::fprintf(stderr, "error: %s\n", chshf_last_error());
    return status_exit(status);
}

// Reports land in --out when given, otherwise on stdout; either way a
// trailing newline is guaranteed.
bool emit(const std::string& text, const std::string& out_path) {
    if (out_path.empty()) {
        std::fputs(text.c_str(), stdout);
        if (text.empty() || text.back() != '\n') std::fputc('\n', stdout);
        return true;
    }
    std::ofstream out(out_path, std::ios::binary);
    if (!out) {
        std::fprintf(stderr, "error: cannot write '%s'\n", out_path.c_str());
        return false;
    }
    out << text;
    if (text.empty() || text.back() != '\n') out << '\n';
    out.close();
    if (!out) {
        std::fprintf(stderr, "error: write failed on '%s'\n", out_path.c_str());
        return false;
    }
    return true;
}

// CHSH_FORGE_THREADS caps how wide the hunt may fan out; 0 from the flag
// means "all hardware threads", which the cap also bounds.
int effective_threads(int requested) {
    const char* env = std::getenv("CHSH_FORGE_THREADS");
    if (env == nullptr || *env == '\0') return requested;
    char* end = nullptr;
    const long cap = std::strtol(env, &end, 10);
    if (end == env || cap < 1) return requested;
    if (requested <= 0 || requested > cap) return static_cast<int>(cap);
    return requested;
}

void print_findings(const nlohmann::json& validation) {
    for (const auto& f : validation["findings"]) {
        if (f["passed"].get<bool>()) continue;
        std::fprintf(stderr, "  %s/%s: %s\n", f["field"].get<std::string>().c_str(),
                     f["check"].get<std::string>().c_str(),
                     f["message"].get<std::string>().c_str());
    }
}

int run_verify(const std::string& file, double tol, const std::string& out_path) {
    OwnedModel model;
    int status = chshf_model_from_file(file.c_str(), &model.m);
    if (status != CHSHF_OK) return fail(status);

    OwnedString validation;
    int ok = 0;
    status = chshf_model_validate(model.m, &validation.s, &ok);
    if (status != CHSHF_OK) return fail(status);
    if (ok != 1) {
        std::fprintf(stderr, "error: model fails validation:\n");
        print_findings(nlohmann::json::parse(validation.s));
        return kExitInput;
    }

    OwnedString report;
    status = chshf_model_verify_json(model.m, tol, &report.s);
    if (status != CHSHF_OK) return fail(status);
    const auto doc = nlohmann::json::parse(report.s);

    std::printf("correlations:\n");
    for (const char* pair : {"a1b1", "a1b2", "a2b1", "a2b2"}) {
        std::printf("  E(%s) = %.17g\n", pair, doc["correlations"][pair].get<double>());
    }
    const double s = doc["chsh"].get<double>();
    const double s_route = doc["chsh_integrand_route"].get<double>();
    const double delta = doc["route_delta"].get<double>();
    std::printf("S via correlations = %.17g\n", s);
    std::printf("S via integrand    = %.17g\n", s_route);
    std::printf("route delta        = %.17g\n", delta);
    std::printf("integrand per point:\n");
    for (const auto& row : doc["integrand"]) {
        std::printf("  %s: %+d\n", row["point"].get<std::string>().c_str(),
                    row["value"].get<int>());
    }
    const auto& factor = doc["factorization"];
    int factorized = 0;
    for (const auto& p : factor["pairs"]) {
        if (p["factorized"].get<bool>()) ++factorized;
    }
    std::printf("factorization at tol %.17g: %d of %zu setting pairs factorize\n",
                factor["tol"].get<double>(), factorized, factor["pairs"].size());

    if (!out_path.empty() && !emit(report.s, out_path)) return kExitInput;

    if (std::fabs(s) > 2.0 + kCliBoundTol || delta > kRouteTol) {
        std::printf("RESULT: |S| = %.17g breaches the bound or the routes disagree "
                    "(delta %.17g)\n", std::fabs(s), delta);
        return kExitFalsification;
    }
    std::printf("RESULT: |S| = %.17g within the bound, routes agree\n", std::fabs(s));
    return kExitOk;
}

int run_hunt(uint64_t seed, uint64_t count, size_t space_size, int threads,
             uint64_t chunk_size, const std::string& out_path) {
    OwnedString report;
    OwnedString falsification;
    uint64_t violations = 0;
    const int status = chshf_hunt(seed, count, space_size, effective_threads(threads),
                                  chunk_size, &report.s, &falsification.s, &violations);
    if (status != CHSHF_OK) return fail(status);

    const auto doc = nlohmann::json::parse(report.s);
    std::printf("searched %llu models of space size %zu: max |S| = %.17g, violations = %llu\n",
                static_cast<unsigned long long>(count), space_size,
                doc["max_abs_s"].get<double>(), static_cast<unsigned long long>(violations));
    if (!emit(report.s, out_path)) return kExitInput;

    if (violations > 0) {
        std::fprintf(stderr, "VIOLATION: a model escaped the bound; full reproduction data "
                             "is in the report\n");
        if (falsification.s != nullptr) std::fputs(falsification.s, stderr);
        return kExitFalsification;
    }
    return kExitOk;
}

void print_stitched(const nlohmann::json& doc) {
    std::printf("component contrast table:\n");
    std::printf("  %-6s %22s %22s %22s\n", "pair", "target E", "achieved E", "component S");
    for (const auto& comp : doc["components"]) {
        std::printf("  %-6s %22.15f %22.15f %22.15f\n",
                    comp["pair"].get<std::string>().c_str(), comp["target"].get<double>(),
                    comp["achieved"].get<double>(), comp["chsh"].get<double>());
    }
    std::printf("stitched S* = %.15f\n", doc["s_star"].get<double>());
}

int run_stitch_demo(bool extremal, const std::string& out_path) {
    OwnedString report;
    const int status = chshf_stitch_demo(extremal ? 1 : 0, &report.s);
    if (status != CHSHF_OK) return fail(status);
    print_stitched(nlohmann::json::parse(report.s));
    if (!emit(report.s, out_path)) return kExitInput;
    return kExitOk;
}

int run_pool_select(uint64_t seed, uint64_t count, size_t space_size, double tol,
                    const std::string& out_path, const std::string& manifest_path,
                    bool stitch_print) {
    if (!manifest_path.empty()) {
        OwnedString manifest;
        const int status = chshf_pool_manifest(seed, count, space_size, &manifest.s);
        if (status != CHSHF_OK) return fail(status);
        if (!emit(manifest.s, manifest_path)) return kExitInput;
    }

    OwnedString report;
    int complete = 0;
    const int status = chshf_pool_select(seed, count, space_size, tol, &report.s, &complete);
    if (status != CHSHF_OK) return fail(status);

    const auto doc = nlohmann::json::parse(report.s);
    if (complete == 1) {
        std::printf("pool of %llu trials: all four pairs matched at tol %.17g\n",
                    static_cast<unsigned long long>(count), tol);
        if (stitch_print) print_stitched(doc["stitched"]);
    } else {
        std::string missing;
        for (const auto& pair : doc["missing"]) {
            if (!missing.empty()) missing += ", ";
            missing += pair.get<std::string>();
        }
        std::printf("pool of %llu trials: no match at tol %.17g for: %s\n",
                    static_cast<unsigned long long>(count), tol, missing.c_str());
    }
    if (!emit(report.s, out_path)) return kExitInput;
    return complete == 1 ? kExitOk : kExitInsufficientPool;
}

int run_estimate(const std::string& file, uint64_t n_per_pair, uint64_t seed, uint64_t runs,
                 const std::string& out_path, const std::string& trials_path) {
    OwnedModel model;
    int status = chshf_model_from_file(file.c_str(), &model.m);
    if (status != CHSHF_OK) return fail(status);

    OwnedString report;
    OwnedString csv;
    status = chshf_model_estimate(model.m, n_per_pair, seed, &report.s,
                                  trials_path.empty() ? nullptr : &csv.s);
    if (status != CHSHF_OK) return fail(status);

    std::string report_text = report.s;
    if (runs > 0) {
        OwnedString fluct;
        status = chshf_model_fluctuation(model.m, n_per_pair, runs, seed, &fluct.s);
        if (status != CHSHF_OK) return fail(status);
        nlohmann::json combined;
        combined["empirical"] = nlohmann::json::parse(report.s);
        combined["fluctuation"] = nlohmann::json::parse(fluct.s);
        report_text = combined.dump(2);
    }

    const auto doc = nlohmann::json::parse(report.s);
    if (doc["s_hat"].is_number()) {
        std::printf("s_hat = %.17g +- %.17g (exact S = %.17g, n = %llu per pair)\n",
                    doc["s_hat"].get<double>(), doc["s_stderr"].get<double>(),
                    doc["exact_s"].get<double>(), static_cast<unsigned long long>(n_per_pair));
    }
    if (!trials_path.empty() && !emit(csv.s, trials_path)) return kExitInput;
    if (!emit(report_text, out_path)) return kExitInput;
    return kExitOk;
}

int run_enumerate(const std::string& format, const std::string& out_path) {
    OwnedString text;
    const int status =
        format == "csv" ? chshf_enumerate_csv(&text.s) : chshf_enumerate_json(&text.s);
    if (status != CHSHF_OK) return fail(status);
    if (!emit(text.s, out_path)) return kExitInput;
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"CHSH forge: local hidden-variable models, the |S| <= 2 bound, and the "
                 "stitching construction that evades it"};
    app.require_subcommand(1);

    // verify
    std::string verify_file;
    double verify_tol = 1e-12;
    std::string verify_out;
    auto* verify = app.add_subcommand(
        "verify", "Evaluate a model file: correlations, S via two routes, factorization");
    verify->add_option("model", verify_file, "model JSON file")->required();
    verify->add_option("--tol", verify_tol, "factorization tolerance");
    verify->add_option("--out", verify_out, "write the JSON report here");

    // hunt
    uint64_t hunt_seed = 0;
    uint64_t hunt_count = 0;
    size_t hunt_space = 8;
    int hunt_threads = 0;
    uint64_t hunt_chunk = 0;
    std::string hunt_out;
    auto* hunt = app.add_subcommand(
        "hunt", "Random search for a bound violation over seeded substreams");
    hunt->add_option("--seed", hunt_seed, "master seed")->required();
    hunt->add_option("--count", hunt_count, "number of models to draw")->required();
    hunt->add_option("--space-size", hunt_space, "hidden-variable points per model");
    hunt->add_option("--threads", hunt_threads, "worker threads (0 = all hardware)");
    hunt->add_option("--chunk-size", hunt_chunk, "models per work unit (0 = default)");
    hunt->add_option("--out", hunt_out, "write the hunt report here");

    // stitch-demo
    bool demo_extremal = false;
    std::string demo_out;
    bool demo_pool = false;
    uint64_t demo_seed = 0;
    uint64_t demo_count = 500;
    size_t demo_space = 8;
    double demo_tol = 0.05;
    std::string demo_manifest;
    auto* demo = app.add_subcommand(
        "stitch-demo", "Stitch four per-pair models into a non-local S* beyond 2");
    demo->add_option("--out", demo_out, "write the stitched report here");
    demo->add_flag("--extremal", demo_extremal,
                   "target (+1,-1,-1,-1) for S* = 4 instead of the singlet targets");
    demo->add_flag("--pool-select", demo_pool,
                   "select components from a random pool instead of constructing them");
    demo->add_option("--seed", demo_seed, "pool master seed (pool-select mode)");
    demo->add_option("--count", demo_count, "pool trials (pool-select mode)");
    demo->add_option("--space-size", demo_space, "pool model size (pool-select mode)");
    demo->add_option("--tol", demo_tol, "match tolerance (pool-select mode)");
    demo->add_option("--manifest", demo_manifest, "write the pool manifest here");

    // pool-select
    uint64_t sel_seed = 0;
    uint64_t sel_count = 0;
    size_t sel_space = 8;
    double sel_tol = 0.05;
    std::string sel_out;
    std::string sel_manifest;
    auto* sel = app.add_subcommand(
        "pool-select", "Draw a random pool and match each quartet pair to the singlet targets");
    sel->add_option("--seed", sel_seed, "master seed")->required();
    sel->add_option("--count", sel_count, "pool trials")->required();
    sel->add_option("--space-size", sel_space, "hidden-variable points per model");
    sel->add_option("--tol", sel_tol, "match tolerance");
    sel->add_option("--out", sel_out, "write the selection report here");
    sel->add_option("--manifest", sel_manifest, "write the pool manifest (JSON lines) here");

    // estimate
    std::string est_file;
    uint64_t est_count = 0;
    uint64_t est_seed = 0;
    uint64_t est_runs = 0;
    std::string est_out;
    std::string est_trials;
    auto* est = app.add_subcommand(
        "estimate", "Finite-sample experiment on a model: empirical vs exact correlations");
    est->add_option("model", est_file, "model JSON file")->required();
    est->add_option("--count", est_count, "trials per quartet pair")->required();
    est->add_option("--seed", est_seed, "experiment seed")->required();
    est->add_option("--runs", est_runs,
                    "repeat the experiment this many times and report the |s_hat| > 2 fraction");
    est->add_option("--out", est_out, "write the JSON report here");
    est->add_option("--trials-out", est_trials, "write the per-trial CSV log here");

    // enumerate
    std::string enum_format = "json";
    std::string enum_out;
    auto* enumerate = app.add_subcommand(
        "enumerate", "All 16 deterministic strategies and their exact S values");
    enumerate->add_option("--format", enum_format, "output format")
        ->check(CLI::IsMember({"json", "csv"}));
    enumerate->add_option("--out", enum_out, "write the table here");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    if (verify->parsed()) {
        return run_verify(verify_file, verify_tol, verify_out);
    }
    if (hunt->parsed()) {
        if (hunt_count < 1) {
            std::fprintf(stderr, "error: --count must be at least 1\n");
            return kExitUsage;
        }
        if (hunt_space < 1) {
            std::fprintf(stderr, "error: --space-size must be at least 1\n");
            return kExitUsage;
        }
        return run_hunt(hunt_seed, hunt_count, hunt_space, hunt_threads, hunt_chunk, hunt_out);
    }
    if (demo->parsed()) {
        if (!demo_pool) {
            return run_stitch_demo(demo_extremal, demo_out);
        }
        if (demo->count("--seed") == 0) {
            std::fprintf(stderr, "error: --pool-select needs --seed\n");
            return kExitUsage;
        }
        if (demo_extremal) {
            std::fprintf(stderr, "error: --extremal only applies to the direct construction\n");
            return kExitUsage;
        }
        return run_pool_select(demo_seed, demo_count, demo_space, demo_tol, demo_out,
                               demo_manifest, true);
    }
    if (sel->parsed()) {
        if (sel_count < 1) {
            std::fprintf(stderr, "error: --count must be at least 1\n");
            return kExitUsage;
        }
        return run_pool_select(sel_seed, sel_count, sel_space, sel_tol, sel_out, sel_manifest,
                               false);
    }
    if (est->parsed()) {
        if (est_count < 1) {
            std::fprintf(stderr, "error: --count must be at least 1\n");
            return kExitUsage;
        }
        return run_estimate(est_file, est_count, est_seed, est_runs, est_out, est_trials);
    }
    if (enumerate->parsed()) {
        return run_enumerate(enum_format, enum_out);
    }

    std::fprintf(stderr, "error: no command\n");
    return kExitUsage;
}
