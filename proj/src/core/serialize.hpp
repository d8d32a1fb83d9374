#pragma once

#include <array>
#include <string>
#include <vector>

#include "core/model.hpp"

namespace chshforge {

// Raw parse of the on-disk model schema:
//   { "points": [...], "weights": [...],
//     "alice_settings": [...], "bob_settings": [...],
//     "quartet": {"a1":.., "a2":.., "b1":.., "b2":..},
//     "A": [[...]], "B": [[...]] }
// with A/B one row per point, one column per setting. Rows are kept as
// parsed so shape problems surface as validation findings, not exceptions.
struct ModelDocument {
    std::vector<std::string> points;
    std::vector<double> weights;
    std::vector<std::string> alice_settings;
    std::vector<std::string> bob_settings;
    std::array<std::string, 4> quartet; // a1, a2, b1, b2
    std::vector<std::vector<double>> alice_rows;
    std::vector<std::vector<double>> bob_rows;
};

// Throws ParseError (with byte offset or offending field) on malformed
// JSON, missing fields, or wrong JSON types.
ModelDocument parse_model_document(const std::string& json_text);

// Structural findings: row counts, row lengths, weight count, entries that
// are not exactly -1 or +1, plus the universe checks.
ValidationReport validate_document(const ModelDocument& doc);

// Requires the structural findings to pass; throws DomainError listing the
// failures otherwise. Semantic problems (weights off normalization) still
// load and are left to validate_model.
LhvModel build_model(const ModelDocument& doc);

// parse + structural validation + build.
LhvModel parse_model_json(const std::string& json_text);

// Compact canonical form; parse(dump(m)) reproduces the numeric content
// exactly. indent < 0 emits one line.
std::string dump_model_json(const LhvModel& model, int indent = -1);

// Full diagnostic report for one model: validation, quartet correlations,
// S via the correlation route and via the integrand route, the per-point
// integrand table, and the factorization report at `tol`.
std::string verify_report_json(const LhvModel& model, double tol);

std::string validation_report_json(const ValidationReport& report);

} // namespace chshforge
