#include "core/serialize.hpp"

#include <cmath>
#include <utility>

#include "json.hpp"

#include "core/correlation.hpp"
#include "core/error.hpp"
#include "core/sum.hpp"

namespace chshforge {

using nlohmann::json;

namespace {

const json& require_field(const json& doc, const char* name) {
    const auto it = doc.find(name);
    if (it == doc.end()) {
        throw ParseError(std::string("missing field '") + name + "'");
    }
    return *it;
}

std::vector<std::string> string_array(const json& doc, const char* name) {
    const json& field = require_field(doc, name);
    if (!field.is_array()) {
        throw ParseError(std::string("field '") + name + "' must be an array of strings");
    }
    std::vector<std::string> out;
    out.reserve(field.size());
    for (const auto& v : field) {
        if (!v.is_string()) {
            throw ParseError(std::string("field '") + name + "' must be an array of strings");
        }
        out.push_back(v.get<std::string>());
    }
    return out;
}

std::vector<double> number_array(const json& doc, const char* name) {
    const json& field = require_field(doc, name);
    if (!field.is_array()) {
        throw ParseError(std::string("field '") + name + "' must be an array of numbers");
    }
    std::vector<double> out;
    out.reserve(field.size());
    for (const auto& v : field) {
        if (!v.is_number()) {
            throw ParseError(std::string("field '") + name + "' must be an array of numbers");
        }
        out.push_back(v.get<double>());
    }
    return out;
}

std::vector<std::vector<double>> table_rows(const json& doc, const char* name) {
    const json& field = require_field(doc, name);
    if (!field.is_array()) {
        throw ParseError(std::string("field '") + name + "' must be an array of rows");
    }
    std::vector<std::vector<double>> rows;
    rows.reserve(field.size());
    for (const auto& row : field) {
        if (!row.is_array()) {
            throw ParseError(std::string("field '") + name + "' must contain array rows");
        }
        std::vector<double> out;
        out.reserve(row.size());
        for (const auto& v : row) {
            if (!v.is_number()) {
                throw ParseError(std::string("field '") + name
                                 + "' must contain numeric entries");
            }
            out.push_back(v.get<double>());
        }
        rows.push_back(std::move(out));
    }
    return rows;
}

std::string quartet_field(const json& quartet, const char* role) {
    const auto it = quartet.find(role);
    if (it == quartet.end() || !it->is_string()) {
        throw ParseError(std::string("field 'quartet' needs a string entry '") + role + "'");
    }
    return it->get<std::string>();
}

// Checks that gate build_model: without these the dense tables cannot be
// constructed faithfully. Range checks stay semantic (validate_model).
bool is_structural(const ValidationFinding& f) {
    return f.check == "nonempty" || f.check == "count" || f.check == "shape"
        || f.check == "integer_entry";
}

void check_rows(ValidationReport& report, const char* field,
                const std::vector<std::vector<double>>& rows, std::size_t n_points,
                std::size_t n_settings) {
    bool shape_ok = rows.size() == n_points;
    for (const auto& row : rows) {
        shape_ok = shape_ok && row.size() == n_settings;
    }
    report.findings.push_back(
        {field, "shape", shape_ok,
         shape_ok ? "rows form a points x settings rectangle"
                  : "rows do not form a points x settings rectangle"});

    bool integral = true;
    for (const auto& row : rows) {
        for (const double v : row) {
            if (!(std::floor(v) == v) || std::fabs(v) > 127.0) integral = false;
        }
    }
    report.findings.push_back({field, "integer_entry", integral,
                               integral ? "every entry is a small integer"
                                        : "non-integer table entry"});
}

} // namespace

ModelDocument parse_model_document(const std::string& json_text) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ParseError(e.what());
    }
    if (!doc.is_object()) {
        throw ParseError("model document must be a JSON object");
    }

    ModelDocument out;
    out.points = string_array(doc, "points");
    out.weights = number_array(doc, "weights");
    out.alice_settings = string_array(doc, "alice_settings");
    out.bob_settings = string_array(doc, "bob_settings");

    const json& quartet = require_field(doc, "quartet");
    if (!quartet.is_object()) {
        throw ParseError("field 'quartet' must be an object");
    }
    out.quartet = {quartet_field(quartet, "a1"), quartet_field(quartet, "a2"),
                   quartet_field(quartet, "b1"), quartet_field(quartet, "b2")};

    out.alice_rows = table_rows(doc, "A");
    out.bob_rows = table_rows(doc, "B");
    return out;
}

ValidationReport validate_document(const ModelDocument& doc) {
    ValidationReport report;
    report.findings.push_back({"points", "nonempty", !doc.points.empty(),
                               doc.points.empty() ? "no points" : "at least one point"});
    const bool counts_match = doc.weights.size() == doc.points.size();
    report.findings.push_back({"weights", "count", counts_match,
                               counts_match ? "one weight per point"
                                            : std::to_string(doc.weights.size())
                                                  + " weights for "
                                                  + std::to_string(doc.points.size())
                                                  + " points"});
    check_rows(report, "A", doc.alice_rows, doc.points.size(), doc.alice_settings.size());
    check_rows(report, "B", doc.bob_rows, doc.points.size(), doc.bob_settings.size());

    SettingUniverse u;
    u.alice_settings = doc.alice_settings;
    u.bob_settings = doc.bob_settings;
    u.quartet_alice = {doc.quartet[0], doc.quartet[1]};
    u.quartet_bob = {doc.quartet[2], doc.quartet[3]};
    const auto universe_report = validate_universe(u);
    report.findings.insert(report.findings.end(), universe_report.findings.begin(),
                           universe_report.findings.end());
    return report;
}

LhvModel build_model(const ModelDocument& doc) {
    const auto report = validate_document(doc);
    std::string failures;
    for (const auto& f : report.findings) {
        if (!f.passed && is_structural(f)) {
            if (!failures.empty()) failures += "; ";
            failures += f.field + "/" + f.check + ": " + f.message;
        }
    }
    if (!failures.empty()) {
        throw DomainError("document cannot be built: " + failures);
    }

    LhvModel m;
    m.space.points = doc.points;
    m.space.weights = doc.weights;
    m.universe.alice_settings = doc.alice_settings;
    m.universe.bob_settings = doc.bob_settings;
    m.universe.quartet_alice = {doc.quartet[0], doc.quartet[1]};
    m.universe.quartet_bob = {doc.quartet[2], doc.quartet[3]};
    m.alice_table.reserve(doc.points.size() * doc.alice_settings.size());
    m.bob_table.reserve(doc.points.size() * doc.bob_settings.size());
    for (const auto& row : doc.alice_rows) {
        for (const double v : row) m.alice_table.push_back(static_cast<std::int8_t>(v));
    }
    for (const auto& row : doc.bob_rows) {
        for (const double v : row) m.bob_table.push_back(static_cast<std::int8_t>(v));
    }
    return m;
}

LhvModel parse_model_json(const std::string& json_text) {
    return build_model(parse_model_document(json_text));
}

namespace {

json model_to_json(const LhvModel& model) {
    json doc;
    doc["points"] = model.space.points;
    doc["weights"] = model.space.weights;
    doc["alice_settings"] = model.universe.alice_settings;
    doc["bob_settings"] = model.universe.bob_settings;
    doc["quartet"] = {{"a1", model.universe.quartet_alice[0]},
                      {"a2", model.universe.quartet_alice[1]},
                      {"b1", model.universe.quartet_bob[0]},
                      {"b2", model.universe.quartet_bob[1]}};

    const std::size_t stride_a = model.universe.alice_settings.size();
    const std::size_t stride_b = model.universe.bob_settings.size();
    json a_rows = json::array();
    json b_rows = json::array();
    for (std::size_t p = 0; p < model.space.points.size(); ++p) {
        json row_a = json::array();
        for (std::size_t c = 0; c < stride_a; ++c) {
            row_a.push_back(static_cast<int>(model.alice_table[p * stride_a + c]));
        }
        a_rows.push_back(std::move(row_a));
        json row_b = json::array();
        for (std::size_t c = 0; c < stride_b; ++c) {
            row_b.push_back(static_cast<int>(model.bob_table[p * stride_b + c]));
        }
        b_rows.push_back(std::move(row_b));
    }
    doc["A"] = std::move(a_rows);
    doc["B"] = std::move(b_rows);
    return doc;
}

json to_json(const ValidationReport& report) {
    json doc;
    doc["ok"] = report.ok();
    json findings = json::array();
    for (const auto& f : report.findings) {
        findings.push_back({{"field", f.field},
                            {"check", f.check},
                            {"passed", f.passed},
                            {"message", f.message}});
    }
    doc["findings"] = std::move(findings);
    return doc;
}

json to_json(const FactorizationReport& report) {
    json doc;
    doc["tol"] = report.tol;
    json am = json::object();
    for (const auto& [name, value] : report.alice_marginals) am[name] = value;
    json bm = json::object();
    for (const auto& [name, value] : report.bob_marginals) bm[name] = value;
    doc["alice_marginals"] = std::move(am);
    doc["bob_marginals"] = std::move(bm);
    json pairs = json::array();
    for (const auto& pf : report.pairs) {
        pairs.push_back({{"a", pf.a},
                         {"b", pf.b},
                         {"joint", pf.joint},
                         {"product", pf.product},
                         {"factorized", pf.factorized}});
    }
    doc["pairs"] = std::move(pairs);
    doc["all_factorized"] = report.all_factorized;
    return doc;
}

} // namespace

std::string dump_model_json(const LhvModel& model, int indent) {
    return model_to_json(model).dump(indent);
}

std::string verify_report_json(const LhvModel& model, double tol) {
    json doc;
    doc["validation"] = to_json(validate_model(model));

    const auto e = quartet_correlations(model);
    json correlations = json::object();
    for (int pair = 0; pair < kNumPairs; ++pair) {
        correlations[kPairNames[static_cast<std::size_t>(pair)]] =
            e[static_cast<std::size_t>(pair)];
    }
    doc["correlations"] = std::move(correlations);

    const double s = chsh_value_unchecked(model);
    doc["chsh"] = s;

    const auto values = integrand_values(model);
    CompensatedSum mean;
    json integrand = json::array();
    for (std::size_t p = 0; p < values.size(); ++p) {
        mean.add(model.space.weights[p] * values[p].value);
        integrand.push_back({{"point", values[p].point}, {"value", values[p].value}});
    }
    doc["integrand"] = std::move(integrand);
    doc["chsh_integrand_route"] = mean.value();
    doc["route_delta"] = std::fabs(mean.value() - s);

    doc["factorization"] = to_json(factorization_check(model, tol));
    return doc.dump(2);
}

std::string validation_report_json(const ValidationReport& report) {
    return to_json(report).dump(2);
}

} // namespace chshforge
