#include "core/model.hpp"

#include <cmath>
#include <cstdio>

#include "core/error.hpp"
#include "core/sum.hpp"

namespace chshforge {

SettingUniverse minimal_universe() {
    SettingUniverse u;
    u.alice_settings = {"a1", "a2"};
    u.bob_settings = {"b1", "b2"};
    u.quartet_alice = {"a1", "a2"};
    u.quartet_bob = {"b1", "b2"};
    return u;
}

LhvModel make_model(HiddenSpace space, SettingUniverse universe,
                    const std::vector<std::vector<int>>& alice_rows,
                    const std::vector<std::vector<int>>& bob_rows) {
    const std::size_t n_points = space.points.size();
    if (alice_rows.size() != n_points || bob_rows.size() != n_points) {
        throw DomainError("table row count does not match the point count");
    }

    LhvModel m;
    m.space = std::move(space);
    m.universe = std::move(universe);
    m.alice_table.reserve(n_points * m.universe.alice_settings.size());
    m.bob_table.reserve(n_points * m.universe.bob_settings.size());
    for (std::size_t p = 0; p < n_points; ++p) {
        if (alice_rows[p].size() != m.universe.alice_settings.size()) {
            throw DomainError("A row " + std::to_string(p) + " does not cover every setting");
        }
        if (bob_rows[p].size() != m.universe.bob_settings.size()) {
            throw DomainError("B row " + std::to_string(p) + " does not cover every setting");
        }
        for (const int v : alice_rows[p]) m.alice_table.push_back(static_cast<std::int8_t>(v));
        for (const int v : bob_rows[p]) m.bob_table.push_back(static_cast<std::int8_t>(v));
    }
    return m;
}

LhvModel lower_product(const ProductLhvModel& product) {
    const std::size_t na = product.space_a.points.size();
    const std::size_t nb = product.space_b.points.size();
    const std::size_t cols_a = product.universe.alice_settings.size();
    const std::size_t cols_b = product.universe.bob_settings.size();
    if (na == 0 || nb == 0) {
        throw DomainError("product factors must have at least one point each");
    }
    if (product.alice_table.size() != na * cols_a || product.bob_table.size() != nb * cols_b) {
        throw DomainError("product tables do not match their factor spaces");
    }

    LhvModel m;
    m.universe = product.universe;
    m.space.points.reserve(na * nb);
    m.space.weights.reserve(na * nb);
    m.alice_table.reserve(na * nb * cols_a);
    m.bob_table.reserve(na * nb * cols_b);
    for (std::size_t i = 0; i < na; ++i) {
        for (std::size_t j = 0; j < nb; ++j) {
            m.space.points.push_back(product.space_a.points[i] + "|" + product.space_b.points[j]);
            m.space.weights.push_back(product.space_a.weights[i] * product.space_b.weights[j]);
            for (std::size_t c = 0; c < cols_a; ++c) {
                m.alice_table.push_back(product.alice_table[i * cols_a + c]);
            }
            for (std::size_t c = 0; c < cols_b; ++c) {
                m.bob_table.push_back(product.bob_table[j * cols_b + c]);
            }
        }
    }
    return m;
}

bool ValidationReport::ok() const {
    for (const auto& f : findings) {
        if (!f.passed) return false;
    }
    return true;
}

std::string ValidationReport::summary() const {
    std::string out;
    for (const auto& f : findings) {
        if (f.passed) continue;
        if (!out.empty()) out += "; ";
        out += f.field + "/" + f.check + ": " + f.message;
    }
    return out;
}

namespace {

void add_finding(ValidationReport& report, std::string field, std::string check, bool passed,
                 std::string message) {
    report.findings.push_back({std::move(field), std::move(check), passed, std::move(message)});
}

bool contains(const std::vector<std::string>& names, const std::string& name) {
    for (const auto& n : names) {
        if (n == name) return true;
    }
    return false;
}

void check_table(ValidationReport& report, const char* field,
                 const std::vector<std::int8_t>& table, std::size_t n_points,
                 std::size_t n_settings) {
    const bool shape_ok = table.size() == n_points * n_settings;
    add_finding(report, field, "shape", shape_ok,
                shape_ok ? "total over points x settings"
                         : "expected " + std::to_string(n_points * n_settings) + " entries, have "
                               + std::to_string(table.size()));

    std::size_t bad = 0;
    for (const std::int8_t v : table) {
        if (v != 1 && v != -1) ++bad;
    }
    add_finding(report, field, "output_range", bad == 0,
                bad == 0 ? "every entry is -1 or +1"
                         : std::to_string(bad) + " entries outside {-1, +1}");
}

} // namespace

ValidationReport validate_space(const HiddenSpace& space) {
    ValidationReport report;
    add_finding(report, "points", "nonempty", !space.points.empty(),
                space.points.empty() ? "no hidden-variable points" : "at least one point");

    const bool counts_match = space.weights.size() == space.points.size();
    add_finding(report, "weights", "count", counts_match,
                counts_match ? "one weight per point"
                             : std::to_string(space.weights.size()) + " weights for "
                                   + std::to_string(space.points.size()) + " points");

    bool nonnegative = true;
    for (const double w : space.weights) {
        if (!(w >= 0.0)) nonnegative = false;
    }
    add_finding(report, "weights", "nonnegative", nonnegative,
                nonnegative ? "no negative weight" : "negative weight present");

    CompensatedSum total;
    for (const double w : space.weights) total.add(w);
    const double sum = total.value();
    const bool normalized = std::fabs(sum - 1.0) <= kWeightSumTol;
    char buf[64];
    std::snprintf(buf, sizeof buf, "weights sum to %.17g", sum);
    add_finding(report, "weights", "normalized", normalized, buf);
    return report;
}

ValidationReport validate_universe(const SettingUniverse& universe) {
    ValidationReport report;
    add_finding(report, "alice_settings", "count", universe.alice_settings.size() >= 2,
                "need at least two settings per party");
    add_finding(report, "bob_settings", "count", universe.bob_settings.size() >= 2,
                "need at least two settings per party");

    const bool a_member = contains(universe.alice_settings, universe.quartet_alice[0])
                       && contains(universe.alice_settings, universe.quartet_alice[1]);
    add_finding(report, "quartet_alice", "membership", a_member,
                a_member ? "both quartet settings are in the universe"
                         : "quartet names a setting outside alice_settings");
    add_finding(report, "quartet_alice", "distinct",
                universe.quartet_alice[0] != universe.quartet_alice[1],
                "the two quartet settings must differ");

    const bool b_member = contains(universe.bob_settings, universe.quartet_bob[0])
                       && contains(universe.bob_settings, universe.quartet_bob[1]);
    add_finding(report, "quartet_bob", "membership", b_member,
                b_member ? "both quartet settings are in the universe"
                         : "quartet names a setting outside bob_settings");
    add_finding(report, "quartet_bob", "distinct",
                universe.quartet_bob[0] != universe.quartet_bob[1],
                "the two quartet settings must differ");
    return report;
}

ValidationReport validate_model(const LhvModel& model) {
    ValidationReport report = validate_space(model.space);
    ValidationReport universe = validate_universe(model.universe);
    report.findings.insert(report.findings.end(), universe.findings.begin(),
                           universe.findings.end());

    check_table(report, "A", model.alice_table, model.space.points.size(),
                model.universe.alice_settings.size());
    check_table(report, "B", model.bob_table, model.space.points.size(),
                model.universe.bob_settings.size());
    return report;
}

} // namespace chshforge
