#include "core/correlation.hpp"

#include <cmath>
#include <cstdio>

#include "core/error.hpp"
#include "core/sum.hpp"

namespace chshforge {

int pair_from_name(std::string_view name) {
    for (int pair = 0; pair < kNumPairs; ++pair) {
        if (name == kPairNames[static_cast<std::size_t>(pair)]) return pair;
    }
    return -1;
}

namespace {

void require_pair(int pair) {
    if (pair < 0 || pair >= kNumPairs) {
        throw DomainError("setting pair index " + std::to_string(pair) + " is not in 0..3");
    }
}

std::size_t find_column(const std::vector<std::string>& settings, const std::string& name,
                        const char* party) {
    for (std::size_t c = 0; c < settings.size(); ++c) {
        if (settings[c] == name) return c;
    }
    throw DomainError(std::string("unknown ") + party + " setting '" + name + "'");
}

} // namespace

const std::string& pair_alice_setting(const SettingUniverse& universe, int pair) {
    require_pair(pair);
    return universe.quartet_alice[static_cast<std::size_t>(pair / 2)];
}

const std::string& pair_bob_setting(const SettingUniverse& universe, int pair) {
    require_pair(pair);
    return universe.quartet_bob[static_cast<std::size_t>(pair % 2)];
}

std::size_t alice_column(const SettingUniverse& universe, const std::string& a) {
    return find_column(universe.alice_settings, a, "alice");
}

std::size_t bob_column(const SettingUniverse& universe, const std::string& b) {
    return find_column(universe.bob_settings, b, "bob");
}

namespace {

double correlation_at_columns(const LhvModel& m, std::size_t ca, std::size_t cb) {
    const std::size_t stride_a = m.universe.alice_settings.size();
    const std::size_t stride_b = m.universe.bob_settings.size();
    CompensatedSum e;
    for (std::size_t p = 0; p < m.space.points.size(); ++p) {
        const int product = m.alice_table[p * stride_a + ca] * m.bob_table[p * stride_b + cb];
        e.add(m.space.weights[p] * product);
    }
    return e.value();
}

struct QuartetColumns {
    std::size_t a1, a2, b1, b2;
};

QuartetColumns quartet_columns(const SettingUniverse& u) {
    return {alice_column(u, u.quartet_alice[0]), alice_column(u, u.quartet_alice[1]),
            bob_column(u, u.quartet_bob[0]), bob_column(u, u.quartet_bob[1])};
}

} // namespace

double correlation(const LhvModel& model, const std::string& a, const std::string& b) {
    return correlation_at_columns(model, alice_column(model.universe, a),
                                  bob_column(model.universe, b));
}

CorrelationReport correlation_report(const LhvModel& model, const std::string& a,
                                     const std::string& b) {
    return {a, b, correlation(model, a, b)};
}

double correlation_at_pair(const LhvModel& model, int pair) {
    return correlation(model, pair_alice_setting(model.universe, pair),
                       pair_bob_setting(model.universe, pair));
}

std::array<double, 4> quartet_correlations(const LhvModel& model) {
    const auto cols = quartet_columns(model.universe);
    const std::size_t stride_a = model.universe.alice_settings.size();
    const std::size_t stride_b = model.universe.bob_settings.size();

    // One pass over the points feeding all four sums.
    CompensatedSum e11, e12, e21, e22;
    for (std::size_t p = 0; p < model.space.points.size(); ++p) {
        const double w = model.space.weights[p];
        const int a1 = model.alice_table[p * stride_a + cols.a1];
        const int a2 = model.alice_table[p * stride_a + cols.a2];
        const int b1 = model.bob_table[p * stride_b + cols.b1];
        const int b2 = model.bob_table[p * stride_b + cols.b2];
        e11.add(w * (a1 * b1));
        e12.add(w * (a1 * b2));
        e21.add(w * (a2 * b1));
        e22.add(w * (a2 * b2));
    }
    return {e11.value(), e12.value(), e21.value(), e22.value()};
}

double chsh_value_unchecked(const LhvModel& model) {
    const auto e = quartet_correlations(model);
    return e[0] - e[1] - e[2] - e[3];
}

double chsh_value(const LhvModel& model) {
    const double s = chsh_value_unchecked(model);
    if (std::fabs(s) > 2.0 + kBoundAssertTol) {
        char buf[96];
        std::snprintf(buf, sizeof buf, "CHSH value %.17g escaped [-2, 2]", s);
        throw BoundViolation(buf);
    }
    return s;
}

std::vector<IntegrandValue> integrand_values(const LhvModel& model) {
    const auto cols = quartet_columns(model.universe);
    const std::size_t stride_a = model.universe.alice_settings.size();
    const std::size_t stride_b = model.universe.bob_settings.size();

    std::vector<IntegrandValue> values;
    values.reserve(model.space.points.size());
    for (std::size_t p = 0; p < model.space.points.size(); ++p) {
        const int a1 = model.alice_table[p * stride_a + cols.a1];
        const int a2 = model.alice_table[p * stride_a + cols.a2];
        const int b1 = model.bob_table[p * stride_b + cols.b1];
        const int b2 = model.bob_table[p * stride_b + cols.b2];
        values.push_back({model.space.points[p], a1 * (b1 - b2) - a2 * (b1 + b2)});
    }
    return values;
}

FactorizationReport factorization_check(const LhvModel& model, double tol) {
    const std::size_t stride_a = model.universe.alice_settings.size();
    const std::size_t stride_b = model.universe.bob_settings.size();

    FactorizationReport report;
    report.tol = tol;
    report.all_factorized = true;

    std::vector<double> ea(stride_a), eb(stride_b);
    for (std::size_t c = 0; c < stride_a; ++c) {
        CompensatedSum sum;
        for (std::size_t p = 0; p < model.space.points.size(); ++p) {
            sum.add(model.space.weights[p] * model.alice_table[p * stride_a + c]);
        }
        ea[c] = sum.value();
        report.alice_marginals.emplace_back(model.universe.alice_settings[c], ea[c]);
    }
    for (std::size_t c = 0; c < stride_b; ++c) {
        CompensatedSum sum;
        for (std::size_t p = 0; p < model.space.points.size(); ++p) {
            sum.add(model.space.weights[p] * model.bob_table[p * stride_b + c]);
        }
        eb[c] = sum.value();
        report.bob_marginals.emplace_back(model.universe.bob_settings[c], eb[c]);
    }

    for (std::size_t ca = 0; ca < stride_a; ++ca) {
        for (std::size_t cb = 0; cb < stride_b; ++cb) {
            PairFactorization pf;
            pf.a = model.universe.alice_settings[ca];
            pf.b = model.universe.bob_settings[cb];
            pf.joint = correlation_at_columns(model, ca, cb);
            pf.product = ea[ca] * eb[cb];
            pf.factorized = std::fabs(pf.joint - pf.product) <= tol;
            report.all_factorized = report.all_factorized && pf.factorized;
            report.pairs.push_back(std::move(pf));
        }
    }
    return report;
}

FactorizationReport factorization_check(const ProductLhvModel& product, double tol) {
    return factorization_check(lower_product(product), tol);
}

} // namespace chshforge
