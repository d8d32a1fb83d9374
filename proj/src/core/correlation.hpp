#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "core/model.hpp"

namespace chshforge {

// Quartet pair order used everywhere: (1A,1B), (1A,2B), (2A,1B), (2A,2B).
inline constexpr int kPair11 = 0;
inline constexpr int kPair12 = 1;
inline constexpr int kPair21 = 2;
inline constexpr int kPair22 = 3;
inline constexpr int kNumPairs = 4;

inline constexpr std::array<const char*, 4> kPairNames{"a1b1", "a1b2", "a2b1", "a2b2"};

// S = E(q0) - E(q1) - E(q2) - E(q3). The sign pattern is fixed; there are
// no symmetrized variants.
inline constexpr std::array<int, 4> kChshSigns{+1, -1, -1, -1};

// |S| may exceed 2 by at most this much before chsh_value treats the
// result as a bound violation.
inline constexpr double kBoundAssertTol = 1e-12;

// Returns 0..3 for a known pair name, -1 otherwise.
int pair_from_name(std::string_view name);

const std::string& pair_alice_setting(const SettingUniverse& universe, int pair);
const std::string& pair_bob_setting(const SettingUniverse& universe, int pair);

// Column of a setting identifier in the respective table; throws
// DomainError naming the setting when it is not in the universe.
std::size_t alice_column(const SettingUniverse& universe, const std::string& a);
std::size_t bob_column(const SettingUniverse& universe, const std::string& b);

struct CorrelationReport {
    std::string a;
    std::string b;
    double value = 0.0;
};

// E(a,b) = sum over points of A(p,a) * B(p,b) * weight(p).
double correlation(const LhvModel& model, const std::string& a, const std::string& b);
CorrelationReport correlation_report(const LhvModel& model, const std::string& a,
                                     const std::string& b);

double correlation_at_pair(const LhvModel& model, int pair);
std::array<double, 4> quartet_correlations(const LhvModel& model);

// S from the four quartet correlations. Enforces |S| <= 2 + kBoundAssertTol
// by throwing BoundViolation; use chsh_value_unchecked where a breach must
// be observed rather than thrown (the hunt does).
double chsh_value(const LhvModel& model);
double chsh_value_unchecked(const LhvModel& model);

struct IntegrandValue {
    std::string point;
    int value = 0; // always -2 or +2
};

// Per-point value of A1*(B1 - B2) - A2*(B1 + B2) at the quartet settings,
// in exact integer arithmetic. Its weight-averaged mean equals S.
std::vector<IntegrandValue> integrand_values(const LhvModel& model);

struct PairFactorization {
    std::string a;
    std::string b;
    double joint = 0.0;   // E(a,b)
    double product = 0.0; // E_A(a) * E_B(b)
    bool factorized = false;
};

struct FactorizationReport {
    double tol = 0.0;
    std::vector<std::pair<std::string, double>> alice_marginals;
    std::vector<std::pair<std::string, double>> bob_marginals;
    std::vector<PairFactorization> pairs; // all alice x bob setting pairs
    bool all_factorized = false;
};

// Compares E(a,b) against the product of the one-party marginals for every
// setting pair in the universe. A lowered ProductLhvModel factorizes on
// every pair; a generic correlated model does not.
FactorizationReport factorization_check(const LhvModel& model, double tol);
FactorizationReport factorization_check(const ProductLhvModel& product, double tol);

} // namespace chshforge
