#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace chshforge {

// Finite hidden-variable space: named points carrying probability weights.
struct HiddenSpace {
    std::vector<std::string> points;
    std::vector<double> weights;

    bool operator==(const HiddenSpace&) const = default;
};

// Every setting each party could use, plus the two per party actually used
// in the experiment. Roles are positional: index 0 is the first quartet
// setting, index 1 the second. Identifiers are opaque; the universe may be
// strictly larger than the quartet.
struct SettingUniverse {
    std::vector<std::string> alice_settings;
    std::vector<std::string> bob_settings;
    std::array<std::string, 2> quartet_alice;
    std::array<std::string, 2> quartet_bob;

    bool operator==(const SettingUniverse&) const = default;
};

// The 2x2 universe with nothing beyond the quartet.
SettingUniverse minimal_universe();

// Local model over a finite space. Outcome tables are dense, row per point
// and column per setting (column order follows the universe's setting
// lists), with every entry in {-1, +1}. Alice's entry depends only on
// (point, alice setting) and Bob's only on (point, bob setting); that
// factored table layout is the locality structure.
struct LhvModel {
    HiddenSpace space;
    SettingUniverse universe;
    std::vector<std::int8_t> alice_table;
    std::vector<std::int8_t> bob_table;

    int alice(std::size_t point, std::size_t col) const {
        return alice_table[point * universe.alice_settings.size() + col];
    }
    int bob(std::size_t point, std::size_t col) const {
        return bob_table[point * universe.bob_settings.size() + col];
    }

    bool operator==(const LhvModel&) const = default;
};

// Builds a model from row-per-point tables. Throws DomainError when the
// rows do not form a points x settings rectangle.
LhvModel make_model(HiddenSpace space, SettingUniverse universe,
                    const std::vector<std::vector<int>>& alice_rows,
                    const std::vector<std::vector<int>>& bob_rows);

// Two independent hidden variables with a product weight measure: Alice's
// table reads only the first coordinate, Bob's only the second.
struct ProductLhvModel {
    HiddenSpace space_a;
    HiddenSpace space_b;
    SettingUniverse universe;
    std::vector<std::int8_t> alice_table; // space_a.points x alice_settings
    std::vector<std::int8_t> bob_table;   // space_b.points x bob_settings
};

// Expands the product measure into a single model over the product space.
// Point "(i,j)" carries weight w_a[i] * w_b[j]; tables replicate along the
// coordinate they ignore.
LhvModel lower_product(const ProductLhvModel& product);

struct ValidationFinding {
    std::string field;
    std::string check;
    bool passed = false;
    std::string message;
};

struct ValidationReport {
    std::vector<ValidationFinding> findings;

    bool ok() const;
    // Failed checks joined into one line, for error messages.
    std::string summary() const;
};

// Normalization slack accepted on the weight vector.
inline constexpr double kWeightSumTol = 1e-12;

// Checks every structural and semantic invariant of the space, the
// universe, and the tables. Nothing throws; each check lands in the report
// as pass or fail. A fully passing report means every downstream operation
// is defined on the model.
ValidationReport validate_model(const LhvModel& model);

ValidationReport validate_space(const HiddenSpace& space);
ValidationReport validate_universe(const SettingUniverse& universe);

} // namespace chshforge
