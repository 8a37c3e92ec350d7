#pragma once

#include "prokno/pk_model.hpp"

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace prokno::food {

enum class CarbSource { Fiber, AddedSugar, RefinedGrain, None, Other };
std::string to_string(CarbSource c);
CarbSource parse_carb_source(std::string_view text);

struct Ingredient {
    std::string name;
    std::string ingredient_class;
    CarbSource carb_source = CarbSource::None;
};

struct Quantity {
    double amount = 0.0;
    std::string unit;
};

struct Recipe {
    std::string name;
    std::string cuisine;
    std::optional<std::string> meal_slot;  // breakfast | lunch | dinner
    std::vector<Ingredient> ingredients;
    std::vector<std::string> actions;
    std::map<std::string, Quantity> nutrients;  // per serving

    static Recipe from_json(const Json& j, const std::string& path = {});
    Json to_json() const;
};

std::vector<Recipe> parse_recipes_jsonl(std::string_view text);

/// Unit -> (dimension, factor to the dimension's base unit).
class UnitTable {
public:
    struct Entry {
        std::string dimension;
        double factor = 1.0;
    };

    /// g/mg/mcg/kg, kcal/kJ, ml/l.
    static UnitTable defaults();

    bool contains(const std::string& unit) const { return units_.contains(unit); }
    /// Throws Error{UnitError} for unknown or incompatible units.
    double convert(double amount, const std::string& from, const std::string& to) const;

    void add(std::string unit, std::string dimension, double factor);

private:
    std::map<std::string, Entry> units_;
};

enum class Severity { Advisory, Flagged };

struct ActionEffectRule {
    std::string id;
    std::string action;
    std::string ingredient_class = "any";
    std::string adverse_effect;
    Severity severity = Severity::Flagged;
    std::string explanation;
};

/// Boolean predicate over a recipe. Leaves test carb sources, ingredient
/// classes, cooking actions or a nutrient against a fixed value or a named
/// per-profile limit; all/any/not compose them.
struct Predicate {
    enum class Kind { CarbSourceIn, IngredientClassIn, ActionIn, Nutrient, All, Any, Not };
    Kind kind = Kind::All;
    std::vector<std::string> values;
    std::string nutrient;
    std::string op;
    std::optional<double> amount;
    std::string unit;
    std::string limit;
    std::vector<Predicate> children;

    static Predicate from_json(const Json& j, const std::string& path);
    Json to_json() const;
};

enum class DietVerdict { Advisable, NotAdvisable };

struct DietaryRule {
    std::string id;
    std::string condition;
    Predicate predicate;
    DietVerdict verdict = DietVerdict::NotAdvisable;
    std::string explanation;
};

std::vector<ActionEffectRule> parse_action_rules(const Json& j);
std::vector<DietaryRule> parse_dietary_rules(const Json& j);
std::vector<ActionEffectRule> load_action_rules_file(const std::string& path);
std::vector<DietaryRule> load_dietary_rules_file(const std::string& path);

struct RecipeViolation {
    std::string rule_id;
    std::string kind;      // "action" | "dietary"
    std::string severity;  // "flagged" | "advisory" | "not_advisable"
    std::string effect;
    std::vector<std::string> matched;  // "action:<name>", "ingredient:<name>", "nutrient:<name>"
    std::string explanation;
};

struct RuleEvaluation {
    std::string rule_id;
    std::string kind;
    bool matched = false;
};

struct RecipeVerdict {
    std::string recipe;
    bool flagged = false;
    std::vector<RecipeViolation> violations;
    std::vector<RecipeViolation> endorsements;  // matched "advisable" dietary rules
    std::vector<RuleEvaluation> trace;

    Json to_json() const;
};

/// Named per-profile limits, e.g. {"daily_cho_limit": {45, "g"}}.
using ProfileLimits = std::map<std::string, Quantity>;

/// Throws Error{UnknownCondition} when `condition` is non-empty and no dietary
/// rule names it, Error{UnitError} for nutrient units outside `units`.
RecipeVerdict evaluate_recipe(const Recipe& recipe, const std::string& condition,
                              const std::vector<ActionEffectRule>& action_rules,
                              const std::vector<DietaryRule>& dietary_rules, const ProfileLimits& limits = {},
                              const UnitTable& units = UnitTable::defaults());

struct Profile {
    std::string condition;
    std::string cuisine;
    std::optional<std::string> meal_slot;
    ProfileLimits limits;

    static Profile from_json(const Json& j);
};

struct Recommendation {
    struct Entry {
        std::string recipe;
        std::optional<double> calories;
        RecipeVerdict verdict;
    };
    std::vector<Entry> recommended;
    std::vector<RecipeVerdict> rejected;
    std::vector<std::pair<std::string, std::string>> filtered;  // (recipe, reason)

    Json to_json() const;
};

/// Advisable recipes for the profile's meal slot and cuisine, cheapest in
/// calories first. Flagged recipes come back in `rejected`. Throws
/// Error{EmptyCatalog}.
Recommendation recommend(const std::vector<Recipe>& recipes, const Profile& profile,
                         const std::vector<ActionEffectRule>& action_rules,
                         const std::vector<DietaryRule>& dietary_rules,
                         const UnitTable& units = UnitTable::defaults());

ProfileLimits parse_limits(const Json& j);

}  // namespace prokno::food
