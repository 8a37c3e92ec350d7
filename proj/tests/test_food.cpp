#include "prokno/food.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace prokno;
using namespace prokno::food;
using prokno::testing::data_path;

namespace {

struct Rules {
    std::vector<ActionEffectRule> actions = load_action_rules_file(data_path("rules/food.actions.json"));
    std::vector<DietaryRule> dietary = load_dietary_rules_file(data_path("rules/food.diet.json"));
};

std::vector<Recipe> catalog() {
    return parse_recipes_jsonl(prokno::testing::read_file(data_path("fixtures/recipes.jsonl")));
}

Recipe by_name(const std::vector<Recipe>& recipes, const std::string& name) {
    return *std::find_if(recipes.begin(), recipes.end(), [&](const Recipe& r) { return r.name == name; });
}

ProfileLimits cho_limit(double grams) { return {{"daily_cho_limit", {grams, "g"}}}; }

Recipe simple(std::string name, std::string cls, double kcal, std::string slot = "dinner") {
    Recipe r;
    r.name = std::move(name);
    r.cuisine = "any";
    r.meal_slot = std::move(slot);
    r.ingredients = {{"item", std::move(cls), CarbSource::None}};
    r.actions = {"bake"};
    r.nutrients = {{"calories", {kcal, "kcal"}}};
    return r;
}

}  // namespace

TEST(Food, DeepFriedFriesFlaggedForTransFats) {
    const Rules rules;
    const auto v = evaluate_recipe(by_name(catalog(), "potato fries"), "", rules.actions, rules.dietary);
    EXPECT_TRUE(v.flagged);
    ASSERT_EQ(v.violations.size(), 1u);
    EXPECT_EQ(v.violations[0].rule_id, "A1");
    EXPECT_EQ(v.violations[0].effect, "trans fats");
    EXPECT_EQ(v.violations[0].matched.front(), "action:deep fry");
    // The ingredients themselves pass the diabetes rules.
    const auto diabetic = evaluate_recipe(by_name(catalog(), "potato fries"), "diabetes", rules.actions, rules.dietary,
                                          cho_limit(45));
    EXPECT_EQ(diabetic.violations.size(), 1u);
}

TEST(Food, GrillingMeatVersusVegetables) {
    const Rules rules;
    const auto meat = evaluate_recipe(by_name(catalog(), "grilled chicken thigh"), "", rules.actions, rules.dietary);
    EXPECT_TRUE(meat.flagged);
    EXPECT_EQ(meat.violations.at(0).effect, "carcinogenic agents");
    EXPECT_EQ(meat.violations.at(0).matched, (std::vector<std::string>{"action:grill", "ingredient:chicken thigh"}));
    const auto veg = evaluate_recipe(by_name(catalog(), "grilled vegetables"), "", rules.actions, rules.dietary);
    EXPECT_FALSE(veg.flagged);
    EXPECT_TRUE(veg.violations.empty());
}

TEST(Food, WhiteRiceFlaggedDespiteChoCompliance) {
    const Rules rules;
    const Recipe rice = by_name(catalog(), "white rice with dal");
    const auto v = evaluate_recipe(rice, "diabetes", rules.actions, rules.dietary, cho_limit(45));
    EXPECT_TRUE(v.flagged);
    ASSERT_EQ(v.violations.size(), 1u);
    EXPECT_EQ(v.violations[0].rule_id, "D1");
    EXPECT_EQ(v.violations[0].matched, std::vector<std::string>{"ingredient:white rice"});
    // 40000 mg is under the 45 g limit, so the limit rule itself does not fire.
    for (const auto& t : v.trace) {
        if (t.rule_id == "D2") EXPECT_FALSE(t.matched);
    }
    const auto tight = evaluate_recipe(rice, "diabetes", rules.actions, rules.dietary, cho_limit(39.5));
    EXPECT_EQ(tight.violations.size(), 2u);
}

TEST(Food, Errors) {
    const Rules rules;
    const Recipe rice = by_name(catalog(), "white rice with dal");
    try {
        evaluate_recipe(rice, "hypertension", rules.actions, rules.dietary);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::UnknownCondition);
    }
    Recipe odd = rice;
    odd.nutrients["carbohydrate"].unit = "cups";
    try {
        evaluate_recipe(odd, "diabetes", rules.actions, rules.dietary, cho_limit(45));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::UnitError);
    }
    EXPECT_THROW(evaluate_recipe(rice, "diabetes", rules.actions, rules.dietary), Error);  // no limit supplied
    EXPECT_THROW(Recipe::from_json(Json::parse(R"({"name":"x","ingredients":[]})")), Error);
    EXPECT_THROW(Recipe::from_json(Json::parse(
                     R"({"name":"x","ingredients":[{"name":"a","ingredient_class":"b"}],"nutrients":{"fat":{"quantity":-1,"unit":"g"}}})")),
                 Error);
}

TEST(Food, RecipeRoundTrip) {
    for (const auto& r : catalog()) {
        EXPECT_EQ(Recipe::from_json(r.to_json()).to_json().dump(), r.to_json().dump());
    }
}

TEST(Food, UnitConversion) {
    const auto units = UnitTable::defaults();
    EXPECT_DOUBLE_EQ(units.convert(40000, "mg", "g"), 40.0);
    EXPECT_NEAR(units.convert(418.4, "kJ", "kcal"), 100.0, 1e-9);
    EXPECT_THROW(units.convert(1, "g", "kcal"), Error);
}

TEST(Recommend, CheapestAdvisableFirst) {
    const std::vector<ActionEffectRule> actions{{"F", "deep fry", "any", "trans fats", Severity::Flagged, ""}};
    Recipe a = simple("A", "vegetable", 300), b = simple("B", "vegetable", 250), c = simple("C", "vegetable", 100);
    c.actions = {"deep fry"};
    const auto rec = recommend({a, b, c}, {}, actions, {});
    ASSERT_EQ(rec.recommended.size(), 2u);
    EXPECT_EQ(rec.recommended[0].recipe, "B");
    EXPECT_EQ(rec.recommended[1].recipe, "A");
    ASSERT_EQ(rec.rejected.size(), 1u);
    EXPECT_EQ(rec.rejected[0].recipe, "C");
    EXPECT_FALSE(rec.rejected[0].violations.empty());
}

TEST(Recommend, MealSlotFilter) {
    const auto rec = recommend({simple("A", "v", 300, "breakfast"), simple("B", "v", 250, "dinner")},
                               Profile{"", "", "dinner", {}}, {}, {});
    ASSERT_EQ(rec.recommended.size(), 1u);
    EXPECT_EQ(rec.recommended[0].recipe, "B");
    EXPECT_EQ(rec.filtered.size(), 1u);
}

TEST(Recommend, AllFlaggedIsNeverSilentlyEmpty) {
    const std::vector<ActionEffectRule> actions{{"B", "bake", "any", "acrylamide", Severity::Flagged, ""}};
    const auto rec = recommend({simple("A", "v", 1), simple("B", "v", 2)}, {}, actions, {});
    EXPECT_TRUE(rec.recommended.empty());
    EXPECT_EQ(rec.rejected.size(), 2u);
    EXPECT_THROW(recommend({}, {}, actions, {}), Error);
}

TEST(Recommend, CatalogOrderDoesNotMatter) {
    const Rules rules;
    auto recipes = catalog();
    const Profile profile{"diabetes", "", std::nullopt, cho_limit(45)};
    const std::string want = recommend(recipes, profile, rules.actions, rules.dietary).to_json().dump();
    std::mt19937 rng(9);
    for (int i = 0; i < 20; ++i) {
        std::shuffle(recipes.begin(), recipes.end(), rng);
        EXPECT_EQ(recommend(recipes, profile, rules.actions, rules.dietary).to_json().dump(), want);
    }
}

TEST(Evaluate, ActionRulesMatchPairwiseEnumeration) {
    const std::vector<std::string> acts{"grill", "deep fry", "boil", "bake"};
    const std::vector<std::string> classes{"meat", "vegetable", "grain", "any"};
    std::mt19937 rng(41);
    for (int round = 0; round < 200; ++round) {
        std::vector<ActionEffectRule> rules;
        for (int i = 0; i < 3; ++i) {
            rules.push_back({"R" + std::to_string(i), acts[rng() % acts.size()], classes[rng() % classes.size()],
                             "effect" + std::to_string(i), rng() % 2 ? Severity::Flagged : Severity::Advisory, ""});
        }
        Recipe r;
        r.name = "r";
        for (int i = 0; i < 3; ++i) {
            r.ingredients.push_back({"i" + std::to_string(i), classes[rng() % 3], CarbSource::None});
        }
        for (int i = 0; i < 2; ++i) r.actions.push_back(acts[rng() % acts.size()]);

        std::vector<std::vector<std::string>> expected;
        bool flagged = false;
        for (const auto& rule : rules) {
            for (const auto& a : r.actions) {
                std::vector<std::string> hit{"action:" + a};
                for (const auto& ing : r.ingredients) {
                    if (a == rule.action && (rule.ingredient_class == "any" || rule.ingredient_class == ing.ingredient_class)) {
                        hit.push_back("ingredient:" + ing.name);
                    }
                }
                if (hit.size() > 1) {
                    expected.push_back(hit);
                    flagged = flagged || rule.severity == Severity::Flagged;
                }
            }
        }
        const auto v = evaluate_recipe(r, "", rules, {});
        ASSERT_EQ(v.violations.size(), expected.size());
        for (std::size_t i = 0; i < expected.size(); ++i) EXPECT_EQ(v.violations[i].matched, expected[i]);
        EXPECT_EQ(v.flagged, flagged);
        for (const auto& x : v.violations) {
            EXPECT_FALSE(x.rule_id.empty());
            EXPECT_GE(x.matched.size(), 2u);
        }

        // Adding a rule never clears a flag.
        auto more = rules;
        more.push_back({"extra", acts[rng() % acts.size()], "any", "x", Severity::Advisory, ""});
        if (v.flagged) EXPECT_TRUE(evaluate_recipe(r, "", more, {}).flagged);
    }
}

TEST(Evaluate, PredicateComposition) {
    const auto rules = parse_dietary_rules(Json::parse(R"([
      {"id": "P1", "condition": "hypertension", "verdict": "not_advisable",
       "predicate": {"all": [{"nutrient": "sodium", "op": ">", "value": 0.6, "unit": "g"},
                             {"not": {"ingredient_class_in": ["vegetable"]}}]}}])"));
    Recipe r = simple("soup", "broth", 100);
    r.nutrients["sodium"] = {800, "mg"};
    EXPECT_TRUE(evaluate_recipe(r, "hypertension", {}, rules).flagged);
    r.nutrients["sodium"] = {500, "mg"};
    EXPECT_FALSE(evaluate_recipe(r, "hypertension", {}, rules).flagged);
    r.nutrients["sodium"] = {800, "mg"};
    r.ingredients.push_back({"celery", "vegetable", CarbSource::Fiber});
    EXPECT_FALSE(evaluate_recipe(r, "hypertension", {}, rules).flagged);
}
