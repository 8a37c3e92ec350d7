#include "prokno/food.hpp"
#include "prokno/text.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <tuple>

namespace prokno::food {

namespace {

[[noreturn]] void schema_error(const std::string& path, const std::string& what) {
    throw Error(ErrorCode::SchemaError, path + ": " + what, path);
}

std::string get_string(const Json& j, const char* key, const std::string& path, bool required = true) {
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) {
        if (required) schema_error(path + "/" + key, "missing field");
        return {};
    }
    if (!it->is_string()) schema_error(path + "/" + key, "expected string");
    return it->get<std::string>();
}

std::vector<std::string> get_strings(const Json& j, const char* key, const std::string& path) {
    auto it = j.find(key);
    if (it == j.end()) schema_error(path + "/" + key, "missing field");
    if (!it->is_array()) schema_error(path + "/" + key, "expected array");
    std::vector<std::string> out;
    for (const auto& v : *it) {
        if (!v.is_string()) schema_error(path + "/" + key, "expected strings");
        out.push_back(v.get<std::string>());
    }
    return out;
}

Json read_json_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::NotFound, "cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    try {
        return Json::parse(buf.str());
    } catch (const Json::parse_error& e) {
        throw Error(ErrorCode::ParseError, path + ": " + e.what());
    }
}

std::string key(std::string_view s) { return normalize_phrase(s); }

std::string replace_all(std::string text, std::string_view from, const std::string& to) {
    for (std::size_t pos = text.find(from); pos != std::string::npos; pos = text.find(from, pos + to.size())) {
        text.replace(pos, from.size(), to);
    }
    return text;
}

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i > 0) out += sep;
        out += parts[i];
    }
    return out;
}

Json violation_json(const RecipeViolation& v) {
    return Json{{"rule_id", v.rule_id}, {"kind", v.kind},       {"severity", v.severity},
                {"effect", v.effect},   {"matched", v.matched}, {"explanation", v.explanation}};
}

bool compare(double lhs, const std::string& op, double rhs) {
    if (op == "<") return lhs < rhs;
    if (op == "<=") return lhs <= rhs;
    if (op == ">") return lhs > rhs;
    if (op == ">=") return lhs >= rhs;
    return lhs == rhs;
}

class PredicateEvaluator {
public:
    PredicateEvaluator(const Recipe& recipe, const ProfileLimits& limits, const UnitTable& units)
        : recipe_(recipe), limits_(limits), units_(units) {}

    bool eval(const Predicate& p, std::vector<std::string>& matched) const {
        using K = Predicate::Kind;
        switch (p.kind) {
            case K::CarbSourceIn: {
                bool any = false;
                for (const auto& ing : recipe_.ingredients) {
                    if (std::find(p.values.begin(), p.values.end(), to_string(ing.carb_source)) != p.values.end()) {
                        matched.push_back("ingredient:" + ing.name);
                        any = true;
                    }
                }
                return any;
            }
            case K::IngredientClassIn: {
                bool any = false;
                for (const auto& ing : recipe_.ingredients) {
                    for (const auto& v : p.values) {
                        if (key(v) == key(ing.ingredient_class)) {
                            matched.push_back("ingredient:" + ing.name);
                            any = true;
                            break;
                        }
                    }
                }
                return any;
            }
            case K::ActionIn: {
                bool any = false;
                for (const auto& a : recipe_.actions) {
                    for (const auto& v : p.values) {
                        if (key(v) == key(a)) {
                            matched.push_back("action:" + a);
                            any = true;
                            break;
                        }
                    }
                }
                return any;
            }
            case K::Nutrient: {
                auto it = recipe_.nutrients.find(p.nutrient);
                if (it == recipe_.nutrients.end()) return false;
                double threshold = 0.0;
                std::string unit = p.unit;
                if (p.amount) {
                    threshold = *p.amount;
                } else {
                    auto lim = limits_.find(p.limit);
                    if (lim == limits_.end()) {
                        throw Error(ErrorCode::ConfigError, "profile limit '" + p.limit + "' not supplied",
                                    "/limits/" + p.limit);
                    }
                    threshold = lim->second.amount;
                    unit = lim->second.unit;
                }
                const double have = units_.convert(it->second.amount, it->second.unit, unit);
                if (!compare(have, p.op, threshold)) return false;
                matched.push_back("nutrient:" + p.nutrient);
                return true;
            }
            case K::All: {
                std::vector<std::string> local;
                for (const auto& c : p.children) {
                    if (!eval(c, local)) return false;
                }
                matched.insert(matched.end(), local.begin(), local.end());
                return true;
            }
            case K::Any: {
                bool any = false;
                for (const auto& c : p.children) any = eval(c, matched) || any;
                return any;
            }
            case K::Not: {
                std::vector<std::string> ignored;
                return !eval(p.children.front(), ignored);
            }
        }
        return false;
    }

private:
    const Recipe& recipe_;
    const ProfileLimits& limits_;
    const UnitTable& units_;
};

std::optional<double> calories_of(const Recipe& r, const UnitTable& units) {
    for (const char* name : {"calories", "energy"}) {
        auto it = r.nutrients.find(name);
        if (it != r.nutrients.end()) return units.convert(it->second.amount, it->second.unit, "kcal");
    }
    return std::nullopt;
}

}  // namespace

std::string to_string(CarbSource c) {
    switch (c) {
        case CarbSource::Fiber: return "fiber";
        case CarbSource::AddedSugar: return "added_sugar";
        case CarbSource::RefinedGrain: return "refined_grain";
        case CarbSource::None: return "none";
        case CarbSource::Other: return "other";
    }
    return "none";
}

CarbSource parse_carb_source(std::string_view text) {
    if (text == "fiber") return CarbSource::Fiber;
    if (text == "added_sugar") return CarbSource::AddedSugar;
    if (text == "refined_grain") return CarbSource::RefinedGrain;
    if (text == "none" || text.empty()) return CarbSource::None;
    if (text == "other") return CarbSource::Other;
    throw Error(ErrorCode::SchemaError, "unknown carb_source '" + std::string(text) + "'");
}

Recipe Recipe::from_json(const Json& j, const std::string& path) {
    if (!j.is_object()) schema_error(path, "recipe must be an object");
    Recipe r;
    r.name = get_string(j, "name", path);
    r.cuisine = get_string(j, "cuisine", path, false);
    if (auto slot = get_string(j, "meal_slot", path, false); !slot.empty()) {
        if (slot != "breakfast" && slot != "lunch" && slot != "dinner") {
            schema_error(path + "/meal_slot", "meal_slot must be breakfast, lunch or dinner");
        }
        r.meal_slot = slot;
    }
    auto ings = j.find("ingredients");
    if (ings == j.end() || !ings->is_array()) schema_error(path + "/ingredients", "expected array");
    for (std::size_t i = 0; i < ings->size(); ++i) {
        const std::string ipath = path + "/ingredients/" + std::to_string(i);
        const Json& ij = (*ings)[i];
        if (!ij.is_object()) schema_error(ipath, "expected object");
        r.ingredients.push_back({get_string(ij, "name", ipath), get_string(ij, "ingredient_class", ipath),
                                 parse_carb_source(get_string(ij, "carb_source", ipath, false))});
    }
    if (r.ingredients.empty()) {
        throw Error(ErrorCode::ValidationError, path + "/ingredients: at least one ingredient required",
                    path + "/ingredients");
    }
    if (j.contains("actions")) r.actions = get_strings(j, "actions", path);
    if (auto n = j.find("nutrients"); n != j.end() && !n->is_null()) {
        if (!n->is_object()) schema_error(path + "/nutrients", "expected object");
        for (const auto& [name, q] : n->items()) {
            const std::string npath = path + "/nutrients/" + name;
            if (!q.is_object() || !q.contains("quantity") || !q["quantity"].is_number()) {
                schema_error(npath, "expected {quantity, unit}");
            }
            Quantity quantity{q["quantity"].get<double>(), get_string(q, "unit", npath)};
            if (!(quantity.amount >= 0.0) || !std::isfinite(quantity.amount)) {
                throw Error(ErrorCode::ValidationError, npath + ": quantity must be non-negative", npath);
            }
            r.nutrients.emplace(name, std::move(quantity));
        }
    }
    return r;
}

Json Recipe::to_json() const {
    Json ings = Json::array();
    for (const auto& i : ingredients) {
        ings.push_back({{"name", i.name}, {"ingredient_class", i.ingredient_class}, {"carb_source", to_string(i.carb_source)}});
    }
    Json nuts = Json::object();
    for (const auto& [n, q] : nutrients) nuts[n] = {{"quantity", q.amount}, {"unit", q.unit}};
    return Json{{"name", name},       {"cuisine", cuisine}, {"meal_slot", meal_slot ? Json(*meal_slot) : Json(nullptr)},
                {"ingredients", ings}, {"actions", actions}, {"nutrients", nuts}};
}

std::vector<Recipe> parse_recipes_jsonl(std::string_view text) {
    std::vector<Recipe> out;
    std::istringstream in{std::string(text)};
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        Json j;
        try {
            j = Json::parse(line);
        } catch (const Json::parse_error& e) {
            throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": " + e.what());
        }
        out.push_back(Recipe::from_json(j, "/" + std::to_string(line_no - 1)));
    }
    return out;
}

UnitTable UnitTable::defaults() {
    UnitTable t;
    t.add("g", "mass", 1.0);
    t.add("mg", "mass", 1e-3);
    t.add("mcg", "mass", 1e-6);
    t.add("kg", "mass", 1e3);
    t.add("kcal", "energy", 1.0);
    t.add("kJ", "energy", 1.0 / 4.184);
    t.add("ml", "volume", 1.0);
    t.add("l", "volume", 1e3);
    return t;
}

void UnitTable::add(std::string unit, std::string dimension, double factor) {
    units_[std::move(unit)] = Entry{std::move(dimension), factor};
}

double UnitTable::convert(double amount, const std::string& from, const std::string& to) const {
    auto f = units_.find(from);
    auto t = units_.find(to);
    if (f == units_.end() || t == units_.end()) {
        throw Error(ErrorCode::UnitError, "unit '" + (f == units_.end() ? from : to) + "' is not in the unit table");
    }
    if (f->second.dimension != t->second.dimension) {
        throw Error(ErrorCode::UnitError, "cannot convert '" + from + "' to '" + to + "'");
    }
    return amount * f->second.factor / t->second.factor;
}

Predicate Predicate::from_json(const Json& j, const std::string& path) {
    if (!j.is_object() || j.size() == 0) schema_error(path, "predicate must be a non-empty object");
    Predicate p;
    auto list = [&](const char* k) {
        const Json& v = j.at(k);
        if (!v.is_array()) schema_error(path + "/" + k, "expected array");
        for (const auto& s : v) {
            if (!s.is_string()) schema_error(path + "/" + k, "expected strings");
            p.values.push_back(s.get<std::string>());
        }
    };
    auto children = [&](const char* k) {
        const Json& v = j.at(k);
        if (!v.is_array() || v.empty()) schema_error(path + "/" + k, "expected non-empty array");
        for (std::size_t i = 0; i < v.size(); ++i) {
            p.children.push_back(from_json(v[i], path + "/" + k + "/" + std::to_string(i)));
        }
    };
    if (j.contains("carb_source_in")) {
        p.kind = Kind::CarbSourceIn;
        list("carb_source_in");
        for (const auto& v : p.values) parse_carb_source(v);
    } else if (j.contains("ingredient_class_in")) {
        p.kind = Kind::IngredientClassIn;
        list("ingredient_class_in");
    } else if (j.contains("action_in")) {
        p.kind = Kind::ActionIn;
        list("action_in");
    } else if (j.contains("nutrient")) {
        p.kind = Kind::Nutrient;
        p.nutrient = get_string(j, "nutrient", path);
        p.op = get_string(j, "op", path);
        if (p.op != "<" && p.op != "<=" && p.op != ">" && p.op != ">=" && p.op != "==") {
            schema_error(path + "/op", "unknown comparison '" + p.op + "'");
        }
        if (j.contains("value")) {
            if (!j["value"].is_number()) schema_error(path + "/value", "expected number");
            p.amount = j["value"].get<double>();
            p.unit = get_string(j, "unit", path);
        } else {
            p.limit = get_string(j, "limit", path);
        }
    } else if (j.contains("all")) {
        p.kind = Kind::All;
        children("all");
    } else if (j.contains("any")) {
        p.kind = Kind::Any;
        children("any");
    } else if (j.contains("not")) {
        p.kind = Kind::Not;
        p.children.push_back(from_json(j.at("not"), path + "/not"));
    } else {
        schema_error(path, "unknown predicate");
    }
    return p;
}

Json Predicate::to_json() const {
    auto kids = [&] {
        Json a = Json::array();
        for (const auto& c : children) a.push_back(c.to_json());
        return a;
    };
    switch (kind) {
        case Kind::CarbSourceIn: return Json{{"carb_source_in", values}};
        case Kind::IngredientClassIn: return Json{{"ingredient_class_in", values}};
        case Kind::ActionIn: return Json{{"action_in", values}};
        case Kind::Nutrient:
            if (amount) return Json{{"nutrient", nutrient}, {"op", op}, {"value", *amount}, {"unit", unit}};
            return Json{{"nutrient", nutrient}, {"op", op}, {"limit", limit}};
        case Kind::All: return Json{{"all", kids()}};
        case Kind::Any: return Json{{"any", kids()}};
        case Kind::Not: return Json{{"not", children.front().to_json()}};
    }
    return {};
}

std::vector<ActionEffectRule> parse_action_rules(const Json& j) {
    if (!j.is_array()) schema_error("", "action rules must be a JSON array");
    std::vector<ActionEffectRule> out;
    for (std::size_t i = 0; i < j.size(); ++i) {
        const std::string path = "/" + std::to_string(i);
        const Json& r = j[i];
        if (!r.is_object()) schema_error(path, "expected object");
        ActionEffectRule rule;
        rule.id = get_string(r, "id", path);
        rule.action = get_string(r, "action", path);
        rule.ingredient_class = get_string(r, "ingredient_class", path, false);
        if (rule.ingredient_class.empty()) rule.ingredient_class = "any";
        rule.adverse_effect = get_string(r, "adverse_effect", path);
        const std::string severity = get_string(r, "severity", path, false);
        if (severity == "advisory") {
            rule.severity = Severity::Advisory;
        } else if (severity == "flagged" || severity.empty()) {
            rule.severity = Severity::Flagged;
        } else {
            schema_error(path + "/severity", "severity must be advisory or flagged");
        }
        rule.explanation = get_string(r, "explanation", path, false);
        if (key(rule.action).empty() || rule.adverse_effect.empty()) {
            throw Error(ErrorCode::ValidationError, path + ": action and adverse_effect must be non-empty", path);
        }
        out.push_back(std::move(rule));
    }
    return out;
}

std::vector<DietaryRule> parse_dietary_rules(const Json& j) {
    if (!j.is_array()) schema_error("", "dietary rules must be a JSON array");
    std::vector<DietaryRule> out;
    for (std::size_t i = 0; i < j.size(); ++i) {
        const std::string path = "/" + std::to_string(i);
        const Json& r = j[i];
        if (!r.is_object()) schema_error(path, "expected object");
        DietaryRule rule;
        rule.id = get_string(r, "id", path);
        rule.condition = get_string(r, "condition", path);
        if (!r.contains("predicate")) schema_error(path + "/predicate", "missing field");
        rule.predicate = Predicate::from_json(r["predicate"], path + "/predicate");
        const std::string verdict = get_string(r, "verdict", path);
        if (verdict == "not_advisable") {
            rule.verdict = DietVerdict::NotAdvisable;
        } else if (verdict == "advisable") {
            rule.verdict = DietVerdict::Advisable;
        } else {
            schema_error(path + "/verdict", "verdict must be advisable or not_advisable");
        }
        rule.explanation = get_string(r, "explanation", path, false);
        out.push_back(std::move(rule));
    }
    return out;
}

std::vector<ActionEffectRule> load_action_rules_file(const std::string& path) {
    return parse_action_rules(read_json_file(path));
}

std::vector<DietaryRule> load_dietary_rules_file(const std::string& path) {
    return parse_dietary_rules(read_json_file(path));
}

Json RecipeVerdict::to_json() const {
    Json v = Json::array();
    for (const auto& x : violations) v.push_back(violation_json(x));
    Json e = Json::array();
    for (const auto& x : endorsements) e.push_back(violation_json(x));
    Json t = Json::array();
    for (const auto& x : trace) t.push_back({{"rule_id", x.rule_id}, {"kind", x.kind}, {"matched", x.matched}});
    return Json{{"recipe", recipe},
                {"overall", flagged ? "flagged" : "advisable"},
                {"violations", v},
                {"endorsements", e},
                {"trace", t}};
}

RecipeVerdict evaluate_recipe(const Recipe& recipe, const std::string& condition,
                              const std::vector<ActionEffectRule>& action_rules,
                              const std::vector<DietaryRule>& dietary_rules, const ProfileLimits& limits,
                              const UnitTable& units) {
    const std::string condition_key = key(condition);
    if (!condition_key.empty()) {
        const bool known = std::any_of(dietary_rules.begin(), dietary_rules.end(),
                                       [&](const DietaryRule& r) { return key(r.condition) == condition_key; });
        if (!known) throw Error(ErrorCode::UnknownCondition, "no dietary rules for condition '" + condition + "'");
    }
    for (const auto& [name, q] : recipe.nutrients) {
        if (!units.contains(q.unit)) {
            throw Error(ErrorCode::UnitError, "nutrient '" + name + "' uses unknown unit '" + q.unit + "'",
                        "/nutrients/" + name);
        }
    }

    RecipeVerdict verdict;
    verdict.recipe = recipe.name;

    for (const auto& rule : action_rules) {
        bool rule_matched = false;
        for (const auto& action : recipe.actions) {
            if (key(action) != key(rule.action)) continue;
            std::vector<std::string> ingredients;
            for (const auto& ing : recipe.ingredients) {
                if (key(rule.ingredient_class) == "any" || key(rule.ingredient_class) == key(ing.ingredient_class)) {
                    ingredients.push_back(ing.name);
                }
            }
            if (ingredients.empty()) continue;
            rule_matched = true;
            RecipeViolation v;
            v.rule_id = rule.id;
            v.kind = "action";
            v.severity = rule.severity == Severity::Flagged ? "flagged" : "advisory";
            v.effect = rule.adverse_effect;
            v.matched.push_back("action:" + action);
            for (const auto& name : ingredients) v.matched.push_back("ingredient:" + name);
            std::string text = rule.explanation.empty() ? "{action} of {ingredients} produces {effect}" : rule.explanation;
            text = replace_all(std::move(text), "{recipe}", recipe.name);
            text = replace_all(std::move(text), "{action}", action);
            text = replace_all(std::move(text), "{ingredients}", join(ingredients, ", "));
            text = replace_all(std::move(text), "{effect}", rule.adverse_effect);
            v.explanation = std::move(text);
            verdict.violations.push_back(std::move(v));
        }
        verdict.trace.push_back({rule.id, "action", rule_matched});
    }

    const PredicateEvaluator evaluator(recipe, limits, units);
    for (const auto& rule : dietary_rules) {
        if (condition_key.empty() || key(rule.condition) != condition_key) continue;
        std::vector<std::string> matched;
        const bool hit = evaluator.eval(rule.predicate, matched);
        verdict.trace.push_back({rule.id, "dietary", hit});
        if (!hit) continue;
        RecipeViolation v;
        v.rule_id = rule.id;
        v.kind = "dietary";
        v.severity = rule.verdict == DietVerdict::NotAdvisable ? "not_advisable" : "advisable";
        v.effect = rule.condition;
        v.matched = matched;
        std::string text = rule.explanation.empty() ? "{recipe} matches {matched} under {condition}" : rule.explanation;
        text = replace_all(std::move(text), "{recipe}", recipe.name);
        text = replace_all(std::move(text), "{matched}", join(matched, ", "));
        text = replace_all(std::move(text), "{condition}", rule.condition);
        v.explanation = std::move(text);
        if (rule.verdict == DietVerdict::NotAdvisable) {
            verdict.violations.push_back(std::move(v));
        } else {
            verdict.endorsements.push_back(std::move(v));
        }
    }

    verdict.flagged = std::any_of(verdict.violations.begin(), verdict.violations.end(),
                                  [](const RecipeViolation& v) { return v.severity != "advisory"; });
    return verdict;
}

ProfileLimits parse_limits(const Json& j) {
    ProfileLimits out;
    if (j.is_null()) return out;
    if (!j.is_object()) schema_error("/limits", "expected object");
    for (const auto& [name, q] : j.items()) {
        if (!q.is_object() || !q.contains("quantity") || !q["quantity"].is_number()) {
            schema_error("/limits/" + name, "expected {quantity, unit}");
        }
        out.emplace(name, Quantity{q["quantity"].get<double>(), get_string(q, "unit", "/limits/" + name)});
    }
    return out;
}

Profile Profile::from_json(const Json& j) {
    Profile p;
    if (j.is_null()) return p;
    if (!j.is_object()) schema_error("/profile", "expected object");
    p.condition = get_string(j, "condition", "/profile", false);
    p.cuisine = get_string(j, "cuisine", "/profile", false);
    if (auto slot = get_string(j, "meal_slot", "/profile", false); !slot.empty()) p.meal_slot = slot;
    if (j.contains("limits")) p.limits = parse_limits(j["limits"]);
    return p;
}

Json Recommendation::to_json() const {
    Json rec = Json::array();
    for (const auto& e : recommended) {
        rec.push_back({{"recipe", e.recipe},
                       {"calories", e.calories ? Json(*e.calories) : Json(nullptr)},
                       {"verdict", e.verdict.to_json()}});
    }
    Json rej = Json::array();
    for (const auto& v : rejected) rej.push_back(v.to_json());
    Json fil = Json::array();
    for (const auto& [name, reason] : filtered) fil.push_back({{"recipe", name}, {"reason", reason}});
    return Json{{"recommended", rec}, {"rejected", rej}, {"filtered", fil}};
}

Recommendation recommend(const std::vector<Recipe>& recipes, const Profile& profile,
                         const std::vector<ActionEffectRule>& action_rules,
                         const std::vector<DietaryRule>& dietary_rules, const UnitTable& units) {
    if (recipes.empty()) throw Error(ErrorCode::EmptyCatalog, "recipe catalog is empty");

    struct Sorted {
        double calories;
        std::string name;
        std::string canonical;
        Recommendation::Entry entry;
    };
    std::vector<Sorted> accepted;
    Recommendation out;
    for (const auto& r : recipes) {
        if (profile.meal_slot && r.meal_slot && *r.meal_slot != *profile.meal_slot) {
            out.filtered.emplace_back(r.name, "meal_slot " + *r.meal_slot);
            continue;
        }
        if (!profile.cuisine.empty() && key(r.cuisine) != key(profile.cuisine)) {
            out.filtered.emplace_back(r.name, "cuisine " + (r.cuisine.empty() ? std::string("unspecified") : r.cuisine));
            continue;
        }
        RecipeVerdict verdict = evaluate_recipe(r, profile.condition, action_rules, dietary_rules, profile.limits, units);
        if (verdict.flagged) {
            out.rejected.push_back(std::move(verdict));
            continue;
        }
        const auto calories = calories_of(r, units);
        accepted.push_back({calories.value_or(std::numeric_limits<double>::infinity()), r.name, r.to_json().dump(),
                            {r.name, calories, std::move(verdict)}});
    }
    std::sort(accepted.begin(), accepted.end(), [](const Sorted& a, const Sorted& b) {
        return std::tie(a.calories, a.name, a.canonical) < std::tie(b.calories, b.name, b.canonical);
    });
    for (auto& s : accepted) out.recommended.push_back(std::move(s.entry));
    std::sort(out.rejected.begin(), out.rejected.end(), [](const RecipeVerdict& a, const RecipeVerdict& b) {
        if (a.recipe != b.recipe) return a.recipe < b.recipe;
        return a.to_json().dump() < b.to_json().dump();
    });
    std::sort(out.filtered.begin(), out.filtered.end());
    return out;
}

}  // namespace prokno::food
