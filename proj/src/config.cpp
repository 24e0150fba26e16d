#include "panelfair/config.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "panelfair/builders.hpp"
#include "panelfair/errors.hpp"

namespace panelfair {

namespace {

Json two_groups_scenario() {
    // Contexts 0..2 mostly negative, 3..5 mostly positive. The threshold at 3
    // is both the most accurate and fair; splitting a group is unfair.
    Json s;
    // The no-violation filler pair sits on a context most hypotheses accept, so
    // its cancelling copies are almost always observed.
    s["universe"] = {{"features", {{0}, {1}, {2}, {3}, {4}, {5}}}, {"default_context", 5}};
    s["class"] = {{"kind", "explicit"},
                  {"name", "two_groups"},
                  {"tables",
                   {{1, 1, 1, 1, 1, 1},
                    {0, 1, 1, 1, 1, 1},
                    {0, 0, 1, 1, 1, 1},
                    {0, 0, 0, 1, 1, 1},
                    {0, 0, 0, 0, 1, 1},
                    {0, 0, 0, 0, 0, 1},
                    {0, 0, 0, 0, 0, 0},
                    {0, 1, 0, 0, 0, 0},
                    {0, 0, 0, 1, 0, 1},
                    {1, 0, 0, 1, 1, 1},
                    {0, 1, 0, 1, 1, 1},
                    {1, 0, 1, 0, 1, 0}}}};
    s["environment"] = {{"kind", "stochastic"}, {"label_prob", {0.15, 0.2, 0.25, 0.75, 0.8, 0.85}}};
    const double x = 0.95;
    s["panel"] = {{"kind", "random"},
                  {"m", 3},
                  {"alpha", 0.1},
                  {"gamma", 0.5},
                  {"jitter", 0.03},
                  {"base",
                   {{0, 0.1, 0.2, x, x, x},
                    {0.1, 0, 0.1, x, x, x},
                    {0.2, 0.1, 0, x, x, x},
                    {x, x, x, 0, 0.1, 0.2},
                    {x, x, x, 0.1, 0, 0.1},
                    {x, x, x, 0.2, 0.1, 0}}}};
    s["learner"] = {{"algorithm", "exp2"}, {"preset", "exp2"}};
    s["k"] = 2;
    return s;
}

Json mirror_pair_scenario() {
    // Two contexts, two hypotheses that each favour one of them, one auditor.
    Json s;
    s["universe"] = {{"features", {{0}, {1}}}, {"default_context", 0}};
    s["class"] = {{"kind", "explicit"}, {"name", "mirror_pair"}, {"require_constant", false},
                  {"tables", {{1, 0}, {0, 1}}}};
    s["environment"] = {{"kind", "fixed_sequence"},
                        {"cycle", true},
                        {"rounds", {{{"contexts", {0, 1}}, {"labels", {1, 1}}}}}};
    s["panel"] = {{"kind", "fixed"}, {"alpha", 0.2}, {"gamma", 1.0}, {"members", {{{0, 0.1}, {0.1, 0}}}}};
    // The √T default is small next to the replayed loss estimates here.
    s["learner"] = {{"algorithm", "ftpl"}, {"preset", "ftpl"}, {"omega", 200.0}};
    s["k"] = 2;
    return s;
}

template <typename T>
T field(const Json& obj, const char* key, const T& fallback) {
    if (!obj.is_object() || !obj.contains(key) || obj.at(key).is_null()) return fallback;
    try {
        return obj.at(key).get<T>();
    } catch (const Json::exception& e) {
        throw ConfigError(std::string("config key '") + key + "': " + e.what());
    }
}

const Json& required(const Json& obj, const char* key) {
    if (!obj.is_object() || !obj.contains(key)) throw ConfigError(std::string("config is missing '") + key + "'");
    return obj.at(key);
}

template <typename T>
T as(const Json& value, const char* what) {
    try {
        return value.get<T>();
    } catch (const Json::exception& e) {
        throw ConfigError(std::string(what) + ": " + e.what());
    }
}

ContextUniverse build_universe(const Json& u) {
    std::vector<std::vector<double>> features;
    if (u.contains("features")) {
        features = as<std::vector<std::vector<double>>>(u.at("features"), "universe.features");
    } else {
        const auto n = as<std::size_t>(required(u, "size"), "universe.size");
        for (std::size_t i = 0; i < n; ++i) features.push_back({static_cast<double>(i)});
    }
    try {
        return ContextUniverse::from_features(std::move(features), field<ContextId>(u, "default_context", 0));
    } catch (const InputError& e) {
        throw ConfigError(e.what());
    }
}

HypothesisClass build_class(const Json& c, std::size_t n, std::uint64_t seed) {
    const auto kind = field<std::string>(c, "kind", "thresholds");
    try {
        if (kind == "thresholds") return threshold_class(n);
        if (kind == "all_functions") return all_functions_class(n);
        if (kind == "random") {
            Rng rng = substream(field<std::uint64_t>(c, "seed", seed), "class");
            return random_class(n, as<std::size_t>(required(c, "size"), "class.size"), rng);
        }
        if (kind == "explicit") {
            const auto tables = as<std::vector<std::vector<int>>>(required(c, "tables"), "class.tables");
            std::vector<Hypothesis> hs;
            for (const auto& t : tables) {
                if (t.size() != n) throw ConfigError("class table does not cover the universe");
                std::vector<Bit> bits;
                for (int b : t) {
                    if (b != 0 && b != 1) throw ConfigError("class tables must contain 0/1 entries");
                    bits.push_back(static_cast<Bit>(b));
                }
                hs.emplace_back(std::move(bits));
            }
            const bool need_constant = field<bool>(c, "require_constant", true);
            return HypothesisClass(field<std::string>(c, "name", "explicit"), std::move(hs),
                                   need_constant ? HypothesisClass::ConstantMember::Required
                                                 : HypothesisClass::ConstantMember::NotRequired);
        }
    } catch (const InputError& e) {
        throw ConfigError(e.what());
    }
    throw ConfigError("unknown class kind '" + kind + "'");
}

DistanceFunction build_metric(const Json& m, const ContextUniverse& universe) {
    try {
        if (m.is_object()) {
            return feature_distance(universe, as<double>(required(m, "feature_distance"), "feature_distance"));
        }
        return DistanceFunction(as<std::vector<std::vector<double>>>(m, "distance matrix"));
    } catch (const InputError& e) {
        throw ConfigError(e.what());
    }
}

PanelSchedule build_panels(const Json& p, const ContextUniverse& universe) {
    const auto kind = field<std::string>(p, "kind", "fixed");
    const double alpha = as<double>(required(p, "alpha"), "panel.alpha");
    const double gamma = as<double>(required(p, "gamma"), "panel.gamma");
    auto members_of = [&](const Json& list) {
        std::vector<DistanceFunction> members;
        for (const auto& m : list) members.push_back(build_metric(m, universe));
        return members;
    };
    if (kind == "fixed") return PanelSchedule::fixed(Panel(members_of(required(p, "members")), alpha, gamma));
    if (kind == "per_round") {
        std::vector<Panel> panels;
        for (const auto& list : required(p, "panels")) panels.emplace_back(members_of(list), alpha, gamma);
        return PanelSchedule::per_round(std::move(panels));
    }
    if (kind == "random") {
        RandomPanelSpec spec;
        spec.m = as<std::size_t>(required(p, "m"), "panel.m");
        spec.alpha = alpha;
        spec.gamma = gamma;
        spec.jitter = field<double>(p, "jitter", 0.0);
        spec.base = build_metric(required(p, "base"), universe);
        return PanelSchedule::random_draws(std::move(spec));
    }
    throw ConfigError("unknown panel kind '" + kind + "'");
}

EnvironmentScript build_environment(const Json& e, const Json& p, const ContextUniverse& universe) {
    EnvironmentScript script;
    const auto kind = field<std::string>(e, "kind", "stochastic");
    script.stochastic.context_weights = field<std::vector<double>>(e, "context_weights", {});
    script.stochastic.label_prob = field<std::vector<double>>(e, "label_prob", {});
    if (kind == "stochastic") {
        script.kind = EnvironmentScript::Kind::Stochastic;
    } else if (kind == "fixed_sequence") {
        script.kind = EnvironmentScript::Kind::FixedSequence;
        script.cycle = field<bool>(e, "cycle", false);
        for (const auto& r : required(e, "rounds")) {
            auto contexts = as<std::vector<ContextId>>(required(r, "contexts"), "round contexts");
            auto labels_raw = as<std::vector<int>>(required(r, "labels"), "round labels");
            std::vector<Bit> labels;
            for (int b : labels_raw) {
                if (b != 0 && b != 1) throw ConfigError("round labels must be 0 or 1");
                labels.push_back(static_cast<Bit>(b));
            }
            try {
                script.rounds.emplace_back(std::move(contexts), std::move(labels));
            } catch (const InputError& err) {
                throw ConfigError(err.what());
            }
        }
    } else if (kind == "adaptive") {
        script.kind = EnvironmentScript::Kind::Adaptive;
        script.rule = adversary_rule_from_string(field<std::string>(e, "rule", "stochastic"));
    } else {
        throw ConfigError("unknown environment kind '" + kind + "'");
    }
    script.panels = build_panels(p, universe);
    return script;
}

LearnerConfig build_learner(const Json& l) {
    LearnerConfig out;
    out.algorithm = algorithm_from_string(field<std::string>(l, "algorithm", "exp2"));
    out.preset = field<std::string>(l, "preset", "");
    auto opt_d = [&](const char* key) -> std::optional<double> {
        if (!l.contains(key) || l.at(key).is_null()) return std::nullopt;
        return as<double>(l.at(key), key);
    };
    auto opt_n = [&](const char* key) -> std::optional<std::size_t> {
        if (!l.contains(key) || l.at(key).is_null()) return std::nullopt;
        const auto v = as<long long>(l.at(key), key);
        if (v < 1) throw ConfigError(std::string("learner.") + key + " must be >= 1");
        return static_cast<std::size_t>(v);
    };
    out.eta = opt_d("eta");
    out.explore_mix = opt_d("explore_mix");
    out.omega = opt_d("omega");
    out.L = opt_n("L");
    out.R = opt_n("R");
    out.C = opt_n("C");
    out.estimator_mode = estimator_mode_from_string(field<std::string>(l, "estimator_mode", "geometric"));
    return out;
}

}  // namespace

std::vector<std::string> scenario_names() { return {"mirror_pair", "two_groups"}; }

Json scenario_json(const std::string& name) {
    if (name == "two_groups") return two_groups_scenario();
    if (name == "mirror_pair") return mirror_pair_scenario();
    throw ConfigError("unknown scenario '" + name + "'");
}

Json expand_config(const Json& document) {
    if (!document.is_object()) throw ConfigError("config must be an object");
    if (!document.contains("scenario") || document.at("scenario").is_null()) return document;
    Json base = scenario_json(as<std::string>(document.at("scenario"), "scenario"));
    base.merge_patch(document);
    return base;
}

Json parse_config_text(const std::string& text, bool is_toml) {
    Json doc;
    if (is_toml) {
        doc = toml_to_json(text);
    } else {
        try {
            doc = Json::parse(text);
        } catch (const Json::parse_error& e) {
            throw ConfigError(std::string("invalid JSON config: ") + e.what());
        }
    }
    return expand_config(doc);
}

Json load_config_document(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read config", path);
    std::stringstream buffer;
    buffer << in.rdbuf();
    const bool is_toml = std::filesystem::path(path).extension() == ".toml";
    return parse_config_text(buffer.str(), is_toml);
}

void set_config_value(Json& document, const std::string& dotted_key, const Json& value) {
    if (dotted_key.empty()) throw ConfigError("empty config key");
    Json* node = &document;
    std::size_t start = 0;
    for (;;) {
        const std::size_t dot = dotted_key.find('.', start);
        const std::string part = dotted_key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
        if (part.empty()) throw ConfigError("malformed config key '" + dotted_key + "'");
        if (!node->is_object()) *node = Json::object();
        if (dot == std::string::npos) {
            (*node)[part] = value;
            return;
        }
        node = &(*node)[part];
        start = dot + 1;
    }
}

RunConfig build_run_config(const Json& document) {
    const Json doc = expand_config(document);
    RunConfig config;
    config.name = field<std::string>(doc, "name", "run");
    const auto T = field<long long>(doc, "T", 1);
    const auto k = field<long long>(doc, "k", 2);
    if (T < 1) throw ConfigError("T must be >= 1");
    if (k < 2) throw ConfigError("k must be >= 2");
    config.T = static_cast<std::size_t>(T);
    config.k = static_cast<std::size_t>(k);
    config.seed = field<std::uint64_t>(doc, "seed", 0);

    auto universe = std::make_shared<const ContextUniverse>(build_universe(required(doc, "universe")));
    config.cls = std::make_shared<const HypothesisClass>(
        build_class(field<Json>(doc, "class", Json::object()), universe->size(), config.seed));
    config.environment = build_environment(field<Json>(doc, "environment", Json::object()),
                                           required(doc, "panel"), *universe);
    config.universe = std::move(universe);
    config.learner = build_learner(field<Json>(doc, "learner", Json::object()));
    config.benchmark_epsilon = field<double>(field<Json>(doc, "benchmark", Json::object()), "epsilon", 0.0);
    config.record_traces = field<bool>(doc, "record_traces", true);
    config.source_json = doc.dump(2);
    config.validate();
    // Fail early on learner parameters too (unknown preset, bad separator).
    resolve_learner(config.learner, config.T, config.k, *config.cls);
    return config;
}

RunConfig run_config_from_text(const std::string& text, bool is_toml) {
    return build_run_config(parse_config_text(text, is_toml));
}

}  // namespace panelfair
