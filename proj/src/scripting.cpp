#include "pridetect/scripting.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include "pridetect/rng.hpp"
#include "pridetect/strutil.hpp"

namespace pridetect {

const char* step_kind_name(StepKind kind) {
    switch (kind) {
    case StepKind::Probe: return "probe";
    case StepKind::Sensitive: return "sensitive";
    case StepKind::Noise: return "noise";
    case StepKind::Proxy: return "proxy";
    }
    return "?";
}

void ClickModel::validate() const {
    if (!(tf_threshold > 0.0 && tf_threshold < 1.0)) {
        throw ConfigError("click relevance threshold must lie strictly between 0 and 1");
    }
}

const char* click_kind_name(ClickModel::Kind kind) {
    switch (kind) {
    case ClickModel::Kind::NoClick: return "noclick";
    case ClickModel::Kind::ClickRelevant: return "relevant";
    case ClickModel::Kind::ClickNonRelevant: return "nonrelevant";
    case ClickModel::Kind::ClickAll: return "all";
    case ClickModel::Kind::ClickTwoRandom: return "tworandom";
    }
    return "?";
}

ClickModel::Kind click_kind_from_name(const std::string& name) {
    const std::string n = to_lower_ascii(name);
    if (n == "noclick" || n == "none") return ClickModel::Kind::NoClick;
    if (n == "relevant") return ClickModel::Kind::ClickRelevant;
    if (n == "nonrelevant") return ClickModel::Kind::ClickNonRelevant;
    if (n == "all") return ClickModel::Kind::ClickAll;
    if (n == "tworandom") return ClickModel::Kind::ClickTwoRandom;
    throw ConfigError("unknown click model: " + name);
}

int NoiseModel::ratio() const {
    switch (level) {
    case Level::None: return 0;
    case Level::Low: return 1;
    case Level::Medium: return 2;
    case Level::High: return 3;
    }
    return 0;
}

const char* noise_level_name(NoiseModel::Level level) {
    switch (level) {
    case NoiseModel::Level::None: return "none";
    case NoiseModel::Level::Low: return "low";
    case NoiseModel::Level::Medium: return "medium";
    case NoiseModel::Level::High: return "high";
    }
    return "?";
}

NoiseModel::Level noise_level_from_name(const std::string& name) {
    const std::string n = to_lower_ascii(name);
    if (n == "none") return NoiseModel::Level::None;
    if (n == "low") return NoiseModel::Level::Low;
    if (n == "medium") return NoiseModel::Level::Medium;
    if (n == "high") return NoiseModel::Level::High;
    throw ConfigError("unknown noise level: " + name);
}

int SessionPlan::probe_count() const {
    int count = 0;
    for (const PlanStep& step : steps) {
        if (step.kind == StepKind::Probe) ++count;
    }
    return count;
}

QueryScript parse_script(std::string_view text) {
    QueryScript script;
    bool have_probe = false;

    std::istringstream in{std::string(text)};
    std::string raw;
    int lineno = 0;
    while (std::getline(in, raw)) {
        ++lineno;
        const std::string line = trim_copy(raw);
        if (line.empty()) continue;

        if (line.front() == '!') {
            const std::string body = trim_copy(std::string_view(line).substr(1));
            if (starts_with(body, "keywords:")) {
                for (std::string& term : split_ws(std::string_view(body).substr(9))) {
                    script.keywords.push_back(std::move(term));
                }
            } else if (starts_with(body, "probe:")) {
                const std::string probe = trim_copy(std::string_view(body).substr(6));
                if (probe.empty()) throw ParseError("probe directive without a query", lineno);
                if (have_probe) throw ParseError("duplicate probe directive", lineno);
                script.probe = probe;
                have_probe = true;
            } else if (starts_with(body, "wait")) {
                const std::string value = trim_copy(std::string_view(body).substr(4));
                if (script.steps.empty()) {
                    throw ParseError("wait directive before any query", lineno);
                }
                std::size_t used = 0;
                int seconds = 0;
                try {
                    seconds = std::stoi(value, &used);
                } catch (const std::exception&) {
                    throw ParseError("wait directive needs an integer number of seconds", lineno);
                }
                if (used != value.size() || seconds < 0) {
                    throw ParseError("wait directive needs a non-negative integer", lineno);
                }
                script.steps.back().wait_seconds = seconds;
            } else {
                throw ParseError("unknown script directive: " + line, lineno);
            }
            continue;
        }
        script.steps.push_back(QueryScript::Step{line, 0});
    }
    if (!have_probe) throw ParseError("script has no '! probe:' directive", lineno);
    return script;
}

QueryScript load_script(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open script file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_script(buf.str());
}

std::string render_script(const QueryScript& script) {
    std::ostringstream out;
    if (!script.keywords.empty()) {
        out << "! keywords:";
        for (const std::string& term : script.keywords) out << ' ' << term;
        out << '\n';
    }
    out << "! probe: " << script.probe << '\n';
    for (const QueryScript::Step& step : script.steps) {
        out << step.query << '\n';
        if (step.wait_seconds > 0) out << "! wait " << step.wait_seconds << '\n';
    }
    return out.str();
}

QueryScript script_from_plan(const SessionPlan& plan, std::vector<std::string> keywords,
                             const std::string& probe) {
    QueryScript script;
    script.keywords = std::move(keywords);
    script.probe = probe;
    script.steps.reserve(plan.steps.size());
    for (const PlanStep& step : plan.steps) {
        script.steps.push_back(QueryScript::Step{step.query, step.wait_seconds});
    }
    return script;
}

SessionPlan plan_from_script(const QueryScript& script, int topic_id, ClickModel click,
                             NoiseModel noise) {
    SessionPlan plan;
    plan.topic_id = topic_id;
    plan.click_model = click;
    plan.noise_model = noise;
    plan.steps.reserve(script.steps.size());
    for (const QueryScript::Step& step : script.steps) {
        const StepKind kind =
            step.query == script.probe ? StepKind::Probe : StepKind::Sensitive;
        plan.steps.push_back(PlanStep{kind, step.query, step.wait_seconds});
    }
    return plan;
}

SessionPlan build_session(int topic_id, const std::vector<std::string>& topic_queries,
                          const std::string& probe, std::uint64_t rng_seed, int probes) {
    if (topic_queries.empty()) throw ConfigError("build_session: empty query pool");
    if (probe.empty()) throw ConfigError("build_session: empty probe query");
    if (probes < 2) throw ConfigError("build_session: need at least two probes");

    Rng rng(rng_seed);
    SessionPlan plan;
    plan.topic_id = topic_id;
    auto wait = [&] { return static_cast<int>(rng.uniform_int(1, 20)); };
    plan.steps.push_back(PlanStep{StepKind::Probe, probe, wait()});
    for (int block = 1; block < probes; ++block) {
        const long count = rng.uniform_int(3, 5);
        for (long i = 0; i < count; ++i) {
            plan.steps.push_back(PlanStep{StepKind::Sensitive, rng.pick(topic_queries), wait()});
        }
        plan.steps.push_back(PlanStep{StepKind::Probe, probe, wait()});
    }
    return plan;
}

SessionPlan inject_noise(const SessionPlan& plan, const NoiseModel& noise,
                         const std::vector<std::string>& pool, std::uint64_t rng_seed) {
    const int ratio = noise.ratio();
    if (ratio == 0) {
        SessionPlan out = plan;
        out.noise_model = noise;
        return out;
    }
    if (pool.empty()) {
        throw ConfigError("noise injection needs a non-empty cover query pool");
    }

    Rng rng(rng_seed);
    auto noise_step = [&] {
        return PlanStep{StepKind::Noise, rng.pick(pool),
                        static_cast<int>(rng.uniform_int(1, 20))};
    };

    SessionPlan out;
    out.topic_id = plan.topic_id;
    out.click_model = plan.click_model;
    out.noise_model = noise;
    auto trailing_noise = [&] {
        int count = 0;
        for (auto it = out.steps.rbegin(); it != out.steps.rend(); ++it) {
            if (it->kind != StepKind::Noise) break;
            ++count;
        }
        return count;
    };
    for (const PlanStep& step : plan.steps) {
        if (step.kind == StepKind::Probe) {
            // The full ratio of cover queries must sit immediately before
            // every probe; top up whatever the after-sensitive rule left.
            for (int have = trailing_noise(); have < ratio; ++have) {
                out.steps.push_back(noise_step());
            }
            out.steps.push_back(step);
        } else {
            out.steps.push_back(step);
            if (step.kind == StepKind::Sensitive) {
                for (int i = 0; i < ratio; ++i) out.steps.push_back(noise_step());
            }
        }
    }
    return out;
}

SessionPlan build_proxy_session(int topic_id, const std::vector<std::string>& sensitive_queries,
                                const TopicRecord& proxy, const std::string& probe,
                                std::uint64_t rng_seed, int probes) {
    if (sensitive_queries.size() < 4) {
        throw ConfigError("proxy sessions need at least 4 sensitive queries to draw from");
    }
    if (proxy.queries.size() < 4) {
        throw ConfigError("proxy topic '" + proxy.label + "' needs at least 4 queries");
    }
    if (probes < 2) throw ConfigError("build_proxy_session: need at least two probes");

    Rng rng(rng_seed);
    auto wait = [&] { return static_cast<int>(rng.uniform_int(1, 20)); };

    SessionPlan plan;
    plan.topic_id = topic_id;
    plan.steps.push_back(PlanStep{StepKind::Probe, probe, wait()});
    for (int block = 1; block < probes; ++block) {
        const long proxy_count = rng.uniform_int(3, 4);
        std::vector<PlanStep> steps;
        for (long i = 0; i < proxy_count; ++i) {
            steps.push_back(PlanStep{StepKind::Proxy, rng.pick(proxy.queries), wait()});
        }
        steps.push_back(PlanStep{StepKind::Sensitive, rng.pick(sensitive_queries), wait()});
        // Shuffle until at least two proxy queries are adjacent. With one
        // sensitive query among 3-4 proxy queries every arrangement
        // qualifies, but the constraint is enforced, not assumed.
        auto adjacent_proxies = [&steps] {
            for (std::size_t i = 0; i + 1 < steps.size(); ++i) {
                if (steps[i].kind == StepKind::Proxy && steps[i + 1].kind == StepKind::Proxy) {
                    return true;
                }
            }
            return false;
        };
        do {
            rng.shuffle(steps);
        } while (!adjacent_proxies());
        plan.steps.insert(plan.steps.end(), steps.begin(), steps.end());
        plan.steps.push_back(PlanStep{StepKind::Probe, probe, wait()});
    }
    return plan;
}

double term_frequency(const std::string& item_text,
                      const std::vector<std::string>& topic_keywords) {
    const TokenSequence tokens = tokenize(item_text);
    if (tokens.empty()) return 0.0;
    std::unordered_set<std::string> stems;
    for (const std::string& kw : topic_keywords) {
        for (std::string& tok : tokenize(kw)) stems.insert(std::move(tok));
    }
    long hits = 0;
    for (const std::string& tok : tokens) {
        if (stems.count(tok)) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(tokens.size());
}

std::vector<ItemRef> decide_clicks(const ResponsePage& page, const ClickModel& model,
                                   const std::vector<std::string>& topic_keywords,
                                   std::uint64_t rng_seed) {
    model.validate();
    if (page.is_probe) {
        throw ContractViolation("decide_clicks: probe pages are observed, never clicked");
    }

    std::vector<ItemRef> all;
    for (int i = 0; i < static_cast<int>(page.organic.size()); ++i) {
        all.push_back(ItemRef{false, i});
    }
    for (int i = 0; i < static_cast<int>(page.adverts.size()); ++i) {
        all.push_back(ItemRef{true, i});
    }
    auto item_tf = [&](const ItemRef& ref) {
        const ResultItem& item =
            ref.advert ? page.adverts[static_cast<std::size_t>(ref.index)]
                       : page.organic[static_cast<std::size_t>(ref.index)];
        return term_frequency(item.text(), topic_keywords);
    };

    std::vector<ItemRef> clicks;
    switch (model.kind) {
    case ClickModel::Kind::NoClick:
        break;
    case ClickModel::Kind::ClickRelevant:
        for (const ItemRef& ref : all) {
            if (item_tf(ref) > model.tf_threshold) clicks.push_back(ref);
        }
        break;
    case ClickModel::Kind::ClickNonRelevant:
        for (const ItemRef& ref : all) {
            if (item_tf(ref) <= model.tf_threshold) clicks.push_back(ref);
        }
        break;
    case ClickModel::Kind::ClickAll:
        clicks = all;
        break;
    case ClickModel::Kind::ClickTwoRandom: {
        if (all.empty()) break;
        Rng rng(rng_seed);
        clicks.push_back(all[rng.index(all.size())]); // with replacement:
        clicks.push_back(all[rng.index(all.size())]); // a 1-item page is clicked twice
        break;
    }
    }
    return clicks;
}

std::vector<std::string> generate_candidate_queries(const TopicRecord& topic,
                                                    std::uint64_t rng_seed, int count) {
    if (topic.keywords.empty()) {
        throw ConfigError("cannot generate queries for a topic without keywords");
    }
    static const char* kPatterns[] = {
        "%1",          "%1 %2",         "what is %1",      "%1 near me",
        "how to %1",   "best %1 %2",    "%1 stories",      "do i have a %1 problem",
        "%1 groups",   "talk about %1", "%1 and %2 online",
    };
    Rng rng(rng_seed);
    std::vector<std::string> out;
    out.reserve(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) {
        std::string pattern = kPatterns[rng.index(std::size(kPatterns))];
        const std::string& first = rng.pick(topic.keywords);
        const std::string& second = rng.pick(topic.keywords);
        std::string query;
        for (std::size_t p = 0; p < pattern.size(); ++p) {
            if (pattern[p] == '%' && p + 1 < pattern.size()) {
                query += pattern[p + 1] == '1' ? first : second;
                ++p;
            } else {
                query.push_back(pattern[p]);
            }
        }
        out.push_back(std::move(query));
    }
    return out;
}

std::vector<std::string> load_query_pool(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open query pool file: " + path);
    std::vector<std::string> pool;
    std::string line;
    while (std::getline(in, line)) {
        const std::string query = trim_copy(line);
        if (query.empty() || query.front() == '#') continue;
        pool.push_back(query);
    }
    return pool;
}

std::vector<std::string> filter_query_pool(const std::vector<std::string>& pool,
                                           const TopicCatalog& catalog) {
    std::unordered_set<std::string> sensitive;
    for (int i = 1; i < catalog.size(); ++i) {
        for (const std::string& stemmed : catalog[i].keyword_stems) sensitive.insert(stemmed);
        for (const std::string& query : catalog[i].queries) {
            for (std::string& tok : tokenize(query)) sensitive.insert(std::move(tok));
        }
    }
    std::vector<std::string> kept;
    for (const std::string& query : pool) {
        bool clean = true;
        for (const std::string& tok : tokenize(query)) {
            if (sensitive.count(tok)) {
                clean = false;
                break;
            }
        }
        if (clean) kept.push_back(query);
    }
    return kept;
}

} // namespace pridetect
