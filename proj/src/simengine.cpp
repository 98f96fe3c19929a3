#include "pridetect/simengine.hpp"

#include <algorithm>
#include <chrono>
#include <thread>
#include <unordered_map>
#include <unordered_set>

#include "pridetect/strutil.hpp"

namespace pridetect {

void EngineConfig::validate() const {
    if (!(learning_rate > 0.0 && learning_rate <= 1.0)) {
        throw ConfigError("engine learning_rate must lie in (0, 1]");
    }
    if (!(click_weight >= 0.0)) throw ConfigError("engine click_weight cannot be negative");
    if (ads_min < 0 || ads_max < ads_min) {
        throw ConfigError("engine advert slot range must satisfy 0 <= ads_min <= ads_max");
    }
    if (!(decay >= 0.0 && decay <= 1.0)) throw ConfigError("engine decay must lie in [0, 1]");
    if (organic_per_page < 0) throw ConfigError("engine organic_per_page cannot be negative");
    if (!(profile_sharpness >= 1.0)) {
        throw ConfigError("engine profile_sharpness must be at least 1");
    }
}

void AdInventory::validate() const {
    if (universe.empty() || catalog_size < 1 || catalog_size > universe_size()) {
        throw ConfigError("advert inventory has an inconsistent topic universe");
    }
    if (universe.front().label != "other") {
        throw ConfigError("advert inventory universe must start with the background topic");
    }
    if (static_cast<int>(templates.size()) != universe_size()) {
        throw ConfigError("advert inventory needs one template list per universe topic");
    }
    for (int t = 0; t < universe_size(); ++t) {
        const auto& stock = templates[static_cast<std::size_t>(t)];
        if (stock.size() < 5) {
            throw ConfigError("topic '" + universe[static_cast<std::size_t>(t)].label +
                              "' needs at least 5 advert templates");
        }
        const auto& stems = universe[static_cast<std::size_t>(t)].keyword_stems;
        if (stems.empty()) continue;
        const std::unordered_set<std::string> stem_set(stems.begin(), stems.end());
        for (const AdTemplate& tpl : stock) {
            long hits = 0;
            for (const std::string& tok : tokenize(tpl.title + " " + tpl.snippet)) {
                if (stem_set.count(tok)) ++hits;
            }
            if (hits < 2) {
                throw ConfigError("advert template for topic '" +
                                  universe[static_cast<std::size_t>(t)].label +
                                  "' contains fewer than 2 topic keywords");
            }
        }
    }
}

namespace {

constexpr const char* kGenericAdverts[][2] = {
    {"weekend savings club", "join the weekend savings club and collect member points"},
    {"new season arrivals", "browse the new season arrivals in store and online now"},
    {"compare energy tariffs", "compare energy tariffs and switch supplier in minutes"},
    {"garden furniture event", "seasonal garden furniture event ends this sunday"},
    {"stream tonight", "stream award winning films and series tonight"},
    {"family mobile bundle", "family mobile bundle with unlimited texts"},
};

constexpr const char* kOrganicFillers[] = {
    "official site with background reading and community links",
    "overview page collecting articles and public resources",
    "reference listing with recent discussions and updates",
    "archive of related material and reader questions",
};

std::string slugify(const std::string& label) {
    std::string slug;
    for (char c : label) {
        if ((c >= 'a' && c <= 'z') || (c >= '0' && c <= '9')) {
            slug.push_back(c);
        } else if (!slug.empty() && slug.back() != '-') {
            slug.push_back('-');
        }
    }
    while (!slug.empty() && slug.back() == '-') slug.pop_back();
    return slug.empty() ? "topic" : slug;
}

std::vector<AdTemplate> templates_from_keywords(const TopicRecord& topic) {
    const auto& kws = topic.keywords;
    const std::size_t m = kws.size();
    if (m == 0) {
        throw ConfigError("topic '" + topic.label + "' has no keywords to build adverts from");
    }
    std::vector<AdTemplate> stock;
    const std::size_t count = std::max<std::size_t>(6, m);
    for (std::size_t j = 0; j < count; ++j) {
        AdTemplate tpl;
        tpl.title = kws[j % m] + " " + kws[(j + 1) % m];
        tpl.snippet = kws[(j + 2) % m] + " " + kws[(j + 3) % m] + " " + kws[j % m];
        stock.push_back(std::move(tpl));
    }
    return stock;
}

std::vector<AdTemplate> generic_pool() {
    std::vector<AdTemplate> stock;
    for (const auto& entry : kGenericAdverts) {
        stock.push_back(AdTemplate{entry[0], entry[1]});
    }
    return stock;
}

AdInventory assemble(const TopicCatalog& catalog, const std::vector<TopicRecord>& proxies) {
    AdInventory inv;
    inv.universe = catalog.topics;
    inv.catalog_size = catalog.size();
    for (const TopicRecord& proxy : proxies) {
        if (std::any_of(inv.universe.begin(), inv.universe.end(),
                        [&](const TopicRecord& t) { return t.label == proxy.label; })) {
            throw ConfigError("proxy topic '" + proxy.label + "' collides with a catalog label");
        }
        inv.universe.push_back(proxy);
    }
    return inv;
}

} // namespace

AdInventory build_inventory(const TopicCatalog& catalog,
                            const std::vector<TopicRecord>& proxy_topics) {
    catalog.validate();
    AdInventory inv = assemble(catalog, proxy_topics);
    inv.templates.resize(static_cast<std::size_t>(inv.universe_size()));
    inv.templates[0] = generic_pool();
    for (int t = 1; t < inv.universe_size(); ++t) {
        const TopicRecord& topic = inv.universe[static_cast<std::size_t>(t)];
        if (topic.keywords.empty()) {
            throw ConfigError("topic '" + topic.label + "' has no keywords to build adverts from");
        }
        inv.templates[static_cast<std::size_t>(t)] = templates_from_keywords(topic);
    }
    inv.validate();
    return inv;
}

AdInventory inventory_from_corpus(const TopicCatalog& catalog, const TrainingCorpus& corpus,
                                  const std::vector<TopicRecord>& proxy_topics) {
    catalog.validate();
    AdInventory inv = assemble(catalog, proxy_topics);
    inv.templates.resize(static_cast<std::size_t>(inv.universe_size()));
    inv.templates[0] = generic_pool();
    for (const auto& [topic, text] : corpus.entries) {
        if (topic <= 0 || topic >= catalog.size()) continue;
        const std::vector<std::string> words = split_ws(text);
        AdTemplate tpl;
        const std::size_t head = std::min<std::size_t>(4, words.size());
        for (std::size_t i = 0; i < head; ++i) {
            if (i) tpl.title.push_back(' ');
            tpl.title += words[i];
        }
        for (std::size_t i = head; i < words.size(); ++i) {
            if (i > head) tpl.snippet.push_back(' ');
            tpl.snippet += words[i];
        }
        inv.templates[static_cast<std::size_t>(topic)].push_back(std::move(tpl));
    }
    for (int t = inv.catalog_size; t < inv.universe_size(); ++t) {
        inv.templates[static_cast<std::size_t>(t)] =
            templates_from_keywords(inv.universe[static_cast<std::size_t>(t)]);
    }
    inv.validate();
    return inv;
}

EngineState make_engine_state(const AdInventory& inventory, const EngineConfig& config) {
    config.validate();
    inventory.validate();
    EngineState state;
    const int universe = inventory.universe_size();
    state.belief = Eigen::ArrayXd::Constant(universe, 1.0 / universe);
    state.rng = Rng(config.seed);
    return state;
}

Eigen::ArrayXd match_query(const std::string& query, const AdInventory& inventory) {
    const int universe = inventory.universe_size();
    Eigen::ArrayXd mass = Eigen::ArrayXd::Zero(universe);
    const TokenSequence tokens = tokenize(query);
    std::vector<int> matched;
    for (const std::string& tok : tokens) {
        matched.clear();
        for (int t = 1; t < universe; ++t) {
            const auto& stems = inventory.universe[static_cast<std::size_t>(t)].keyword_stems;
            if (std::binary_search(stems.begin(), stems.end(), tok)) matched.push_back(t);
        }
        if (matched.empty()) continue;
        const double share = 1.0 / static_cast<double>(matched.size());
        for (int t : matched) mass[t] += share;
    }
    return mass;
}

namespace {

int dominant_topic(const Eigen::ArrayXd& dist) {
    int best = 0;
    for (int i = 1; i < dist.size(); ++i) {
        if (dist[i] > dist[best]) best = i;
    }
    return best;
}

} // namespace

ResponsePage respond(EngineState& state, const std::string& query, const AdInventory& inventory,
                     const EngineConfig& config) {
    const int universe = inventory.universe_size();
    if (state.belief.size() != universe) {
        throw ContractViolation("engine state does not match the inventory's universe");
    }
    const int step = ++state.history;

    // Profiling: corroboration-gated belief update.
    Eigen::ArrayXd signal = match_query(query, inventory);
    const double mass = signal.sum();
    int organic_topic = 0;
    if (mass > 0.0) {
        signal /= mass;
        const int dominant = dominant_topic(signal);
        organic_topic = dominant;
        if (dominant == state.pending_topic) {
            state.belief = (1.0 - config.learning_rate) * state.belief +
                           config.learning_rate * signal;
            state.belief /= state.belief.sum();
        }
        state.pending_topic = dominant;
    }
    if (config.decay > 0.0) {
        state.belief = (1.0 - config.decay) * state.belief + config.decay / universe;
        state.belief /= state.belief.sum();
    }

    ResponsePage page;
    page.query = query;
    page.step_index = step;

    // Serving: slots fill only from the belief's excess over uniform.
    const double base = 1.0 / universe;
    Eigen::ArrayXd weights = (state.belief - base).max(0.0).pow(config.profile_sharpness);
    const double weight_sum = weights.sum();
    const double cap = std::pow(1.0 - base, config.profile_sharpness);
    const double fill_probability = cap > 0.0 ? std::min(1.0, weight_sum / cap) : 0.0;

    const long slots = state.rng.uniform_int(config.ads_min, config.ads_max);
    state.last_advert_topics.clear();
    for (long s = 0; s < slots; ++s) {
        if (!(state.rng.real01() < fill_probability)) continue;
        const int topic = static_cast<int>(state.rng.weighted(weights));
        const auto& stock = inventory.templates[static_cast<std::size_t>(topic)];
        const std::size_t pick = state.rng.index(stock.size());
        const AdTemplate& tpl = stock[pick];
        ResultItem item;
        item.title = tpl.title;
        item.snippet = tpl.snippet;
        item.url = "https://ads.example/" +
                   slugify(inventory.universe[static_cast<std::size_t>(topic)].label) + "/" +
                   std::to_string(pick);
        page.adverts.push_back(std::move(item));
        state.last_advert_topics.push_back(topic);
    }

    // Organic results: echoes of the query plus neutral filler text.
    state.last_organic_topics.clear();
    for (int i = 0; i < config.organic_per_page; ++i) {
        ResultItem item;
        item.title = query;
        item.snippet = kOrganicFillers[static_cast<std::size_t>(step + i) %
                                       std::size(kOrganicFillers)];
        item.url = "https://www.example/search/" + std::to_string(step) + "/" +
                   std::to_string(i);
        page.organic.push_back(std::move(item));
        state.last_organic_topics.push_back(organic_topic);
    }
    state.last_page_step = step;
    return page;
}

void observe_click(EngineState& state, const ItemRef& item, const EngineConfig& config) {
    if (state.last_page_step != state.history || state.last_page_step <= 0) {
        throw ContractViolation("observe_click: no current page to click");
    }
    const auto& topics = item.advert ? state.last_advert_topics : state.last_organic_topics;
    if (item.index < 0 || item.index >= static_cast<int>(topics.size())) {
        throw ContractViolation("observe_click: item was not served on the latest page");
    }
    const int topic = topics[static_cast<std::size_t>(item.index)];
    if (topic <= 0) return; // generic/background items carry no topical signal
    const double w = config.click_weight;
    if (w == 0.0) return;
    state.belief[topic] += w;
    state.belief /= 1.0 + w;
}

std::vector<ProbeObservation> run_session(const SessionPlan& plan, const EngineConfig& config,
                                          const AdInventory& inventory, bool honor_waits) {
    config.validate();
    inventory.validate();
    plan.click_model.validate();
    if (plan.topic_id < 0 || plan.topic_id >= inventory.catalog_size) {
        throw ConfigError("session plan topic is outside the catalog");
    }
    if (plan.steps.empty()) throw ConfigError("session plan has no steps");

    EngineState state = make_engine_state(inventory, config);
    const std::vector<std::string>& keywords =
        inventory.universe[static_cast<std::size_t>(plan.topic_id)].keywords;

    std::vector<ProbeObservation> observations;
    int probe_no = 0;
    for (std::size_t i = 0; i < plan.steps.size(); ++i) {
        const PlanStep& step = plan.steps[i];
        ResponsePage page = respond(state, step.query, inventory, config);
        page.is_probe = step.kind == StepKind::Probe;
        if (page.is_probe) {
            observations.push_back(ProbeObservation{++probe_no, std::move(page)});
        } else {
            const std::uint64_t click_seed = derive_seed(config.seed, "clicks", i);
            for (const ItemRef& ref :
                 decide_clicks(page, plan.click_model, keywords, click_seed)) {
                observe_click(state, ref, config);
            }
        }
        if (honor_waits && step.wait_seconds > 0) {
            std::this_thread::sleep_for(std::chrono::seconds(step.wait_seconds));
        }
    }
    return observations;
}

} // namespace pridetect
