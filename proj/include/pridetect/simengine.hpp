#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "pridetect/corpus.hpp"
#include "pridetect/estimator.hpp"
#include "pridetect/rng.hpp"
#include "pridetect/scripting.hpp"

namespace pridetect {

// Knobs of the simulated engine. Everything the engine does is a pure
// function of (session plan, config, seed).
struct EngineConfig {
    double learning_rate = 0.5; // mixing weight of a corroborated query signal
    double click_weight = 0.05; // mixing weight of one click on a topical item
    int ads_min = 2;            // advert slots per page, inclusive bounds
    int ads_max = 4;
    double decay = 0.0;         // per-response pull of the belief toward uniform
    int organic_per_page = 2;   // organic results echoed per page
    double profile_sharpness = 3.0; // exponent on the belief's excess over uniform
    std::uint64_t seed = 0;

    void validate() const;
};

struct AdTemplate {
    std::string title;
    std::string snippet;
};

// The engine's topical universe and its advert stock. The universe holds the
// catalog topics first (index 0 = background) and any proxy topics after
// them; adverts exist for every universe topic, the background topic's stock
// being a generic untargeted pool.
struct AdInventory {
    std::vector<TopicRecord> universe;
    int catalog_size = 0; // universe[0..catalog_size) are the catalog topics
    std::vector<std::vector<AdTemplate>> templates; // per universe topic

    int universe_size() const { return static_cast<int>(universe.size()); }

    // >= 5 templates per topic; templates of keyword-bearing topics contain
    // at least two of the topic's keywords.
    void validate() const;
};

// Synthesize an inventory from keyword lists: rotating two-keyword titles and
// three-keyword snippets per topic, plus a fixed generic pool for the
// background topic.
AdInventory build_inventory(const TopicCatalog& catalog,
                            const std::vector<TopicRecord>& proxy_topics = {});

// Same universe, but catalog topics draw their advert texts from their
// training-corpus entries (title = leading words, snippet = the rest).
AdInventory inventory_from_corpus(const TopicCatalog& catalog, const TrainingCorpus& corpus,
                                  const std::vector<TopicRecord>& proxy_topics = {});

// The engine's internal state: a belief distribution over the universe, a
// step counter, the not-yet-corroborated topic of the latest topical query,
// and the served-item record used to validate clicks.
struct EngineState {
    Eigen::ArrayXd belief;  // over universe topics; sums to 1
    int history = 0;        // responses produced so far
    int pending_topic = -1; // dominant topic of the latest topical query
    int last_page_step = -1;
    std::vector<int> last_organic_topics;
    std::vector<int> last_advert_topics;
    Rng rng{0};
};

EngineState make_engine_state(const AdInventory& inventory, const EngineConfig& config);

// Distribution of a query's keyword matches over the universe (unnormalized;
// each matching token splits its unit mass over the topics it matches). A
// zero sum means the query carries no topical signal.
Eigen::ArrayXd match_query(const std::string& query, const AdInventory& inventory);

// Process one query and produce a response page.
//
// Profiling: a query with topical signal becomes the pending topic; it
// updates the belief (belief <- normalize((1-lr)*belief + lr*signal)) only
// when the preceding topical query had the same dominant topic — the engine
// learns from corroborated interest, not one-off queries. Signal-free queries
// leave belief and pending topic untouched. The belief then decays toward
// uniform by the configured rate.
//
// Serving: each of uniform(ads_min, ads_max) slots is filled with probability
// proportional to the belief's total excess over uniform (sharpened by the
// configured exponent) and assigned a topic proportionally to that excess;
// slots not filled stay empty. An unprofiled engine therefore serves no
// targeted adverts at all.
ResponsePage respond(EngineState& state, const std::string& query,
                     const AdInventory& inventory, const EngineConfig& config);

// Register a click on an item of the page returned by the latest respond()
// call; anything else is a contract violation. Clicks on topical items mix
// the item's topic into the belief ((belief + w*e_t)/(1+w)); clicks on
// background/generic items carry no topical signal and change nothing.
void observe_click(EngineState& state, const ItemRef& item, const EngineConfig& config);

// One measured probe: its 1-based ordinal among the session's probes and the
// page the engine returned for it.
struct ProbeObservation {
    int probe_step = 0;
    ResponsePage page;
};

// Execute a full session plan against a fresh engine: every step is sent as
// a query; non-probe pages are clicked according to the plan's click model
// (item relevance judged against the plan topic's keywords); probe pages are
// recorded. Deterministic in (plan, config, config.seed). honor_waits sleeps
// each step's wait time (pacing is otherwise metadata).
std::vector<ProbeObservation> run_session(const SessionPlan& plan, const EngineConfig& config,
                                          const AdInventory& inventory,
                                          bool honor_waits = false);

} // namespace pridetect
