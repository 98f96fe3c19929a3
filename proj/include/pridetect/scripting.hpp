#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "pridetect/corpus.hpp"
#include "pridetect/estimator.hpp"

namespace pridetect {

// Role of a step inside a session plan.
enum class StepKind { Probe, Sensitive, Noise, Proxy };

const char* step_kind_name(StepKind kind);

struct PlanStep {
    StepKind kind = StepKind::Sensitive;
    std::string query;
    int wait_seconds = 0; // pacing metadata; honored only on request

    bool operator==(const PlanStep&) const = default;
};

// Click behaviour attached to a session.
struct ClickModel {
    enum class Kind { NoClick, ClickRelevant, ClickNonRelevant, ClickAll, ClickTwoRandom };

    Kind kind = Kind::NoClick;
    double tf_threshold = 0.1; // relevance cutoff, must lie in (0, 1)

    void validate() const;
    bool operator==(const ClickModel&) const = default;
};

const char* click_kind_name(ClickModel::Kind kind);
ClickModel::Kind click_kind_from_name(const std::string& name); // ConfigError if unknown

// Noise level: how many cover queries accompany each sensitive query.
struct NoiseModel {
    enum class Level { None, Low, Medium, High };

    Level level = Level::None;

    int ratio() const; // None/Low/Medium/High -> 0/1/2/3
    bool operator==(const NoiseModel&) const = default;
};

const char* noise_level_name(NoiseModel::Level level);
NoiseModel::Level noise_level_from_name(const std::string& name); // ConfigError if unknown

// An executable session: ordered steps plus the behaviour models. The topic
// is the session's true (sensitive) topic, 0 for background sessions.
struct SessionPlan {
    int topic_id = 0;
    std::vector<PlanStep> steps;
    ClickModel click_model;
    NoiseModel noise_model;

    int probe_count() const;
};

// A portable query script. Line format:
//   ! keywords: <terms>     optional, whitespace-separated
//   ! probe: <query>        required, exactly once
//   <query>                 one query per line, verbatim (trimmed)
//   ! wait <seconds>        pacing for the query line immediately above
// Lines are trimmed; blank lines are skipped; waits default to 0.
struct QueryScript {
    struct Step {
        std::string query;
        int wait_seconds = 0;

        bool operator==(const Step&) const = default;
    };

    std::vector<std::string> keywords;
    std::string probe;
    std::vector<Step> steps;

    bool operator==(const QueryScript&) const = default;
};

// Parse script text; malformed directives carry their line number.
QueryScript parse_script(std::string_view text);
QueryScript load_script(const std::string& path);

// Render a script back to text. Zero waits are omitted, so
// parse_script(render_script(s)) == s for any valid script.
std::string render_script(const QueryScript& script);

// Conversions between scripts and plans. Probe steps are recognized by
// comparing the query against the script's probe text.
QueryScript script_from_plan(const SessionPlan& plan, std::vector<std::string> keywords,
                             const std::string& probe);
SessionPlan plan_from_script(const QueryScript& script, int topic_id,
                             ClickModel click = {}, NoiseModel noise = {});

// Generate a plain sensitive session: `probes` probe steps with 3-5 sensitive
// queries (drawn from the pool, with replacement) between consecutive probes.
// Waits are uniform in [1, 20]. Deterministic in the seed.
SessionPlan build_session(int topic_id, const std::vector<std::string>& topic_queries,
                          const std::string& probe, std::uint64_t rng_seed, int probes = 5);

// Interleave cover queries: `ratio()` noise steps after every sensitive step,
// topped up so that at least that many noise steps sit immediately before
// every probe. Relative order of the original steps is preserved. A positive
// ratio with an empty pool is a configuration error.
SessionPlan inject_noise(const SessionPlan& plan, const NoiseModel& noise,
                         const std::vector<std::string>& pool, std::uint64_t rng_seed);

// Build a proxy-topic session: between consecutive probes, one block of 3-4
// proxy queries plus exactly one sensitive query, shuffled so that at least
// two proxy queries stay adjacent. Needs at least 4 queries in both pools.
SessionPlan build_proxy_session(int topic_id, const std::vector<std::string>& sensitive_queries,
                                const TopicRecord& proxy, const std::string& probe,
                                std::uint64_t rng_seed, int probes = 5);

// Share of an item's tokens that are (stemmed) topic keywords; empty text
// scores 0.
double term_frequency(const std::string& item_text,
                      const std::vector<std::string>& topic_keywords);

// Reference to one item on a page.
struct ItemRef {
    bool advert = false; // false: organic result
    int index = 0;       // position within its list

    bool operator==(const ItemRef&) const = default;
};

// Decide which items of a page to click under a click model. Probe pages are
// never clicked (rechecked here). ClickTwoRandom draws twice with
// replacement, so a one-item page is clicked twice.
std::vector<ItemRef> decide_clicks(const ResponsePage& page, const ClickModel& model,
                                   const std::vector<std::string>& topic_keywords,
                                   std::uint64_t rng_seed);

// Seed phrasing patterns applied to a topic's keywords; output is meant for
// human curation, not direct use.
std::vector<std::string> generate_candidate_queries(const TopicRecord& topic,
                                                    std::uint64_t rng_seed, int count);

// Load a query pool file: one query per line, '#' comments, blanks skipped.
std::vector<std::string> load_query_pool(const std::string& path);

// Remove pool queries that share any stemmed term with the sensitive topics'
// keywords or example queries.
std::vector<std::string> filter_query_pool(const std::vector<std::string>& pool,
                                           const TopicCatalog& catalog);

} // namespace pridetect
