#include <doctest.h>

#include <algorithm>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "pridetect/errors.hpp"
#include "pridetect/rng.hpp"
#include "pridetect/scripting.hpp"

#include "test_support.hpp"

using namespace pridetect;
using testutil::data_path;
using testutil::TempDir;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

// Indices of probe steps and the multiset of kinds between consecutive probes.
std::vector<std::size_t> probe_positions(const SessionPlan& plan) {
    std::vector<std::size_t> positions;
    for (std::size_t i = 0; i < plan.steps.size(); ++i) {
        if (plan.steps[i].kind == StepKind::Probe) positions.push_back(i);
    }
    return positions;
}

SessionPlan alternating_plan(int pairs) {
    SessionPlan plan;
    plan.topic_id = 1;
    for (int i = 0; i < pairs; ++i) {
        plan.steps.push_back(PlanStep{StepKind::Sensitive, "secret " + std::to_string(i), 2});
        plan.steps.push_back(PlanStep{StepKind::Probe, "probe", 3});
    }
    return plan;
}

const std::vector<std::string> kPool = {"weather tomorrow", "football scores",
                                        "pasta recipes", "bus timetable"};

} // namespace

TEST_CASE("the shipped session script parses to its documented shape") {
    const QueryScript script = load_script(data_path("scripts/gambling_session.script"));
    CHECK(script.keywords == std::vector<std::string>{"addiction", "dependency"});
    CHECK(script.probe == "help and advice");
    REQUIRE(script.steps.size() == 17);

    std::vector<std::size_t> probes;
    for (std::size_t i = 0; i < script.steps.size(); ++i) {
        if (script.steps[i].query == script.probe) probes.push_back(i);
    }
    CHECK(probes == std::vector<std::size_t>{0, 4, 8, 11, 16});

    const std::vector<int> waits = {7, 19, 13, 4, 8, 20, 15, 17, 2, 11, 13, 1, 8, 9, 5, 20, 0};
    REQUIRE(script.steps.size() == waits.size());
    for (std::size_t i = 0; i < waits.size(); ++i) {
        CHECK(script.steps[i].wait_seconds == waits[i]);
    }

    // rendering reproduces the file byte for byte
    CHECK(render_script(script) == slurp(data_path("scripts/gambling_session.script")));
}

TEST_CASE("parse_script handles directives, waits and blank lines") {
    const QueryScript script = parse_script("! probe: p\n\nq1\n! wait 3\np\n");
    CHECK(script.keywords.empty());
    CHECK(script.probe == "p");
    REQUIRE(script.steps.size() == 2);
    CHECK(script.steps[0] == QueryScript::Step{"q1", 3});
    CHECK(script.steps[1] == QueryScript::Step{"p", 0});

    // keyword lines accumulate; surrounding whitespace is trimmed
    const QueryScript kw = parse_script("! keywords: a b\n! keywords: c\n! probe: x\n  q  \n");
    CHECK(kw.keywords == std::vector<std::string>{"a", "b", "c"});
    CHECK(kw.steps == std::vector<QueryScript::Step>{{"q", 0}});
}

TEST_CASE("parse_script rejects malformed scripts with line numbers") {
    CHECK_THROWS_AS(parse_script("q1\nq2\n"), ParseError); // no probe directive
    CHECK_THROWS_AS(parse_script("! probe:   \nq\n"), ParseError);
    CHECK_THROWS_AS(parse_script("! probe: p\n! probe: q\n"), ParseError);
    CHECK_THROWS_AS(parse_script("! probe: p\n! wait 5\n"), ParseError); // wait before query
    CHECK_THROWS_AS(parse_script("! probe: p\nq\n! wait soon\n"), ParseError);
    CHECK_THROWS_AS(parse_script("! probe: p\nq\n! wait -3\n"), ParseError);
    CHECK_THROWS_AS(parse_script("! probe: p\nq\n! wait 3x\n"), ParseError);
    CHECK_THROWS_AS(parse_script("! probe: p\n! frobnicate\n"), ParseError);

    try {
        parse_script("! probe: p\nq\n\n! wait oops\n");
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(e.line() == 4);
    }

    CHECK_THROWS_AS(load_script("/nonexistent/script.txt"), IoError);
}

TEST_CASE("render_script and parse_script are mutually inverse") {
    QueryScript script;
    script.keywords = {"alpha", "beta"};
    script.probe = "check in";
    script.steps = {{"first query", 4}, {"check in", 0}, {"second query", 19}};
    CHECK(parse_script(render_script(script)) == script);

    // zero waits are omitted from the rendering
    QueryScript plain;
    plain.probe = "p";
    plain.steps = {{"q", 0}};
    CHECK(render_script(plain) == "! probe: p\nq\n");
    CHECK(parse_script(render_script(plain)) == plain);
}

TEST_CASE("plans convert to scripts and back without loss") {
    const SessionPlan plan = build_session(2, kPool, "all quiet here", 42);
    const QueryScript script = script_from_plan(plan, {"kw1", "kw2"}, "all quiet here");
    REQUIRE(script.steps.size() == plan.steps.size());
    CHECK(parse_script(render_script(script)) == script);

    ClickModel clicks;
    clicks.kind = ClickModel::Kind::ClickAll;
    NoiseModel noise;
    noise.level = NoiseModel::Level::Low;
    const SessionPlan back = plan_from_script(script, plan.topic_id, clicks, noise);
    CHECK(back.topic_id == plan.topic_id);
    CHECK(back.steps == plan.steps); // kinds recovered by probe-text comparison
    CHECK(back.click_model == clicks);
    CHECK(back.noise_model == noise);
}

TEST_CASE("build_session lays out probes with sensitive blocks between them") {
    const SessionPlan plan = build_session(3, kPool, "quiet check", 7);
    CHECK(plan.topic_id == 3);
    CHECK(plan.probe_count() == 5);
    REQUIRE(!plan.steps.empty());
    CHECK(plan.steps.front().kind == StepKind::Probe);
    CHECK(plan.steps.back().kind == StepKind::Probe);

    const std::vector<std::size_t> probes = probe_positions(plan);
    REQUIRE(probes.size() == 5);
    CHECK(probes.front() == 0);
    CHECK(probes.back() == plan.steps.size() - 1);
    for (std::size_t i = 0; i + 1 < probes.size(); ++i) {
        const std::size_t gap = probes[i + 1] - probes[i] - 1;
        CHECK(gap >= 3);
        CHECK(gap <= 5);
    }
    for (const PlanStep& step : plan.steps) {
        CHECK(step.wait_seconds >= 1);
        CHECK(step.wait_seconds <= 20);
        if (step.kind == StepKind::Probe) {
            CHECK(step.query == "quiet check");
        } else {
            CHECK(step.kind == StepKind::Sensitive);
            CHECK(std::find(kPool.begin(), kPool.end(), step.query) != kPool.end());
        }
    }

    // deterministic in the seed; probe count honored
    CHECK(build_session(3, kPool, "quiet check", 7).steps == plan.steps);
    CHECK(build_session(3, kPool, "quiet check", 7, 2).probe_count() == 2);

    CHECK_THROWS_AS(build_session(1, {}, "p", 0), ConfigError);
    CHECK_THROWS_AS(build_session(1, kPool, "", 0), ConfigError);
    CHECK_THROWS_AS(build_session(1, kPool, "p", 0, 1), ConfigError);
}

TEST_CASE("inject_noise with a zero ratio only records the noise model") {
    const SessionPlan plan = alternating_plan(5);
    NoiseModel none;
    none.level = NoiseModel::Level::None;
    const SessionPlan out = inject_noise(plan, none, {}, 9); // empty pool is fine at ratio 0
    CHECK(out.steps == plan.steps);
    CHECK(out.topic_id == plan.topic_id);
    CHECK(out.noise_model == none);
}

TEST_CASE("inject_noise pads sensitive steps and probe lead-ins exactly") {
    const SessionPlan plan = alternating_plan(5); // s P s P s P s P s P

    NoiseModel low;
    low.level = NoiseModel::Level::Low;
    const SessionPlan padded = inject_noise(plan, low, kPool, 1);
    int noise = 0;
    for (const PlanStep& step : padded.steps) noise += step.kind == StepKind::Noise ? 1 : 0;
    CHECK(noise == 5); // one per sensitive step, none extra
    for (std::size_t i = 0; i < padded.steps.size(); ++i) {
        if (padded.steps[i].kind == StepKind::Probe) {
            REQUIRE(i > 0);
            CHECK(padded.steps[i - 1].kind == StepKind::Noise);
        }
    }

    NoiseModel high;
    high.level = NoiseModel::Level::High;
    const SessionPlan heavy = inject_noise(plan, high, kPool, 1);
    int heavy_noise = 0;
    int heavy_sensitive = 0;
    for (const PlanStep& step : heavy.steps) {
        heavy_noise += step.kind == StepKind::Noise ? 1 : 0;
        heavy_sensitive += step.kind == StepKind::Sensitive ? 1 : 0;
    }
    CHECK(heavy_sensitive == 5);
    CHECK(heavy_noise == 15); // exact 3:1 cover on an alternating plan

    // removing the noise steps recovers the original plan, order intact
    std::vector<PlanStep> stripped;
    for (const PlanStep& step : heavy.steps) {
        if (step.kind != StepKind::Noise) stripped.push_back(step);
    }
    CHECK(stripped == plan.steps);

    // determinism and validation
    CHECK(inject_noise(plan, high, kPool, 1).steps == heavy.steps);
    CHECK_THROWS_AS(inject_noise(plan, low, {}, 1), ConfigError);
}

TEST_CASE("inject_noise tops up cover before probes that lack it") {
    // generated sessions open with a probe, which has no sensitive step in
    // front of it: the lead-in must be topped up to the full ratio
    const SessionPlan plan = build_session(1, kPool, "check", 11);
    NoiseModel medium;
    medium.level = NoiseModel::Level::Medium;
    const SessionPlan padded = inject_noise(plan, medium, kPool, 3);

    int sensitive = 0;
    int noise = 0;
    for (const PlanStep& step : padded.steps) {
        sensitive += step.kind == StepKind::Sensitive ? 1 : 0;
        noise += step.kind == StepKind::Noise ? 1 : 0;
    }
    CHECK(noise == 2 * (sensitive + 1)); // per-sensitive pairs plus the first-probe lead-in

    for (std::size_t i = 0; i < padded.steps.size(); ++i) {
        if (padded.steps[i].kind != StepKind::Probe) continue;
        int lead_in = 0;
        for (std::size_t j = i; j-- > 0;) {
            if (padded.steps[j].kind != StepKind::Noise) break;
            ++lead_in;
        }
        CHECK(lead_in >= 2);
    }
}

TEST_CASE("build_proxy_session wraps each sensitive query in proxy cover") {
    TopicRecord proxy;
    proxy.label = "event tickets";
    proxy.queries = {"concert tickets tonight", "theatre seats", "matinee offers",
                     "box office hours", "standing room"};
    const std::vector<std::string> sensitive = {"s one", "s two", "s three", "s four"};

    for (std::uint64_t seed = 0; seed < 300; ++seed) {
        const SessionPlan plan = build_proxy_session(4, sensitive, proxy, "check", seed);
        CHECK(plan.topic_id == 4);
        CHECK(plan.probe_count() == 5);
        CHECK(plan.steps.front().kind == StepKind::Probe);
        CHECK(plan.steps.back().kind == StepKind::Probe);

        const std::vector<std::size_t> probes = probe_positions(plan);
        REQUIRE(probes.size() == 5);
        for (std::size_t b = 0; b + 1 < probes.size(); ++b) {
            int proxies = 0;
            int sensitives = 0;
            bool adjacent = false;
            for (std::size_t i = probes[b] + 1; i < probes[b + 1]; ++i) {
                proxies += plan.steps[i].kind == StepKind::Proxy ? 1 : 0;
                sensitives += plan.steps[i].kind == StepKind::Sensitive ? 1 : 0;
                if (i + 1 < probes[b + 1] && plan.steps[i].kind == StepKind::Proxy &&
                    plan.steps[i + 1].kind == StepKind::Proxy) {
                    adjacent = true;
                }
            }
            CHECK(sensitives == 1);
            CHECK(proxies >= 3);
            CHECK(proxies <= 4);
            CHECK(adjacent); // at least two proxy queries stay next to each other
        }
    }

    CHECK_THROWS_AS(build_proxy_session(1, {"a", "b", "c"}, proxy, "p", 0), ConfigError);
    TopicRecord thin;
    thin.label = "thin";
    thin.queries = {"only", "three", "queries"};
    CHECK_THROWS_AS(build_proxy_session(1, sensitive, thin, "p", 0), ConfigError);
    CHECK_THROWS_AS(build_proxy_session(1, sensitive, proxy, "p", 0, 1), ConfigError);
}

TEST_CASE("term_frequency measures the stemmed keyword share of an item") {
    CHECK(term_frequency("wagering", {"wagering"}) == doctest::Approx(1.0));
    CHECK(term_frequency("wagering tips tonight", {"wagering"}) ==
          doctest::Approx(1.0 / 3.0));
    CHECK(term_frequency("plain text only", {"wagering"}) == 0.0);
    CHECK(term_frequency("", {"wagering"}) == 0.0);
    CHECK(term_frequency("the and of", {"wagering"}) == 0.0); // stopwords tokenize to nothing
    CHECK(term_frequency("addicted to gambling", {"gambling addiction"}) ==
          doctest::Approx(1.0)); // both content tokens match after stemming
    CHECK(term_frequency("anything at all", {}) == 0.0);
}

TEST_CASE("decide_clicks follows the click model") {
    ResponsePage page;
    page.query = "odds today";
    page.is_probe = false;
    page.organic = {ResultItem{"wagering tips", "", "https://o/0"},
                    ResultItem{"plain weather report", "", "https://o/1"}};
    page.adverts = {ResultItem{"special wagering bets offer", "", "https://a/0"}};
    const std::vector<std::string> keywords = {"wagering", "bets"};

    ClickModel model;
    model.tf_threshold = 0.3;

    model.kind = ClickModel::Kind::NoClick;
    CHECK(decide_clicks(page, model, keywords, 1).empty());

    model.kind = ClickModel::Kind::ClickAll;
    const std::vector<ItemRef> all = decide_clicks(page, model, keywords, 1);
    CHECK(all == std::vector<ItemRef>{{false, 0}, {false, 1}, {true, 0}});

    // organic "wagering tips" scores 1/2, advert scores 2/4, weather scores 0
    model.kind = ClickModel::Kind::ClickRelevant;
    CHECK(decide_clicks(page, model, keywords, 1) ==
          std::vector<ItemRef>{{false, 0}, {true, 0}});
    model.kind = ClickModel::Kind::ClickNonRelevant;
    CHECK(decide_clicks(page, model, keywords, 1) == std::vector<ItemRef>{{false, 1}});
}

TEST_CASE("relevant and non-relevant clicks partition every page") {
    Rng rng(6060);
    const std::vector<std::string> bank = {"wagering", "bets",    "weather", "pasta",
                                           "tonight",  "special", "report",  "offer"};
    const std::vector<std::string> keywords = {"wagering", "bets"};
    for (int trial = 0; trial < 100; ++trial) {
        ResponsePage page;
        page.is_probe = false;
        const long organic = rng.uniform_int(0, 4);
        const long adverts = rng.uniform_int(0, 4);
        auto random_item = [&] {
            std::string text = rng.pick(bank);
            const long extra = rng.uniform_int(0, 3);
            for (long w = 0; w < extra; ++w) text += " " + rng.pick(bank);
            return ResultItem{text, "", ""};
        };
        for (long i = 0; i < organic; ++i) page.organic.push_back(random_item());
        for (long i = 0; i < adverts; ++i) page.adverts.push_back(random_item());

        ClickModel model;
        model.tf_threshold = 0.4;
        model.kind = ClickModel::Kind::ClickRelevant;
        const auto relevant = decide_clicks(page, model, keywords, 1);
        model.kind = ClickModel::Kind::ClickNonRelevant;
        const auto nonrelevant = decide_clicks(page, model, keywords, 1);
        model.kind = ClickModel::Kind::ClickAll;
        const auto everything = decide_clicks(page, model, keywords, 1);

        CHECK(relevant.size() + nonrelevant.size() == everything.size());
        std::vector<ItemRef> merged = relevant;
        merged.insert(merged.end(), nonrelevant.begin(), nonrelevant.end());
        for (const ItemRef& ref : everything) {
            CHECK(std::count(merged.begin(), merged.end(), ref) == 1);
        }
    }
}

TEST_CASE("decide_clicks validates thresholds and refuses probe pages") {
    ResponsePage page;
    page.adverts = {ResultItem{"anything", "", ""}};

    ClickModel model;
    model.kind = ClickModel::Kind::NoClick;
    model.tf_threshold = 0.0;
    CHECK_THROWS_AS(decide_clicks(page, model, {}, 1), ConfigError);
    model.tf_threshold = 1.0;
    CHECK_THROWS_AS(decide_clicks(page, model, {}, 1), ConfigError);

    model.tf_threshold = 0.5;
    ResponsePage probe = page;
    probe.is_probe = true;
    CHECK_THROWS_AS(decide_clicks(probe, model, {}, 1), ContractViolation);
}

TEST_CASE("two random clicks draw with replacement and are seed-deterministic") {
    ResponsePage one_item;
    one_item.adverts = {ResultItem{"only advert", "", ""}};
    ClickModel model;
    model.kind = ClickModel::Kind::ClickTwoRandom;
    const auto clicks = decide_clicks(one_item, model, {}, 3);
    CHECK(clicks == std::vector<ItemRef>{{true, 0}, {true, 0}});

    ResponsePage empty;
    CHECK(decide_clicks(empty, model, {}, 3).empty());

    ResponsePage mixed;
    for (int i = 0; i < 4; ++i) mixed.organic.push_back(ResultItem{"o", "", ""});
    for (int i = 0; i < 4; ++i) mixed.adverts.push_back(ResultItem{"a", "", ""});
    const auto first = decide_clicks(mixed, model, {}, 77);
    CHECK(first.size() == 2);
    CHECK(decide_clicks(mixed, model, {}, 77) == first);
}

TEST_CASE("behaviour model names round-trip and reject unknowns") {
    using CK = ClickModel::Kind;
    for (CK kind : {CK::NoClick, CK::ClickRelevant, CK::ClickNonRelevant, CK::ClickAll,
                    CK::ClickTwoRandom}) {
        CHECK(click_kind_from_name(click_kind_name(kind)) == kind);
    }
    CHECK(click_kind_from_name("none") == CK::NoClick);
    CHECK(click_kind_from_name("RELEVANT") == CK::ClickRelevant);
    CHECK_THROWS_AS(click_kind_from_name("sometimes"), ConfigError);

    using NL = NoiseModel::Level;
    for (NL level : {NL::None, NL::Low, NL::Medium, NL::High}) {
        CHECK(noise_level_from_name(noise_level_name(level)) == level);
    }
    CHECK_THROWS_AS(noise_level_from_name("extreme"), ConfigError);

    CHECK(NoiseModel{NL::None}.ratio() == 0);
    CHECK(NoiseModel{NL::Low}.ratio() == 1);
    CHECK(NoiseModel{NL::Medium}.ratio() == 2);
    CHECK(NoiseModel{NL::High}.ratio() == 3);

    CHECK(std::string(step_kind_name(StepKind::Probe)) == "probe");
    CHECK(std::string(step_kind_name(StepKind::Sensitive)) == "sensitive");
    CHECK(std::string(step_kind_name(StepKind::Noise)) == "noise");
    CHECK(std::string(step_kind_name(StepKind::Proxy)) == "proxy");
}

TEST_CASE("query pools load from files and are scrubbed against the catalog") {
    TempDir tmp("pool");
    const std::string path = tmp.file("pool.txt",
                                      "# cover queries\n"
                                      "weather tomorrow\n"
                                      "\n"
                                      "  football scores  \n");
    CHECK(load_query_pool(path) ==
          std::vector<std::string>{"weather tomorrow", "football scores"});
    CHECK_THROWS_AS(load_query_pool(tmp.path("missing.txt")), IoError);

    const TopicCatalog catalog = testutil::catalog_from_text(
        "[other]\nqueries = plain everyday question\n"
        "[t1]\nkeywords = gambling\nqueries = casino bonus\n");
    const std::vector<std::string> pool = {
        "gamma facts",        // clean: kept
        "gambling tips",      // shares a keyword stem: dropped
        "best casino in town", // shares a query term: dropped
        "plain facts",        // overlaps only the background topic: kept
    };
    CHECK(filter_query_pool(pool, catalog) ==
          std::vector<std::string>{"gamma facts", "plain facts"});
}

TEST_CASE("generate_candidate_queries needs keywords and honors the count") {
    TopicRecord topic;
    topic.label = "betting";
    topic.keywords = {"wagering", "odds"};
    const auto queries = generate_candidate_queries(topic, 5, 7);
    CHECK(queries.size() == 7);
    for (const std::string& q : queries) CHECK(!q.empty());
    CHECK(generate_candidate_queries(topic, 5, 7) == queries);

    TopicRecord bare;
    bare.label = "bare";
    CHECK_THROWS_AS(generate_candidate_queries(bare, 5, 7), ConfigError);
}
