#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <map>
#include <string>
#include <vector>

#include "pbench/backends.hpp"
#include "pbench/drift.hpp"
#include "pbench/errors.hpp"
#include "pbench/session.hpp"

using namespace pbench;

namespace {

CategoryProfile prof(std::map<std::string, double> percentages) {
    CategoryProfile p;
    p.word_count = 100;
    p.empty = false;
    p.percentages = std::move(percentages);
    return p;
}

}  // namespace

TEST_CASE("calibrate computes per-category mean and sample sd") {
    std::vector<CategoryProfile> responses = {
        prof({{"a", 8.0}, {"b", 5.0}}),
        prof({{"a", 10.0}, {"b", 5.0}}),
        prof({{"a", 12.0}, {"b", 5.0}}),
    };
    Baseline base = calibrate(responses, {"a", "b"});
    CHECK(base.samples == 3);
    CHECK(base.mean.at("a") == 10.0);
    CHECK(base.sd.at("a") == 2.0);  // sqrt(((-2)^2 + 0 + 2^2) / 2)
    CHECK(base.mean.at("b") == 5.0);
    CHECK(base.sd.at("b") == 0.0);

    CHECK_THROWS_AS(calibrate({responses[0]}, {"a"}), InsufficientDataError);
    CHECK_THROWS_AS(calibrate(responses, {}), InvalidArgument);
    CHECK_THROWS_AS(calibrate(responses, {"missing"}), ConfigError);
}

TEST_CASE("window z-scores use the sd floor and a strict breach threshold") {
    Baseline base;
    base.mean = {{"a", 10.0}, {"b", 5.0}};
    base.sd = {{"a", 2.0}, {"b", 0.0}};  // b would divide by zero without the floor
    base.samples = 3;
    DriftPolicy policy;  // threshold 2.0, min_breaches 2

    auto window = std::vector<CategoryProfile>{prof({{"a", 13.0}, {"b", 6.0}}),
                                               prof({{"a", 13.0}, {"b", 6.0}}),
                                               prof({{"a", 13.0}, {"b", 6.0}})};
    WindowCheck check = check_window(window, base, policy);
    CHECK(check.z.at("a") == 1.5);   // (13 - 10) / 2
    CHECK(check.z.at("b") == 2.0);   // (6 - 5) / max(0, 0.5)
    CHECK(check.breached.empty());   // |z| must exceed the threshold, 2.0 does not
    CHECK_FALSE(check.drifted);

    window = {prof({{"a", 5.0}, {"b", 6.5}}), prof({{"a", 5.0}, {"b", 6.5}}),
              prof({{"a", 5.0}, {"b", 6.5}})};
    check = check_window(window, base, policy);
    CHECK(check.z.at("a") == -2.5);
    CHECK(check.z.at("b") == 3.0);
    CHECK(check.breached == std::vector<std::string>{"a", "b"});
    CHECK(check.drifted);  // two breaches reaches min_breaches

    policy.min_breaches = 3;
    CHECK_FALSE(check_window(window, base, policy).drifted);

    CHECK_THROWS_AS(check_window({}, base, policy), InvalidArgument);
    CHECK_THROWS_AS(check_window({prof({{"a", 1.0}})}, base, policy), ConfigError);
}

TEST_CASE("baseline files round-trip and reject malformed rows") {
    Baseline base;
    base.mean = {{"warm", 12.5}, {"cold", 0.03125}};
    base.sd = {{"warm", 1.75}, {"cold", 0.0}};
    base.samples = 40;

    std::string path = "/tmp/pbench_baseline_test.csv";
    write_baseline(path, base);
    Baseline back = read_baseline(path);
    CHECK(back.mean == base.mean);
    CHECK(back.sd == base.sd);
    CHECK(back.samples == base.samples);
    std::remove(path.c_str());

    auto write_tmp = [](const std::string& text) {
        std::string p = "/tmp/pbench_baseline_bad.csv";
        std::FILE* f = std::fopen(p.c_str(), "w");
        std::fwrite(text.data(), 1, text.size(), f);
        std::fclose(f);
        return p;
    };
    CHECK_THROWS_AS(read_baseline(write_tmp("wrong,header\n")), ParseError);
    CHECK_THROWS_AS(read_baseline(write_tmp("category,mean,sd,samples\n")), ParseError);
    CHECK_THROWS_AS(
        read_baseline(write_tmp("category,mean,sd,samples\na,1,1,3\na,2,2,3\n")), ParseError);
    CHECK_THROWS_AS(
        read_baseline(write_tmp("category,mean,sd,samples\na,1,1,3\nb,2,2,4\n")), ParseError);
    CHECK_THROWS_AS(
        read_baseline(write_tmp("category,mean,sd,samples\na,x,1,3\n")), ParseError);
    std::remove("/tmp/pbench_baseline_bad.csv");
}

TEST_CASE("policy validation bounds every field") {
    DriftPolicy p;
    p.validate();
    p.window = 0;
    CHECK_THROWS_AS(p.validate(), ConfigError);
    p = DriftPolicy{};
    p.threshold = 0.0;
    CHECK_THROWS_AS(p.validate(), ConfigError);
    p = DriftPolicy{};
    p.min_breaches = 0;
    CHECK_THROWS_AS(p.validate(), ConfigError);
    p = DriftPolicy{};
    p.mode = ReinjectionMode::Periodic;  // period still 0
    CHECK_THROWS_AS(p.validate(), ConfigError);

    CHECK(reinjection_mode_from_string("off") == ReinjectionMode::Off);
    CHECK(reinjection_mode_from_string("periodic") == ReinjectionMode::Periodic);
    CHECK(reinjection_mode_from_string("on_drift") == ReinjectionMode::OnDrift);
    CHECK_THROWS_AS(reinjection_mode_from_string("sometimes"), ConfigError);
    CHECK(std::string(reinjection_mode_name(ReinjectionMode::OnDrift)) == "on_drift");
}

TEST_CASE("periodic reinjection fires on schedule, gated by the cooldown") {
    DriftPolicy policy;
    policy.mode = ReinjectionMode::Periodic;
    policy.period = 3;
    policy.cooldown = 2;

    InjectionState state;
    std::vector<std::size_t> fired;
    for (std::size_t turn = 1; turn <= 10; ++turn) {
        DriftDecision d = maybe_reinject(policy, nullptr, {}, turn, state);
        CHECK_FALSE(d.evaluated);  // periodic mode never scores windows
        if (d.inject) fired.push_back(turn);
    }
    CHECK(fired == std::vector<std::size_t>{3, 6, 9});

    // a cooldown longer than the period swallows every other slot
    policy.period = 2;
    state = InjectionState{};
    fired.clear();
    for (std::size_t turn = 1; turn <= 10; ++turn) {
        if (maybe_reinject(policy, nullptr, {}, turn, state).inject) fired.push_back(turn);
    }
    CHECK(fired == std::vector<std::size_t>{2, 6, 10});
}

TEST_CASE("on-drift reinjection waits for a full window, then respects cooldown") {
    Baseline base;
    base.mean = {{"x", 0.0}};
    base.sd = {{"x", 1.0}};
    base.samples = 10;

    DriftPolicy policy;
    policy.window = 2;
    policy.threshold = 2.0;
    policy.min_breaches = 1;
    policy.cooldown = 1;

    InjectionState state;
    std::vector<CategoryProfile> history;

    history.push_back(prof({{"x", 10.0}}));
    DriftDecision d = maybe_reinject(policy, &base, history, 1, state);
    CHECK_FALSE(d.evaluated);  // window not yet full
    CHECK_FALSE(d.inject);

    history.push_back(prof({{"x", 10.0}}));
    d = maybe_reinject(policy, &base, history, 2, state);
    CHECK(d.evaluated);
    CHECK(d.check.z.at("x") == 10.0);
    CHECK(d.inject);

    history.push_back(prof({{"x", 10.0}}));
    d = maybe_reinject(policy, &base, history, 3, state);
    CHECK(d.evaluated);
    CHECK_FALSE(d.inject);  // 3 - 2 = 1 does not exceed cooldown 1

    history.push_back(prof({{"x", 10.0}}));
    d = maybe_reinject(policy, &base, history, 4, state);
    CHECK(d.inject);

    // calm responses never trigger
    state = InjectionState{};
    history = {prof({{"x", 0.5}}), prof({{"x", -0.5}})};
    d = maybe_reinject(policy, &base, history, 2, state);
    CHECK(d.evaluated);
    CHECK_FALSE(d.inject);

    CHECK_THROWS_AS(maybe_reinject(policy, nullptr, history, 2, state), ConfigError);

    policy.mode = ReinjectionMode::Off;
    d = maybe_reinject(policy, &base, history, 2, state);
    CHECK_FALSE(d.evaluated);
    CHECK_FALSE(d.inject);
}

TEST_CASE("sessions record injections and drift checks in the transcript") {
    const char* fixture = R"({
      "filler": ["the", "a", "road", "come", "see", "with"],
      "response_length": 20,
      "category_words": {"warm": ["good", "great"]},
      "profiles": [{"match": "*", "rates": {"warm": 0.5}}]
    })";
    MockBackend backend(MockFixture::from_json(fixture, "inline"), "sim");
    Lexicon lex = parse_lexicon("%\n1\twarm\n%\ngood\t1\ngreat\t1\n");
    PersonaSpec spec = persona_from_id("opt-auth-ana", "Avery");
    RenderedPrompt prompt = render_prompt(spec, default_template(), default_vocabulary());
    ConversationScript script = ConversationScript::from_text("a\nb\nc\nd\ne\nf\n");

    SUBCASE("periodic mode") {
        SessionOptions options;
        options.lexicon = &lex;
        DriftPolicy policy;
        policy.mode = ReinjectionMode::Periodic;
        policy.period = 2;
        policy.cooldown = 0;
        options.drift = policy;
        Transcript t = run_session(backend, prompt, script, SessionSpec{spec, "sim", 0, 1},
                                   options);
        REQUIRE(t.injections.size() == 3);
        CHECK(t.injections[0].turn == 2);
        CHECK(t.injections[1].turn == 4);
        CHECK(t.injections[2].turn == 6);
        for (const auto& inj : t.injections) CHECK(inj.text == prompt.persona_text);
        CHECK(t.drift.empty());  // periodic mode does not score windows
    }

    SUBCASE("on-drift mode with a far-off baseline") {
        Baseline base;
        base.mean = {{"warm", 0.0}};
        base.sd = {{"warm", 1.0}};
        base.samples = 10;
        SessionOptions options;
        options.lexicon = &lex;
        options.baseline = &base;
        DriftPolicy policy;  // window 3, threshold 2, cooldown 2
        policy.min_breaches = 1;
        options.drift = policy;

        Transcript t = run_session(backend, prompt, script, SessionSpec{spec, "sim", 0, 1},
                                   options);
        // checks start once three responses exist: turns 3..6
        REQUIRE(t.drift.size() == 4);
        CHECK(t.drift[0].turn == 3);
        CHECK(t.drift[0].triggered);  // mock output is ~50% warm, baseline says 0
        CHECK_FALSE(t.drift[1].triggered);  // cooldown
        CHECK_FALSE(t.drift[2].triggered);
        CHECK(t.drift[3].triggered);  // turn 6: 6 - 3 = 3 > 2
        REQUIRE(t.injections.size() == 2);
        CHECK(t.injections[0].turn == 3);
        CHECK(t.injections[1].turn == 6);
        for (const auto& rec : t.drift) CHECK(rec.z.at("warm") > 2.0);
    }

    SUBCASE("drift without a lexicon is rejected") {
        SessionOptions options;
        options.drift = DriftPolicy{};
        options.drift->mode = ReinjectionMode::Periodic;
        options.drift->period = 2;
        CHECK_THROWS_AS(
            run_session(backend, prompt, script, SessionSpec{spec, "sim", 0, 1}, options),
            ConfigError);
    }
}
