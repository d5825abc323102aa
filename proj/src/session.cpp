#include "pbench/session.hpp"

#include <atomic>
#include <mutex>
#include <thread>

#include "pbench/util.hpp"

namespace pbench {

ConversationScript ConversationScript::from_text(const std::string& text) {
    ConversationScript script;
    for (const std::string& raw : split(text, '\n')) {
        std::string line = trim(raw);
        if (line.empty() || line[0] == '#') continue;
        script.utterances.push_back(line);
    }
    if (script.utterances.empty())
        throw ConfigError("conversation script has no donor utterances");
    return script;
}

ConversationScript ConversationScript::load(const std::string& path) {
    try {
        return from_text(read_file(path));
    } catch (const ConfigError& e) {
        throw ConfigError(path + ": " + e.what());
    }
}

Transcript run_session(ChatBackend& backend, const RenderedPrompt& prompt,
                       const ConversationScript& script, const SessionSpec& spec,
                       const SessionOptions& options) {
    if (options.drift) {
        options.drift->validate();
        if (options.lexicon == nullptr)
            throw ConfigError("drift monitoring needs a lexicon to profile responses");
        if (options.drift->mode == ReinjectionMode::OnDrift && options.baseline == nullptr)
            throw ConfigError("on_drift reinjection requires a calibrated baseline");
    }

    Transcript t;
    t.persona_id = spec.persona.id();
    t.model_id = spec.model_id;
    t.session_index = spec.session_index;
    t.seed = spec.seed;
    if (!backend.deterministic()) t.started_at = iso8601_now();

    std::string system_text = prompt.text;
    if (backend.wants_persona_tag()) system_text += "\n[persona:" + t.persona_id + "]";

    std::vector<ChatMessage> history;
    history.push_back({ChatMessage::Role::System, system_text, 0});

    std::vector<CategoryProfile> response_profiles;
    InjectionState injection_state;

    for (std::size_t turn = 1; turn <= script.turns(); ++turn) {
        const std::string& donor = script.utterances[turn - 1];
        history.push_back({ChatMessage::Role::Donor, donor, static_cast<int>(turn)});

        std::uint64_t turn_seed = mix64(spec.seed ^ mix64(turn));
        std::string reply;
        try {
            if (options.reset_per_turn) {
                std::vector<ChatMessage> fresh{history.front(), history.back()};
                reply = backend.complete(fresh, turn_seed);
            } else {
                reply = backend.complete(history, turn_seed);
            }
        } catch (const std::exception& e) {
            if (!backend.deterministic()) t.finished_at = iso8601_now();
            throw SessionError("turn " + std::to_string(turn) + " failed: " + e.what(), t);
        }
        history.push_back({ChatMessage::Role::Agent, reply, static_cast<int>(turn)});
        t.exchanges.push_back({donor, reply});

        if (options.drift) {
            response_profiles.push_back(analyze(reply, *options.lexicon));
            DriftDecision decision = maybe_reinject(*options.drift, options.baseline,
                                                    response_profiles, turn, injection_state);
            if (decision.evaluated) {
                DriftRecord record;
                record.turn = static_cast<int>(turn);
                record.z = decision.check.z;
                record.breached = decision.check.breached;
                record.triggered = decision.inject;
                t.drift.push_back(std::move(record));
            }
            if (decision.inject) {
                t.injections.push_back({static_cast<int>(turn), prompt.persona_text});
                history.push_back(
                    {ChatMessage::Role::System, prompt.persona_text, static_cast<int>(turn)});
            }
        }
    }

    if (!backend.deterministic()) t.finished_at = iso8601_now();
    return t;
}

CampaignResult run_campaign(ChatBackend& backend, const PromptTemplate& tmpl,
                            const SlotVocabulary& vocab, const ConversationScript& script,
                            const CampaignSpec& campaign, const SessionOptions& options,
                            const std::function<void(const Transcript&)>& on_complete) {
    tmpl.validate();
    vocab.validate();
    if (campaign.personas.empty()) throw InvalidArgument("campaign has no personas");
    if (campaign.sessions_per_persona < 1)
        throw ConfigError("sessions_per_persona must be >= 1");
    if (options.drift) {
        // fail here, once, instead of inside every worker
        options.drift->validate();
        if (options.lexicon == nullptr)
            throw ConfigError("drift monitoring needs a lexicon to profile responses");
        if (options.drift->mode == ReinjectionMode::OnDrift && options.baseline == nullptr)
            throw ConfigError("on_drift reinjection requires a calibrated baseline");
    }

    struct Job {
        PersonaSpec persona;
        RenderedPrompt prompt;
        int session_index;
        std::uint64_t seed;
    };
    std::vector<Job> jobs;
    for (const auto& persona : campaign.personas) {
        RenderedPrompt prompt = render_prompt(persona, tmpl, vocab);
        for (int s = 0; s < campaign.sessions_per_persona; ++s) {
            jobs.push_back({persona, prompt, s,
                            derive_seed(campaign.campaign_seed, persona.id(),
                                        backend.model_id(), s)});
        }
    }

    std::vector<std::optional<Transcript>> slots(jobs.size());
    std::vector<std::optional<SessionFailure>> failures(jobs.size());
    std::atomic<std::size_t> next{0};
    std::mutex complete_mutex;

    auto worker = [&]() {
        for (;;) {
            std::size_t i = next.fetch_add(1);
            if (i >= jobs.size()) return;
            const Job& job = jobs[i];
            SessionSpec spec{job.persona, backend.model_id(), job.session_index, job.seed};
            try {
                Transcript t = run_session(backend, job.prompt, script, spec, options);
                if (on_complete) {
                    std::lock_guard<std::mutex> lock(complete_mutex);
                    on_complete(t);
                }
                slots[i] = std::move(t);
            } catch (const SessionError& e) {
                failures[i] = SessionFailure{job.persona.id(), backend.model_id(),
                                             job.session_index, e.what(), e.partial()};
            } catch (const std::exception& e) {
                failures[i] = SessionFailure{job.persona.id(), backend.model_id(),
                                             job.session_index, e.what(), Transcript{}};
            }
        }
    };

    std::size_t threads = std::max<std::size_t>(1, campaign.max_parallel);
    threads = std::min(threads, jobs.size());
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(threads);
        for (std::size_t i = 0; i < threads; ++i) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }

    CampaignResult result;
    for (auto& slot : slots) {
        if (slot) result.transcripts.push_back(std::move(*slot));
    }
    for (auto& f : failures) {
        if (f) result.failures.push_back(std::move(*f));
    }
    return result;
}

}  // namespace pbench
