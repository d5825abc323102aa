#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "pbench/drift.hpp"
#include "pbench/errors.hpp"
#include "pbench/lexicon.hpp"
#include "pbench/persona.hpp"
#include "pbench/prompt.hpp"
#include "pbench/transcript.hpp"

namespace pbench {

/// Abstract chat completion backend.
///
/// complete() must be safe to call from several threads at once; campaign
/// workers share one backend instance.
class ChatBackend {
public:
    virtual ~ChatBackend() = default;

    /// Produces the agent reply for the given message history. `seed` is
    /// already mixed per (session, turn); deterministic backends must not
    /// draw entropy from anywhere else.
    virtual std::string complete(const std::vector<ChatMessage>& messages,
                                 std::uint64_t seed) = 0;

    /// True when identical inputs always yield identical replies. Controls
    /// whether transcripts carry wall-clock timestamps.
    virtual bool deterministic() const = 0;

    /// True when the backend needs the persona id spliced into the system
    /// message (simulated backends have no other way to see it).
    virtual bool wants_persona_tag() const = 0;

    virtual const std::string& model_id() const = 0;
};

/// Fixed donor side of every conversation.
struct ConversationScript {
    std::vector<std::string> utterances;

    std::size_t turns() const { return utterances.size(); }

    /// Parses one utterance per line; blank lines and '#' comments are
    /// skipped. Throws ConfigError when nothing remains.
    static ConversationScript from_text(const std::string& text);
    static ConversationScript load(const std::string& path);
};

struct SessionSpec {
    PersonaSpec persona;
    std::string model_id;
    int session_index = 0;
    std::uint64_t seed = 0;
};

struct SessionOptions {
    /// Engaged drift policy, or disengaged monitoring when empty.
    std::optional<DriftPolicy> drift;
    /// Reference distribution for OnDrift checks.
    const Baseline* baseline = nullptr;
    /// Lexicon used to profile responses turn by turn; required with drift.
    const Lexicon* lexicon = nullptr;
    /// When set, each request carries only the system prompt and the current
    /// donor utterance instead of the accumulated history.
    bool reset_per_turn = false;
};

/// Raised when a backend fails mid-session; carries whatever part of the
/// conversation completed before the failure.
class SessionError : public Error {
public:
    SessionError(const std::string& what, Transcript partial)
        : Error(what), partial_(std::move(partial)) {}

    const Transcript& partial() const { return partial_; }

private:
    Transcript partial_;
};

/// Runs one scripted conversation and returns its transcript. The system
/// prompt goes out first, then donor/agent turns alternate; persona
/// re-injections appear as additional system messages.
Transcript run_session(ChatBackend& backend, const RenderedPrompt& prompt,
                       const ConversationScript& script, const SessionSpec& spec,
                       const SessionOptions& options = {});

struct CampaignSpec {
    std::uint64_t campaign_seed = 0;
    int sessions_per_persona = 1;
    std::vector<PersonaSpec> personas;
    std::size_t max_parallel = 1;
};

struct SessionFailure {
    std::string persona_id;
    std::string model_id;
    int session_index = 0;
    std::string message;
    Transcript partial;
};

struct CampaignResult {
    std::vector<Transcript> transcripts;  // persona-major, session-minor order
    std::vector<SessionFailure> failures;

    bool ok() const { return failures.empty(); }
};

/// Runs sessions_per_persona sessions for every persona against one
/// backend. Session seeds derive from (campaign_seed, persona, model,
/// session index), so any subset reruns identically. Failed sessions are
/// collected, not fatal. `on_complete`, when given, is invoked serially
/// after each successful session.
CampaignResult run_campaign(ChatBackend& backend, const PromptTemplate& tmpl,
                            const SlotVocabulary& vocab, const ConversationScript& script,
                            const CampaignSpec& campaign, const SessionOptions& options = {},
                            const std::function<void(const Transcript&)>& on_complete = {});

}  // namespace pbench
