#pragma once

#include <string>

#include "pbench/persona.hpp"

namespace pbench {

/// The four-element core prompt. The persona pattern carries the named
/// slots {NAME}, {ATTITUDE}, {AUTHORITY}, {REASONING}, each exactly once.
struct PromptTemplate {
    std::string task;
    std::string goal;
    std::string rules;
    std::string persona_pattern;

    /// Throws InvalidArgument when a section is empty or a slot marker is
    /// missing or repeated.
    void validate() const;
};

/// Per-trait-level slot text. All six renderings must be non-empty and the
/// two renderings within a dimension must differ.
struct SlotVocabulary {
    std::string optimistic;
    std::string pessimistic;
    std::string authoritative;
    std::string submissive;
    std::string analytical;
    std::string affective;

    const std::string& rendering(Attitude a) const;
    const std::string& rendering(Authority a) const;
    const std::string& rendering(Reasoning r) const;

    /// Throws ConfigError on empty or within-dimension-identical renderings,
    /// or when a rendering itself contains a slot marker.
    void validate() const;
};

/// Shipped defaults. Paraphrases of the usual charity-solicitor framing;
/// both are fully overridable through the prompt config file.
PromptTemplate default_template();
SlotVocabulary default_vocabulary();

struct PromptConfig {
    PromptTemplate tmpl;
    SlotVocabulary vocab;
};

/// Load template + vocabulary from an INI file with [template] and
/// [vocabulary] sections. Missing keys fall back to the defaults.
PromptConfig load_prompt_config(const std::string& path);

/// Serialize a PromptConfig back to the config file format.
std::string prompt_config_text(const PromptConfig& cfg);

struct RenderedPrompt {
    std::string text;          ///< full prompt: task, goal, rules, persona
    std::string persona_text;  ///< the filled persona section alone (re-injection payload)
};

RenderedPrompt render_prompt(const PersonaSpec& spec, const PromptTemplate& tmpl,
                             const SlotVocabulary& vocab);

/// Full prompt text for one persona. Pure function of its inputs.
std::string build_prompt(const PersonaSpec& spec, const PromptTemplate& tmpl,
                         const SlotVocabulary& vocab);

}  // namespace pbench
