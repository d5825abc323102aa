#include "pbench/prompt.hpp"

#include <array>

#include "pbench/config.hpp"
#include "pbench/errors.hpp"
#include "pbench/util.hpp"

namespace pbench {

namespace {

constexpr std::array<const char*, 4> kSlots = {"{NAME}", "{ATTITUDE}", "{AUTHORITY}",
                                               "{REASONING}"};

std::size_t count_occurrences(const std::string& text, const std::string& needle) {
    std::size_t count = 0, pos = 0;
    while ((pos = text.find(needle, pos)) != std::string::npos) {
        ++count;
        pos += needle.size();
    }
    return count;
}

void check_no_markers(const std::string& text, const char* what) {
    for (const char* slot : kSlots) {
        if (contains(text, slot))
            throw ConfigError(std::string(what) + " must not contain the slot marker " + slot);
    }
}

std::string substitute(const std::string& pattern, const PersonaSpec& spec,
                       const SlotVocabulary& vocab) {
    // Single left-to-right pass; inserted text is emitted verbatim and never
    // rescanned for markers.
    std::string out;
    out.reserve(pattern.size() + 64);
    std::size_t pos = 0;
    while (pos < pattern.size()) {
        std::size_t brace = pattern.find('{', pos);
        if (brace == std::string::npos) {
            out.append(pattern, pos, std::string::npos);
            break;
        }
        out.append(pattern, pos, brace - pos);
        bool matched = false;
        for (const char* slot : kSlots) {
            std::size_t len = std::char_traits<char>::length(slot);
            if (pattern.compare(brace, len, slot) == 0) {
                if (slot == kSlots[0]) out += spec.agent_name;
                else if (slot == kSlots[1]) out += vocab.rendering(spec.attitude);
                else if (slot == kSlots[2]) out += vocab.rendering(spec.authority);
                else out += vocab.rendering(spec.reasoning);
                pos = brace + len;
                matched = true;
                break;
            }
        }
        if (!matched) {
            out += '{';
            pos = brace + 1;
        }
    }
    return out;
}

}  // namespace

void PromptTemplate::validate() const {
    if (task.empty()) throw InvalidArgument("template task section is empty");
    if (goal.empty()) throw InvalidArgument("template goal section is empty");
    if (rules.empty()) throw InvalidArgument("template rules section is empty");
    if (persona_pattern.empty()) throw InvalidArgument("template persona section is empty");
    for (const char* slot : kSlots) {
        std::size_t n = count_occurrences(persona_pattern, slot);
        if (n != 1)
            throw InvalidArgument("persona pattern must contain " + std::string(slot) +
                                  " exactly once (found " + std::to_string(n) + ")");
    }
}

const std::string& SlotVocabulary::rendering(Attitude a) const {
    return a == Attitude::Optimistic ? optimistic : pessimistic;
}
const std::string& SlotVocabulary::rendering(Authority a) const {
    return a == Authority::Authoritative ? authoritative : submissive;
}
const std::string& SlotVocabulary::rendering(Reasoning r) const {
    return r == Reasoning::Analytical ? analytical : affective;
}

void SlotVocabulary::validate() const {
    const std::pair<const std::string*, const char*> entries[] = {
        {&optimistic, "optimistic"},     {&pessimistic, "pessimistic"},
        {&authoritative, "authoritative"}, {&submissive, "submissive"},
        {&analytical, "analytical"},     {&affective, "affective"},
    };
    for (const auto& [text, name] : entries) {
        if (text->empty())
            throw ConfigError(std::string("vocabulary entry '") + name + "' is missing or empty");
        check_no_markers(*text, name);
    }
    if (optimistic == pessimistic)
        throw ConfigError("optimistic and pessimistic renderings must differ");
    if (authoritative == submissive)
        throw ConfigError("authoritative and submissive renderings must differ");
    if (analytical == affective)
        throw ConfigError("analytical and affective renderings must differ");
}

PromptTemplate default_template() {
    PromptTemplate t;
    t.task =
        "Act as a charity solicitor for the Wildlife Bridge Foundation, a charity that "
        "builds wildlife crossings to reconnect habitats fragmented by roads.";
    t.goal = "Get the speaker to donate to the foundation before the conversation ends.";
    t.rules =
        "Do not provide URLs, keep responses short, stay on the topic of the charity, "
        "and never break character.";
    t.persona_pattern =
        "The solicitor's name is {NAME}, personality: {ATTITUDE}, and {AUTHORITY}. "
        "Only speak as the solicitor from now on. Use {REASONING} to convince the donor.";
    return t;
}

SlotVocabulary default_vocabulary() {
    SlotVocabulary v;
    v.optimistic = "optimistic";
    v.pessimistic = "pessimistic";
    v.authoritative = "authoritative";
    v.submissive = "submissive";
    v.analytical = "logic-based reasoning";
    v.affective = "emotion-based reasoning";
    return v;
}

PromptConfig load_prompt_config(const std::string& path) {
    IniFile ini = IniFile::parse_file(path);
    PromptConfig cfg{default_template(), default_vocabulary()};
    cfg.tmpl.task = ini.get_or("template", "task", cfg.tmpl.task);
    cfg.tmpl.goal = ini.get_or("template", "goal", cfg.tmpl.goal);
    cfg.tmpl.rules = ini.get_or("template", "rules", cfg.tmpl.rules);
    cfg.tmpl.persona_pattern = ini.get_or("template", "persona_pattern", cfg.tmpl.persona_pattern);
    cfg.vocab.optimistic = ini.get_or("vocabulary", "optimistic", cfg.vocab.optimistic);
    cfg.vocab.pessimistic = ini.get_or("vocabulary", "pessimistic", cfg.vocab.pessimistic);
    cfg.vocab.authoritative = ini.get_or("vocabulary", "authoritative", cfg.vocab.authoritative);
    cfg.vocab.submissive = ini.get_or("vocabulary", "submissive", cfg.vocab.submissive);
    cfg.vocab.analytical = ini.get_or("vocabulary", "analytical", cfg.vocab.analytical);
    cfg.vocab.affective = ini.get_or("vocabulary", "affective", cfg.vocab.affective);
    cfg.tmpl.validate();
    cfg.vocab.validate();
    return cfg;
}

std::string prompt_config_text(const PromptConfig& cfg) {
    std::string out;
    out += "[template]\n";
    out += "task = " + cfg.tmpl.task + "\n";
    out += "goal = " + cfg.tmpl.goal + "\n";
    out += "rules = " + cfg.tmpl.rules + "\n";
    out += "persona_pattern = " + cfg.tmpl.persona_pattern + "\n\n";
    out += "[vocabulary]\n";
    out += "optimistic = " + cfg.vocab.optimistic + "\n";
    out += "pessimistic = " + cfg.vocab.pessimistic + "\n";
    out += "authoritative = " + cfg.vocab.authoritative + "\n";
    out += "submissive = " + cfg.vocab.submissive + "\n";
    out += "analytical = " + cfg.vocab.analytical + "\n";
    out += "affective = " + cfg.vocab.affective + "\n";
    return out;
}

RenderedPrompt render_prompt(const PersonaSpec& spec, const PromptTemplate& tmpl,
                             const SlotVocabulary& vocab) {
    if (spec.agent_name.empty()) throw InvalidArgument("agent_name must be non-empty");
    tmpl.validate();
    vocab.validate();
    RenderedPrompt out;
    out.persona_text = substitute(tmpl.persona_pattern, spec, vocab);
    out.text = tmpl.task + "\n" + tmpl.goal + "\n" + tmpl.rules + "\n" + out.persona_text;
    return out;
}

std::string build_prompt(const PersonaSpec& spec, const PromptTemplate& tmpl,
                         const SlotVocabulary& vocab) {
    return render_prompt(spec, tmpl, vocab).text;
}

}  // namespace pbench
