#include <json.hpp>

#include "pbench/backends.hpp"
#include "pbench/util.hpp"

namespace pbench {

namespace {

using nlohmann::json;

void require_single_token(const std::string& word, const std::string& origin,
                          const std::string& where) {
    auto toks = tokenize(word);
    if (toks.size() != 1)
        throw ConfigError(origin + ": " + where + " word '" + word +
                          "' does not tokenize to a single word");
}

}  // namespace

MockFixture MockFixture::from_json(const std::string& text, const std::string& origin) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(origin + ": " + e.what());
    }
    if (!root.is_object()) throw ParseError(origin + ": fixture must be a JSON object");

    MockFixture fx;
    try {
        for (const auto& w : root.at("filler")) fx.filler.push_back(w.get<std::string>());
        if (root.contains("response_length"))
            fx.response_length = root.at("response_length").get<int>();
        if (root.contains("category_words")) {
            for (const auto& [cat, words] : root.at("category_words").items()) {
                auto& list = fx.category_words[cat];
                for (const auto& w : words) list.push_back(w.get<std::string>());
                if (list.empty())
                    throw ConfigError(origin + ": category '" + cat + "' has no words");
            }
        }
        for (const auto& p : root.at("profiles")) {
            MockProfile profile;
            profile.match = p.at("match").get<std::string>();
            if (p.contains("rates")) {
                for (const auto& [cat, rate] : p.at("rates").items())
                    profile.rates[cat] = rate.get<double>();
            }
            fx.profiles.push_back(std::move(profile));
        }
    } catch (const json::exception& e) {
        throw ParseError(origin + ": " + e.what());
    }

    if (fx.filler.empty()) throw ConfigError(origin + ": fixture needs filler words");
    if (fx.response_length < 1)
        throw ConfigError(origin + ": response_length must be >= 1");
    if (fx.profiles.empty()) throw ConfigError(origin + ": fixture needs profiles");
    for (const auto& w : fx.filler) require_single_token(w, origin, "filler");
    for (const auto& [cat, words] : fx.category_words) {
        for (const auto& w : words) require_single_token(w, origin, "'" + cat + "'");
    }
    for (const auto& profile : fx.profiles) {
        if (profile.match.empty())
            throw ConfigError(origin + ": profile with empty match pattern");
        for (const auto& [cat, rate] : profile.rates) {
            if (!fx.category_words.count(cat))
                throw ConfigError(origin + ": profile '" + profile.match +
                                  "' rates category '" + cat + "' with no word list");
            if (rate < 0.0 || rate > 1.0)
                throw ConfigError(origin + ": rate for '" + cat + "' outside [0, 1]");
        }
    }
    return fx;
}

MockFixture MockFixture::load(const std::string& path) {
    return from_json(read_file(path), path);
}

std::map<std::string, double> MockFixture::rates_for(const std::string& persona_id) const {
    std::map<std::string, double> rates;
    bool matched = false;
    for (const auto& profile : profiles) {
        if (!glob_match(profile.match, persona_id)) continue;
        matched = true;
        for (const auto& [cat, rate] : profile.rates) rates[cat] = rate;
    }
    if (!matched)
        throw ConfigError("no fixture profile matches persona '" + persona_id + "'");
    double total = 0.0;
    for (const auto& [cat, rate] : rates) total += rate;
    if (total > 1.0)
        throw ConfigError("merged rates for persona '" + persona_id + "' sum to " +
                          fmt_sig(total) + " (> 1)");
    return rates;
}

std::string mock_respond(const MockFixture& fixture, const std::string& persona_id,
                         std::uint64_t seed) {
    auto rates = fixture.rates_for(persona_id);
    // std::map iteration gives a fixed category order
    std::vector<std::pair<double, const std::vector<std::string>*>> table;
    double cum = 0.0;
    for (const auto& [cat, rate] : rates) {
        cum += rate;
        table.emplace_back(cum, &fixture.category_words.at(cat));
    }

    Rng rng(seed);
    std::string out;
    for (int i = 0; i < fixture.response_length; ++i) {
        double u = rng.uniform();
        const std::vector<std::string>* source = &fixture.filler;
        for (const auto& [threshold, words] : table) {
            if (u < threshold) {
                source = words;
                break;
            }
        }
        const std::string& word = (*source)[rng.below(source->size())];
        if (!out.empty()) out += ' ';
        out += word;
    }
    if (!out.empty() && out[0] >= 'a' && out[0] <= 'z') out[0] -= 0x20;
    out += '.';
    return out;
}

std::string MockBackend::complete(const std::vector<ChatMessage>& messages, std::uint64_t seed) {
    const ChatMessage* system = nullptr;
    for (const auto& m : messages) {
        if (m.role == ChatMessage::Role::System) {
            system = &m;
            break;
        }
    }
    if (system == nullptr)
        throw ConfigError("mock backend got a request without a system message");
    auto start = system->content.find("[persona:");
    if (start == std::string::npos)
        throw ConfigError("mock backend needs a [persona:<id>] tag in the system message");
    start += std::string("[persona:").size();
    auto end = system->content.find(']', start);
    if (end == std::string::npos)
        throw ConfigError("unterminated [persona:<id>] tag in the system message");
    std::string persona_id = system->content.substr(start, end - start);
    return mock_respond(fixture_, persona_id, seed);
}

}  // namespace pbench
