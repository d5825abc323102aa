#include "pbench/lexicon.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "pbench/errors.hpp"
#include "pbench/util.hpp"

namespace pbench {

namespace {

// --- UTF-8 scanning ------------------------------------------------------

constexpr std::uint32_t kInvalidCp = 0xFFFD;

std::uint32_t decode_utf8(std::string_view s, std::size_t i, std::size_t* len) {
    unsigned char b0 = static_cast<unsigned char>(s[i]);
    *len = 1;
    if (b0 < 0x80) return b0;
    auto cont = [&](std::size_t k) {
        return i + k < s.size() &&
               (static_cast<unsigned char>(s[i + k]) & 0xC0) == 0x80;
    };
    if ((b0 & 0xE0) == 0xC0 && cont(1)) {
        *len = 2;
        return ((b0 & 0x1Fu) << 6) | (static_cast<unsigned char>(s[i + 1]) & 0x3Fu);
    }
    if ((b0 & 0xF0) == 0xE0 && cont(1) && cont(2)) {
        *len = 3;
        return ((b0 & 0x0Fu) << 12) | ((static_cast<unsigned char>(s[i + 1]) & 0x3Fu) << 6) |
               (static_cast<unsigned char>(s[i + 2]) & 0x3Fu);
    }
    if ((b0 & 0xF8) == 0xF0 && cont(1) && cont(2) && cont(3)) {
        *len = 4;
        return ((b0 & 0x07u) << 18) | ((static_cast<unsigned char>(s[i + 1]) & 0x3Fu) << 12) |
               ((static_cast<unsigned char>(s[i + 2]) & 0x3Fu) << 6) |
               (static_cast<unsigned char>(s[i + 3]) & 0x3Fu);
    }
    return kInvalidCp;
}

void append_utf8(std::string& out, std::uint32_t cp) {
    if (cp < 0x80) {
        out += static_cast<char>(cp);
    } else if (cp < 0x800) {
        out += static_cast<char>(0xC0 | (cp >> 6));
        out += static_cast<char>(0x80 | (cp & 0x3F));
    } else if (cp < 0x10000) {
        out += static_cast<char>(0xE0 | (cp >> 12));
        out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
        out += static_cast<char>(0x80 | (cp & 0x3F));
    } else {
        out += static_cast<char>(0xF0 | (cp >> 18));
        out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
        out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
        out += static_cast<char>(0x80 | (cp & 0x3F));
    }
}

std::uint32_t lower_cp(std::uint32_t cp) {
    if (cp >= 'A' && cp <= 'Z') return cp + 0x20;
    if (cp >= 0xC0 && cp <= 0xDE && cp != 0xD7) return cp + 0x20;  // Latin-1 supplement
    if (cp == 0x178) return 0xFF;                                  // Y with diaeresis
    // Latin Extended-A upper/lower pairs
    if ((cp >= 0x100 && cp <= 0x137) || (cp >= 0x14A && cp <= 0x177)) {
        return (cp % 2 == 0) ? cp + 1 : cp;
    }
    if (cp >= 0x139 && cp <= 0x148) return (cp % 2 == 1) ? cp + 1 : cp;
    if (cp == 0x179 || cp == 0x17B || cp == 0x17D) return cp + 1;
    // Greek
    if (cp >= 0x391 && cp <= 0x3AB && cp != 0x3A2) return cp + 0x20;
    // Cyrillic
    if (cp >= 0x410 && cp <= 0x42F) return cp + 0x20;
    if (cp >= 0x400 && cp <= 0x40F) return cp + 0x50;
    return cp;
}

bool is_word_cp(std::uint32_t cp) {
    if (cp < 0x80) {
        return (cp >= '0' && cp <= '9') || (cp >= 'a' && cp <= 'z') || (cp >= 'A' && cp <= 'Z');
    }
    if (cp <= 0xBF) return false;  // C1 controls and Latin-1 punctuation
    if (cp == 0xD7 || cp == 0xF7) return false;
    if (cp >= 0x2000 && cp <= 0x2BFF) return false;  // punctuation/symbol blocks
    if (cp >= 0x3000 && cp <= 0x303F) return false;  // CJK punctuation
    if (cp == kInvalidCp) return false;
    if (cp >= 0x1F000) return false;  // emoji and beyond
    return true;
}

bool is_apostrophe(std::uint32_t cp) { return cp == '\'' || cp == 0x2019; }

void flush_token(std::string& cur, std::vector<std::string>& out) {
    if (!cur.empty()) {
        out.push_back(cur);
        cur.clear();
    }
}

/// Per-codepoint lowercasing of a whole string (no token splitting).
std::string lower_utf8(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    std::size_t i = 0;
    while (i < s.size()) {
        std::size_t len = 0;
        std::uint32_t cp = decode_utf8(s, i, &len);
        append_utf8(out, lower_cp(cp));
        i += len;
    }
    return out;
}

std::vector<CategoryId> sorted_unique(std::vector<CategoryId> ids) {
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    return ids;
}

}  // namespace

std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> out;
    std::string cur;
    std::size_t i = 0;
    while (i < text.size()) {
        std::size_t len = 0;
        std::uint32_t cp = decode_utf8(text, i, &len);
        if (is_apostrophe(cp)) {
            // internal only: letter/digit on both sides
            std::size_t nlen = 0;
            std::uint32_t next =
                (i + len < text.size()) ? decode_utf8(text, i + len, &nlen) : 0;
            if (!cur.empty() && is_word_cp(next)) {
                cur += '\'';
            } else {
                flush_token(cur, out);
            }
        } else if (is_word_cp(cp)) {
            append_utf8(cur, lower_cp(cp));
        } else {
            flush_token(cur, out);
        }
        i += len;
    }
    flush_token(cur, out);
    return out;
}

// --- Lexicon lookups -----------------------------------------------------

bool Lexicon::is_composite(const std::string& name) const {
    return std::any_of(composites.begin(), composites.end(),
                       [&](const CompositeDef& d) { return d.name == name; });
}

bool Lexicon::has_measure(const std::string& name) const {
    return is_category(name) || is_composite(name);
}

const CompositeDef& Lexicon::composite(const std::string& name) const {
    for (const auto& d : composites) {
        if (d.name == name) return d;
    }
    throw ConfigError("unknown composite: " + name);
}

const std::string& Lexicon::category_name(CategoryId id) const {
    auto it = categories.find(id);
    if (it == categories.end())
        throw ConfigError("unknown category id: " + std::to_string(id));
    return it->second;
}

std::vector<CategoryId> Lexicon::match_token(const std::string& token) const {
    std::vector<CategoryId> ids;
    if (auto it = literals.find(token); it != literals.end()) {
        ids.insert(ids.end(), it->second.begin(), it->second.end());
    }
    for (std::size_t len : stem_lengths) {
        if (len > token.size()) break;
        if (auto it = stems.find(token.substr(0, len)); it != stems.end()) {
            ids.insert(ids.end(), it->second.begin(), it->second.end());
        }
    }
    return sorted_unique(std::move(ids));
}

// --- Parsing -------------------------------------------------------------

namespace {

bool valid_category_name(const std::string& name) {
    if (name.empty()) return false;
    for (char c : name) {
        bool ok = (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_';
        if (!ok) return false;
    }
    return true;
}

std::pair<std::string, std::string> split_fields(const std::string& line) {
    // first whitespace run separates word from the id list
    std::size_t ws = line.find_first_of(" \t");
    if (ws == std::string::npos) return {line, ""};
    std::size_t rest = line.find_first_not_of(" \t", ws);
    return {line.substr(0, ws), rest == std::string::npos ? "" : line.substr(rest)};
}

void parse_composite_line(Lexicon& lex, const std::string& line, int lineno) {
    std::string body = trim(line.substr(std::string("composite").size()));
    auto eq = body.find('=');
    if (eq == std::string::npos) throw ParseError("composite definition needs '='", lineno);
    CompositeDef def;
    def.name = trim(body.substr(0, eq));
    if (!valid_category_name(def.name))
        throw ParseError("bad composite name '" + def.name + "'", lineno);
    if (lex.is_category(def.name) || lex.is_composite(def.name))
        throw ParseError("composite name '" + def.name + "' already defined", lineno);

    std::string rhs = trim(body.substr(eq + 1));
    auto comma = rhs.rfind(',');
    if (comma == std::string::npos)
        throw ParseError("composite definition needs ', clamp <lo> <hi>'", lineno);
    std::string clamp_part = trim(rhs.substr(comma + 1));
    std::string expr = trim(rhs.substr(0, comma));

    // clamp <lo> <hi>
    {
        std::vector<std::string> toks;
        for (const auto& t : split(clamp_part, ' '))
            if (!trim(t).empty()) toks.push_back(trim(t));
        if (toks.size() != 3 || toks[0] != "clamp")
            throw ParseError("expected 'clamp <lo> <hi>'", lineno);
        try {
            def.clamp_lo = std::stod(toks[1]);
            def.clamp_hi = std::stod(toks[2]);
        } catch (const std::exception&) {
            throw ParseError("clamp bounds must be numbers", lineno);
        }
        if (!(def.clamp_lo < def.clamp_hi))
            throw ParseError("clamp range must satisfy lo < hi", lineno);
    }

    // <base> [+|-]<w>*<category> ...
    std::vector<std::string> toks;
    for (const auto& t : split(expr, ' '))
        if (!trim(t).empty()) toks.push_back(trim(t));
    if (toks.empty()) throw ParseError("composite needs a base value", lineno);
    try {
        def.base = std::stod(toks[0]);
    } catch (const std::exception&) {
        throw ParseError("composite base must be a number: " + toks[0], lineno);
    }
    for (std::size_t i = 1; i < toks.size(); ++i) {
        std::string term = toks[i];
        double sign = 1.0;
        if (term == "+" || term == "-") {
            sign = term == "-" ? -1.0 : 1.0;
            if (++i >= toks.size()) throw ParseError("dangling sign in composite", lineno);
            term = toks[i];
        } else if (term[0] == '+' || term[0] == '-') {
            sign = term[0] == '-' ? -1.0 : 1.0;
            term = term.substr(1);
        }
        auto starpos = term.find('*');
        if (starpos == std::string::npos)
            throw ParseError("composite term must be <weight>*<category>: " + term, lineno);
        double w = 0;
        try {
            w = std::stod(term.substr(0, starpos));
        } catch (const std::exception&) {
            throw ParseError("bad weight in composite term: " + term, lineno);
        }
        std::string cat = trim(term.substr(starpos + 1));
        if (!lex.is_category(cat))
            throw ParseError("composite references unknown category '" + cat + "'", lineno);
        for (const auto& [existing, _] : def.weights) {
            if (existing == cat)
                throw ParseError("category '" + cat + "' repeated in composite", lineno);
        }
        def.weights.emplace_back(cat, sign * w);
    }
    if (def.weights.empty())
        throw ParseError("composite needs at least one weighted category", lineno);
    lex.composites.push_back(std::move(def));
}

}  // namespace

Lexicon parse_lexicon(const std::string& source) {
    Lexicon lex;
    int section = 0;  // 0 = before header, 1 = categories, 2 = entries, 3 = composites
    int lineno = 0;
    int categories_seen = 0;
    for (const std::string& raw : split(source, '\n')) {
        ++lineno;
        std::string line = trim(raw);
        if (line.empty() || line[0] == '#') continue;
        if (line == "%") {
            if (section == 1 && categories_seen == 0)
                throw ParseError("empty category section", lineno);
            ++section;
            if (section > 3) throw ParseError("too many '%' delimiters", lineno);
            continue;
        }
        switch (section) {
            case 0:
                throw ParseError("expected '%' before the category header", lineno);
            case 1: {
                auto [id_str, name] = split_fields(line);
                name = trim(name);
                CategoryId id = 0;
                try {
                    id = std::stoi(id_str);
                } catch (const std::exception&) {
                    throw ParseError("category id must be an integer: " + id_str, lineno);
                }
                if (id <= 0) throw ParseError("category id must be positive", lineno);
                if (!valid_category_name(name))
                    throw ParseError("bad category name '" + name +
                                     "' (lowercase letters, digits, '_')", lineno);
                if (lex.categories.count(id))
                    throw ParseError("duplicate category id " + std::to_string(id), lineno);
                if (lex.category_ids.count(name))
                    throw ParseError("duplicate category name '" + name + "'", lineno);
                lex.categories[id] = name;
                lex.category_ids[name] = id;
                ++categories_seen;
                break;
            }
            case 2: {
                auto [word, ids_str] = split_fields(line);
                ids_str = trim(ids_str);
                if (ids_str.empty())
                    throw ParseError("entry '" + word + "' has no category ids", lineno);
                bool stem = !word.empty() && word.back() == '*';
                std::string text = stem ? word.substr(0, word.size() - 1) : word;
                if (text.empty()) throw ParseError("stem entry has empty prefix", lineno);
                text = lower_utf8(text);
                auto toks = tokenize(text);
                if (toks.size() != 1 || toks[0] != text)
                    throw ParseError("entry '" + word + "' is not a single token", lineno);
                std::vector<CategoryId> ids;
                for (const auto& part : split(ids_str, ',')) {
                    std::string p = trim(part);
                    CategoryId id = 0;
                    try {
                        id = std::stoi(p);
                    } catch (const std::exception&) {
                        throw ParseError("bad category id '" + p + "' for entry '" + word + "'",
                                         lineno);
                    }
                    if (!lex.categories.count(id))
                        throw ParseError("entry '" + word + "' references undeclared category id " +
                                         std::to_string(id), lineno);
                    ids.push_back(id);
                }
                if (stem ? lex.literals.count(text) != 0 : lex.stems.count(text) != 0)
                    throw ParseError("'" + text + "' declared both as literal and as stem",
                                     lineno);
                auto& slot = stem ? lex.stems[text] : lex.literals[text];
                slot.insert(slot.end(), ids.begin(), ids.end());
                slot = sorted_unique(std::move(slot));
                break;
            }
            case 3: {
                if (line.rfind("composite", 0) != 0)
                    throw ParseError("expected 'composite <name> = ...'", lineno);
                parse_composite_line(lex, line, lineno);
                break;
            }
            default:
                throw ParseError("unexpected content", lineno);
        }
    }
    if (section < 2) throw ParseError("lexicon is missing its entry section", lineno);
    std::set<std::size_t> lengths;
    for (const auto& [prefix, _] : lex.stems) lengths.insert(prefix.size());
    lex.stem_lengths.assign(lengths.begin(), lengths.end());
    return lex;
}

Lexicon load_lexicon(const std::string& path) {
    try {
        return parse_lexicon(read_file(path));
    } catch (const ParseError& e) {
        throw ParseError(path + ": " + e.what());
    }
}

std::string serialize_lexicon(const Lexicon& lex) {
    std::string out = "%\n";
    for (const auto& [id, name] : lex.categories)
        out += std::to_string(id) + "\t" + name + "\n";
    out += "%\n";
    // literals and stems interleaved in lexicographic order of spelled form
    std::vector<std::pair<std::string, const std::vector<CategoryId>*>> spelled;
    for (const auto& [word, ids] : lex.literals) spelled.emplace_back(word, &ids);
    for (const auto& [prefix, ids] : lex.stems) spelled.emplace_back(prefix + "*", &ids);
    std::sort(spelled.begin(), spelled.end());
    for (const auto& [word, ids] : spelled) {
        out += word + "\t";
        for (std::size_t i = 0; i < ids->size(); ++i) {
            if (i) out += ',';
            out += std::to_string((*ids)[i]);
        }
        out += "\n";
    }
    if (!lex.composites.empty()) {
        out += "%\n";
        for (const auto& def : lex.composites) {
            out += "composite " + def.name + " = " + fmt_sig(def.base);
            for (const auto& [cat, w] : def.weights) {
                out += w < 0 ? " -" : " +";
                out += fmt_sig(std::fabs(w)) + "*" + cat;
            }
            out += ", clamp " + fmt_sig(def.clamp_lo) + " " + fmt_sig(def.clamp_hi) + "\n";
        }
    }
    return out;
}

// --- Measures ------------------------------------------------------------

std::vector<std::string> MeasureSet::all() const {
    std::vector<std::string> out;
    for (const auto& [group, names] : groups) {
        for (const auto& name : names) {
            if (std::find(out.begin(), out.end(), name) == out.end()) out.push_back(name);
        }
    }
    return out;
}

void MeasureSet::validate(const Lexicon& lex) const {
    for (const auto& [group, names] : groups) {
        if (names.empty()) throw ConfigError("measure group '" + group + "' is empty");
        for (const auto& name : names) {
            if (!lex.has_measure(name))
                throw ConfigError("measure '" + name + "' does not resolve in the lexicon");
        }
    }
}

MeasureSet MeasureSet::defaults() {
    return MeasureSet{{
        {"Authority", {"clout", "authentic", "ppron", "certitude", "allnone", "assent"}},
        {"Attitude",
         {"tone", "affect", "tone_pos", "tone_neg", "emo_anx", "emo_pos", "tentat",
          "focusfuture"}},
        {"Reasoning",
         {"cognition", "analytic", "authentic", "quantity", "number", "emotion", "affect"}},
    }};
}

MeasureSet MeasureSet::table1() {
    return MeasureSet{{
        {"Authority", {"clout", "authentic", "ppron", "certitude", "allnone", "assent"}},
        {"Attitude", {"tone", "affect", "tone_pos", "tone_neg", "emo_anx"}},
        {"Reasoning",
         {"cognition", "analytic", "authentic", "quantity", "number", "emotion", "affect"}},
    }};
}

MeasureSet MeasureSet::named(const std::string& name) {
    if (name.empty() || name == "default") return defaults();
    if (name == "table1") return table1();
    MeasureSet set;
    std::vector<std::string> names;
    for (const auto& part : split(name, ',')) {
        std::string m = trim(part);
        if (!m.empty()) names.push_back(m);
    }
    if (names.empty()) throw ConfigError("empty measure list: '" + name + "'");
    set.groups.emplace_back("Measures", std::move(names));
    return set;
}

// --- Analysis ------------------------------------------------------------

double CategoryProfile::value(const std::string& measure) const {
    if (auto it = composites.find(measure); it != composites.end()) return it->second;
    if (auto it = percentages.find(measure); it != percentages.end()) return it->second;
    throw ConfigError("measure '" + measure + "' not present in profile");
}

double compute_composite(const CategoryProfile& profile, const CompositeDef& def) {
    double v = def.base;
    for (const auto& [cat, w] : def.weights) {
        auto it = profile.percentages.find(cat);
        if (it == profile.percentages.end())
            throw ConfigError("composite '" + def.name + "' references category '" + cat +
                              "' absent from profile");
        v += w * it->second;
    }
    return std::clamp(v, def.clamp_lo, def.clamp_hi);
}

namespace {

CategoryProfile finish_profile(const Lexicon& lex, std::size_t word_count,
                               const std::map<CategoryId, std::size_t>& hit_counts) {
    CategoryProfile p;
    p.word_count = word_count;
    p.empty = word_count == 0;
    for (const auto& [id, name] : lex.categories) {
        auto it = hit_counts.find(id);
        std::size_t h = it == hit_counts.end() ? 0 : it->second;
        p.hits[name] = h;
        p.percentages[name] =
            word_count == 0 ? 0.0 : 100.0 * static_cast<double>(h) / static_cast<double>(word_count);
    }
    for (const auto& def : lex.composites) p.composites[def.name] = compute_composite(p, def);
    return p;
}

CategoryProfile analyze_impl(std::string_view text, const Lexicon& lex) {
    auto tokens = tokenize(text);
    std::map<CategoryId, std::size_t> hit_counts;
    for (const auto& tok : tokens) {
        for (CategoryId id : lex.match_token(tok)) ++hit_counts[id];
    }
    return finish_profile(lex, tokens.size(), hit_counts);
}

}  // namespace

CategoryProfile analyze(std::string_view text, const Lexicon& lex, const MeasureSet& measures) {
    measures.validate(lex);
    return analyze_impl(text, lex);
}

CategoryProfile analyze(std::string_view text, const Lexicon& lex) {
    return analyze_impl(text, lex);
}

std::vector<Observation> profile_transcripts(const std::vector<Transcript>& transcripts,
                                             const Lexicon& lex, const MeasureSet& measures,
                                             ObservationUnit unit) {
    if (transcripts.empty()) throw InvalidArgument("transcripts must be non-empty");
    measures.validate(lex);
    std::vector<Observation> out;
    for (const auto& t : transcripts) {
        if (unit == ObservationUnit::Response) {
            for (std::size_t k = 0; k < t.exchanges.size(); ++k) {
                Observation obs;
                obs.persona_id = t.persona_id;
                obs.model_id = t.model_id;
                obs.session_index = t.session_index;
                obs.unit_index = static_cast<int>(k);
                obs.profile = analyze_impl(t.exchanges[k].agent, lex);
                out.push_back(std::move(obs));
            }
        } else {
            // token-weighted pooling: sum hits and word counts, then divide
            std::size_t word_count = 0;
            std::map<CategoryId, std::size_t> hit_counts;
            for (const auto& e : t.exchanges) {
                auto tokens = tokenize(e.agent);
                word_count += tokens.size();
                for (const auto& tok : tokens) {
                    for (CategoryId id : lex.match_token(tok)) ++hit_counts[id];
                }
            }
            Observation obs;
            obs.persona_id = t.persona_id;
            obs.model_id = t.model_id;
            obs.session_index = t.session_index;
            obs.unit_index = -1;
            obs.profile = finish_profile(lex, word_count, hit_counts);
            out.push_back(std::move(obs));
        }
    }
    return out;
}

ObservationUnit observation_unit_from_string(const std::string& s) {
    if (s == "response") return ObservationUnit::Response;
    if (s == "session") return ObservationUnit::Session;
    throw ConfigError("unknown observation unit '" + s + "' (expected response|session)");
}

const char* observation_unit_name(ObservationUnit unit) {
    return unit == ObservationUnit::Response ? "response" : "session";
}

// --- Overlap diagnostics -------------------------------------------------

namespace {

void accumulate_overlaps(std::string_view text, const Lexicon& lex,
                         const std::set<std::string>& measured,
                         std::map<std::string, OverlapEntry>& agg) {
    for (const auto& tok : tokenize(text)) {
        std::vector<std::string> cats;
        for (CategoryId id : lex.match_token(tok)) {
            const std::string& name = lex.category_name(id);
            if (measured.count(name)) cats.push_back(name);
        }
        if (cats.size() < 2) continue;
        auto& entry = agg[tok];
        entry.token = tok;
        entry.categories = cats;
        ++entry.count;
    }
}

std::vector<OverlapEntry> sorted_overlaps(std::map<std::string, OverlapEntry>& agg) {
    std::vector<OverlapEntry> out;
    out.reserve(agg.size());
    for (auto& [_, entry] : agg) out.push_back(std::move(entry));
    std::sort(out.begin(), out.end(), [](const OverlapEntry& a, const OverlapEntry& b) {
        if (a.count != b.count) return a.count > b.count;
        return a.token < b.token;
    });
    return out;
}

std::set<std::string> measured_base_categories(const Lexicon& lex, const MeasureSet& measures) {
    std::set<std::string> measured;
    for (const auto& name : measures.all()) {
        if (lex.is_category(name)) measured.insert(name);
    }
    return measured;
}

}  // namespace

std::vector<OverlapEntry> overlap_report(std::string_view text, const Lexicon& lex,
                                         const MeasureSet& measures) {
    measures.validate(lex);
    auto measured = measured_base_categories(lex, measures);
    std::map<std::string, OverlapEntry> agg;
    accumulate_overlaps(text, lex, measured, agg);
    return sorted_overlaps(agg);
}

std::vector<OverlapEntry> overlap_report(const std::vector<Transcript>& transcripts,
                                         const Lexicon& lex, const MeasureSet& measures) {
    measures.validate(lex);
    auto measured = measured_base_categories(lex, measures);
    std::map<std::string, OverlapEntry> agg;
    for (const auto& t : transcripts) {
        for (const auto& e : t.exchanges) accumulate_overlaps(e.agent, lex, measured, agg);
    }
    return sorted_overlaps(agg);
}

}  // namespace pbench
