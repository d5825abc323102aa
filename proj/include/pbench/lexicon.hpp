#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "pbench/transcript.hpp"

namespace pbench {

using CategoryId = int;

/// Affine combination of base-category percentages with a clamp range.
struct CompositeDef {
    std::string name;
    double base = 0.0;
    std::vector<std::pair<std::string, double>> weights;  // category name -> weight
    double clamp_lo = 0.0;
    double clamp_hi = 100.0;
};

/// Category definitions plus literal and stem word entries. Immutable after
/// parse; safe to share across concurrent analyses.
struct Lexicon {
    std::map<CategoryId, std::string> categories;            // id -> name
    std::map<std::string, CategoryId> category_ids;          // name -> id
    std::map<std::string, std::vector<CategoryId>> literals; // word -> sorted ids
    std::map<std::string, std::vector<CategoryId>> stems;    // prefix -> sorted ids
    std::vector<std::size_t> stem_lengths;                   // distinct prefix lengths, ascending
    std::vector<CompositeDef> composites;

    bool is_category(const std::string& name) const { return category_ids.count(name) != 0; }
    bool is_composite(const std::string& name) const;
    /// A measure is either a base category or a composite.
    bool has_measure(const std::string& name) const;
    const CompositeDef& composite(const std::string& name) const;
    const std::string& category_name(CategoryId id) const;

    /// Base categories a single (lowercased) token belongs to, deduplicated
    /// across literal and stem matches.
    std::vector<CategoryId> match_token(const std::string& token) const;
};

/// Parse the lexicon file format:
///   %
///   <id><TAB><category-name>     header: one category per line
///   %
///   <word-or-stem><TAB><id>[,<id>...]
///   %                            optional third section
///   composite <name> = <base> [+|-]<w>*<category> ..., clamp <lo> <hi>
/// '#' lines are comments. Throws ParseError with the offending line number.
Lexicon parse_lexicon(const std::string& source);
Lexicon load_lexicon(const std::string& path);

/// Canonical serialization; parse(serialize(parse(s))) is structurally equal
/// to parse(s).
std::string serialize_lexicon(const Lexicon& lex);

/// Lowercased maximal runs of letters, digits, and internal apostrophes.
/// Hyphens and all other punctuation split tokens. UTF-8 input; Latin-1,
/// Latin Extended-A, Greek and Cyrillic letters are lowercased, U+2019 is
/// treated as an apostrophe.
std::vector<std::string> tokenize(std::string_view text);

/// Per-text category measures. Percentages cover every base category in the
/// lexicon; composites cover every composite definition.
struct CategoryProfile {
    std::size_t word_count = 0;
    bool empty = true;
    std::map<std::string, std::size_t> hits;       // base category -> token hits
    std::map<std::string, double> percentages;     // base category -> 100*hits/word_count
    std::map<std::string, double> composites;      // composite name -> clamped value

    /// Unified measure lookup (composite first, then percentage).
    /// Throws ConfigError for unknown names.
    double value(const std::string& measure) const;
};

/// Measure names analyzed per trait dimension. Group order and member order
/// are the report's row order.
struct MeasureSet {
    std::vector<std::pair<std::string, std::vector<std::string>>> groups;

    /// Deduplicated union in first-occurrence order.
    std::vector<std::string> all() const;
    /// Throws ConfigError when a name does not resolve in the lexicon.
    void validate(const Lexicon& lex) const;

    /// The full default set: 19 distinct measures across the three traits.
    static MeasureSet defaults();
    /// The restricted row set used by the coefficient table.
    static MeasureSet table1();
    /// "default", "table1", or a comma-separated measure list (one group).
    static MeasureSet named(const std::string& name);
};

/// Count category hits over the text. A token may count toward several
/// categories; within one category it counts at most once. Throws
/// ConfigError when a measure does not resolve in the lexicon.
CategoryProfile analyze(std::string_view text, const Lexicon& lex, const MeasureSet& measures);

/// Same, over every category and composite in the lexicon.
CategoryProfile analyze(std::string_view text, const Lexicon& lex);

/// clamp(base + sum(weight * percentage), lo, hi). Throws ConfigError when a
/// weighted category is absent from the profile.
double compute_composite(const CategoryProfile& profile, const CompositeDef& def);

enum class ObservationUnit { Response, Session };

ObservationUnit observation_unit_from_string(const std::string& s);
const char* observation_unit_name(ObservationUnit unit);

/// One analyzed unit: a single agent response or a pooled session.
struct Observation {
    std::string persona_id;
    std::string model_id;
    int session_index = 0;
    int unit_index = 0;  ///< turn number for Response unit, -1 for Session
    CategoryProfile profile;
};

/// Response unit: one observation per agent response. Session unit: one
/// observation per transcript with token-weighted pooled percentages
/// (pooled hits / pooled word count, not the mean of percentages).
std::vector<Observation> profile_transcripts(const std::vector<Transcript>& transcripts,
                                             const Lexicon& lex, const MeasureSet& measures,
                                             ObservationUnit unit);

/// Tokens matched by two or more measured base categories.
struct OverlapEntry {
    std::string token;
    std::vector<std::string> categories;
    std::size_t count = 0;  ///< occurrences of the token in the input
};

std::vector<OverlapEntry> overlap_report(std::string_view text, const Lexicon& lex,
                                         const MeasureSet& measures);
std::vector<OverlapEntry> overlap_report(const std::vector<Transcript>& transcripts,
                                         const Lexicon& lex, const MeasureSet& measures);

}  // namespace pbench
