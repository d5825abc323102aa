#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "pbench/conjoint.hpp"
#include "pbench/lexicon.hpp"

namespace pbench {

/// "**" below 0.01, "*" below 0.05, "" otherwise. Boundaries are strict:
/// p == 0.05 earns nothing, p == 0.01 earns a single star.
std::string star(double p);

struct ReportRow {
    std::string group;
    std::string measure;
};

/// Row order of the rendered table; one row per (group, measure) pair, so a
/// measure listed under two groups appears twice.
struct ReportLayout {
    std::vector<ReportRow> rows;

    static ReportLayout from_measures(const MeasureSet& set);

    /// Coefficient columns (1..7) that involve the trait a group probes.
    /// Unknown group names get every column.
    static const std::vector<std::size_t>& relevant_terms(const std::string& group);
};

enum class ReportFormat { Markdown, Text, Csv };

ReportFormat report_format_from_string(const std::string& s);

/// Canonical artifact file extension ("md", "txt", "csv").
const char* report_format_extension(ReportFormat f);

struct RenderOptions {
    ReportFormat format = ReportFormat::Markdown;
    double alpha = 0.05;  // coefficients at or above this show as "-"
};

/// Renders one column block per model (R2 plus the seven effect
/// coefficients). Cell rules: off-trait columns stay blank; relevant but
/// non-significant coefficients show "-"; significant ones show
/// significance stars and the value to three decimals. R2 always shows to
/// three decimals. Skipped fits render blank and are footnoted. Throws
/// ReportError when a (model, measure) pair required by the layout has no
/// fit, or when fits collide.
std::string render_table(const std::vector<RegressionFit>& fits, const ReportLayout& layout,
                         const RenderOptions& options = {});

/// Per model: how many layout rows have at least one significant
/// trait-relevant coefficient (strict p < alpha).
std::map<std::string, std::size_t> distinguishing_count(const std::vector<RegressionFit>& fits,
                                                        const ReportLayout& layout,
                                                        double alpha = 0.05);

}  // namespace pbench
