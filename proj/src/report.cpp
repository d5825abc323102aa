#include "pbench/report.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <set>

#include "pbench/errors.hpp"
#include "pbench/util.hpp"

namespace pbench {

std::string star(double p) {
    if (p < 0.01) return "**";
    if (p < 0.05) return "*";
    return "";
}

ReportLayout ReportLayout::from_measures(const MeasureSet& set) {
    ReportLayout layout;
    for (const auto& [group, measures] : set.groups) {
        for (const auto& m : measures) layout.rows.push_back({group, m});
    }
    if (layout.rows.empty()) throw ReportError("layout has no rows");
    return layout;
}

const std::vector<std::size_t>& ReportLayout::relevant_terms(const std::string& group) {
    // terms whose factors include the trait the group probes
    static const std::vector<std::size_t> kAttitude{1, 4, 5, 7};
    static const std::vector<std::size_t> kAuthority{2, 4, 6, 7};
    static const std::vector<std::size_t> kReasoning{3, 5, 6, 7};
    static const std::vector<std::size_t> kAll{1, 2, 3, 4, 5, 6, 7};
    if (group == "Attitude") return kAttitude;
    if (group == "Authority") return kAuthority;
    if (group == "Reasoning") return kReasoning;
    return kAll;
}

ReportFormat report_format_from_string(const std::string& s) {
    if (s == "md" || s == "markdown") return ReportFormat::Markdown;
    if (s == "txt" || s == "text") return ReportFormat::Text;
    if (s == "csv") return ReportFormat::Csv;
    throw ConfigError("unknown report format '" + s + "' (expected md|txt|csv)");
}

const char* report_format_extension(ReportFormat f) {
    switch (f) {
        case ReportFormat::Markdown: return "md";
        case ReportFormat::Text: return "txt";
        case ReportFormat::Csv: return "csv";
    }
    throw InvalidArgument("bad report format");
}

namespace {

std::string fixed3(double v) {
    double r = std::round(v * 1000.0) / 1000.0;
    if (r == 0.0) r = 0.0;  // strip negative zero
    return fmt_fixed(r, 3);
}

struct Grid {
    std::vector<std::string> models;
    std::vector<std::string> header;           // per column
    std::vector<std::vector<std::string>> cells;  // row-major, aligned with layout rows
    std::vector<std::string> footnotes;
};

Grid build_grid(const std::vector<RegressionFit>& fits, const ReportLayout& layout,
                const RenderOptions& options, bool ascii_headers) {
    if (layout.rows.empty()) throw ReportError("layout has no rows");
    Grid grid;

    std::map<std::pair<std::string, std::string>, const RegressionFit*> index;
    std::set<std::string> model_set;
    for (const auto& fit : fits) {
        auto key = std::make_pair(fit.model_id, fit.measure);
        if (!index.emplace(key, &fit).second)
            throw ReportError("duplicate fit for model '" + fit.model_id + "', measure '" +
                              fit.measure + "'");
        model_set.insert(fit.model_id);
    }
    grid.models.assign(model_set.begin(), model_set.end());
    if (grid.models.empty()) throw ReportError("no fits to report");

    grid.header = {"Group", "Measure"};
    for (const auto& model : grid.models) {
        grid.header.push_back(model + (ascii_headers ? " r2" : " R²"));
        for (std::size_t j = 1; j < kNumTerms; ++j) {
            grid.header.push_back(model + (ascii_headers ? " b" : " β") + std::to_string(j));
        }
    }

    for (const auto& row : layout.rows) {
        std::vector<std::string> cells{row.group, row.measure};
        const auto& relevant = ReportLayout::relevant_terms(row.group);
        for (const auto& model : grid.models) {
            auto it = index.find(std::make_pair(model, row.measure));
            if (it == index.end())
                throw ReportError("report needs a fit for model '" + model + "', measure '" +
                                  row.measure + "'");
            const RegressionFit& fit = *it->second;
            if (fit.skipped()) {
                for (std::size_t j = 0; j < kNumTerms; ++j) cells.emplace_back();
                grid.footnotes.push_back("skipped " + model + "/" + row.measure + ": " +
                                         fit.skipped_reason);
                continue;
            }
            cells.push_back(fixed3(fit.ols.r2));
            for (std::size_t j = 1; j < kNumTerms; ++j) {
                bool shown = std::find(relevant.begin(), relevant.end(), j) != relevant.end();
                if (!shown) {
                    cells.emplace_back();
                } else if (fit.ols.p[j] < options.alpha) {
                    cells.push_back(star(fit.ols.p[j]) + fixed3(fit.ols.beta[j]));
                } else {
                    cells.push_back("-");
                }
            }
        }
        grid.cells.push_back(std::move(cells));
    }
    return grid;
}

std::string render_markdown(const Grid& grid) {
    std::string out;
    auto emit_row = [&out](const std::vector<std::string>& cells) {
        out += '|';
        for (const auto& c : cells) {
            out += ' ';
            out += c.empty() ? " " : c;
            out += " |";
        }
        out += '\n';
    };
    emit_row(grid.header);
    out += '|';
    for (std::size_t i = 0; i < grid.header.size(); ++i) out += " --- |";
    out += '\n';
    for (const auto& row : grid.cells) emit_row(row);
    out += "\n`*` p < 0.05; `**` p < 0.01. \"-\" marks a relevant but non-significant "
           "coefficient; blank cells do not involve the row's trait.\n";
    for (const auto& note : grid.footnotes) out += "\n" + note + "\n";
    return out;
}

std::string render_text(const Grid& grid) {
    std::vector<std::size_t> widths(grid.header.size(), 0);
    auto widen = [&widths](const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i)
            widths[i] = std::max(widths[i], cells[i].size());
    };
    widen(grid.header);
    for (const auto& row : grid.cells) widen(row);

    std::string out;
    auto emit_row = [&](const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) out += "  ";
            out += cells[i];
            out.append(widths[i] - cells[i].size(), ' ');
        }
        while (!out.empty() && out.back() == ' ') out.pop_back();
        out += '\n';
    };
    emit_row(grid.header);
    std::size_t total = 0;
    for (std::size_t w : widths) total += w;
    out.append(total + 2 * (widths.size() - 1), '-');
    out += '\n';
    for (const auto& row : grid.cells) emit_row(row);
    out += "\n* p < 0.05; ** p < 0.01. \"-\" marks a relevant but non-significant "
           "coefficient; blank cells do not involve the row's trait.\n";
    for (const auto& note : grid.footnotes) out += note + "\n";
    return out;
}

std::string render_csv(const Grid& grid) {
    std::string out;
    auto emit_row = [&out](const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) out += ',';
            out += csv_escape(cells[i]);
        }
        out += '\n';
    };
    std::vector<std::string> header = grid.header;
    for (auto& h : header) {
        std::replace(h.begin(), h.end(), ' ', '_');
        for (char& c : h) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    }
    emit_row(header);
    for (const auto& row : grid.cells) emit_row(row);
    return out;
}

}  // namespace

std::string render_table(const std::vector<RegressionFit>& fits, const ReportLayout& layout,
                         const RenderOptions& options) {
    bool ascii = options.format == ReportFormat::Csv;
    Grid grid = build_grid(fits, layout, options, ascii);
    switch (options.format) {
        case ReportFormat::Markdown: return render_markdown(grid);
        case ReportFormat::Text: return render_text(grid);
        case ReportFormat::Csv: return render_csv(grid);
    }
    throw InvalidArgument("bad report format");
}

std::map<std::string, std::size_t> distinguishing_count(const std::vector<RegressionFit>& fits,
                                                        const ReportLayout& layout,
                                                        double alpha) {
    RenderOptions options;
    options.alpha = alpha;
    Grid grid = build_grid(fits, layout, options, true);  // validates coverage

    std::map<std::pair<std::string, std::string>, const RegressionFit*> index;
    for (const auto& fit : fits) index[{fit.model_id, fit.measure}] = &fit;

    std::map<std::string, std::size_t> counts;
    for (const auto& model : grid.models) {
        std::size_t n = 0;
        for (const auto& row : layout.rows) {
            const RegressionFit& fit = *index.at({model, row.measure});
            if (fit.skipped()) continue;
            for (std::size_t j : ReportLayout::relevant_terms(row.group)) {
                if (fit.ols.p[j] < alpha) {
                    ++n;
                    break;
                }
            }
        }
        counts[model] = n;
    }
    return counts;
}

}  // namespace pbench
