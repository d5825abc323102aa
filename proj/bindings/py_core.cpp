// Python surface for the measurement core. Thin by design: conversions and
// docstrings only, no logic of its own.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "pbench/conjoint.hpp"
#include "pbench/errors.hpp"
#include "pbench/lexicon.hpp"
#include "pbench/persona.hpp"
#include "pbench/pipeline.hpp"
#include "pbench/prompt.hpp"
#include "pbench/report.hpp"
#include "pbench/util.hpp"

namespace py = pybind11;
using namespace pbench;

namespace {

py::dict persona_dict(const PersonaSpec& p) {
    py::dict d;
    d["id"] = p.id();
    d["agent_name"] = p.agent_name;
    d["attitude"] = level_name(p.attitude);
    d["authority"] = level_name(p.authority);
    d["reasoning"] = level_name(p.reasoning);
    return d;
}

py::dict profile_dict(const CategoryProfile& profile) {
    py::dict d;
    d["word_count"] = profile.word_count;
    d["empty"] = profile.empty;
    d["percentages"] = profile.percentages;
    d["composites"] = profile.composites;
    return d;
}

py::dict fit_dict(const OlsResult& ols) {
    py::dict d;
    d["n"] = ols.n;
    d["df"] = ols.df;
    d["r2"] = ols.r2;
    py::list terms;
    for (std::size_t j = 0; j < kNumTerms; ++j) {
        py::dict t;
        t["term"] = term_name(j);
        t["beta"] = ols.beta[j];
        t["se"] = ols.se[j];
        t["t"] = ols.t[j];
        t["p"] = ols.p[j];
        terms.append(t);
    }
    d["terms"] = terms;
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Persona-controlled agent measurement core";

    py::register_exception<Error>(m, "Error");

    // --- personas and prompts --------------------------------------------

    m.def(
        "personas",
        [](const std::string& agent_name) {
            py::list out;
            for (const auto& p : enumerate_personas(agent_name)) out.append(persona_dict(p));
            return out;
        },
        py::arg("agent_name") = "Alex",
        "All eight trait archetypes in canonical order.");

    m.def(
        "render_prompt",
        [](const std::string& persona_id, const std::string& agent_name,
           const std::string& config_path) {
            PromptConfig cfg;
            if (config_path.empty()) {
                cfg.tmpl = default_template();
                cfg.vocab = default_vocabulary();
            } else {
                cfg = load_prompt_config(config_path);
            }
            RenderedPrompt r =
                render_prompt(persona_from_id(persona_id, agent_name), cfg.tmpl, cfg.vocab);
            py::dict d;
            d["text"] = r.text;
            d["persona_text"] = r.persona_text;
            return d;
        },
        py::arg("persona_id"), py::arg("agent_name") = "Alex", py::arg("config_path") = "",
        "System prompt for one persona; persona_text is the re-injection payload.");

    // --- linguistic measurement ------------------------------------------

    m.def(
        "tokenize", [](const std::string& text) { return tokenize(text); }, py::arg("text"),
        "Lowercased word tokens (hyphens split, internal apostrophes kept).");

    py::class_<Lexicon>(m, "Lexicon")
        .def_property_readonly("categories",
                               [](const Lexicon& lex) {
                                   std::vector<std::string> names;
                                   for (const auto& [id, name] : lex.categories)
                                       names.push_back(name);
                                   return names;
                               })
        .def_property_readonly("composites",
                               [](const Lexicon& lex) {
                                   std::vector<std::string> names;
                                   for (const auto& c : lex.composites) names.push_back(c.name);
                                   return names;
                               })
        .def("__repr__", [](const Lexicon& lex) {
            return "<Lexicon: " + std::to_string(lex.categories.size()) + " categories, " +
                   std::to_string(lex.composites.size()) + " composites>";
        });

    m.def(
        "parse_lexicon", [](const std::string& text) { return parse_lexicon(text); },
        py::arg("text"), "Parse dictionary source text.");
    m.def(
        "load_lexicon", [](const std::string& path) { return load_lexicon(path); },
        py::arg("path"), "Load a dictionary file.");

    m.def(
        "analyze",
        [](const std::string& text, const Lexicon& lex) {
            return profile_dict(analyze(text, lex));
        },
        py::arg("text"), py::arg("lexicon"),
        "Category percentages and composites for one text.");

    // --- effect estimation -----------------------------------------------

    m.def(
        "fit_effects",
        [](const std::vector<std::string>& persona_ids, const std::vector<double>& values) {
            std::vector<DesignRow> rows;
            rows.reserve(persona_ids.size());
            for (const auto& id : persona_ids)
                rows.push_back(effect_code(persona_from_id(id, "x")));
            return fit_dict(fit_ols(rows, values));
        },
        py::arg("persona_ids"), py::arg("values"),
        "Effect-coded least squares of one measure over the 2x2x2 design.");

    m.def("t_sf", &t_sf, py::arg("t"), py::arg("df"),
          "Student-t survival function P(T > t).");
    m.def("two_sided_p", &two_sided_p, py::arg("t"), py::arg("df"),
          "Two-sided p-value 2*P(T > |t|).");
    m.def("star", &star, py::arg("p"), "Significance marker: ** below 0.01, * below 0.05.");
    m.def("derive_seed", &derive_seed, py::arg("campaign_seed"), py::arg("persona_id"),
          py::arg("model_id"), py::arg("session_index"),
          "Per-session seed; identical inputs give identical sessions.");

    // --- pipeline ---------------------------------------------------------

    m.def(
        "run_pipeline",
        [](const std::string& config_path, const std::string& from_stage) {
            PipelineConfig cfg = PipelineConfig::load(config_path);
            run_pipeline(cfg, stage_from_string(from_stage));
            PipelineArtifacts art = cfg.artifacts();
            py::dict d;
            d["transcripts"] = art.transcripts();
            d["observations"] = art.observations();
            d["fits"] = art.fits();
            py::list reports;
            for (const auto& f : cfg.formats)
                reports.append(art.report(report_format_extension(report_format_from_string(f))));
            d["reports"] = reports;
            return d;
        },
        py::arg("config_path"), py::arg("from_stage") = "run",
        "Run the campaign pipeline from a config file; returns artifact paths.");
}
