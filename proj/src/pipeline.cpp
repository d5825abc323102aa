#include "pbench/pipeline.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <ostream>
#include <tuple>

#include "pbench/report.hpp"
#include "pbench/util.hpp"

namespace pbench {

namespace fs = std::filesystem;

Stage stage_from_string(const std::string& s) {
    if (s == "run") return Stage::Run;
    if (s == "analyze") return Stage::Analyze;
    if (s == "fit") return Stage::Fit;
    if (s == "report") return Stage::Report;
    throw ConfigError("unknown stage '" + s + "' (expected run|analyze|fit|report)");
}

const char* stage_name(Stage stage) {
    switch (stage) {
        case Stage::Run: return "run";
        case Stage::Analyze: return "analyze";
        case Stage::Fit: return "fit";
        case Stage::Report: return "report";
    }
    throw InvalidArgument("bad stage");
}

namespace {

std::string resolve_path(const std::string& base, const std::string& p) {
    if (p.empty() || p.front() == '/' || base.empty()) return p;
    return base + "/" + p;
}

std::uint64_t parse_u64(const std::string& s, const std::string& what) {
    try {
        std::size_t pos = 0;
        unsigned long long v = std::stoull(trim(s), &pos);
        if (pos != trim(s).size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ConfigError(what + " must be a non-negative integer, got '" + s + "'");
    }
}

void require_artifact(const std::string& path, const char* producer) {
    if (!fs::exists(path))
        throw ConfigError("missing artifact " + path + "; run the '" + std::string(producer) +
                          "' stage first");
}

/// std::stod refuses subnormal input (strtod's underflow ERANGE becomes
/// out_of_range), but p-values floored at the smallest positive double are
/// legitimate artifact content and must round-trip. Underflow is accepted;
/// overflow and trailing garbage are not.
double parse_artifact_double(const std::string& s) {
    const char* begin = s.c_str();
    char* end = nullptr;
    errno = 0;
    double v = std::strtod(begin, &end);
    if (end == begin || *end != '\0') throw std::invalid_argument("not a number: " + s);
    if (errno == ERANGE && !std::isfinite(v)) throw std::out_of_range("out of range: " + s);
    return v;
}

}  // namespace

PipelineConfig PipelineConfig::load(const std::string& path) {
    IniFile ini = IniFile::parse_file(path);
    std::string base = fs::path(path).parent_path().string();

    PipelineConfig cfg;
    if (ini.has("campaign", "seed")) cfg.seed = parse_u64(ini.get("campaign", "seed"), "seed");
    cfg.sessions = static_cast<int>(ini.get_int("campaign", "sessions", cfg.sessions));
    cfg.max_parallel = static_cast<std::size_t>(
        ini.get_int("campaign", "max_parallel", static_cast<long long>(cfg.max_parallel)));
    cfg.reset_per_turn = ini.get_bool("campaign", "reset_per_turn", cfg.reset_per_turn);
    cfg.agent_name = ini.get_or("campaign", "agent_name", cfg.agent_name);
    cfg.unit = observation_unit_from_string(
        ini.get_or("campaign", "unit", observation_unit_name(cfg.unit)));
    cfg.measures = ini.get_or("campaign", "measures", cfg.measures);
    cfg.layout = ini.get_or("campaign", "layout", cfg.layout);
    if (cfg.sessions < 1) throw ConfigError("sessions must be >= 1");
    if (cfg.max_parallel < 1) throw ConfigError("max_parallel must be >= 1");

    cfg.script_path = resolve_path(base, ini.get("paths", "script"));
    cfg.lexicon_path = resolve_path(base, ini.get("paths", "lexicon"));
    cfg.prompt_path = resolve_path(base, ini.get_or("paths", "prompt", ""));
    cfg.baseline_path = resolve_path(base, ini.get_or("paths", "baseline", ""));
    cfg.out_dir = resolve_path(base, ini.get("paths", "out_dir"));
    if (cfg.out_dir.empty()) throw ConfigError("out_dir must not be empty");

    if (ini.has("report", "formats")) {
        cfg.formats.clear();
        for (const auto& part : split(ini.get("report", "formats"), ',')) {
            std::string f = trim(part);
            if (!f.empty()) cfg.formats.push_back(f);
        }
        if (cfg.formats.empty()) throw ConfigError("report formats list is empty");
    }
    for (const auto& f : cfg.formats) report_format_from_string(f);

    if (ini.has_section("drift")) {
        DriftPolicy policy;
        policy.mode = reinjection_mode_from_string(
            ini.get_or("drift", "mode", reinjection_mode_name(policy.mode)));
        policy.window =
            static_cast<std::size_t>(ini.get_int("drift", "window", (long long)policy.window));
        policy.threshold = ini.get_double("drift", "threshold", policy.threshold);
        policy.min_breaches = static_cast<std::size_t>(
            ini.get_int("drift", "min_breaches", (long long)policy.min_breaches));
        policy.period =
            static_cast<std::size_t>(ini.get_int("drift", "period", (long long)policy.period));
        policy.cooldown =
            static_cast<std::size_t>(ini.get_int("drift", "cooldown", (long long)policy.cooldown));
        policy.validate();
        cfg.drift = policy;
    }

    auto backend_sections = ini.sections_with_prefix("backend.");
    std::sort(backend_sections.begin(), backend_sections.end());
    for (const auto& section : backend_sections) {
        std::string model = section.substr(std::string("backend.").size());
        if (model.empty()) throw ConfigError("backend section without a model id");
        cfg.backends.push_back(backend_config_from_ini(ini, model, base));
    }
    if (cfg.backends.empty())
        throw ConfigError("pipeline needs at least one [backend.<model>] section");

    // fail-fast validation: everything a later stage depends on
    ConversationScript::load(cfg.script_path);
    Lexicon lex = load_lexicon(cfg.lexicon_path);
    MeasureSet::named(cfg.measures).validate(lex);
    if (!cfg.layout.empty()) MeasureSet::named(cfg.layout).validate(lex);
    if (!cfg.prompt_path.empty()) {
        PromptConfig pc = load_prompt_config(cfg.prompt_path);
        pc.tmpl.validate();
        pc.vocab.validate();
    }
    for (const auto& bc : cfg.backends) {
        if (bc.kind == "mock") {
            MockFixture::load(bc.fixture);
        } else if (const char* key = std::getenv(bc.api_key_env.c_str());
                   key == nullptr || *key == '\0') {
            throw ConfigError("environment variable " + bc.api_key_env + " is not set (backend '" +
                              bc.model_id + "' needs it)");
        }
    }
    if (cfg.drift && cfg.drift->mode == ReinjectionMode::OnDrift) {
        if (cfg.baseline_path.empty())
            throw ConfigError("on_drift reinjection needs paths.baseline");
        // the file itself may not exist yet; `calibrate` creates it, and
        // stage_run checks again before any session starts
        if (fs::exists(cfg.baseline_path)) read_baseline(cfg.baseline_path);
    }
    return cfg;
}

// --- observations.csv -----------------------------------------------------

void write_observations(const std::string& path, const std::vector<Observation>& observations,
                        const std::vector<std::string>& measures) {
    std::string out = "persona_id,model_id,session_index,unit_index,word_count";
    for (const auto& m : measures) out += "," + csv_escape(m);
    out += '\n';
    for (const auto& obs : observations) {
        out += csv_escape(obs.persona_id) + "," + csv_escape(obs.model_id) + "," +
               std::to_string(obs.session_index) + "," + std::to_string(obs.unit_index) + "," +
               std::to_string(obs.profile.word_count);
        for (const auto& m : measures) out += "," + fmt_fixed(obs.profile.value(m), 6);
        out += '\n';
    }
    write_file(path, out);
}

std::vector<Observation> read_observations(const std::string& path,
                                           std::vector<std::string>* measures_out) {
    auto lines = split(read_file(path), '\n');
    if (lines.empty() || trim(lines[0]).empty())
        throw ParseError(path + ": missing observations header");
    auto header = csv_split(lines[0]);
    const std::vector<std::string> fixed{"persona_id", "model_id", "session_index", "unit_index",
                                         "word_count"};
    if (header.size() < fixed.size() + 1 ||
        !std::equal(fixed.begin(), fixed.end(), header.begin()))
        throw ParseError(path + ": unexpected observations header");
    std::vector<std::string> measures(header.begin() + fixed.size(), header.end());
    if (measures_out) *measures_out = measures;

    std::vector<Observation> out;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        if (trim(lines[i]).empty()) continue;
        auto fields = csv_split(lines[i]);
        if (fields.size() != header.size())
            throw ParseError(path + ": row has " + std::to_string(fields.size()) +
                                 " fields, header has " + std::to_string(header.size()),
                             static_cast<int>(i + 1));
        Observation obs;
        obs.persona_id = fields[0];
        obs.model_id = fields[1];
        try {
            obs.session_index = std::stoi(fields[2]);
            obs.unit_index = std::stoi(fields[3]);
            obs.profile.word_count = static_cast<std::size_t>(std::stoul(fields[4]));
            for (std::size_t m = 0; m < measures.size(); ++m)
                obs.profile.percentages[measures[m]] =
                    parse_artifact_double(fields[fixed.size() + m]);
        } catch (const std::exception&) {
            throw ParseError(path + ": malformed observation row", static_cast<int>(i + 1));
        }
        obs.profile.empty = obs.profile.word_count == 0;
        out.push_back(std::move(obs));
    }
    return out;
}

// --- fits.csv -------------------------------------------------------------

void write_fits(const std::string& path, const std::vector<RegressionFit>& fits) {
    std::string out = "model,measure,n,df,r2";
    for (const char* block : {"b", "se", "t", "p"}) {
        for (std::size_t j = 0; j < kNumTerms; ++j)
            out += "," + std::string(block) + std::to_string(j);
    }
    out += ",skipped_reason\n";
    for (const auto& fit : fits) {
        out += csv_escape(fit.model_id) + "," + csv_escape(fit.measure);
        if (fit.skipped()) {
            for (int i = 0; i < 3 + 4 * static_cast<int>(kNumTerms); ++i) out += ",";
            out += "," + csv_escape(fit.skipped_reason) + "\n";
            continue;
        }
        out += "," + std::to_string(fit.ols.n) + "," + std::to_string(fit.ols.df) + "," +
               fmt_sig(fit.ols.r2, 12);
        for (const auto* block : {&fit.ols.beta, &fit.ols.se, &fit.ols.t, &fit.ols.p}) {
            for (double v : *block) out += "," + fmt_sig(v, 12);
        }
        out += ",\n";
    }
    write_file(path, out);
}

std::vector<RegressionFit> read_fits(const std::string& path) {
    auto lines = split(read_file(path), '\n');
    if (lines.empty() || trim(lines[0]).empty())
        throw ParseError(path + ": missing fits header");
    auto header = csv_split(lines[0]);
    const std::size_t expect = 5 + 4 * kNumTerms + 1;
    if (header.size() != expect || header[0] != "model" || header.back() != "skipped_reason")
        throw ParseError(path + ": unexpected fits header");

    std::vector<RegressionFit> out;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        if (trim(lines[i]).empty()) continue;
        auto fields = csv_split(lines[i]);
        if (fields.size() != expect)
            throw ParseError(path + ": malformed fits row", static_cast<int>(i + 1));
        RegressionFit fit;
        fit.model_id = fields[0];
        fit.measure = fields[1];
        fit.skipped_reason = fields.back();
        if (!fit.skipped()) {
            try {
                fit.ols.n = static_cast<std::size_t>(std::stoul(fields[2]));
                fit.ols.df = std::stoi(fields[3]);
                fit.ols.r2 = parse_artifact_double(fields[4]);
                std::size_t k = 5;
                for (auto* block : {&fit.ols.beta, &fit.ols.se, &fit.ols.t, &fit.ols.p}) {
                    for (double& v : *block) v = parse_artifact_double(fields[k++]);
                }
            } catch (const std::exception&) {
                throw ParseError(path + ": malformed fits row", static_cast<int>(i + 1));
            }
        }
        out.push_back(std::move(fit));
    }
    return out;
}

// --- stages ---------------------------------------------------------------

void stage_run(const PipelineConfig& config, std::ostream* log) {
    fs::create_directories(config.out_dir);
    PromptConfig prompt = config.prompt_path.empty()
                              ? PromptConfig{default_template(), default_vocabulary()}
                              : load_prompt_config(config.prompt_path);
    ConversationScript script = ConversationScript::load(config.script_path);
    std::vector<PersonaSpec> personas = enumerate_personas(config.agent_name);

    Lexicon lex;
    Baseline baseline;
    SessionOptions options;
    options.drift = config.drift;
    options.reset_per_turn = config.reset_per_turn;
    if (config.drift) {
        lex = load_lexicon(config.lexicon_path);
        options.lexicon = &lex;
        if (config.drift->mode == ReinjectionMode::OnDrift) {
            if (!fs::exists(config.baseline_path))
                throw ConfigError("baseline " + config.baseline_path +
                                  " does not exist; run 'calibrate' first");
            baseline = read_baseline(config.baseline_path);
            options.baseline = &baseline;
        }
    }

    std::vector<Transcript> transcripts;
    std::vector<SessionFailure> failures;
    for (const auto& bc : config.backends) {
        auto backend = make_backend(bc);
        CampaignSpec campaign{config.seed, config.sessions, personas, config.max_parallel};
        CampaignResult result = run_campaign(*backend, prompt.tmpl, prompt.vocab, script,
                                             campaign, options);
        for (auto& t : result.transcripts) transcripts.push_back(std::move(t));
        for (auto& f : result.failures) failures.push_back(std::move(f));
        if (log)
            *log << "run: model " << bc.model_id << ": " << result.transcripts.size()
                 << " sessions ok, " << result.failures.size() << " failed\n";
    }
    PipelineArtifacts art = config.artifacts();
    write_transcripts(art.transcripts(), transcripts);
    if (log) *log << "run: wrote " << transcripts.size() << " transcripts to "
                  << art.transcripts() << "\n";
    if (!failures.empty()) {
        const auto& f = failures.front();
        throw BackendError(std::to_string(failures.size()) + " of " +
                               std::to_string(failures.size() + transcripts.size()) +
                               " sessions failed; first: " + f.model_id + "/" + f.persona_id +
                               "/session " + std::to_string(f.session_index) + ": " + f.message,
                           0);
    }
}

void stage_calibrate(const PipelineConfig& config, const std::string& out_path,
                     std::ostream* log) {
    PipelineArtifacts art = config.artifacts();
    require_artifact(art.transcripts(), "run");
    auto transcripts = read_transcripts(art.transcripts());
    if (transcripts.empty()) throw EmptyResultError("no transcripts to calibrate from");
    Lexicon lex = load_lexicon(config.lexicon_path);
    std::vector<CategoryProfile> profiles;
    for (const auto& t : transcripts) {
        for (const auto& e : t.exchanges) profiles.push_back(analyze(e.agent, lex));
    }
    std::vector<std::string> categories;
    for (const auto& [id, name] : lex.categories) categories.push_back(name);
    Baseline baseline = calibrate(profiles, categories);
    std::string path = out_path.empty() ? config.baseline_path : out_path;
    if (path.empty())
        throw ConfigError("no baseline output path: set paths.baseline or pass --out");
    write_baseline(path, baseline);
    if (log) *log << "calibrate: wrote baseline over " << baseline.samples << " responses to "
                  << path << "\n";
}

void stage_analyze(const PipelineConfig& config, std::ostream* log) {
    PipelineArtifacts art = config.artifacts();
    require_artifact(art.transcripts(), "run");
    std::vector<Transcript> transcripts = read_transcripts(art.transcripts());
    if (transcripts.empty()) throw EmptyResultError("no transcripts to analyze");
    // canonical order, independent of how the run stage was parallelized
    std::sort(transcripts.begin(), transcripts.end(),
              [](const Transcript& a, const Transcript& b) {
                  return std::tie(a.model_id, a.persona_id, a.session_index) <
                         std::tie(b.model_id, b.persona_id, b.session_index);
              });
    Lexicon lex = load_lexicon(config.lexicon_path);
    MeasureSet measures = MeasureSet::named(config.measures);
    measures.validate(lex);
    auto observations = profile_transcripts(transcripts, lex, measures, config.unit);
    write_observations(art.observations(), observations, measures.all());
    if (log) *log << "analyze: wrote " << observations.size() << " observations to "
                  << art.observations() << "\n";
}

void stage_fit(const PipelineConfig& config, std::ostream* log) {
    PipelineArtifacts art = config.artifacts();
    require_artifact(art.observations(), "analyze");
    std::vector<std::string> measures;
    auto observations = read_observations(art.observations(), &measures);
    if (observations.empty()) throw EmptyResultError("no observations to fit");
    auto fits = fit_all(observations, measures);
    write_fits(art.fits(), fits);
    if (log) *log << "fit: wrote " << fits.size() << " fits to " << art.fits() << "\n";
}

void stage_report(const PipelineConfig& config, std::ostream* log) {
    PipelineArtifacts art = config.artifacts();
    require_artifact(art.fits(), "fit");
    auto fits = read_fits(art.fits());
    if (fits.empty()) throw EmptyResultError("no fits to report");
    std::string layout_key = config.layout.empty() ? config.measures : config.layout;
    ReportLayout layout = ReportLayout::from_measures(MeasureSet::named(layout_key));
    for (const auto& fmt : config.formats) {
        RenderOptions options;
        options.format = report_format_from_string(fmt);
        std::string path = art.report(report_format_extension(options.format));
        write_file(path, render_table(fits, layout, options));
        if (log) *log << "report: wrote " << path << "\n";
    }
}

void run_pipeline(const PipelineConfig& config, Stage from, std::ostream* log) {
    if (from <= Stage::Run) stage_run(config, log);
    if (from <= Stage::Analyze) stage_analyze(config, log);
    if (from <= Stage::Fit) stage_fit(config, log);
    if (from <= Stage::Report) stage_report(config, log);
}

}  // namespace pbench
