#include <algorithm>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "pbench/backends.hpp"
#include "pbench/conjoint.hpp"
#include "pbench/pipeline.hpp"
#include "pbench/report.hpp"

namespace {

using namespace pbench;

constexpr const char* kConfigSchema = R"(# Pipeline configuration reference. All keys shown with their defaults;
# relative paths resolve against this file's directory.

[campaign]
seed = 0                 # campaign seed; session seeds derive from it
sessions = 1             # sessions per persona per backend
max_parallel = 1         # concurrent sessions
reset_per_turn = false   # true: send only system + current donor line each turn
agent_name = Alex        # {NAME} slot in the persona pattern
unit = response          # observation unit: response | session
measures = default       # measure set: default | table1 | comma,separated,list
layout = ...             # report rows; defaults to `measures`

[paths]
script = donor_script.txt    # donor utterances, one per line
lexicon = lexicon.txt        # category dictionary
out_dir = out                # artifact directory
prompt = prompt.cfg          # optional [template]/[vocabulary] overrides
baseline = baseline.csv      # needed for on_drift reinjection

[report]
formats = md,csv         # any of md, txt, csv

# Optional; omit the section to leave drift monitoring off.
[drift]
mode = on_drift          # off | periodic | on_drift
window = 3               # responses per drift check
threshold = 2.0          # |z| that counts as a breach
min_breaches = 2         # breached categories that trigger together
period = 0               # periodic mode: inject every N turns
cooldown = 2             # injections need turn gaps > cooldown

# One section per backend; the suffix is the model id.
[backend.sim]
kind = mock              # mock | http
fixture = fixture.json   # mock only: response sampling plan

[backend.gpt]
kind = http
base_url = https://api.openai.com
path = /v1/chat/completions
model_name = gpt-4       # wire-level model name; defaults to the model id
api_key_env = PBENCH_API_KEY   # credential comes from the environment, never this file
temperature = 1.0
max_tokens = 256
timeout_seconds = 60
max_attempts = 3         # transport/5xx retries with doubling backoff
backoff_initial_ms = 250
min_interval_ms = 0      # minimum spacing between request starts
)";

void cmd_personas_list() {
    std::cout << "id            attitude     authority      reasoning\n";
    for (const auto& p : enumerate_personas("Alex")) {
        std::string id = p.id();
        id.resize(14, ' ');
        std::string att = level_name(p.attitude);
        att.resize(13, ' ');
        std::string aut = level_name(p.authority);
        aut.resize(15, ' ');
        std::cout << id << att << aut << level_name(p.reasoning) << "\n";
    }
}

void cmd_personas_render(const std::string& id, const std::string& name,
                         const std::string& prompt_file) {
    PromptConfig prompt = prompt_file.empty()
                              ? PromptConfig{default_template(), default_vocabulary()}
                              : load_prompt_config(prompt_file);
    PersonaSpec spec = persona_from_id(id, name);
    std::cout << build_prompt(spec, prompt.tmpl, prompt.vocab) << "\n";
}

void print_overlaps(const PipelineConfig& cfg) {
    auto transcripts = read_transcripts(cfg.artifacts().transcripts());
    Lexicon lex = load_lexicon(cfg.lexicon_path);
    MeasureSet measures = MeasureSet::named(cfg.measures);
    auto overlaps = overlap_report(transcripts, lex, measures);
    if (overlaps.empty()) {
        std::cout << "no tokens hit more than one measured category\n";
        return;
    }
    std::cout << "count\ttoken\tcategories\n";
    for (const auto& entry : overlaps) {
        std::cout << entry.count << "\t" << entry.token << "\t";
        for (std::size_t i = 0; i < entry.categories.size(); ++i) {
            if (i) std::cout << "+";
            std::cout << entry.categories[i];
        }
        std::cout << "\n";
    }
}

void cmd_fit_subset(const PipelineConfig& cfg, const std::string& measures_arg) {
    PipelineArtifacts art = cfg.artifacts();
    std::vector<std::string> available;
    auto observations = read_observations(art.observations(), &available);
    if (observations.empty()) throw EmptyResultError("no observations to fit");
    std::vector<std::string> wanted = MeasureSet::named(measures_arg).all();
    for (const auto& m : wanted) {
        if (std::find(available.begin(), available.end(), m) == available.end())
            throw ConfigError("measure '" + m + "' is not a column of " + art.observations());
    }
    auto fits = fit_all(observations, wanted);
    write_fits(art.fits(), fits);
    std::cout << "fit: wrote " << fits.size() << " fits to " << art.fits() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"factorial persona style benchmark"};
    app.require_subcommand(1);

    // personas
    auto* personas = app.add_subcommand("personas", "inspect the 2x2x2 persona grid");
    personas->require_subcommand(1);
    personas->add_subcommand("list", "print every persona id with its trait levels");
    std::string render_id, render_name = "Alex", render_prompt_file;
    auto* render = personas->add_subcommand("render", "print the assembled prompt for a persona");
    render->add_option("--id", render_id, "persona id, e.g. opt-auth-ana")->required();
    render->add_option("--name", render_name, "agent display name");
    render->add_option("--prompt", render_prompt_file, "prompt config file");

    // stage commands share a --config option
    std::string config_path;
    auto add_config = [&config_path](CLI::App* cmd) {
        cmd->add_option("-c,--config", config_path, "pipeline config file")->required();
    };

    auto* run = app.add_subcommand("run", "run all sessions and write transcripts.jsonl");
    add_config(run);

    auto* calibrate_cmd =
        app.add_subcommand("calibrate", "build the drift baseline from transcripts.jsonl");
    add_config(calibrate_cmd);
    std::string calibrate_out;
    calibrate_cmd->add_option("--out", calibrate_out, "baseline path (default: paths.baseline)");

    auto* analyze_cmd =
        app.add_subcommand("analyze", "score transcripts into observations.csv");
    add_config(analyze_cmd);
    std::string unit_arg;
    bool overlap_flag = false;
    analyze_cmd->add_option("--unit", unit_arg, "observation unit: response | session");
    analyze_cmd->add_flag("--overlap-report", overlap_flag,
                          "after scoring, list tokens matched by several measured categories");

    auto* fit_cmd = app.add_subcommand("fit", "fit effect models into fits.csv");
    add_config(fit_cmd);
    std::string fit_measures, group_by = "model";
    fit_cmd->add_option("--measures", fit_measures,
                        "subset of observation columns to fit (default: all)");
    fit_cmd->add_option("--group-by", group_by, "fit grouping; only 'model' is supported");

    auto* report_cmd = app.add_subcommand("report", "render the coefficient table");
    add_config(report_cmd);
    std::string layout_arg, format_arg;
    report_cmd->add_option("--layout", layout_arg, "row layout: default | table1 | list");
    report_cmd->add_option("--format", format_arg, "single output format: md | txt | csv");

    auto* pipeline_cmd = app.add_subcommand("pipeline", "run every stage in order");
    std::string from_arg = "run";
    bool print_schema = false;
    pipeline_cmd->add_option("-c,--config", config_path, "pipeline config file");
    pipeline_cmd->add_option("--from", from_arg, "first stage: run | analyze | fit | report");
    pipeline_cmd->add_flag("--print-schema", print_schema,
                           "print an annotated config template and exit");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 1;  // any usage problem is a configuration error
    }

    try {
        if (personas->parsed()) {
            if (personas->get_subcommand("list")->parsed()) cmd_personas_list();
            if (render->parsed()) cmd_personas_render(render_id, render_name, render_prompt_file);
            return 0;
        }
        if (pipeline_cmd->parsed() && print_schema) {
            std::cout << kConfigSchema;
            return 0;
        }
        if (pipeline_cmd->parsed() && config_path.empty())
            throw ConfigError("pipeline needs --config (or --print-schema)");

        PipelineConfig cfg = PipelineConfig::load(config_path);
        if (run->parsed()) {
            stage_run(cfg, &std::cout);
        } else if (calibrate_cmd->parsed()) {
            stage_calibrate(cfg, calibrate_out, &std::cout);
        } else if (analyze_cmd->parsed()) {
            if (!unit_arg.empty()) cfg.unit = observation_unit_from_string(unit_arg);
            stage_analyze(cfg, &std::cout);
            if (overlap_flag) print_overlaps(cfg);
        } else if (fit_cmd->parsed()) {
            if (group_by != "model")
                throw ConfigError("unsupported --group-by '" + group_by +
                                  "'; fits are grouped by model");
            if (fit_measures.empty()) {
                stage_fit(cfg, &std::cout);
            } else {
                cmd_fit_subset(cfg, fit_measures);
            }
        } else if (report_cmd->parsed()) {
            if (!layout_arg.empty()) cfg.layout = layout_arg;
            if (!format_arg.empty()) cfg.formats = {format_arg};
            stage_report(cfg, &std::cout);
        } else if (pipeline_cmd->parsed()) {
            run_pipeline(cfg, stage_from_string(from_arg), &std::cout);
        }
        return 0;
    } catch (const BackendError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const SessionError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const SingularDesignError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const DegenerateResponseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const InsufficientDataError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const EmptyResultError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const ReportError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;  // configuration / input problems
    }
}
