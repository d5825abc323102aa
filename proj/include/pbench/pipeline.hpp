#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "pbench/backends.hpp"
#include "pbench/conjoint.hpp"
#include "pbench/drift.hpp"
#include "pbench/lexicon.hpp"
#include "pbench/prompt.hpp"
#include "pbench/session.hpp"

namespace pbench {

enum class Stage { Run, Analyze, Fit, Report };

Stage stage_from_string(const std::string& s);
const char* stage_name(Stage stage);

/// Canonical file names inside the pipeline output directory.
struct PipelineArtifacts {
    std::string dir;

    std::string transcripts() const { return dir + "/transcripts.jsonl"; }
    std::string observations() const { return dir + "/observations.csv"; }
    std::string fits() const { return dir + "/fits.csv"; }
    std::string report(const std::string& ext) const { return dir + "/report." + ext; }
};

/// Fully validated pipeline description. load() resolves every relative
/// path against the config file's directory and fails fast on anything
/// that would break a later stage: unreadable files, bad lexicons, invalid
/// backend sections, missing credential variables.
struct PipelineConfig {
    // [campaign]
    std::uint64_t seed = 0;
    int sessions = 1;
    std::size_t max_parallel = 1;
    bool reset_per_turn = false;
    std::string agent_name = "Alex";
    ObservationUnit unit = ObservationUnit::Response;
    std::string measures = "default";  // MeasureSet::named() key or explicit list
    std::string layout;                // report rows; empty = same as measures

    // [paths]
    std::string script_path;
    std::string lexicon_path;
    std::string prompt_path;    // optional; built-in defaults when empty
    std::string baseline_path;  // required for on_drift reinjection
    std::string out_dir;

    // [report]
    std::vector<std::string> formats{"md", "csv"};

    // [drift] — absent section leaves monitoring off
    std::optional<DriftPolicy> drift;

    std::vector<BackendConfig> backends;  // sorted by model id

    static PipelineConfig load(const std::string& path);

    PipelineArtifacts artifacts() const { return PipelineArtifacts{out_dir}; }
};

// --- Stage artifacts ------------------------------------------------------

/// observations.csv: persona_id, model_id, session_index, unit_index,
/// word_count, then one %.6f column per measure. Profiles read back from
/// disk are flat: every measure lands in `percentages`, composites
/// included.
void write_observations(const std::string& path, const std::vector<Observation>& observations,
                        const std::vector<std::string>& measures);
std::vector<Observation> read_observations(const std::string& path,
                                           std::vector<std::string>* measures_out = nullptr);

/// fits.csv: model, measure, n, df, r2, b0..b7, se0..se7, t0..t7, p0..p7,
/// skipped_reason. Numeric cells are empty for skipped fits.
void write_fits(const std::string& path, const std::vector<RegressionFit>& fits);
std::vector<RegressionFit> read_fits(const std::string& path);

// --- Stages ---------------------------------------------------------------

/// Stages hand data to each other exclusively through the artifact files,
/// so any stage can be rerun from the artifacts already on disk.
void stage_run(const PipelineConfig& config, std::ostream* log = nullptr);

/// Builds the drift baseline from the transcripts artifact and writes it
/// to `out_path` (or paths.baseline when empty).
void stage_calibrate(const PipelineConfig& config, const std::string& out_path = {},
                     std::ostream* log = nullptr);

void stage_analyze(const PipelineConfig& config, std::ostream* log = nullptr);
void stage_fit(const PipelineConfig& config, std::ostream* log = nullptr);
void stage_report(const PipelineConfig& config, std::ostream* log = nullptr);

/// Runs every stage from `from` onward.
void run_pipeline(const PipelineConfig& config, Stage from = Stage::Run,
                  std::ostream* log = nullptr);

}  // namespace pbench
