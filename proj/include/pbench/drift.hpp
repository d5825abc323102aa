#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "pbench/lexicon.hpp"

namespace pbench {

/// Floor on the baseline standard deviation, in percentage points. Keeps
/// z-scores finite for categories that were nearly constant at calibration.
inline constexpr double kSdFloor = 0.5;

/// Per-category reference distribution of response-level percentages.
struct Baseline {
    std::map<std::string, double> mean;
    std::map<std::string, double> sd;  // sample standard deviation (n - 1)
    std::size_t samples = 0;

    bool has(const std::string& category) const { return mean.count(category) != 0; }
};

/// Builds a baseline from calibration responses over the given base
/// categories. Throws InsufficientDataError with fewer than two responses
/// (a sample standard deviation needs n >= 2).
Baseline calibrate(const std::vector<CategoryProfile>& responses,
                   const std::vector<std::string>& categories);

Baseline read_baseline(const std::string& path);
void write_baseline(const std::string& path, const Baseline& baseline);

enum class ReinjectionMode { Off, Periodic, OnDrift };

ReinjectionMode reinjection_mode_from_string(const std::string& s);
const char* reinjection_mode_name(ReinjectionMode mode);

struct DriftPolicy {
    std::size_t window = 3;        // responses per check
    double threshold = 2.0;        // |z| that counts as a breach
    std::size_t min_breaches = 2;  // categories that must breach at once
    ReinjectionMode mode = ReinjectionMode::OnDrift;
    std::size_t period = 0;   // Periodic: inject every `period` turns
    std::size_t cooldown = 2; // injections need turn gaps strictly greater than this

    void validate() const;  // throws ConfigError on out-of-range fields
};

/// One evaluation of the trailing window against the baseline.
struct WindowCheck {
    std::map<std::string, double> z;     // (window mean - baseline mean) / max(sd, floor)
    std::vector<std::string> breached;   // categories with |z| > threshold
    bool drifted = false;                // breached.size() >= min_breaches
};

WindowCheck check_window(const std::vector<CategoryProfile>& window, const Baseline& baseline,
                         const DriftPolicy& policy);

/// Mutable per-session injection bookkeeping.
struct InjectionState {
    std::optional<std::size_t> last_injection;  // 1-based turn, empty = never

    bool cooldown_allows(std::size_t turn, std::size_t cooldown) const {
        return !last_injection || turn - *last_injection > cooldown;
    }
};

struct DriftDecision {
    bool inject = false;
    bool evaluated = false;  // true when a full window was checked
    WindowCheck check;
};

/// Decides whether the persona section should be re-sent after `turn`
/// (1-based). `history` holds one profile per completed response, oldest
/// first. OnDrift requires a baseline; Periodic requires period >= 1.
/// Updates `state` when an injection is due.
DriftDecision maybe_reinject(const DriftPolicy& policy, const Baseline* baseline,
                             const std::vector<CategoryProfile>& history, std::size_t turn,
                             InjectionState& state);

}  // namespace pbench
