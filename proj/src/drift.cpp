#include "pbench/drift.hpp"

#include <algorithm>
#include <cmath>

#include "pbench/errors.hpp"
#include "pbench/util.hpp"

namespace pbench {

Baseline calibrate(const std::vector<CategoryProfile>& responses,
                   const std::vector<std::string>& categories) {
    if (responses.size() < 2)
        throw InsufficientDataError("baseline calibration needs at least 2 responses, got " +
                                    std::to_string(responses.size()));
    if (categories.empty()) throw InvalidArgument("no categories to calibrate");
    Baseline base;
    base.samples = responses.size();
    const double n = static_cast<double>(responses.size());
    for (const auto& cat : categories) {
        double sum = 0.0;
        for (const auto& r : responses) {
            auto it = r.percentages.find(cat);
            if (it == r.percentages.end())
                throw ConfigError("calibration profile lacks category '" + cat + "'");
            sum += it->second;
        }
        double mean = sum / n;
        double ss = 0.0;
        for (const auto& r : responses) {
            double d = r.percentages.at(cat) - mean;
            ss += d * d;
        }
        base.mean[cat] = mean;
        base.sd[cat] = std::sqrt(ss / (n - 1.0));
    }
    return base;
}

Baseline read_baseline(const std::string& path) {
    Baseline base;
    int lineno = 0;
    bool header_seen = false;
    for (const std::string& raw : split(read_file(path), '\n')) {
        ++lineno;
        std::string line = trim(raw);
        if (line.empty() || line[0] == '#') continue;
        auto fields = csv_split(line);
        if (!header_seen) {
            if (fields != std::vector<std::string>{"category", "mean", "sd", "samples"})
                throw ParseError(path + ": unexpected baseline header", lineno);
            header_seen = true;
            continue;
        }
        if (fields.size() != 4)
            throw ParseError(path + ": baseline row needs 4 fields", lineno);
        try {
            const std::string& cat = fields[0];
            if (base.has(cat)) throw ParseError(path + ": duplicate category '" + cat + "'", lineno);
            base.mean[cat] = std::stod(fields[1]);
            base.sd[cat] = std::stod(fields[2]);
            std::size_t samples = static_cast<std::size_t>(std::stoul(fields[3]));
            if (base.samples != 0 && base.samples != samples)
                throw ParseError(path + ": inconsistent sample counts", lineno);
            base.samples = samples;
        } catch (const ParseError&) {
            throw;
        } catch (const std::exception&) {
            throw ParseError(path + ": malformed baseline row", lineno);
        }
    }
    if (base.mean.empty()) throw ParseError(path + ": baseline has no categories");
    return base;
}

void write_baseline(const std::string& path, const Baseline& baseline) {
    std::string out = "category,mean,sd,samples\n";
    for (const auto& [cat, mean] : baseline.mean) {
        out += csv_escape(cat) + "," + fmt_sig(mean, 12) + "," +
               fmt_sig(baseline.sd.at(cat), 12) + "," + std::to_string(baseline.samples) + "\n";
    }
    write_file(path, out);
}

ReinjectionMode reinjection_mode_from_string(const std::string& s) {
    if (s == "off") return ReinjectionMode::Off;
    if (s == "periodic") return ReinjectionMode::Periodic;
    if (s == "on_drift") return ReinjectionMode::OnDrift;
    throw ConfigError("unknown reinjection mode '" + s + "' (expected off|periodic|on_drift)");
}

const char* reinjection_mode_name(ReinjectionMode mode) {
    switch (mode) {
        case ReinjectionMode::Off: return "off";
        case ReinjectionMode::Periodic: return "periodic";
        case ReinjectionMode::OnDrift: return "on_drift";
    }
    throw InvalidArgument("bad reinjection mode");
}

void DriftPolicy::validate() const {
    if (window < 1) throw ConfigError("drift window must be >= 1");
    if (threshold <= 0.0) throw ConfigError("drift threshold must be positive");
    if (min_breaches < 1) throw ConfigError("drift min_breaches must be >= 1");
    if (mode == ReinjectionMode::Periodic && period < 1)
        throw ConfigError("periodic reinjection needs period >= 1");
}

WindowCheck check_window(const std::vector<CategoryProfile>& window, const Baseline& baseline,
                         const DriftPolicy& policy) {
    if (window.empty()) throw InvalidArgument("empty drift window");
    WindowCheck out;
    const double n = static_cast<double>(window.size());
    for (const auto& [cat, mean] : baseline.mean) {
        double sum = 0.0;
        for (const auto& p : window) {
            auto it = p.percentages.find(cat);
            if (it == p.percentages.end())
                throw ConfigError("window profile lacks baseline category '" + cat + "'");
            sum += it->second;
        }
        double denom = std::max(baseline.sd.at(cat), kSdFloor);
        out.z[cat] = (sum / n - mean) / denom;
    }
    for (const auto& [cat, z] : out.z) {
        if (std::fabs(z) > policy.threshold) out.breached.push_back(cat);
    }
    out.drifted = out.breached.size() >= policy.min_breaches;
    return out;
}

DriftDecision maybe_reinject(const DriftPolicy& policy, const Baseline* baseline,
                             const std::vector<CategoryProfile>& history, std::size_t turn,
                             InjectionState& state) {
    policy.validate();
    DriftDecision decision;
    switch (policy.mode) {
        case ReinjectionMode::Off:
            return decision;
        case ReinjectionMode::Periodic:
            if (turn % policy.period == 0 && state.cooldown_allows(turn, policy.cooldown)) {
                decision.inject = true;
                state.last_injection = turn;
            }
            return decision;
        case ReinjectionMode::OnDrift: {
            if (baseline == nullptr)
                throw ConfigError("on_drift reinjection requires a calibrated baseline");
            if (history.size() < policy.window) return decision;
            std::vector<CategoryProfile> window(history.end() - policy.window, history.end());
            decision.check = check_window(window, *baseline, policy);
            decision.evaluated = true;
            if (decision.check.drifted && state.cooldown_allows(turn, policy.cooldown)) {
                decision.inject = true;
                state.last_injection = turn;
            }
            return decision;
        }
    }
    throw InvalidArgument("bad reinjection mode");
}

}  // namespace pbench
