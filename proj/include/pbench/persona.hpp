#pragma once

#include <string>
#include <vector>

namespace pbench {

// The three two-level solicitor traits. Each level has a short code used in
// persona ids and a display name used in docs and error messages.

enum class Attitude { Optimistic, Pessimistic };
enum class Authority { Authoritative, Submissive };
enum class Reasoning { Analytical, Affective };

const char* level_code(Attitude a);
const char* level_code(Authority a);
const char* level_code(Reasoning r);
const char* level_name(Attitude a);
const char* level_name(Authority a);
const char* level_name(Reasoning r);

/// One point in the 2x2x2 trait design plus the agent's display name.
struct PersonaSpec {
    Attitude attitude = Attitude::Optimistic;
    Authority authority = Authority::Authoritative;
    Reasoning reasoning = Reasoning::Analytical;
    std::string agent_name;

    /// Stable key derived from the trait levels only, e.g. "opt-auth-ana".
    std::string id() const;

    bool operator==(const PersonaSpec& other) const {
        return attitude == other.attitude && authority == other.authority &&
               reasoning == other.reasoning && agent_name == other.agent_name;
    }
};

/// All eight archetypes in fixed order: Attitude varies slowest, then
/// Authority, then Reasoning. Throws InvalidArgument on empty agent_name.
std::vector<PersonaSpec> enumerate_personas(const std::string& agent_name);

/// Reconstruct a spec from its id ("opt-auth-ana"). Throws InvalidArgument
/// on an unknown id.
PersonaSpec persona_from_id(const std::string& id, const std::string& agent_name);

}  // namespace pbench
