#include "pbench/persona.hpp"

#include "pbench/errors.hpp"
#include "pbench/util.hpp"

namespace pbench {

const char* level_code(Attitude a) { return a == Attitude::Optimistic ? "opt" : "pes"; }
const char* level_code(Authority a) { return a == Authority::Authoritative ? "auth" : "sub"; }
const char* level_code(Reasoning r) { return r == Reasoning::Analytical ? "ana" : "aff"; }

const char* level_name(Attitude a) { return a == Attitude::Optimistic ? "Optimistic" : "Pessimistic"; }
const char* level_name(Authority a) { return a == Authority::Authoritative ? "Authoritative" : "Submissive"; }
const char* level_name(Reasoning r) { return r == Reasoning::Analytical ? "Analytical" : "Affective"; }

std::string PersonaSpec::id() const {
    std::string s = level_code(attitude);
    s += '-';
    s += level_code(authority);
    s += '-';
    s += level_code(reasoning);
    return s;
}

std::vector<PersonaSpec> enumerate_personas(const std::string& agent_name) {
    if (agent_name.empty()) throw InvalidArgument("agent_name must be non-empty");
    std::vector<PersonaSpec> out;
    out.reserve(8);
    for (Attitude at : {Attitude::Optimistic, Attitude::Pessimistic}) {
        for (Authority au : {Authority::Authoritative, Authority::Submissive}) {
            for (Reasoning re : {Reasoning::Analytical, Reasoning::Affective}) {
                out.push_back(PersonaSpec{at, au, re, agent_name});
            }
        }
    }
    return out;
}

PersonaSpec persona_from_id(const std::string& id, const std::string& agent_name) {
    auto parts = split(id, '-');
    if (parts.size() != 3) throw InvalidArgument("malformed persona id: " + id);
    PersonaSpec spec;
    spec.agent_name = agent_name;
    if (parts[0] == "opt") spec.attitude = Attitude::Optimistic;
    else if (parts[0] == "pes") spec.attitude = Attitude::Pessimistic;
    else throw InvalidArgument("unknown attitude code '" + parts[0] + "' in persona id: " + id);
    if (parts[1] == "auth") spec.authority = Authority::Authoritative;
    else if (parts[1] == "sub") spec.authority = Authority::Submissive;
    else throw InvalidArgument("unknown authority code '" + parts[1] + "' in persona id: " + id);
    if (parts[2] == "ana") spec.reasoning = Reasoning::Analytical;
    else if (parts[2] == "aff") spec.reasoning = Reasoning::Affective;
    else throw InvalidArgument("unknown reasoning code '" + parts[2] + "' in persona id: " + id);
    return spec;
}

}  // namespace pbench
