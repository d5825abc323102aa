#include "pbench/transcript.hpp"

#include <json.hpp>

#include "pbench/errors.hpp"

namespace pbench {

using nlohmann::json;

const char* role_name(ChatMessage::Role role) {
    switch (role) {
        case ChatMessage::Role::System: return "system";
        case ChatMessage::Role::Donor: return "donor";
        case ChatMessage::Role::Agent: return "agent";
    }
    return "?";
}

std::string Transcript::to_jsonl() const {
    json j;
    j["persona_id"] = persona_id;
    j["model_id"] = model_id;
    j["session_index"] = session_index;
    j["seed"] = seed;
    json ex = json::array();
    for (const auto& e : exchanges) ex.push_back({{"donor", e.donor}, {"agent", e.agent}});
    j["exchanges"] = std::move(ex);
    json inj = json::array();
    for (const auto& i : injections) inj.push_back({{"turn", i.turn}, {"text", i.text}});
    j["injections"] = std::move(inj);
    if (!drift.empty()) {
        json dr = json::array();
        for (const auto& d : drift) {
            json rec;
            rec["turn"] = d.turn;
            rec["z"] = d.z;
            rec["breached"] = d.breached;
            rec["triggered"] = d.triggered;
            dr.push_back(std::move(rec));
        }
        j["drift"] = std::move(dr);
    }
    if (!started_at.empty()) j["started_at"] = started_at;
    if (!finished_at.empty()) j["finished_at"] = finished_at;
    return j.dump();
}

Transcript Transcript::from_jsonl(const std::string& line) {
    json j;
    try {
        j = json::parse(line);
    } catch (const json::exception& e) {
        throw ParseError(std::string("bad transcript record: ") + e.what());
    }
    Transcript t;
    try {
        t.persona_id = j.at("persona_id").get<std::string>();
        t.model_id = j.at("model_id").get<std::string>();
        t.session_index = j.at("session_index").get<int>();
        t.seed = j.at("seed").get<std::uint64_t>();
        for (const auto& e : j.at("exchanges")) {
            t.exchanges.push_back({e.at("donor").get<std::string>(),
                                   e.at("agent").get<std::string>()});
        }
        for (const auto& i : j.value("injections", json::array())) {
            t.injections.push_back({i.at("turn").get<int>(), i.at("text").get<std::string>()});
        }
        for (const auto& d : j.value("drift", json::array())) {
            DriftRecord rec;
            rec.turn = d.at("turn").get<int>();
            rec.z = d.at("z").get<std::map<std::string, double>>();
            rec.breached = d.at("breached").get<std::vector<std::string>>();
            rec.triggered = d.at("triggered").get<bool>();
            t.drift.push_back(std::move(rec));
        }
        t.started_at = j.value("started_at", "");
        t.finished_at = j.value("finished_at", "");
    } catch (const json::exception& e) {
        throw ParseError(std::string("bad transcript record: ") + e.what());
    }
    return t;
}

bool Transcript::operator==(const Transcript& other) const {
    return to_jsonl() == other.to_jsonl();
}

TranscriptWriter::TranscriptWriter(const std::string& path)
    : path_(path), out_(path, std::ios::app | std::ios::binary) {
    if (!out_) throw ConfigError("cannot open transcript store for append: " + path);
}

void TranscriptWriter::append(const Transcript& t) {
    std::lock_guard<std::mutex> lock(mutex_);
    out_ << t.to_jsonl() << '\n';
    out_.flush();
}

std::vector<Transcript> read_transcripts(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open transcript store: " + path);
    std::vector<Transcript> out;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        try {
            out.push_back(Transcript::from_jsonl(line));
        } catch (const ParseError& e) {
            throw ParseError(path + ": " + e.what(), lineno);
        }
    }
    return out;
}

void write_transcripts(const std::string& path, const std::vector<Transcript>& transcripts) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write transcript store: " + path);
    for (const auto& t : transcripts) out << t.to_jsonl() << '\n';
}

}  // namespace pbench
