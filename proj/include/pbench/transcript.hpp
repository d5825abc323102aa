#pragma once

#include <cstdint>
#include <map>
#include <mutex>
#include <fstream>
#include <string>
#include <vector>

namespace pbench {

struct ChatMessage {
    enum class Role { System, Donor, Agent };
    Role role;
    std::string content;
    int turn_index = 0;
};

const char* role_name(ChatMessage::Role role);

struct Exchange {
    std::string donor;
    std::string agent;
};

struct Injection {
    int turn = 0;
    std::string text;
};

/// Per-turn drift monitor output attached to a transcript when a drift
/// policy is active during the session.
struct DriftRecord {
    int turn = 0;
    std::map<std::string, double> z;
    std::vector<std::string> breached;
    bool triggered = false;
};

/// Ordered record of one benchmark session.
struct Transcript {
    std::string persona_id;
    std::string model_id;
    int session_index = 0;
    std::uint64_t seed = 0;
    std::vector<Exchange> exchanges;
    std::vector<Injection> injections;
    std::vector<DriftRecord> drift;
    // Wall-clock timestamps are recorded for live backends only; mock runs
    // leave them empty so identical seeds produce identical records.
    std::string started_at;
    std::string finished_at;

    std::string to_jsonl() const;
    static Transcript from_jsonl(const std::string& line);

    bool operator==(const Transcript& other) const;
};

/// Serialized append-only transcript store, one JSON record per line.
class TranscriptWriter {
public:
    /// Opens the file for appending; creates it when absent.
    explicit TranscriptWriter(const std::string& path);

    /// Thread-safe: appends one record and flushes.
    void append(const Transcript& t);

    const std::string& path() const { return path_; }

private:
    std::string path_;
    std::ofstream out_;
    std::mutex mutex_;
};

std::vector<Transcript> read_transcripts(const std::string& path);
void write_transcripts(const std::string& path, const std::vector<Transcript>& transcripts);

}  // namespace pbench
