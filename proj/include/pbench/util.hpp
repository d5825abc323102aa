#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace pbench {

/// splitmix64 state mixer. Used everywhere a deterministic, portable
/// stream of pseudo-random numbers is needed (the standard <random>
/// distributions are not bit-stable across library implementations).
struct Rng {
    std::uint64_t state;

    explicit Rng(std::uint64_t seed) : state(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    /// Uniform double in [0, 1).
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    /// Uniform integer in [0, n). n must be > 0.
    std::size_t below(std::size_t n) { return static_cast<std::size_t>(next() % n); }

    /// Standard normal via Box-Muller (one value per call, no caching).
    double normal();
};

/// One splitmix64 scramble step, for deriving child seeds.
std::uint64_t mix64(std::uint64_t x);

/// FNV-1a 64-bit hash of a string.
std::uint64_t hash64(std::string_view s);

/// Derive a per-session seed from a campaign seed and session identity.
std::uint64_t derive_seed(std::uint64_t campaign_seed, std::string_view persona_id,
                          std::string_view model_id, int session_index);

// --- string helpers ------------------------------------------------------

std::string trim(std::string_view s);
std::vector<std::string> split(std::string_view s, char sep);
std::string to_lower_ascii(std::string_view s);
bool contains(std::string_view haystack, std::string_view needle);

/// Glob match supporting only '*' (any run of characters).
bool glob_match(std::string_view pattern, std::string_view text);

/// Fixed-point decimal formatting ("%.<prec>f").
std::string fmt_fixed(double x, int prec);

/// Compact significant-digit formatting ("%.<digits>g").
std::string fmt_sig(double x, int digits = 12);

/// CSV field quoting (commas, quotes, newlines).
std::string csv_escape(const std::string& field);

/// Split one CSV line honoring double-quote escaping.
std::vector<std::string> csv_split(const std::string& line);

/// Current UTC time as ISO-8601 with seconds.
std::string iso8601_now();

// --- file helpers --------------------------------------------------------

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

}  // namespace pbench
