#pragma once

#include <cstdint>
#include <vector>

#include "ttc/verify.hpp"
#include "ttc/vocab.hpp"

namespace ttc {

// ─── Brute-force search oracle ──────────────────────────────────────────────

struct OracleResult {
    std::vector<int> best_tokens;
    double best_score = 0.0;
    std::uint64_t enumerated = 0; // sequences scored
};

// Upper bound on speech_vocab.size^max_len before enumeration refuses.
inline constexpr std::uint64_t kOracleGuard = 1000000;

// Exact argmax of the verifier over every speech sequence of length 0
// through max_len (all token combinations, eos included anywhere — a
// superset of everything the generator can emit). Score ties resolve to the
// lexicographically smallest sequence. Throws ConfigError with the explicit
// bound when speech_vocab.size^max_len exceeds kOracleGuard.
OracleResult brute_force_optimum(const Vocab& speech_vocab, const Verifier& verifier,
                                 int max_len);

} // namespace ttc
