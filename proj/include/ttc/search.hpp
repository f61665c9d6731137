#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ttc/kgram.hpp"
#include "ttc/verify.hpp"

namespace ttc {

// ─── Configuration ──────────────────────────────────────────────────────────

struct SearchConfig {
    int beam_width_B = 1;
    int expansions_N = 1;
    int step_tokens_M = 25;      // tokens per guided step (0.5 s at 50 tokens/s)
    int max_len = 2048;          // speech-length cap, eos included
    int prm_switch_tokens = 100; // guided-phase boundary for the hybrid (2 s)
    double temperature = 1.0;
    std::vector<std::string> final_rerank; // optional selection key order over the final pool
    std::vector<int> speech_prefix;        // optional prompt conditioning
    int threads = 1;

    void validate() const;
};

// ─── Results ────────────────────────────────────────────────────────────────

// One scored (possibly partial) speech sequence. beam/step indices record
// where the candidate was minted, for determinism and budget audits.
struct Candidate {
    std::vector<int> tokens;
    bool finished = false;
    std::vector<double> prm_scores; // one entry per completed guided step
    std::optional<Score> final_score;
    int beam_index = 0;
    int step_index = 0;
};

struct Budget {
    std::int64_t candidates_generated = 0; // full-candidate equivalents (B×N for guided runs)
    std::int64_t tokens_generated = 0;     // every sampled token
    std::int64_t verifier_calls = 0;       // actual scoring calls (cached scores excluded)
};

// Scored pool and top-B selection of one guided step, kept for audits.
struct StepTrace {
    std::vector<Candidate> pool;
    std::vector<std::size_t> selected; // pool indices of the survivors, best first
};

struct SearchOutcome {
    Candidate chosen;
    std::vector<Candidate> beams; // surviving beams after the guided phase
    std::vector<Candidate> pool;  // final candidate pool the selection ran over
    std::vector<StepTrace> steps; // guided-phase history
    Budget budget;
};

// ─── Algorithms ─────────────────────────────────────────────────────────────
//
// Random streams are assigned by enumeration, never by scheduling:
//   - independent rollout i (best_of_n, and hybrid completion (b,e) at
//     i = b*N + e) draws from derive_stream(seed, i);
//   - guided beam b starts from derive_stream(seed, beam_stream_id(b));
//     expansion 0 continues its parent's stream and expansion e > 0 forks
//     from the parent's pre-step position with salt e.
// Consequences, tested as exact equalities: a (B=1, N=1) guided run replays
// plain generation, and a hybrid run with a zero-length guided phase replays
// best_of_n(B·N) draw for draw.

// Generates `count` complete sequences, scores each with `orm`, and returns
// the argmax (ties to the lowest candidate index).
SearchOutcome best_of_n(const KGramModel& model, const std::vector<int>& text,
                        const Verifier& orm, int count, std::uint64_t seed,
                        const SearchConfig& cfg);

// Verifier-guided beam search: per step, every unfinished beam emits N
// continuations of at most M tokens; finished beams pass through and compete
// unexpanded; the pool's top B by prefix score survive (ties to the lowest
// pool index). Runs until every beam is finished. The chosen candidate is
// the best final beam, unless cfg.final_rerank is set, in which case the
// final pool is re-scored with *final_verifier and selected by those keys.
SearchOutcome prm_beam_search(const KGramModel& model, const std::vector<int>& text,
                              const Verifier& prm, const SearchConfig& cfg, std::uint64_t seed,
                              const Verifier* final_verifier = nullptr);

// Hybrid: guided beam search until every beam has prm_switch_tokens tokens
// (or finished), then N independent completions per beam, selected by `orm`
// (or by cfg.final_rerank keys over orm components when set).
SearchOutcome partial_prm(const KGramModel& model, const std::vector<int>& text,
                          const Verifier& prm, const Verifier& orm, const SearchConfig& cfg,
                          std::uint64_t seed);

} // namespace ttc
