#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "ttc/corpus.hpp"

namespace ttc {

// ─── Sequence metrics ───────────────────────────────────────────────────────

// Levenshtein distance with unit costs.
std::size_t edit_distance(const std::vector<int>& a, const std::vector<int>& b);

// 1 − edit_distance / max(|candidate|, |reference|), in [0, 1]; equals 1
// exactly when candidate == reference. The reference must be non-empty.
double similarity_score(const std::vector<int>& candidate, const std::vector<int>& reference);

// Prefix-consistent variant for scoring partial sequences: the candidate is
// compared against the equal-length prefix of the reference. An empty
// candidate scores 1 (it matches the empty prefix).
double prefix_similarity_score(const std::vector<int>& candidate,
                               const std::vector<int>& reference);

// (substitutions + deletions + insertions) / |reference|. May exceed 1 for
// long hypotheses. The reference must be non-empty.
double wer(const std::vector<int>& hypothesis, const std::vector<int>& reference);

// −wer(channel_decode(candidate), text): transcription accuracy of a speech
// candidate against target text, through the channel's block-majority
// decoder. Higher is better; 0 is perfect.
double transcription_score(const std::vector<int>& candidate, const std::vector<int>& text,
                           const CorpusConfig& channel);

// ─── Verifiers ──────────────────────────────────────────────────────────────

// A verifier score, normalized so that higher is always better. Components
// hold per-verifier values under stable names ("similarity", "wer" — the
// latter negated here and un-negated in reports).
struct Score {
    double value = 0.0;
    std::map<std::string, double> components;
};

// A pure scoring function over candidate token sequences. Process-style
// scorers (accepts_prefix() == true) score partial sequences meaningfully;
// output-style scorers require complete candidates.
class Verifier {
  public:
    // Edit similarity to a reference sequence; prefix-capable. Scores
    // sequences still in progress against the reference's prefix and
    // finished sequences against the whole reference.
    static Verifier similarity(std::vector<int> reference);

    // Negated WER of the channel-decoded candidate against target text;
    // complete sequences only.
    static Verifier transcription(std::vector<int> text, CorpusConfig channel);

    // The same fixed score for every candidate; prefix-capable. Makes tie
    // rules and degenerate selections directly observable.
    static Verifier constant(double value);

    // All component verifiers evaluated together; `keys` fixes the
    // lexicographic selection order (defaults to part order).
    static Verifier composite(std::vector<Verifier> parts, std::vector<std::string> keys = {});

    Score score(const std::vector<int>& candidate, bool finished) const;
    bool accepts_prefix() const;
    const std::string& name() const;
    const std::vector<std::string>& keys() const;

  private:
    enum class Kind { similarity, wer_negated, constant, composite };

    struct Impl {
        Kind kind = Kind::similarity;
        std::string name;
        std::vector<std::string> keys;
        std::vector<int> reference;
        std::vector<int> text;
        CorpusConfig channel;
        std::vector<Verifier> parts;
        double constant_value = 0.0;
    };

    explicit Verifier(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}

    std::shared_ptr<const Impl> impl_;
};

// Index of the pool entry winning lexicographic comparison of score
// components in `keys` order (every component higher-is-better); ties keep
// the lowest index. The pool must be non-empty and every score must carry
// all keys.
std::size_t composite_select(const std::vector<Score>& pool, const std::vector<std::string>& keys);

} // namespace ttc
