#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ttc/rng.hpp"
#include "ttc/vocab.hpp"

namespace ttc {

// ─── Synthetic noisy-channel corpus ─────────────────────────────────────────
//
// The corpus generator plays the role of a speech dataset: each text token
// expands deterministically into `expansion_r` speech symbols, and each
// symbol is flipped to a different one with probability `flip_p`. The
// channel is invertible by block-majority vote, which gives the verifiers a
// ground truth to measure against.
//
// Conventions baked into the channel:
//   - eos is the last id of each vocab and never appears inside channel
//     output; the clean channel alphabet is [0, speech_size - 1).
//   - text content tokens live in [0, text_size - 1); the text eos id is
//     reserved and never encoded.

struct CorpusConfig {
    int text_vocab_size = 8;
    int speech_vocab_size = 16;
    int expansion_r = 2;     // speech symbols per text token
    double flip_p = 0.0;     // per-symbol noise probability
    int pairs = 100;
    int min_text_len = 2;
    int max_text_len = 8;
    int max_context = 2048;  // cap on text+speech length per pair
    LossDirection direction = LossDirection::tts;

    void validate() const;
    Vocab text_vocab() const { return make_vocab(text_vocab_size, VocabKind::text); }
    Vocab speech_vocab() const { return make_vocab(speech_vocab_size, VocabKind::speech); }
    int channel_alphabet() const { return speech_vocab_size - 1; }
    int text_alphabet() const { return text_vocab_size - 1; }
};

// Clean channel symbol for text token `t` at block offset `j`.
int channel_symbol(int t, int j, const CorpusConfig& cfg);

// Deterministic expansion of a text sequence (no noise, no eos).
std::vector<int> channel_expand_clean(const std::vector<int>& text, const CorpusConfig& cfg);

// Noisy expansion: clean symbols, each replaced with probability flip_p by a
// uniformly chosen different non-eos symbol.
std::vector<int> channel_expand(const std::vector<int>& text, const CorpusConfig& cfg,
                                RngStream& rng);

// Inverse channel: strips trailing eos, drops a trailing partial block, then
// decodes each r-symbol block by majority vote over the per-offset
// back-projections. Votes that land outside the text alphabet are discarded;
// ties and empty votes resolve to the lowest text token id.
std::vector<int> channel_decode(const std::vector<int>& speech, const CorpusConfig& cfg);

// Draws `cfg.pairs` text sequences and runs them through the channel; every
// speech sequence ends with the speech eos token.
Corpus make_synthetic_corpus(const CorpusConfig& cfg, RngStream& rng);

// ─── Corpus files ───────────────────────────────────────────────────────────
//
// JSONL: a header line {"format_version","text_vocab","speech_vocab",
// "eos_text","eos_speech","direction"} followed by one {"text":[...],
// "speech":[...]} object per pair. Writing is byte-deterministic.

void write_corpus_jsonl(const Corpus& corpus, const std::string& path);
Corpus read_corpus_jsonl(const std::string& path);

} // namespace ttc
