#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "ttc/errors.hpp"

namespace ttc {

// ─── Token alphabets ────────────────────────────────────────────────────────

enum class VocabKind { text, speech };

// A closed alphabet of contiguous token ids [0, size) with one id reserved
// for end-of-sequence.
struct Vocab {
    int size = 0;
    int eos = 0;
    VocabKind kind = VocabKind::text;

    void validate() const {
        if (size < 2) {
            throw ConfigError("vocab size must be at least 2, got " + std::to_string(size));
        }
        if (eos < 0 || eos >= size) {
            throw ConfigError("eos id " + std::to_string(eos) + " outside vocab of size " +
                              std::to_string(size));
        }
    }

    bool contains(int id) const { return id >= 0 && id < size; }
};

inline Vocab make_vocab(int size, VocabKind kind) {
    Vocab v{size, size - 1, kind};
    v.validate();
    return v;
}

// ─── Joint stream encoding ──────────────────────────────────────────────────
//
// Text and speech keep disjoint id ranges inside a single model stream:
// text token t maps to joint id t, speech token s maps to text_size + s,
// and one extra id pads under-full context windows at stream start.

struct JointIdMap {
    int text_size = 0;
    int speech_size = 0;

    int text_id(int t) const { return t; }
    int speech_id(int s) const { return text_size + s; }
    int pad_id() const { return text_size + speech_size; }
    int joint_size() const { return text_size + speech_size + 1; }
};

// ─── Training rows ──────────────────────────────────────────────────────────

// Which half of the joint stream the loss (and the model's predictions)
// covers: tts predicts speech tokens given text, asr swaps the stream order
// and predicts text tokens given speech.
enum class LossDirection { tts, asr };

inline std::string to_string(LossDirection d) { return d == LossDirection::tts ? "tts" : "asr"; }

inline LossDirection loss_direction_from_string(const std::string& s) {
    if (s == "tts") {
        return LossDirection::tts;
    }
    if (s == "asr") {
        return LossDirection::asr;
    }
    throw ConfigError("unknown loss direction '" + s + "' (expected tts or asr)");
}

// One aligned (text, speech) pair: the text prefix, the speech suffix, and
// the direction that decides which positions carry loss.
struct JointSequence {
    std::vector<int> text;
    std::vector<int> speech;
    LossDirection loss_direction = LossDirection::tts;
};

inline void validate_pair(const JointSequence& pair, const Vocab& text_vocab,
                          const Vocab& speech_vocab, int max_context) {
    if (pair.text.empty()) {
        throw ConfigError("joint sequence must contain at least one text token");
    }
    const std::size_t total = pair.text.size() + pair.speech.size();
    if (static_cast<int>(total) > max_context) {
        throw ConfigError("joint sequence length " + std::to_string(total) +
                          " exceeds max context " + std::to_string(max_context));
    }
    for (int t : pair.text) {
        if (!text_vocab.contains(t)) {
            throw ConfigError("text token " + std::to_string(t) + " outside vocab of size " +
                              std::to_string(text_vocab.size));
        }
    }
    for (int s : pair.speech) {
        if (!speech_vocab.contains(s)) {
            throw ConfigError("speech token " + std::to_string(s) + " outside vocab of size " +
                              std::to_string(speech_vocab.size));
        }
    }
}

// ─── Corpus ─────────────────────────────────────────────────────────────────

struct Corpus {
    std::vector<JointSequence> pairs;
    Vocab text_vocab;
    Vocab speech_vocab;
};

} // namespace ttc
