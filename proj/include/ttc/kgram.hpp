#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "ttc/rng.hpp"
#include "ttc/vocab.hpp"

namespace ttc {

// ─── Loss report ────────────────────────────────────────────────────────────

// Masked negative log-likelihood of one joint sequence: one entry per
// predicted position (speech positions for tts, text positions for asr),
// in nats.
struct LossReport {
    double nll = 0.0;
    int token_count = 0;
    std::vector<double> per_position;
};

// ─── Count-based k-gram model ───────────────────────────────────────────────
//
// The conditional distribution over the next predicted token given the last
// `order_k` ids of the joint stream, estimated by counting with add-alpha
// smoothing:
//
//     P(y | c) = (count(c, y) + alpha) / (total(c) + alpha * V)
//
// Context windows at stream start are left-padded with a reserved pad id.
// A trained model is immutable; concurrent sampling needs one RngStream per
// caller.
class KGramModel {
  public:
    // An empty model: a value slot to assign a trained model into. Using one
    // before assignment yields uniform-smoothing probabilities over nothing.
    KGramModel() = default;

    // Accumulates every (window, next-token) occurrence at predicted
    // positions across the corpus. All pairs must share one loss direction.
    static KGramModel train(const Corpus& corpus, int order_k, double alpha);

    int order_k() const { return order_k_; }
    double alpha() const { return alpha_; }
    LossDirection direction() const { return direction_; }
    const Vocab& text_vocab() const { return text_vocab_; }
    const Vocab& speech_vocab() const { return speech_vocab_; }
    const Vocab& predicted_vocab() const {
        return direction_ == LossDirection::tts ? speech_vocab_ : text_vocab_;
    }
    JointIdMap id_map() const { return JointIdMap{text_vocab_.size, speech_vocab_.size}; }

    // Raw statistics, exposed for independent recounts in tests.
    std::uint64_t count(const std::vector<int>& window, int y) const;
    std::uint64_t context_total(const std::vector<int>& window) const;
    std::size_t context_count() const { return counts_.size(); }

    // Smoothed probability of predicted token y after a joint-id window.
    // The window must have exactly order_k entries.
    double prob(const std::vector<int>& window, int y) const;

    // Masked NLL of a pair under this model; the pair's loss_direction must
    // match the model's.
    LossReport log_prob(const JointSequence& pair) const;

    // One draw from P(y | window)^(1/temperature), renormalized, via
    // inverse-transform sampling in token-id order.
    int sample_next(const std::vector<int>& window, RngStream& rng, double temperature) const;

    // Ancestral sampling of a speech sequence conditioned on text (and an
    // optional speech prefix, which is kept in the output but never re-drawn).
    // Stops after drawing eos or when the speech length reaches max_len.
    std::vector<int> generate(const std::vector<int>& text, RngStream& rng, int max_len,
                              double temperature,
                              const std::vector<int>& speech_prefix = {}) const;

    // Joint-id stream of a pair in this model's direction order.
    std::vector<int> joint_stream(const JointSequence& pair) const;

    // The order_k window ending just before stream position `pos`,
    // left-padded with the pad id.
    std::vector<int> window_before(const std::vector<int>& stream, std::size_t pos) const;

    // Exact JSON round-trip of (order, alpha, vocabs, sparse counts).
    void save_json(const std::string& path) const;
    static KGramModel load_json(const std::string& path);

  private:
    struct ContextCounts {
        std::unordered_map<int, std::uint64_t> by_token;
        std::uint64_t total = 0;
    };

    struct WindowHash {
        std::size_t operator()(const std::vector<int>& w) const;
    };

    const ContextCounts* find_context(const std::vector<int>& window) const;
    void add_count(const std::vector<int>& window, int y);

    int order_k_ = 1;
    double alpha_ = 0.1;
    LossDirection direction_ = LossDirection::tts;
    Vocab text_vocab_;
    Vocab speech_vocab_;
    std::unordered_map<std::vector<int>, ContextCounts, WindowHash> counts_;
};

} // namespace ttc
