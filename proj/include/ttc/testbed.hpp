#pragma once

#include <cstdint>
#include <vector>

#include "ttc/corpus.hpp"
#include "ttc/kgram.hpp"

namespace ttc {

// ─── Experiment testbed ─────────────────────────────────────────────────────
//
// The standard setup behind the scaling experiments: one model trained on a
// synthetic channel corpus, plus per-seed instances posing the two competing
// objectives the verifiers measure.
//
// An instance holds:
//   - text: the content target; transcription WER is measured against it.
//   - reference: the similarity target, a clean channel encoding of a text
//     that shares its leading `reference_prefix_overlap` tokens with `text`
//     but is re-drawn after that (a stand-in for reference audio whose style
//     is right and whose tail content is not).
//
// Early similarity guidance therefore helps content too, while locking to
// the full reference forces a content-wrong tail — the tension the hybrid
// search resolves.

struct TestbedConfig {
    CorpusConfig corpus;
    int order_k = 3;
    double alpha = 0.1;
    std::uint64_t corpus_seed = 1234;
    int instance_text_len = 10;
    int reference_prefix_overlap = 6;

    // The tuned defaults used by the experiment suites.
    static TestbedConfig standard();

    void validate() const;
};

struct Testbed {
    TestbedConfig cfg;
    KGramModel model;
};

struct Instance {
    std::vector<int> text;
    std::vector<int> reference_text;
    std::vector<int> reference;
};

// Trains the testbed model from the config's corpus parameters.
Testbed build_testbed(const TestbedConfig& cfg);

// Deterministic per-seed instance; streams sit in their own id namespace so
// they never collide with search streams under the same seed.
Instance make_instance(const Testbed& tb, std::uint64_t seed);

// Reported metrics for a candidate on an instance.
double instance_similarity(const Instance& inst, const std::vector<int>& candidate);
double instance_wer(const Testbed& tb, const Instance& inst, const std::vector<int>& candidate);

} // namespace ttc
