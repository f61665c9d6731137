#include "ttc/testbed.hpp"

#include "ttc/errors.hpp"
#include "ttc/verify.hpp"

namespace ttc {

TestbedConfig TestbedConfig::standard() {
    TestbedConfig cfg;
    cfg.corpus.text_vocab_size = 8;
    cfg.corpus.speech_vocab_size = 16;
    cfg.corpus.expansion_r = 2;
    cfg.corpus.flip_p = 0.08;
    cfg.corpus.pairs = 400;
    cfg.corpus.min_text_len = 4;
    cfg.corpus.max_text_len = 10;
    cfg.order_k = 3;
    cfg.alpha = 0.1;
    cfg.corpus_seed = 1234;
    cfg.instance_text_len = 10;
    cfg.reference_prefix_overlap = 6;
    return cfg;
}

void TestbedConfig::validate() const {
    corpus.validate();
    if (order_k < 1 || !(alpha > 0.0)) {
        throw ConfigError("testbed needs order_k >= 1 and alpha > 0");
    }
    if (instance_text_len < 1) {
        throw ConfigError("instance_text_len must be at least 1");
    }
    if (reference_prefix_overlap < 0 || reference_prefix_overlap > instance_text_len) {
        throw ConfigError("reference_prefix_overlap must lie in [0, instance_text_len]");
    }
}

Testbed build_testbed(const TestbedConfig& cfg) {
    cfg.validate();
    RngStream rng = derive_stream(cfg.corpus_seed, 0);
    const Corpus corpus = make_synthetic_corpus(cfg.corpus, rng);
    return Testbed{cfg, KGramModel::train(corpus, cfg.order_k, cfg.alpha)};
}

Instance make_instance(const Testbed& tb, std::uint64_t seed) {
    const TestbedConfig& cfg = tb.cfg;
    const int alphabet = cfg.corpus.text_alphabet();

    Instance inst;
    RngStream text_rng = derive_stream(seed, kInstanceTextStream);
    inst.text.reserve(static_cast<std::size_t>(cfg.instance_text_len));
    for (int i = 0; i < cfg.instance_text_len; ++i) {
        inst.text.push_back(static_cast<int>(text_rng.next_below(static_cast<std::uint64_t>(alphabet))));
    }

    inst.reference_text.assign(inst.text.begin(),
                               inst.text.begin() + cfg.reference_prefix_overlap);
    RngStream ref_rng = derive_stream(seed, kInstanceReferenceStream);
    for (int i = cfg.reference_prefix_overlap; i < cfg.instance_text_len; ++i) {
        inst.reference_text.push_back(
            static_cast<int>(ref_rng.next_below(static_cast<std::uint64_t>(alphabet))));
    }

    inst.reference = channel_expand_clean(inst.reference_text, cfg.corpus);
    inst.reference.push_back(cfg.corpus.speech_vocab().eos);
    return inst;
}

double instance_similarity(const Instance& inst, const std::vector<int>& candidate) {
    return similarity_score(candidate, inst.reference);
}

double instance_wer(const Testbed& tb, const Instance& inst, const std::vector<int>& candidate) {
    return wer(channel_decode(candidate, tb.cfg.corpus), inst.text);
}

} // namespace ttc
