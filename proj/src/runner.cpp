#include "ttc/runner.hpp"

#include <fstream>

#include "ttc/errors.hpp"
#include "ttc/oracle.hpp"
#include "ttc/testbed.hpp"
#include "ttc/verify.hpp"

namespace ttc {

using nlohmann::json;

namespace {

json read_json_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open '" + path + "' for reading");
    }
    try {
        json doc;
        in >> doc;
        return doc;
    } catch (const json::parse_error& e) {
        throw ConfigError("'" + path + "' is not valid JSON: " + std::string(e.what()));
    }
}

void require_format_version(const json& doc, const std::string& what) {
    if (doc.value("format_version", 0) != 1) {
        throw ConfigError(what + " must declare \"format_version\": 1");
    }
}

SearchConfig search_config_from_json(const json& doc) {
    SearchConfig cfg;
    cfg.beam_width_B = doc.value("B", 1);
    cfg.expansions_N = doc.value("N", 1);
    cfg.step_tokens_M = doc.value("M", 25);
    cfg.max_len = doc.value("max_len", 2048);
    cfg.prm_switch_tokens = doc.value("switch_tokens", std::min(100, cfg.max_len));
    cfg.temperature = doc.value("temperature", 1.0);
    cfg.threads = doc.value("threads", 1);
    if (doc.contains("final_rerank")) {
        cfg.final_rerank = doc.at("final_rerank").get<std::vector<std::string>>();
    }
    if (doc.contains("speech_prefix")) {
        cfg.speech_prefix = doc.at("speech_prefix").get<std::vector<int>>();
    }
    cfg.validate();
    return cfg;
}

std::uint64_t resolve_seed(const json& doc, std::optional<std::uint64_t> seed_override,
                           const std::string& what) {
    if (seed_override) {
        return *seed_override;
    }
    if (!doc.contains("seed")) {
        throw ConfigError(what + " needs a \"seed\" field (or pass --seed)");
    }
    return doc.at("seed").get<std::uint64_t>();
}

void check_tokens(const std::vector<int>& tokens, const Vocab& vocab, const std::string& what) {
    for (int t : tokens) {
        if (!vocab.contains(t)) {
            throw ConfigError(what + " token " + std::to_string(t) + " outside vocab of size " +
                              std::to_string(vocab.size));
        }
    }
}

// The scoring verifier named by the config's "verifiers" block.
Verifier build_orm(const RunSetup& setup) {
    const bool has_reference = !setup.reference.empty();
    if (setup.verifier_kind == "similarity") {
        if (!has_reference) {
            throw ConfigError("similarity verifier needs a \"reference\" sequence");
        }
        return Verifier::similarity(setup.reference);
    }
    if (setup.verifier_kind == "wer") {
        if (!setup.has_channel) {
            throw ConfigError("wer verifier needs a \"channel\" block (or a testbed)");
        }
        return Verifier::transcription(setup.text, setup.channel);
    }
    if (setup.verifier_kind == "composite") {
        if (!has_reference || !setup.has_channel) {
            throw ConfigError("composite verifier needs both a reference and a channel");
        }
        return Verifier::composite(
            {Verifier::similarity(setup.reference), Verifier::transcription(setup.text, setup.channel)},
            setup.verifier_keys);
    }
    throw ConfigError("unknown verifier kind '" + setup.verifier_kind +
                      "' (expected similarity, wer, or composite)");
}

} // namespace

TestbedConfig testbed_from_json(const json& block) {
    TestbedConfig cfg = TestbedConfig::standard();
    cfg.corpus.text_vocab_size = block.value("text_vocab", cfg.corpus.text_vocab_size);
    cfg.corpus.speech_vocab_size = block.value("speech_vocab", cfg.corpus.speech_vocab_size);
    cfg.corpus.expansion_r = block.value("expansion_r", cfg.corpus.expansion_r);
    cfg.corpus.flip_p = block.value("flip_p", cfg.corpus.flip_p);
    cfg.corpus.pairs = block.value("pairs", cfg.corpus.pairs);
    cfg.corpus.min_text_len = block.value("min_text_len", cfg.corpus.min_text_len);
    cfg.corpus.max_text_len = block.value("max_text_len", cfg.corpus.max_text_len);
    cfg.order_k = block.value("order_k", cfg.order_k);
    cfg.alpha = block.value("alpha", cfg.alpha);
    cfg.corpus_seed = block.value("corpus_seed", cfg.corpus_seed);
    cfg.instance_text_len = block.value("instance_text_len", cfg.instance_text_len);
    cfg.reference_prefix_overlap =
        block.value("reference_prefix_overlap", cfg.reference_prefix_overlap);
    cfg.validate();
    return cfg;
}

RunSetup load_run_setup(const std::string& config_path,
                        std::optional<std::uint64_t> seed_override,
                        std::optional<int> threads_override) {
    const json doc = read_json_file(config_path);
    require_format_version(doc, "run config");

    RunSetup setup;
    setup.algorithm = doc.value("algorithm", "");
    if (setup.algorithm != "best_of_n" && setup.algorithm != "prm_beam" &&
        setup.algorithm != "partial_prm") {
        throw ConfigError("unknown algorithm '" + setup.algorithm +
                          "' (expected best_of_n, prm_beam, or partial_prm)");
    }
    setup.search = search_config_from_json(doc);
    if (threads_override) {
        setup.search.threads = *threads_override;
        setup.search.validate();
    }
    setup.seed = resolve_seed(doc, seed_override, "run config");

    const json verifiers = doc.value("verifiers", json{{"kind", "similarity"}});
    setup.verifier_kind = verifiers.value("kind", "similarity");
    if (verifiers.contains("keys")) {
        setup.verifier_keys = verifiers.at("keys").get<std::vector<std::string>>();
    }

    if (doc.contains("testbed") == doc.contains("model")) {
        throw ConfigError("run config needs exactly one of \"testbed\" or \"model\"");
    }

    if (doc.contains("testbed")) {
        const TestbedConfig tb_cfg = testbed_from_json(doc.at("testbed"));
        const Testbed tb = build_testbed(tb_cfg);
        const Instance inst = make_instance(tb, setup.seed);
        setup.model = tb.model;
        setup.text = inst.text;
        setup.reference = inst.reference;
        setup.channel = tb_cfg.corpus;
        setup.has_channel = true;
    } else {
        setup.model = KGramModel::load_json(doc.at("model").get<std::string>());
        if (!doc.contains("text")) {
            throw ConfigError("run config with an explicit model needs a \"text\" array");
        }
        setup.text = doc.at("text").get<std::vector<int>>();
        if (setup.text.empty()) {
            throw ConfigError("\"text\" must be non-empty");
        }
        check_tokens(setup.text, setup.model.text_vocab(), "text");
        if (doc.contains("reference")) {
            setup.reference = doc.at("reference").get<std::vector<int>>();
            check_tokens(setup.reference, setup.model.speech_vocab(), "reference");
        }
        if (doc.contains("channel")) {
            CorpusConfig channel;
            channel.text_vocab_size = setup.model.text_vocab().size;
            channel.speech_vocab_size = setup.model.speech_vocab().size;
            channel.expansion_r = doc.at("channel").value("expansion_r", 2);
            channel.validate();
            setup.channel = channel;
            setup.has_channel = true;
        }
    }

    setup.oracle_max_len = doc.value("oracle_max_len", setup.search.max_len);
    return setup;
}

nlohmann::json execute_search(const RunSetup& setup) {
    const Verifier orm = build_orm(setup);
    const bool has_reference = !setup.reference.empty();

    SearchOutcome outcome;
    if (setup.algorithm == "best_of_n") {
        const int count = setup.search.beam_width_B * setup.search.expansions_N;
        outcome = best_of_n(setup.model, setup.text, orm, count, setup.seed, setup.search);
    } else if (setup.algorithm == "prm_beam") {
        // Guidance comes from the configured verifier; it must be able to
        // score partial sequences.
        std::optional<Verifier> rerank;
        if (!setup.search.final_rerank.empty()) {
            if (!has_reference || !setup.has_channel) {
                throw ConfigError("final_rerank needs both a reference and a channel");
            }
            rerank = Verifier::composite({Verifier::similarity(setup.reference),
                                          Verifier::transcription(setup.text, setup.channel)});
        }
        outcome = prm_beam_search(setup.model, setup.text, orm, setup.search, setup.seed,
                                  rerank ? &*rerank : nullptr);
    } else {
        if (!has_reference) {
            throw ConfigError("partial_prm needs a \"reference\" sequence for its guided phase");
        }
        const Verifier prm = Verifier::similarity(setup.reference);
        outcome = partial_prm(setup.model, setup.text, prm, orm, setup.search, setup.seed);
    }

    json scores;
    if (has_reference) {
        scores["similarity"] = similarity_score(outcome.chosen.tokens, setup.reference);
    }
    if (setup.has_channel) {
        scores["wer"] = wer(channel_decode(outcome.chosen.tokens, setup.channel), setup.text);
    }

    json result;
    result["format_version"] = 1;
    result["algorithm"] = setup.algorithm;
    result["seed"] = setup.seed;
    result["chosen"] = {{"tokens", outcome.chosen.tokens},
                        {"finished", outcome.chosen.finished},
                        {"scores", scores}};
    result["budget"] = {{"candidates", outcome.budget.candidates_generated},
                        {"tokens", outcome.budget.tokens_generated},
                        {"verifier_calls", outcome.budget.verifier_calls}};
    result["pool_size"] = outcome.pool.size();
    return result;
}

nlohmann::json execute_oracle(const RunSetup& setup) {
    const Verifier orm = build_orm(setup);
    const OracleResult oracle =
        brute_force_optimum(setup.model.speech_vocab(), orm, setup.oracle_max_len);

    json result;
    result["format_version"] = 1;
    result["best_score"] = oracle.best_score;
    result["best_tokens"] = oracle.best_tokens;
    result["enumerated"] = oracle.enumerated;
    result["max_len"] = setup.oracle_max_len;
    return result;
}

SweepSpec load_sweep_spec(const std::string& config_path,
                          std::optional<std::uint64_t> seed_override,
                          std::optional<int> threads_override) {
    const json doc = read_json_file(config_path);
    require_format_version(doc, "sweep config");

    SweepSpec spec;
    if (doc.contains("testbed")) {
        spec.testbed = testbed_from_json(doc.at("testbed"));
    }
    if (!doc.contains("algorithms") || !doc.contains("budgets")) {
        throw ConfigError("sweep config needs \"algorithms\" and \"budgets\" arrays");
    }
    spec.algorithms = doc.at("algorithms").get<std::vector<std::string>>();
    spec.budgets = doc.at("budgets").get<std::vector<int>>();
    spec.seeds = doc.value("seeds", 30);
    spec.base_seed = resolve_seed(doc, seed_override, "sweep config");

    json search = doc;
    search.erase("threads"); // sweep-level threading, not per-run
    spec.search = search_config_from_json(search);
    spec.search.beam_width_B = 1;
    spec.search.expansions_N = 1;

    spec.threads = doc.value("threads", 1);
    if (threads_override) {
        spec.threads = *threads_override;
    }
    spec.validate();
    return spec;
}

} // namespace ttc
