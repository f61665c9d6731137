#include "doctest.h"

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <vector>

#include "ttc/corpus.hpp"
#include "ttc/errors.hpp"
#include "ttc/kgram.hpp"
#include "ttc/rng.hpp"
#include "ttc/search.hpp"
#include "ttc/verify.hpp"

using namespace ttc;

namespace {

struct Fixture {
    CorpusConfig channel;
    KGramModel model;
    std::vector<int> text;
    std::vector<int> reference;
};

const Fixture& fixture() {
    static const Fixture f = [] {
        Fixture out;
        CorpusConfig cfg;
        cfg.text_vocab_size = 6;
        cfg.speech_vocab_size = 10;
        cfg.expansion_r = 2;
        cfg.flip_p = 0.1;
        cfg.pairs = 80;
        cfg.min_text_len = 2;
        cfg.max_text_len = 6;
        RngStream rng = derive_stream(1001, 0);
        const Corpus corpus = make_synthetic_corpus(cfg, rng);
        out.channel = cfg;
        out.model = KGramModel::train(corpus, 2, 0.1);
        out.text = {0, 1, 2};
        out.reference = channel_expand_clean(out.text, cfg);
        out.reference.push_back(cfg.speech_vocab().eos);
        return out;
    }();
    return f;
}

SearchConfig small_config() {
    SearchConfig cfg;
    cfg.step_tokens_M = 4;
    cfg.max_len = 16;
    cfg.prm_switch_tokens = 8;
    cfg.temperature = 1.0;
    cfg.threads = 1;
    return cfg;
}

bool is_prefix_of(const std::vector<int>& prefix, const std::vector<int>& full) {
    return prefix.size() <= full.size() && std::equal(prefix.begin(), prefix.end(), full.begin());
}

} // namespace

// ─── Best-of-N ──────────────────────────────────────────────────────────────

TEST_CASE("a single-candidate run returns that candidate unmodified") {
    const Fixture& f = fixture();
    const SearchConfig cfg = small_config();
    const Verifier orm = Verifier::similarity(f.reference);
    const SearchOutcome outcome = best_of_n(f.model, f.text, orm, 1, 5, cfg);

    RngStream replay = derive_stream(5, candidate_stream_id(0));
    const std::vector<int> expected = f.model.generate(f.text, replay, cfg.max_len, 1.0);
    CHECK(outcome.chosen.tokens == expected);
    CHECK(outcome.chosen.finished);
    CHECK(outcome.pool.size() == 1);
    CHECK(outcome.budget.candidates_generated == 1);
    CHECK(outcome.budget.verifier_calls == 1);
    CHECK(outcome.budget.tokens_generated == static_cast<std::int64_t>(expected.size()));
}

TEST_CASE("a constant verifier makes the selection keep the first candidate") {
    const Fixture& f = fixture();
    const SearchConfig cfg = small_config();
    const SearchOutcome outcome = best_of_n(f.model, f.text, Verifier::constant(0.5), 8, 6, cfg);

    CHECK(outcome.pool.size() == 8);
    CHECK(outcome.chosen.beam_index == 0);
    RngStream replay = derive_stream(6, candidate_stream_id(0));
    CHECK(outcome.chosen.tokens == f.model.generate(f.text, replay, cfg.max_len, 1.0));
}

TEST_CASE("the selected candidate is the argmax over independently regenerated rollouts") {
    const Fixture& f = fixture();
    const SearchConfig cfg = small_config();
    const Verifier orm = Verifier::similarity(f.reference);
    const int count = 16;
    const std::uint64_t seed = 7;
    const SearchOutcome outcome = best_of_n(f.model, f.text, orm, count, seed, cfg);

    // Regenerate every candidate from its addressed stream and score it from
    // scratch; the engine must have chosen the first maximum.
    double best = -1.0;
    std::size_t best_index = 0;
    std::vector<std::vector<int>> rollouts;
    for (int i = 0; i < count; ++i) {
        RngStream stream = derive_stream(seed, candidate_stream_id(static_cast<std::uint64_t>(i)));
        rollouts.push_back(f.model.generate(f.text, stream, cfg.max_len, 1.0));
        const double s = similarity_score(rollouts.back(), f.reference);
        if (s > best) {
            best = s;
            best_index = static_cast<std::size_t>(i);
        }
    }
    REQUIRE(outcome.chosen.final_score.has_value());
    CHECK(outcome.chosen.final_score->value == best);
    CHECK(outcome.chosen.beam_index == static_cast<int>(best_index));
    CHECK(outcome.chosen.tokens == rollouts[best_index]);
    for (int i = 0; i < count; ++i) {
        CHECK(outcome.pool[static_cast<std::size_t>(i)].tokens ==
              rollouts[static_cast<std::size_t>(i)]);
    }
}

TEST_CASE("rollouts conditioned on a prompt prefix keep it and bill only new tokens") {
    const Fixture& f = fixture();
    SearchConfig cfg = small_config();
    cfg.speech_prefix = {0, 1};
    const SearchOutcome outcome =
        best_of_n(f.model, f.text, Verifier::similarity(f.reference), 4, 8, cfg);

    std::int64_t expected_tokens = 0;
    for (const Candidate& cand : outcome.pool) {
        CHECK(is_prefix_of(cfg.speech_prefix, cand.tokens));
        expected_tokens += static_cast<std::int64_t>(cand.tokens.size() - 2);
    }
    CHECK(outcome.budget.tokens_generated == expected_tokens);
    CHECK(outcome.budget.verifier_calls == 4);
}

TEST_CASE("best-of-N rejects a non-positive candidate count") {
    const Fixture& f = fixture();
    CHECK_THROWS_AS(
        best_of_n(f.model, f.text, Verifier::constant(0.0), 0, 1, small_config()),
        ConfigError);
}

// ─── Guided beam search ─────────────────────────────────────────────────────

TEST_CASE("a width-one single-expansion guided run replays plain generation") {
    const Fixture& f = fixture();
    const SearchConfig cfg = small_config();
    const Verifier prm = Verifier::similarity(f.reference);
    const SearchOutcome outcome = prm_beam_search(f.model, f.text, prm, cfg, 9);

    RngStream replay = derive_stream(9, beam_stream_id(0));
    const std::vector<int> expected = f.model.generate(f.text, replay, cfg.max_len, 1.0);
    CHECK(outcome.chosen.tokens == expected);
    CHECK(outcome.chosen.finished);
    CHECK(outcome.budget.candidates_generated == 1);
}

TEST_CASE("one guided step pools N expansions per live beam") {
    const Fixture& f = fixture();
    SearchConfig cfg = small_config();
    cfg.beam_width_B = 2;
    cfg.expansions_N = 3;
    const Verifier prm = Verifier::similarity(f.reference);
    const SearchOutcome outcome = prm_beam_search(f.model, f.text, prm, cfg, 10);

    REQUIRE(!outcome.steps.empty());
    CHECK(outcome.steps.front().pool.size() == 6); // both initial beams live
    CHECK(outcome.steps.front().selected.size() == 2);
    CHECK(outcome.budget.candidates_generated == 6);
    CHECK(outcome.beams.size() == 2);
    for (const Candidate& beam : outcome.beams) {
        CHECK(beam.finished);
    }
}

TEST_CASE("the candidate budget of a guided run is width times expansions") {
    const Fixture& f = fixture();
    SearchConfig cfg = small_config();
    cfg.beam_width_B = 16;
    cfg.expansions_N = 16;
    cfg.max_len = 12;
    cfg.prm_switch_tokens = 8;
    const Verifier prm = Verifier::similarity(f.reference);
    const SearchOutcome outcome = prm_beam_search(f.model, f.text, prm, cfg, 11);
    CHECK(outcome.budget.candidates_generated == 256);

    // Verifier calls: exactly one per expansion job across all steps
    // (passthroughs are never re-scored).
    std::int64_t expected_calls = 0;
    for (std::size_t s = 0; s < outcome.steps.size(); ++s) {
        for (const Candidate& cand : outcome.steps[s].pool) {
            if (cand.step_index == static_cast<int>(s) + 1) {
                ++expected_calls;
            }
        }
    }
    CHECK(outcome.budget.verifier_calls == expected_calls);
}

TEST_CASE("every guided step keeps the verifier's top beams") {
    const Fixture& f = fixture();
    SearchConfig cfg = small_config();
    cfg.beam_width_B = 3;
    cfg.expansions_N = 4;
    const Verifier prm = Verifier::similarity(f.reference);
    const SearchOutcome outcome = prm_beam_search(f.model, f.text, prm, cfg, 12);

    REQUIRE(!outcome.steps.empty());
    for (const StepTrace& step : outcome.steps) {
        // Re-score the whole pool from scratch and re-run the selection rule:
        // score descending, pool index ascending, keep the top B.
        std::vector<double> rescored(step.pool.size());
        for (std::size_t i = 0; i < step.pool.size(); ++i) {
            const Candidate& cand = step.pool[i];
            rescored[i] = prm.score(cand.tokens, cand.finished).value;
            REQUIRE(cand.final_score.has_value());
            CHECK(cand.final_score->value == rescored[i]);
        }
        std::vector<std::size_t> order(step.pool.size());
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            if (rescored[a] != rescored[b]) {
                return rescored[a] > rescored[b];
            }
            return a < b;
        });
        const std::size_t keep = std::min(order.size(), std::size_t{3});
        REQUIRE(step.selected.size() == keep);
        for (std::size_t r = 0; r < keep; ++r) {
            CHECK(step.selected[r] == order[r]);
        }
    }
}

TEST_CASE("reranking selects from the final pool with the requested keys") {
    const Fixture& f = fixture();
    SearchConfig cfg = small_config();
    cfg.beam_width_B = 4;
    cfg.expansions_N = 4;
    cfg.final_rerank = {"wer", "similarity"};
    const Verifier prm = Verifier::similarity(f.reference);
    const Verifier rerank = Verifier::composite(
        {Verifier::similarity(f.reference), Verifier::transcription(f.text, f.channel)});
    const SearchOutcome outcome = prm_beam_search(f.model, f.text, prm, cfg, 13, &rerank);

    // The chosen candidate must be what a fresh lexicographic selection over
    // the re-scored final pool picks.
    std::vector<Score> scores;
    for (const Candidate& cand : outcome.pool) {
        scores.push_back(rerank.score(cand.tokens, cand.finished));
    }
    const std::size_t pick = composite_select(scores, cfg.final_rerank);
    CHECK(outcome.chosen.tokens == outcome.pool[pick].tokens);
    REQUIRE(outcome.chosen.final_score.has_value());
    CHECK(outcome.chosen.final_score->components.at("wer") == scores[pick].components.at("wer"));
    CHECK(outcome.chosen.final_score->components.at("similarity") ==
          scores[pick].components.at("similarity"));
}

TEST_CASE("guided search refuses output-only verifiers and dangling rerank keys") {
    const Fixture& f = fixture();
    const SearchConfig cfg = small_config();
    const Verifier output_only = Verifier::transcription(f.text, f.channel);
    CHECK_THROWS_AS(prm_beam_search(f.model, f.text, output_only, cfg, 1), ConfigError);
    CHECK_THROWS_AS(
        partial_prm(f.model, f.text, output_only, Verifier::constant(0.0), cfg, 1),
        ConfigError);

    SearchConfig rerank_cfg = small_config();
    rerank_cfg.final_rerank = {"similarity"};
    const Verifier prm = Verifier::similarity(f.reference);
    CHECK_THROWS_AS(prm_beam_search(f.model, f.text, prm, rerank_cfg, 1, nullptr), ConfigError);
}

TEST_CASE("a terminal prompt prefix short-circuits the guided phase") {
    const Fixture& f = fixture();
    SearchConfig cfg = small_config();
    cfg.beam_width_B = 3;
    cfg.expansions_N = 2;
    cfg.speech_prefix = {1, f.model.speech_vocab().eos};
    const Verifier prm = Verifier::similarity(f.reference);
    const SearchOutcome outcome = prm_beam_search(f.model, f.text, prm, cfg, 14);

    CHECK(outcome.steps.empty());
    CHECK(outcome.chosen.tokens == cfg.speech_prefix);
    CHECK(outcome.chosen.finished);
    CHECK(outcome.budget.tokens_generated == 0);
    CHECK(outcome.budget.verifier_calls == 1); // the winner is scored once

    // Independent rollouts behave identically on a terminal prefix.
    const SearchOutcome bo = best_of_n(f.model, f.text, prm, 4, 14, cfg);
    for (const Candidate& cand : bo.pool) {
        CHECK(cand.tokens == cfg.speech_prefix);
    }
    CHECK(bo.budget.tokens_generated == 0);
}

// ─── Hybrid ─────────────────────────────────────────────────────────────────

TEST_CASE("a zero-length guided phase reproduces independent rollouts draw for draw") {
    const Fixture& f = fixture();
    SearchConfig cfg = small_config();
    cfg.beam_width_B = 4;
    cfg.expansions_N = 4;
    cfg.prm_switch_tokens = 0;
    const Verifier prm = Verifier::similarity(f.reference);
    const std::uint64_t seed = 15;

    const SearchOutcome hybrid = partial_prm(f.model, f.text, prm, prm, cfg, seed);
    const SearchOutcome flat = best_of_n(f.model, f.text, prm, 16, seed, cfg);

    CHECK(hybrid.steps.empty());
    CHECK(hybrid.chosen.tokens == flat.chosen.tokens);
    REQUIRE(hybrid.pool.size() == flat.pool.size());
    for (std::size_t i = 0; i < flat.pool.size(); ++i) {
        CHECK(hybrid.pool[i].tokens == flat.pool[i].tokens);
    }
    CHECK(hybrid.budget.candidates_generated == flat.budget.candidates_generated);
    CHECK(hybrid.budget.tokens_generated == flat.budget.tokens_generated);
    CHECK(hybrid.budget.verifier_calls == flat.budget.verifier_calls);
}

TEST_CASE("a full-length guided phase reproduces guided search") {
    const Fixture& f = fixture();
    SearchConfig cfg = small_config();
    cfg.beam_width_B = 3;
    cfg.expansions_N = 3;
    cfg.prm_switch_tokens = cfg.max_len;
    const Verifier prm = Verifier::similarity(f.reference);
    const std::uint64_t seed = 16;

    const SearchOutcome hybrid = partial_prm(f.model, f.text, prm, prm, cfg, seed);
    const SearchOutcome guided = prm_beam_search(f.model, f.text, prm, cfg, seed);

    CHECK(hybrid.chosen.tokens == guided.chosen.tokens);
    REQUIRE(hybrid.chosen.final_score.has_value());
    REQUIRE(guided.chosen.final_score.has_value());
    CHECK(hybrid.chosen.final_score->value == guided.chosen.final_score->value);
    REQUIRE(hybrid.steps.size() == guided.steps.size());
    for (std::size_t s = 0; s < guided.steps.size(); ++s) {
        CHECK(hybrid.steps[s].selected == guided.steps[s].selected);
    }
}

TEST_CASE("hybrid completions extend the surviving guided beams") {
    const Fixture& f = fixture();
    SearchConfig cfg = small_config();
    cfg.beam_width_B = 4;
    cfg.expansions_N = 4;
    cfg.max_len = 20;
    cfg.prm_switch_tokens = 8;
    const Verifier prm = Verifier::similarity(f.reference);
    const Verifier orm = Verifier::composite(
        {Verifier::similarity(f.reference), Verifier::transcription(f.text, f.channel)});
    const SearchOutcome outcome = partial_prm(f.model, f.text, prm, orm, cfg, 17);

    REQUIRE(outcome.beams.size() == 4);
    REQUIRE(outcome.pool.size() == 16);
    for (std::size_t i = 0; i < outcome.pool.size(); ++i) {
        const Candidate& cand = outcome.pool[i];
        CHECK(cand.finished);
        CHECK(cand.beam_index == static_cast<int>(i / 4));
        const Candidate& parent = outcome.beams[static_cast<std::size_t>(cand.beam_index)];
        CHECK(is_prefix_of(parent.tokens, cand.tokens));
    }
    CHECK(outcome.budget.verifier_calls >= 16); // phase-2 scores at minimum
}

// ─── Threading ──────────────────────────────────────────────────────────────

TEST_CASE("outcomes are identical under any thread count") {
    const Fixture& f = fixture();
    SearchConfig cfg = small_config();
    cfg.beam_width_B = 4;
    cfg.expansions_N = 4;
    const Verifier prm = Verifier::similarity(f.reference);
    const Verifier orm = Verifier::composite(
        {Verifier::similarity(f.reference), Verifier::transcription(f.text, f.channel)});

    SearchConfig wide = cfg;
    wide.threads = 8;

    const SearchOutcome g1 = prm_beam_search(f.model, f.text, prm, cfg, 18);
    const SearchOutcome g8 = prm_beam_search(f.model, f.text, prm, wide, 18);
    CHECK(g1.chosen.tokens == g8.chosen.tokens);
    REQUIRE(g1.steps.size() == g8.steps.size());
    for (std::size_t s = 0; s < g1.steps.size(); ++s) {
        CHECK(g1.steps[s].selected == g8.steps[s].selected);
        REQUIRE(g1.steps[s].pool.size() == g8.steps[s].pool.size());
        for (std::size_t i = 0; i < g1.steps[s].pool.size(); ++i) {
            CHECK(g1.steps[s].pool[i].tokens == g8.steps[s].pool[i].tokens);
        }
    }
    CHECK(g1.budget.tokens_generated == g8.budget.tokens_generated);
    CHECK(g1.budget.verifier_calls == g8.budget.verifier_calls);

    const SearchOutcome h1 = partial_prm(f.model, f.text, prm, orm, cfg, 19);
    const SearchOutcome h8 = partial_prm(f.model, f.text, prm, orm, wide, 19);
    CHECK(h1.chosen.tokens == h8.chosen.tokens);
    REQUIRE(h1.pool.size() == h8.pool.size());
    for (std::size_t i = 0; i < h1.pool.size(); ++i) {
        CHECK(h1.pool[i].tokens == h8.pool[i].tokens);
    }
    CHECK(h1.budget.tokens_generated == h8.budget.tokens_generated);

    const SearchOutcome b1 = best_of_n(f.model, f.text, orm, 16, 20, cfg);
    const SearchOutcome b8 = best_of_n(f.model, f.text, orm, 16, 20, wide);
    CHECK(b1.chosen.tokens == b8.chosen.tokens);
    CHECK(b1.budget.tokens_generated == b8.budget.tokens_generated);
}

// ─── Configuration ──────────────────────────────────────────────────────────

TEST_CASE("search configuration validation rejects out-of-range values") {
    SearchConfig cfg = small_config();
    cfg.beam_width_B = 0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);

    cfg = small_config();
    cfg.expansions_N = 0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);

    cfg = small_config();
    cfg.step_tokens_M = 0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);

    cfg = small_config();
    cfg.max_len = 0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);

    cfg = small_config();
    cfg.prm_switch_tokens = -1;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);

    cfg = small_config();
    cfg.prm_switch_tokens = cfg.max_len + 1;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);

    cfg = small_config();
    cfg.temperature = 0.0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);

    cfg = small_config();
    cfg.threads = 0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);

    cfg = small_config();
    cfg.speech_prefix.assign(static_cast<std::size_t>(cfg.max_len) + 1, 0);
    CHECK_THROWS_AS(cfg.validate(), ConfigError);

    CHECK_NOTHROW(small_config().validate());
}
