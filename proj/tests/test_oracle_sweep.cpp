#include "doctest.h"

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>
#include <vector>

#include "ttc/errors.hpp"
#include "ttc/oracle.hpp"
#include "ttc/sweep.hpp"
#include "ttc/testbed.hpp"
#include "ttc/verify.hpp"

using namespace ttc;

namespace {

TestbedConfig small_testbed_config() {
    TestbedConfig cfg;
    cfg.corpus.text_vocab_size = 6;
    cfg.corpus.speech_vocab_size = 10;
    cfg.corpus.expansion_r = 2;
    cfg.corpus.flip_p = 0.1;
    cfg.corpus.pairs = 80;
    cfg.corpus.min_text_len = 2;
    cfg.corpus.max_text_len = 6;
    cfg.order_k = 2;
    cfg.alpha = 0.1;
    cfg.corpus_seed = 55;
    cfg.instance_text_len = 6;
    cfg.reference_prefix_overlap = 4;
    return cfg;
}

SearchConfig small_search_config() {
    SearchConfig cfg;
    cfg.step_tokens_M = 4;
    cfg.max_len = 16;
    cfg.prm_switch_tokens = 8;
    return cfg;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

} // namespace

// ─── Brute-force oracle ─────────────────────────────────────────────────────

TEST_CASE("the oracle finds the exact reference under a similarity verifier") {
    const Vocab vocab = make_vocab(2, VocabKind::speech);
    const std::vector<int> reference = {1, 0, 1};
    const OracleResult result =
        brute_force_optimum(vocab, Verifier::similarity(reference), 3);
    CHECK(result.best_tokens == reference);
    CHECK(result.best_score == 1.0);
    CHECK(result.enumerated == 15); // 1 + 2 + 4 + 8 sequences of length 0..3
}

TEST_CASE("under a constant verifier the oracle keeps the lexicographically smallest sequence") {
    const Vocab vocab = make_vocab(3, VocabKind::speech);
    const OracleResult result = brute_force_optimum(vocab, Verifier::constant(1.0), 2);
    CHECK(result.best_tokens.empty()); // the empty sequence precedes everything
    CHECK(result.best_score == 1.0);
    CHECK(result.enumerated == 13); // 1 + 3 + 9
}

TEST_CASE("the oracle agrees with an independent enumeration") {
    // Re-enumerate every sequence of length 0..4 over a 3-token vocab in a
    // different order (recursive, depth first) and apply the documented
    // selection rule from scratch.
    const Vocab vocab = make_vocab(3, VocabKind::speech);
    const std::vector<int> reference = {2, 0, 1, 2};
    const Verifier verifier = Verifier::similarity(reference);

    std::vector<int> best_tokens;
    double best_score = -1.0;
    std::uint64_t enumerated = 0;
    std::vector<int> seq;
    auto visit = [&](auto&& self) -> void {
        const double score = verifier.score(seq, true).value;
        ++enumerated;
        if (score > best_score ||
            (score == best_score &&
             std::lexicographical_compare(seq.begin(), seq.end(), best_tokens.begin(),
                                          best_tokens.end()))) {
            best_score = score;
            best_tokens = seq;
        }
        if (seq.size() == 4) {
            return;
        }
        for (int y = 0; y < 3; ++y) {
            seq.push_back(y);
            self(self);
            seq.pop_back();
        }
    };
    visit(visit);

    const OracleResult result = brute_force_optimum(vocab, verifier, 4);
    CHECK(result.enumerated == enumerated);
    CHECK(result.enumerated == 121); // 1 + 3 + 9 + 27 + 81
    CHECK(result.best_score == best_score);
    CHECK(result.best_tokens == best_tokens);
    CHECK(result.best_tokens == reference);
}

TEST_CASE("the oracle refuses enumerations beyond its guard") {
    const Vocab vocab = make_vocab(10, VocabKind::speech);
    CHECK_THROWS_AS(brute_force_optimum(vocab, Verifier::constant(0.0), 7), ConfigError);
    CHECK_THROWS_AS(brute_force_optimum(vocab, Verifier::constant(0.0), -1), ConfigError);
    CHECK_NOTHROW(brute_force_optimum(vocab, Verifier::constant(0.0), 4));
}

// ─── Budget geometry ────────────────────────────────────────────────────────

TEST_CASE("perfect-square budgets map to square beam geometries") {
    int b = 0;
    int n = 0;
    budget_to_beams(1, b, n);
    CHECK(b == 1);
    CHECK(n == 1);
    budget_to_beams(4, b, n);
    CHECK(b == 2);
    CHECK(n == 2);
    budget_to_beams(16, b, n);
    CHECK(b == 4);
    CHECK(n == 4);
    budget_to_beams(256, b, n);
    CHECK(b == 16);
    CHECK(n == 16);
    CHECK_THROWS_AS(budget_to_beams(2, b, n), ConfigError);
    CHECK_THROWS_AS(budget_to_beams(3, b, n), ConfigError);
    CHECK_THROWS_AS(budget_to_beams(8, b, n), ConfigError);
    CHECK_THROWS_AS(budget_to_beams(15, b, n), ConfigError);
}

// ─── Sweep specification ────────────────────────────────────────────────────

TEST_CASE("sweep validation pins down malformed grids") {
    SweepSpec spec;
    spec.testbed = small_testbed_config();
    spec.search = small_search_config();
    spec.algorithms = {"best_of_n", "prm_beam"};
    spec.budgets = {1, 4, 16};
    spec.seeds = 3;
    CHECK_NOTHROW(spec.validate());

    SweepSpec bad = spec;
    bad.algorithms = {};
    CHECK_THROWS_AS(bad.validate(), ConfigError);

    bad = spec;
    bad.algorithms = {"best_of_n", "gradient_descent"};
    CHECK_THROWS_AS(bad.validate(), ConfigError);

    bad = spec;
    bad.budgets = {};
    CHECK_THROWS_AS(bad.validate(), ConfigError);

    bad = spec;
    bad.budgets = {4, 4};
    CHECK_THROWS_AS(bad.validate(), ConfigError);

    bad = spec;
    bad.budgets = {0, 4};
    CHECK_THROWS_AS(bad.validate(), ConfigError);

    bad = spec;
    bad.seeds = 0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);

    bad = spec;
    bad.threads = 0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);

    // Non-square budgets are fine for pure sampling, fatal with any guided
    // algorithm in the grid.
    bad = spec;
    bad.algorithms = {"best_of_n"};
    bad.budgets = {1, 2, 8};
    CHECK_NOTHROW(bad.validate());
    bad.algorithms = {"best_of_n", "partial_prm"};
    CHECK_THROWS_AS(bad.validate(), ConfigError);
}

// ─── Cells and grids ────────────────────────────────────────────────────────

TEST_CASE("a sweep cell reproduces a hand-made run of the same instance") {
    const Testbed tb = build_testbed(small_testbed_config());
    const SearchConfig search = small_search_config();
    const std::uint64_t seed = 3;
    const SweepRow row = run_cell(tb, search, "best_of_n", 8, seed);

    const Instance inst = make_instance(tb, seed);
    SearchConfig cfg = search;
    cfg.beam_width_B = 1;
    cfg.expansions_N = 8;
    const SearchOutcome outcome =
        best_of_n(tb.model, inst.text, Verifier::similarity(inst.reference), 8, seed, cfg);

    CHECK(row.algorithm == "best_of_n");
    CHECK(row.budget == 8);
    CHECK(row.seed == seed);
    CHECK(row.similarity == instance_similarity(inst, outcome.chosen.tokens));
    CHECK(row.wer == instance_wer(tb, inst, outcome.chosen.tokens));
    CHECK(row.tokens == outcome.budget.tokens_generated);

    CHECK_THROWS_AS(run_cell(tb, search, "simulated_annealing", 8, seed), ConfigError);
}

TEST_CASE("guided sweep cells agree with direct searches") {
    const Testbed tb = build_testbed(small_testbed_config());
    const SearchConfig search = small_search_config();
    const std::uint64_t seed = 4;
    const Instance inst = make_instance(tb, seed);
    const Verifier similarity = Verifier::similarity(inst.reference);

    SearchConfig cfg = search;
    cfg.beam_width_B = 2;
    cfg.expansions_N = 2;

    const SweepRow guided = run_cell(tb, search, "prm_beam", 4, seed);
    const SearchOutcome direct = prm_beam_search(tb.model, inst.text, similarity, cfg, seed);
    CHECK(guided.similarity == instance_similarity(inst, direct.chosen.tokens));
    CHECK(guided.tokens == direct.budget.tokens_generated);

    const SweepRow hybrid = run_cell(tb, search, "partial_prm", 4, seed);
    const SearchOutcome direct_hybrid =
        partial_prm(tb.model, inst.text, similarity, similarity, cfg, seed);
    CHECK(hybrid.similarity == instance_similarity(inst, direct_hybrid.chosen.tokens));
    CHECK(hybrid.tokens == direct_hybrid.budget.tokens_generated);
}

TEST_CASE("a sweep enumerates its grid with seeds innermost") {
    SweepSpec spec;
    spec.testbed = small_testbed_config();
    spec.search = small_search_config();
    spec.algorithms = {"best_of_n", "partial_prm"};
    spec.budgets = {1, 4};
    spec.seeds = 3;
    spec.base_seed = 100;

    const SweepResult result = run_sweep(spec);
    REQUIRE(result.rows.size() == 12);
    std::size_t i = 0;
    for (const std::string& algorithm : spec.algorithms) {
        for (int budget : spec.budgets) {
            for (int r = 0; r < spec.seeds; ++r) {
                const SweepRow& row = result.rows[i++];
                CHECK(row.algorithm == algorithm);
                CHECK(row.budget == budget);
                CHECK(row.seed == 100 + static_cast<std::uint64_t>(r));
            }
        }
    }

    // Every row must match an independently computed cell.
    const Testbed tb = build_testbed(spec.testbed);
    for (const SweepRow& row : result.rows) {
        const SweepRow expected = run_cell(tb, spec.search, row.algorithm, row.budget, row.seed);
        CHECK(row.similarity == expected.similarity);
        CHECK(row.wer == expected.wer);
        CHECK(row.tokens == expected.tokens);
    }
}

TEST_CASE("sweeps are reproducible and thread-count independent") {
    SweepSpec spec;
    spec.testbed = small_testbed_config();
    spec.search = small_search_config();
    spec.algorithms = {"best_of_n", "prm_beam_wer", "partial_prm_wer"};
    spec.budgets = {1, 4};
    spec.seeds = 2;

    const SweepResult first = run_sweep(spec);
    const SweepResult again = run_sweep(spec);
    SweepSpec wide = spec;
    wide.threads = 4;
    const SweepResult parallel = run_sweep(wide);

    REQUIRE(first.rows.size() == again.rows.size());
    REQUIRE(first.rows.size() == parallel.rows.size());
    for (std::size_t i = 0; i < first.rows.size(); ++i) {
        CHECK(first.rows[i].similarity == again.rows[i].similarity);
        CHECK(first.rows[i].wer == again.rows[i].wer);
        CHECK(first.rows[i].tokens == again.rows[i].tokens);
        CHECK(first.rows[i].similarity == parallel.rows[i].similarity);
        CHECK(first.rows[i].wer == parallel.rows[i].wer);
        CHECK(first.rows[i].tokens == parallel.rows[i].tokens);
    }
}

// ─── CSV output ─────────────────────────────────────────────────────────────

TEST_CASE("sweep CSVs carry the fixed header and one row per cell, byte-stable") {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "ttc_sweep_test";
    fs::create_directories(dir);
    const std::string path = (dir / "rows.csv").string();
    const std::string path2 = (dir / "rows2.csv").string();

    SweepResult result;
    SweepRow row;
    row.algorithm = "best_of_n";
    row.budget = 4;
    row.seed = 9;
    row.similarity = 0.5;
    row.wer = 1.25;
    row.tokens = 123;
    result.rows.push_back(row);
    row.algorithm = "prm_beam";
    row.similarity = 1.0 / 3.0;
    result.rows.push_back(row);

    write_sweep_csv(result, path);
    const std::string content = slurp(path);
    std::istringstream lines(content);
    std::string line;
    REQUIRE(std::getline(lines, line));
    CHECK(line == "algorithm,budget,seed,similarity,wer,tokens");
    REQUIRE(std::getline(lines, line));
    CHECK(line == "best_of_n,4,9,0.500000,1.250000,123");
    REQUIRE(std::getline(lines, line));
    CHECK(line == "prm_beam,4,9,0.333333,1.250000,123");
    CHECK(!std::getline(lines, line));

    write_sweep_csv(result, path2);
    CHECK(slurp(path2) == content);

    CHECK_THROWS_AS(write_sweep_csv(result, (dir / "missing" / "rows.csv").string()), IoError);
}
