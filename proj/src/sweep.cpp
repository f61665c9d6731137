#include "ttc/sweep.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>

#include "ttc/errors.hpp"
#include "ttc/parallel.hpp"

namespace ttc {

namespace {

const std::vector<std::string> kAlgorithms = {"best_of_n", "prm_beam", "prm_beam_wer",
                                              "partial_prm", "partial_prm_wer"};

bool known_algorithm(const std::string& name) {
    return std::find(kAlgorithms.begin(), kAlgorithms.end(), name) != kAlgorithms.end();
}

} // namespace

void SweepSpec::validate() const {
    testbed.validate();
    search.validate();
    if (algorithms.empty()) {
        throw ConfigError("sweep needs at least one algorithm");
    }
    for (const std::string& name : algorithms) {
        if (!known_algorithm(name)) {
            throw ConfigError("unknown sweep algorithm '" + name + "'");
        }
    }
    if (budgets.empty()) {
        throw ConfigError("sweep needs at least one budget");
    }
    for (std::size_t i = 0; i < budgets.size(); ++i) {
        if (budgets[i] < 1) {
            throw ConfigError("budgets must be positive");
        }
        if (i > 0 && budgets[i] <= budgets[i - 1]) {
            throw ConfigError("budgets must be strictly increasing");
        }
    }
    if (seeds < 1) {
        throw ConfigError("sweep needs at least one seed");
    }
    if (threads < 1) {
        throw ConfigError("threads must be at least 1");
    }

    const bool any_guided = std::any_of(algorithms.begin(), algorithms.end(),
                                        [](const std::string& a) { return a != "best_of_n"; });
    if (any_guided) {
        for (int budget : budgets) {
            int b = 0;
            int n = 0;
            budget_to_beams(budget, b, n); // throws when not a perfect square
        }
    }
}

void budget_to_beams(int budget, int& beam_width, int& expansions) {
    int root = 0;
    while ((root + 1) * (root + 1) <= budget) {
        ++root;
    }
    if (root * root != budget) {
        throw ConfigError("guided algorithms need a perfect-square budget, got " +
                          std::to_string(budget));
    }
    beam_width = root;
    expansions = root;
}

SweepRow run_cell(const Testbed& tb, const SearchConfig& search, const std::string& algorithm,
                  int budget, std::uint64_t seed) {
    if (!known_algorithm(algorithm)) {
        throw ConfigError("unknown sweep algorithm '" + algorithm + "'");
    }

    const Instance inst = make_instance(tb, seed);
    const Verifier similarity = Verifier::similarity(inst.reference);
    const Verifier transcription = Verifier::transcription(inst.text, tb.cfg.corpus);
    const Verifier both = Verifier::composite({similarity, transcription});

    SearchConfig cfg = search;
    cfg.threads = 1; // cells are the parallel unit; keep each run serial

    SearchOutcome outcome;
    if (algorithm == "best_of_n") {
        cfg.beam_width_B = 1;
        cfg.expansions_N = budget;
        outcome = best_of_n(tb.model, inst.text, similarity, budget, seed, cfg);
    } else {
        budget_to_beams(budget, cfg.beam_width_B, cfg.expansions_N);
        if (algorithm == "prm_beam") {
            outcome = prm_beam_search(tb.model, inst.text, similarity, cfg, seed);
        } else if (algorithm == "prm_beam_wer") {
            cfg.final_rerank = {"wer", "similarity"};
            outcome = prm_beam_search(tb.model, inst.text, similarity, cfg, seed, &both);
        } else if (algorithm == "partial_prm") {
            outcome = partial_prm(tb.model, inst.text, similarity, similarity, cfg, seed);
        } else {
            cfg.final_rerank = {"wer", "similarity"};
            outcome = partial_prm(tb.model, inst.text, similarity, both, cfg, seed);
        }
    }

    SweepRow row;
    row.algorithm = algorithm;
    row.budget = budget;
    row.seed = seed;
    row.similarity = instance_similarity(inst, outcome.chosen.tokens);
    row.wer = instance_wer(tb, inst, outcome.chosen.tokens);
    row.tokens = outcome.budget.tokens_generated;
    return row;
}

SweepResult run_sweep(const SweepSpec& spec) {
    spec.validate();
    const Testbed tb = build_testbed(spec.testbed);

    const std::size_t cells = spec.algorithms.size() * spec.budgets.size() *
                              static_cast<std::size_t>(spec.seeds);
    SweepResult result;
    result.rows.resize(cells);

    // Cell index → (algorithm, budget, seed), seeds innermost; each cell
    // writes only its own row, so the worker count cannot change the output.
    parallel_for(cells, spec.threads, [&](std::size_t i) {
        const std::size_t per_algorithm = spec.budgets.size() * static_cast<std::size_t>(spec.seeds);
        const std::size_t a = i / per_algorithm;
        const std::size_t b = (i % per_algorithm) / static_cast<std::size_t>(spec.seeds);
        const std::uint64_t seed = spec.base_seed + i % static_cast<std::size_t>(spec.seeds);
        result.rows[i] = run_cell(tb, spec.search, spec.algorithms[a], spec.budgets[b], seed);
    });
    return result;
}

void write_sweep_csv(const SweepResult& result, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError("cannot open '" + path + "' for writing");
    }
    out << "algorithm,budget,seed,similarity,wer,tokens\n";
    char line[256];
    for (const SweepRow& row : result.rows) {
        std::snprintf(line, sizeof(line), "%s,%d,%llu,%.6f,%.6f,%lld", row.algorithm.c_str(),
                      row.budget, static_cast<unsigned long long>(row.seed), row.similarity,
                      row.wer, static_cast<long long>(row.tokens));
        out << line << '\n';
    }
    if (!out) {
        throw IoError("write to '" + path + "' failed");
    }
}

} // namespace ttc
