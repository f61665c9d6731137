#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ttc/search.hpp"
#include "ttc/testbed.hpp"

namespace ttc {

// ─── Compute-scaling sweep ──────────────────────────────────────────────────
//
// Runs a grid of (algorithm, budget, seed) cells on the testbed and records
// the selected candidate's similarity, transcription WER, and token cost.
// Budgets count full-candidate equivalents: best_of_n uses `budget`
// candidates, guided algorithms use B = N = sqrt(budget).
//
// Algorithm names:
//   best_of_n        independent sampling, similarity argmax
//   prm_beam         guided beam search, best final beam by similarity
//   prm_beam_wer     guided beam search, final pool re-ranked by WER
//   partial_prm      guided prefix + independent completions, similarity argmax
//   partial_prm_wer  guided prefix + independent completions, WER re-ranked

struct SweepSpec {
    TestbedConfig testbed = TestbedConfig::standard();
    std::vector<std::string> algorithms;
    std::vector<int> budgets;        // strictly increasing
    int seeds = 30;                  // replicates per cell
    std::uint64_t base_seed = 0;     // replicate r runs at seed base_seed + r
    SearchConfig search;             // M, max_len, switch boundary, temperature
    int threads = 1;

    void validate() const;
};

struct SweepRow {
    std::string algorithm;
    int budget = 0;
    std::uint64_t seed = 0;
    double similarity = 0.0;
    double wer = 0.0;
    std::int64_t tokens = 0;
};

struct SweepResult {
    std::vector<SweepRow> rows; // (algorithm, budget, seed) order, seeds innermost
};

// Beam geometry for a guided algorithm at a candidate budget; throws
// ConfigError when the budget is not a perfect square.
void budget_to_beams(int budget, int& beam_width, int& expansions);

// One cell: build the instance for `seed`, run `algorithm`, measure the
// chosen candidate.
SweepRow run_cell(const Testbed& tb, const SearchConfig& search, const std::string& algorithm,
                  int budget, std::uint64_t seed);

SweepResult run_sweep(const SweepSpec& spec);

// CSV with header `algorithm,budget,seed,similarity,wer,tokens`; fixed
// 6-decimal floats keep the bytes reproducible.
void write_sweep_csv(const SweepResult& result, const std::string& path);

} // namespace ttc
