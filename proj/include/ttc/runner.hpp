#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ttc/kgram.hpp"
#include "ttc/search.hpp"
#include "ttc/sweep.hpp"

namespace ttc {

// ─── Run configuration ──────────────────────────────────────────────────────
//
// A run config JSON names one algorithm, its search parameters, the seed,
// and the instance material — either a self-contained "testbed" block (the
// model is trained in-process and the instance derives from the seed) or an
// explicit "model" path with "text", optional "reference", and an optional
// "channel" block for transcription scoring:
//
//   {
//     "format_version": 1,
//     "algorithm": "best_of_n" | "prm_beam" | "partial_prm",
//     "B": 4, "N": 4, "M": 4, "max_len": 24, "switch_tokens": 12,
//     "temperature": 1.0, "seed": 7, "threads": 1,
//     "verifiers": {"kind": "similarity" | "wer" | "composite", "keys": [...]},
//     "final_rerank": ["wer", "similarity"],
//     "testbed": { ... } | "model": "model.json", "text": [...],
//     "reference": [...], "channel": {"expansion_r": 2}
//   }

struct RunSetup {
    std::string algorithm;
    SearchConfig search;
    std::uint64_t seed = 0;
    KGramModel model;
    std::vector<int> text;
    std::vector<int> reference;      // empty ⇒ no similarity material
    bool has_channel = false;        // transcription scoring possible
    CorpusConfig channel;
    std::string verifier_kind;       // similarity | wer | composite
    std::vector<std::string> verifier_keys;
    int oracle_max_len = 0;          // enumeration cap for the oracle command
};

// Parses and validates a run config file. Overrides, when present, replace
// the config's seed / thread count before the instance material is derived.
RunSetup load_run_setup(const std::string& config_path,
                        std::optional<std::uint64_t> seed_override,
                        std::optional<int> threads_override);

// Dispatches the configured algorithm and serializes the outcome: chosen
// tokens, available metric scores (WER un-negated), and the budget.
nlohmann::json execute_search(const RunSetup& setup);

// Brute-force enumeration under the configured verifier, bound-guarded.
nlohmann::json execute_oracle(const RunSetup& setup);

// ─── Sweep configuration ────────────────────────────────────────────────────
//
//   {
//     "format_version": 1,
//     "testbed": { ... },
//     "algorithms": ["best_of_n", "prm_beam", ...],
//     "budgets": [1, 4, 16, 64, 256],
//     "seeds": 200, "seed": 0,
//     "M": 4, "max_len": 24, "switch_tokens": 12, "temperature": 1.0,
//     "threads": 1
//   }

SweepSpec load_sweep_spec(const std::string& config_path,
                          std::optional<std::uint64_t> seed_override,
                          std::optional<int> threads_override);

// Shared parser for the "testbed" JSON block.
TestbedConfig testbed_from_json(const nlohmann::json& block);

} // namespace ttc
