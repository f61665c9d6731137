#include "ttc/search.hpp"

#include <algorithm>
#include <numeric>

#include "ttc/errors.hpp"
#include "ttc/parallel.hpp"
#include "ttc/rng.hpp"

namespace ttc {

// ─── Config validation ──────────────────────────────────────────────────────

void SearchConfig::validate() const {
    if (beam_width_B < 1 || expansions_N < 1 || step_tokens_M < 1) {
        throw ConfigError("beam width, expansions, and step tokens must all be at least 1");
    }
    if (max_len < 1) {
        throw ConfigError("max_len must be at least 1");
    }
    if (prm_switch_tokens < 0 || prm_switch_tokens > max_len) {
        throw ConfigError("prm_switch_tokens must lie in [0, max_len]");
    }
    if (!(temperature > 0.0)) {
        throw ConfigError("temperature must be positive");
    }
    if (threads < 1) {
        throw ConfigError("threads must be at least 1");
    }
    if (static_cast<int>(speech_prefix.size()) > max_len) {
        throw ConfigError("speech prefix is longer than max_len");
    }
}

namespace {

// ─── Shared rollout machinery ───────────────────────────────────────────────

struct BeamState {
    Candidate cand;
    RngStream stream;
};

bool is_terminal(const std::vector<int>& tokens, int eos, int max_len) {
    return static_cast<int>(tokens.size()) >= max_len ||
           (!tokens.empty() && tokens.back() == eos);
}

// Draws up to max_new speech tokens continuing `tokens`, stopping early at
// eos or the overall length cap. Returns the number of tokens drawn. The
// draw sequence is identical to KGramModel::generate consuming the same
// stream, which is what makes degenerate search configs replay generation
// exactly.
int continue_candidate(const KGramModel& model, const std::vector<int>& text,
                       std::vector<int>& tokens, RngStream& rng, int max_new, int max_len,
                       double temperature) {
    const JointIdMap map = model.id_map();
    std::vector<int> stream;
    stream.reserve(text.size() + static_cast<std::size_t>(max_len));
    for (int t : text) {
        stream.push_back(map.text_id(t));
    }
    for (int s : tokens) {
        stream.push_back(map.speech_id(s));
    }

    int drawn = 0;
    while (drawn < max_new && static_cast<int>(tokens.size()) < max_len) {
        const int y = model.sample_next(model.window_before(stream, stream.size()), rng,
                                        temperature);
        tokens.push_back(y);
        stream.push_back(map.speech_id(y));
        ++drawn;
        if (y == model.speech_vocab().eos) {
            break;
        }
    }
    return drawn;
}

std::vector<BeamState> make_initial_beams(const SearchConfig& cfg, std::uint64_t seed, int eos) {
    std::vector<BeamState> beams;
    beams.reserve(static_cast<std::size_t>(cfg.beam_width_B));
    for (int b = 0; b < cfg.beam_width_B; ++b) {
        BeamState state{Candidate{}, derive_stream(seed, beam_stream_id(static_cast<std::uint64_t>(b)))};
        state.cand.tokens = cfg.speech_prefix;
        state.cand.finished = is_terminal(state.cand.tokens, eos, cfg.max_len);
        state.cand.beam_index = b;
        state.cand.step_index = 0;
        beams.push_back(std::move(state));
    }
    return beams;
}

// One expand-score-select step of guided search over `beams`; appends the
// scored pool and the selected indices to `outcome`, updates the budget, and
// replaces `beams` with the survivors (best first).
void guided_step(const KGramModel& model, const std::vector<int>& text, const Verifier& prm,
                 const SearchConfig& cfg, int step_index, std::vector<BeamState>& beams,
                 SearchOutcome& outcome) {
    const int eos = model.speech_vocab().eos;
    const int n = cfg.expansions_N;

    // Expansion plan: finished beams pass through, unfinished beams emit N
    // children. Drawing happens in parallel; every child's stream depends
    // only on its (beam, expansion) address, so the schedule cannot matter.
    struct Job {
        std::size_t beam = 0;
        int expansion = -1; // -1 marks a passthrough
    };
    std::vector<Job> jobs;
    for (std::size_t b = 0; b < beams.size(); ++b) {
        if (beams[b].cand.finished) {
            jobs.push_back(Job{b, -1});
        } else {
            for (int e = 0; e < n; ++e) {
                jobs.push_back(Job{b, e});
            }
        }
    }

    std::vector<BeamState> pool(jobs.size(), BeamState{Candidate{}, RngStream(0, 0)});
    std::vector<int> drawn(jobs.size(), 0);
    std::vector<char> scored(jobs.size(), 0);
    parallel_for(jobs.size(), cfg.threads, [&](std::size_t i) {
        const Job& job = jobs[i];
        BeamState child = beams[job.beam];
        if (job.expansion >= 0) {
            if (job.expansion > 0) {
                child.stream = beams[job.beam].stream.fork(static_cast<std::uint64_t>(job.expansion));
            }
            drawn[i] = continue_candidate(model, text, child.cand.tokens, child.stream,
                                          cfg.step_tokens_M, cfg.max_len, cfg.temperature);
            child.cand.finished = is_terminal(child.cand.tokens, eos, cfg.max_len);
            child.cand.beam_index = static_cast<int>(job.beam);
            child.cand.step_index = step_index;
            child.cand.final_score = prm.score(child.cand.tokens, child.cand.finished);
            child.cand.prm_scores.push_back(child.cand.final_score->value);
            scored[i] = 1;
        }
        pool[i] = std::move(child);
    });

    for (std::size_t i = 0; i < jobs.size(); ++i) {
        outcome.budget.tokens_generated += drawn[i];
        outcome.budget.verifier_calls += scored[i];
    }

    // Top-B by score, ties to the lowest pool index.
    std::vector<std::size_t> order(pool.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const double sa = pool[a].cand.final_score->value;
        const double sb = pool[b].cand.final_score->value;
        if (sa != sb) {
            return sa > sb;
        }
        return a < b;
    });
    const std::size_t keep = std::min(pool.size(), static_cast<std::size_t>(cfg.beam_width_B));

    StepTrace trace;
    trace.pool.reserve(pool.size());
    for (const BeamState& state : pool) {
        trace.pool.push_back(state.cand);
    }
    trace.selected.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(keep));
    outcome.steps.push_back(std::move(trace));

    std::vector<BeamState> survivors;
    survivors.reserve(keep);
    for (std::size_t r = 0; r < keep; ++r) {
        survivors.push_back(std::move(pool[order[r]]));
    }
    beams = std::move(survivors);
}

void finalize_guided_outcome(std::vector<BeamState>& beams, SearchOutcome& outcome) {
    outcome.beams.reserve(beams.size());
    for (const BeamState& state : beams) {
        outcome.beams.push_back(state.cand);
    }
    if (!outcome.steps.empty()) {
        outcome.pool = outcome.steps.back().pool;
    } else {
        outcome.pool = outcome.beams;
    }
}

} // namespace

// ─── Best-of-N ──────────────────────────────────────────────────────────────

SearchOutcome best_of_n(const KGramModel& model, const std::vector<int>& text,
                        const Verifier& orm, int count, std::uint64_t seed,
                        const SearchConfig& cfg) {
    cfg.validate();
    if (count < 1) {
        throw ConfigError("best_of_n needs count >= 1");
    }

    SearchOutcome outcome;
    outcome.pool.resize(static_cast<std::size_t>(count));
    std::vector<int> drawn(static_cast<std::size_t>(count), 0);
    parallel_for(static_cast<std::size_t>(count), cfg.threads, [&](std::size_t i) {
        RngStream stream = derive_stream(seed, candidate_stream_id(i));
        Candidate cand;
        cand.tokens = model.generate(text, stream, cfg.max_len, cfg.temperature,
                                     cfg.speech_prefix);
        cand.finished = true;
        cand.beam_index = static_cast<int>(i);
        cand.step_index = 0;
        cand.final_score = orm.score(cand.tokens, true);
        drawn[i] = static_cast<int>(cand.tokens.size() - cfg.speech_prefix.size());
        outcome.pool[i] = std::move(cand);
    });

    outcome.budget.candidates_generated = count;
    outcome.budget.verifier_calls = count;
    for (int d : drawn) {
        outcome.budget.tokens_generated += d;
    }

    std::vector<Score> scores;
    scores.reserve(outcome.pool.size());
    for (const Candidate& cand : outcome.pool) {
        scores.push_back(*cand.final_score);
    }
    const std::vector<std::string>& keys = cfg.final_rerank.empty() ? orm.keys()
                                                                    : cfg.final_rerank;
    outcome.chosen = outcome.pool[composite_select(scores, keys)];
    return outcome;
}

// ─── Guided beam search ─────────────────────────────────────────────────────

SearchOutcome prm_beam_search(const KGramModel& model, const std::vector<int>& text,
                              const Verifier& prm, const SearchConfig& cfg, std::uint64_t seed,
                              const Verifier* final_verifier) {
    cfg.validate();
    if (!prm.accepts_prefix()) {
        throw ConfigError("guided search needs a verifier that scores partial sequences");
    }
    if (!cfg.final_rerank.empty() && final_verifier == nullptr) {
        throw ConfigError("final_rerank is set but no rerank verifier was provided");
    }

    SearchOutcome outcome;
    outcome.budget.candidates_generated =
        static_cast<std::int64_t>(cfg.beam_width_B) * cfg.expansions_N;

    std::vector<BeamState> beams = make_initial_beams(cfg, seed, model.speech_vocab().eos);
    int step = 0;
    while (std::any_of(beams.begin(), beams.end(),
                       [](const BeamState& s) { return !s.cand.finished; })) {
        guided_step(model, text, prm, cfg, ++step, beams, outcome);
    }
    finalize_guided_outcome(beams, outcome);

    if (cfg.final_rerank.empty()) {
        outcome.chosen = outcome.beams.front();
        if (!outcome.chosen.final_score) {
            // Only reachable when every beam was terminal before the first
            // step (a terminal speech prefix): score the winner once.
            outcome.chosen.final_score = prm.score(outcome.chosen.tokens, outcome.chosen.finished);
            outcome.budget.verifier_calls += 1;
        }
        return outcome;
    }

    std::vector<Score> scores(outcome.pool.size());
    parallel_for(outcome.pool.size(), cfg.threads, [&](std::size_t i) {
        scores[i] = final_verifier->score(outcome.pool[i].tokens, outcome.pool[i].finished);
    });
    outcome.budget.verifier_calls += static_cast<std::int64_t>(outcome.pool.size());
    const std::size_t pick = composite_select(scores, cfg.final_rerank);
    outcome.chosen = outcome.pool[pick];
    outcome.chosen.final_score = scores[pick];
    return outcome;
}

// ─── Hybrid: guided prefix, independent completion ──────────────────────────

SearchOutcome partial_prm(const KGramModel& model, const std::vector<int>& text,
                          const Verifier& prm, const Verifier& orm, const SearchConfig& cfg,
                          std::uint64_t seed) {
    cfg.validate();
    if (!prm.accepts_prefix()) {
        throw ConfigError("guided search needs a verifier that scores partial sequences");
    }

    SearchOutcome outcome;
    outcome.budget.candidates_generated =
        static_cast<std::int64_t>(cfg.beam_width_B) * cfg.expansions_N;
    const int eos = model.speech_vocab().eos;

    // Phase 1: guided steps until every beam has reached the switch boundary
    // (a beam may overshoot by less than one step) or finished outright.
    std::vector<BeamState> beams = make_initial_beams(cfg, seed, eos);
    auto phase_done = [&] {
        return std::all_of(beams.begin(), beams.end(), [&](const BeamState& s) {
            return s.cand.finished ||
                   static_cast<int>(s.cand.tokens.size()) >= cfg.prm_switch_tokens;
        });
    };
    int step = 0;
    while (!phase_done()) {
        guided_step(model, text, prm, cfg, ++step, beams, outcome);
    }
    outcome.beams.reserve(beams.size());
    for (const BeamState& state : beams) {
        outcome.beams.push_back(state.cand);
    }

    // Phase 2: each beam completes with N independent rollouts whose streams
    // sit in the flat candidate namespace, so a zero-length phase 1 makes
    // this identical to best_of_n(B·N).
    const std::size_t total =
        static_cast<std::size_t>(cfg.beam_width_B) * static_cast<std::size_t>(cfg.expansions_N);
    std::vector<Candidate> completions(total);
    std::vector<Score> scores(total);
    std::vector<int> drawn(total, 0);
    parallel_for(total, cfg.threads, [&](std::size_t i) {
        const std::size_t b = i / static_cast<std::size_t>(cfg.expansions_N);
        Candidate cand = beams[b].cand;
        if (!cand.finished) {
            RngStream stream = derive_stream(seed, candidate_stream_id(i));
            drawn[i] = continue_candidate(model, text, cand.tokens, stream, cfg.max_len,
                                          cfg.max_len, cfg.temperature);
            cand.finished = true;
        }
        cand.beam_index = static_cast<int>(b);
        cand.step_index = step + 1;
        scores[i] = orm.score(cand.tokens, true);
        cand.final_score = scores[i];
        completions[i] = std::move(cand);
    });

    for (std::size_t i = 0; i < total; ++i) {
        outcome.budget.tokens_generated += drawn[i];
    }
    outcome.budget.verifier_calls += static_cast<std::int64_t>(total);
    outcome.pool = std::move(completions);

    const std::vector<std::string>& keys = cfg.final_rerank.empty() ? orm.keys()
                                                                    : cfg.final_rerank;
    outcome.chosen = outcome.pool[composite_select(scores, keys)];
    return outcome;
}

} // namespace ttc
