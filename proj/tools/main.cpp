// ─── ttc command-line interface ─────────────────────────────────────────────
//
// Subcommands:
//   gen-corpus   synthesize a noisy-channel corpus to JSONL
//   train        fit a k-gram model on a corpus and save it as JSON
//   search       run one scaling algorithm from a run config
//   oracle       brute-force the verifier optimum for a run config
//   sweep        run an (algorithm × budget × seed) grid to CSV
//   fsq-check    self-test the scalar quantizer (bijection + coverage)
//
// Exit codes: 0 success, 1 usage/config/domain errors, 2 file I/O errors.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "ttc/corpus.hpp"
#include "ttc/errors.hpp"
#include "ttc/fsq.hpp"
#include "ttc/kgram.hpp"
#include "ttc/runner.hpp"
#include "ttc/sweep.hpp"

namespace {

struct GenCorpusArgs {
    std::string out;
    std::uint64_t seed = 0;
    ttc::CorpusConfig cfg;
    std::string direction = "tts";
};

struct TrainArgs {
    std::string corpus;
    std::string out;
    int order_k = 3;
    double alpha = 0.1;
};

struct ConfigArgs {
    std::string config;
    std::string out;
    std::uint64_t seed = 0;
    int threads = 1;
    int max_len = 0;
    std::optional<std::uint64_t> seed_override;
    std::optional<int> threads_override;
    std::optional<int> max_len_override;
};

struct FsqArgs {
    std::vector<int> levels{4, 4, 4, 4, 4, 4, 4, 4};
    std::uint64_t samples = 2000000;
    std::uint64_t seed = 7;
};

int run_gen_corpus(const GenCorpusArgs& args) {
    ttc::CorpusConfig cfg = args.cfg;
    cfg.direction = ttc::loss_direction_from_string(args.direction);
    cfg.validate();
    ttc::RngStream rng = ttc::derive_stream(args.seed, 0);
    const ttc::Corpus corpus = ttc::make_synthetic_corpus(cfg, rng);
    ttc::write_corpus_jsonl(corpus, args.out);
    std::cout << "wrote " << corpus.pairs.size() << " pairs to " << args.out << "\n";
    return 0;
}

int run_train(const TrainArgs& args) {
    const ttc::Corpus corpus = ttc::read_corpus_jsonl(args.corpus);
    const ttc::KGramModel model = ttc::KGramModel::train(corpus, args.order_k, args.alpha);
    model.save_json(args.out);
    std::cout << "trained order-" << args.order_k << " model on " << corpus.pairs.size()
              << " pairs (" << model.context_count() << " contexts) -> " << args.out << "\n";
    return 0;
}

void write_text_file(const std::string& path, const std::string& body) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw ttc::IoError("cannot open '" + path + "' for writing");
    }
    out << body;
    if (!out) {
        throw ttc::IoError("failed writing '" + path + "'");
    }
}

int run_search(const ConfigArgs& args) {
    const ttc::RunSetup setup =
        ttc::load_run_setup(args.config, args.seed_override, args.threads_override);
    const nlohmann::json result = ttc::execute_search(setup);
    const std::string body = result.dump(2) + "\n";
    if (!args.out.empty()) {
        write_text_file(args.out, body);
    }
    std::cout << body;
    return 0;
}

int run_oracle(const ConfigArgs& args) {
    ttc::RunSetup setup =
        ttc::load_run_setup(args.config, args.seed_override, args.threads_override);
    if (args.max_len_override) {
        setup.oracle_max_len = *args.max_len_override;
    }
    const nlohmann::json result = ttc::execute_oracle(setup);
    std::cout << result.dump(2) << "\n";
    return 0;
}

int run_sweep_cmd(const ConfigArgs& args) {
    const ttc::SweepSpec spec =
        ttc::load_sweep_spec(args.config, args.seed_override, args.threads_override);
    const ttc::SweepResult result = ttc::run_sweep(spec);
    ttc::write_sweep_csv(result, args.out);
    std::cout << "wrote " << result.rows.size() << " rows to " << args.out << "\n";
    return 0;
}

int run_fsq_check(const FsqArgs& args) {
    ttc::FsqConfig cfg = ttc::FsqConfig::default_config();
    cfg.levels = args.levels;
    cfg.validate();

    const ttc::FsqCheckReport report = ttc::run_fsq_check(cfg, args.samples, args.seed);
    std::printf("codebook: %llu codes, %d dims, token rate %g Hz\n",
                static_cast<unsigned long long>(cfg.codebook_size()), cfg.dim(),
                cfg.token_rate_hz());
    const bool bijective = report.bijection_ok == report.bijection_total;
    std::printf("bijection: %llu/%llu %s\n",
                static_cast<unsigned long long>(report.bijection_ok),
                static_cast<unsigned long long>(report.bijection_total),
                bijective ? "ok" : "FAIL");
    std::printf("coverage: %llu/%llu codes (%.3f%%) from %llu samples\n",
                static_cast<unsigned long long>(report.coverage_hit),
                static_cast<unsigned long long>(report.coverage_total),
                100.0 * static_cast<double>(report.coverage_hit) /
                    static_cast<double>(report.coverage_total),
                static_cast<unsigned long long>(report.samples));
    return bijective ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"verifier-guided test-time compute scaling for token models"};
    app.require_subcommand(1);

    GenCorpusArgs gen_args;
    CLI::App* gen = app.add_subcommand("gen-corpus", "synthesize a noisy-channel corpus");
    gen->add_option("--out", gen_args.out, "output JSONL path")->required();
    gen->add_option("--seed", gen_args.seed, "master seed")->required();
    gen->add_option("--text-vocab", gen_args.cfg.text_vocab_size, "text vocab size (eos included)");
    gen->add_option("--speech-vocab", gen_args.cfg.speech_vocab_size,
                    "speech vocab size (eos included)");
    gen->add_option("--expansion-r", gen_args.cfg.expansion_r, "speech symbols per text token");
    gen->add_option("--flip-p", gen_args.cfg.flip_p, "per-symbol noise probability");
    gen->add_option("--pairs", gen_args.cfg.pairs, "number of pairs");
    gen->add_option("--min-len", gen_args.cfg.min_text_len, "minimum text length");
    gen->add_option("--max-len", gen_args.cfg.max_text_len, "maximum text length");
    gen->add_option("--direction", gen_args.direction, "loss direction: tts or asr");

    TrainArgs train_args;
    CLI::App* train = app.add_subcommand("train", "fit a k-gram model on a corpus");
    train->add_option("--corpus", train_args.corpus, "corpus JSONL path")->required();
    train->add_option("--out", train_args.out, "output model JSON path")->required();
    train->add_option("--order-k", train_args.order_k, "context window length");
    train->add_option("--alpha", train_args.alpha, "add-alpha smoothing");

    ConfigArgs search_args;
    CLI::App* search = app.add_subcommand("search", "run one scaling algorithm");
    search->add_option("--config", search_args.config, "run config JSON path")->required();
    CLI::Option* search_seed = search->add_option("--seed", search_args.seed, "override the seed");
    CLI::Option* search_threads =
        search->add_option("--threads", search_args.threads, "override worker threads");
    search->add_option("--out", search_args.out, "also write the result JSON here");

    ConfigArgs oracle_args;
    CLI::App* oracle = app.add_subcommand("oracle", "brute-force the verifier optimum");
    oracle->add_option("--config", oracle_args.config, "run config JSON path")->required();
    CLI::Option* oracle_seed = oracle->add_option("--seed", oracle_args.seed, "override the seed");
    CLI::Option* oracle_max_len =
        oracle->add_option("--max-len", oracle_args.max_len, "cap enumeration length");

    ConfigArgs sweep_args;
    CLI::App* sweep = app.add_subcommand("sweep", "run an algorithm × budget × seed grid");
    sweep->add_option("--config", sweep_args.config, "sweep config JSON path")->required();
    sweep->add_option("--out", sweep_args.out, "output CSV path")->required();
    CLI::Option* sweep_seed = sweep->add_option("--seed", sweep_args.seed, "override the base seed");
    CLI::Option* sweep_threads =
        sweep->add_option("--threads", sweep_args.threads, "override worker threads");

    FsqArgs fsq_args;
    CLI::App* fsq = app.add_subcommand("fsq-check", "self-test the scalar quantizer");
    fsq->add_option("--levels", fsq_args.levels, "per-dimension grid sizes")->delimiter(',');
    fsq->add_option("--samples", fsq_args.samples, "random vectors for coverage");
    fsq->add_option("--seed", fsq_args.seed, "sampling seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n\n" << app.help() << std::flush;
        return 1;
    }

    if (search_seed->count() > 0) search_args.seed_override = search_args.seed;
    if (search_threads->count() > 0) search_args.threads_override = search_args.threads;
    if (oracle_seed->count() > 0) oracle_args.seed_override = oracle_args.seed;
    if (oracle_max_len->count() > 0) oracle_args.max_len_override = oracle_args.max_len;
    if (sweep_seed->count() > 0) sweep_args.seed_override = sweep_args.seed;
    if (sweep_threads->count() > 0) sweep_args.threads_override = sweep_args.threads;

    try {
        if (gen->parsed()) return run_gen_corpus(gen_args);
        if (train->parsed()) return run_train(train_args);
        if (search->parsed()) return run_search(search_args);
        if (oracle->parsed()) return run_oracle(oracle_args);
        if (sweep->parsed()) return run_sweep_cmd(sweep_args);
        if (fsq->parsed()) return run_fsq_check(fsq_args);
    } catch (const ttc::IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const ttc::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
