#include "ttc/corpus.hpp"

#include <algorithm>
#include <fstream>

#include <json.hpp>

#include "ttc/errors.hpp"

namespace ttc {

using nlohmann::json;

// ─── Config validation ──────────────────────────────────────────────────────

void CorpusConfig::validate() const {
    if (text_vocab_size < 2) {
        throw ConfigError("text vocab size must be at least 2 (one content token plus eos)");
    }
    if (speech_vocab_size < 2) {
        throw ConfigError("speech vocab size must be at least 2 (one channel symbol plus eos)");
    }
    if (expansion_r < 1) {
        throw ConfigError("expansion_r must be at least 1");
    }
    if (flip_p < 0.0 || flip_p > 1.0) {
        throw ConfigError("flip_p must lie in [0, 1]");
    }
    if (flip_p > 0.0 && channel_alphabet() < 2) {
        throw ConfigError("noise needs at least two channel symbols to flip between");
    }
    if (pairs < 0) {
        throw ConfigError("pair count must be non-negative");
    }
    if (min_text_len < 1 || max_text_len < min_text_len) {
        throw ConfigError("text length range must satisfy 1 <= min <= max");
    }
    if (max_context < 1) {
        throw ConfigError("max_context must be positive");
    }
    const int worst = max_text_len + max_text_len * expansion_r + 1;
    if (worst > max_context) {
        throw ConfigError("longest possible pair (" + std::to_string(worst) +
                          " tokens) exceeds max_context " + std::to_string(max_context));
    }
}

// ─── Channel ────────────────────────────────────────────────────────────────

int channel_symbol(int t, int j, const CorpusConfig& cfg) {
    return (t + j) % cfg.channel_alphabet();
}

std::vector<int> channel_expand_clean(const std::vector<int>& text, const CorpusConfig& cfg) {
    std::vector<int> speech;
    speech.reserve(text.size() * static_cast<std::size_t>(cfg.expansion_r));
    for (int t : text) {
        for (int j = 0; j < cfg.expansion_r; ++j) {
            speech.push_back(channel_symbol(t, j, cfg));
        }
    }
    return speech;
}

std::vector<int> channel_expand(const std::vector<int>& text, const CorpusConfig& cfg,
                                RngStream& rng) {
    std::vector<int> speech = channel_expand_clean(text, cfg);
    if (cfg.flip_p <= 0.0) {
        return speech;
    }
    const int alphabet = cfg.channel_alphabet();
    for (int& s : speech) {
        if (rng.next_double() < cfg.flip_p) {
            // Uniform over the alphabet minus the current symbol.
            const int other = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(alphabet - 1)));
            s = other >= s ? other + 1 : other;
        }
    }
    return speech;
}

std::vector<int> channel_decode(const std::vector<int>& speech, const CorpusConfig& cfg) {
    const int eos = cfg.speech_vocab_size - 1;
    const int alphabet = cfg.channel_alphabet();
    const int text_alphabet = cfg.text_alphabet();

    std::size_t end = speech.size();
    while (end > 0 && speech[end - 1] == eos) {
        --end;
    }
    const std::size_t blocks = end / static_cast<std::size_t>(cfg.expansion_r);

    std::vector<int> text;
    text.reserve(blocks);
    std::vector<int> votes(static_cast<std::size_t>(text_alphabet), 0);
    for (std::size_t b = 0; b < blocks; ++b) {
        std::fill(votes.begin(), votes.end(), 0);
        for (int j = 0; j < cfg.expansion_r; ++j) {
            const int s = speech[b * static_cast<std::size_t>(cfg.expansion_r) +
                                 static_cast<std::size_t>(j)];
            if (s < 0 || s >= alphabet) {
                continue;  // eos or out-of-alphabet symbol: no vote
            }
            const int t = ((s - j) % alphabet + alphabet) % alphabet;
            if (t < text_alphabet) {
                ++votes[static_cast<std::size_t>(t)];
            }
        }
        int best = 0;
        for (int t = 1; t < text_alphabet; ++t) {
            if (votes[static_cast<std::size_t>(t)] > votes[static_cast<std::size_t>(best)]) {
                best = t;  // strict improvement only: ties keep the lower id
            }
        }
        text.push_back(best);
    }
    return text;
}

// ─── Synthetic corpus ───────────────────────────────────────────────────────

Corpus make_synthetic_corpus(const CorpusConfig& cfg, RngStream& rng) {
    cfg.validate();

    Corpus corpus;
    corpus.text_vocab = cfg.text_vocab();
    corpus.speech_vocab = cfg.speech_vocab();
    corpus.pairs.reserve(static_cast<std::size_t>(cfg.pairs));

    const int span = cfg.max_text_len - cfg.min_text_len + 1;
    for (int i = 0; i < cfg.pairs; ++i) {
        JointSequence pair;
        pair.loss_direction = cfg.direction;
        const int len = cfg.min_text_len + static_cast<int>(rng.next_below(static_cast<std::uint64_t>(span)));
        pair.text.reserve(static_cast<std::size_t>(len));
        for (int p = 0; p < len; ++p) {
            pair.text.push_back(static_cast<int>(rng.next_below(static_cast<std::uint64_t>(cfg.text_alphabet()))));
        }
        pair.speech = channel_expand(pair.text, cfg, rng);
        pair.speech.push_back(corpus.speech_vocab.eos);
        validate_pair(pair, corpus.text_vocab, corpus.speech_vocab, cfg.max_context);
        corpus.pairs.push_back(std::move(pair));
    }
    return corpus;
}

// ─── JSONL serialization ────────────────────────────────────────────────────

void write_corpus_jsonl(const Corpus& corpus, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError("cannot open '" + path + "' for writing");
    }

    json header;
    header["format_version"] = 1;
    header["text_vocab"] = corpus.text_vocab.size;
    header["speech_vocab"] = corpus.speech_vocab.size;
    header["eos_text"] = corpus.text_vocab.eos;
    header["eos_speech"] = corpus.speech_vocab.eos;
    header["direction"] =
        to_string(corpus.pairs.empty() ? LossDirection::tts : corpus.pairs.front().loss_direction);
    out << header.dump() << '\n';

    for (const JointSequence& pair : corpus.pairs) {
        json row;
        row["text"] = pair.text;
        row["speech"] = pair.speech;
        out << row.dump() << '\n';
    }
    if (!out) {
        throw IoError("write to '" + path + "' failed");
    }
}

Corpus read_corpus_jsonl(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open '" + path + "' for reading");
    }

    std::string line;
    if (!std::getline(in, line)) {
        throw ConfigError("corpus file '" + path + "' is empty (missing header line)");
    }

    json header;
    try {
        header = json::parse(line);
    } catch (const json::parse_error& e) {
        throw ConfigError("corpus header is not valid JSON: " + std::string(e.what()));
    }
    if (header.value("format_version", 0) != 1) {
        throw ConfigError("unsupported corpus format_version (expected 1)");
    }

    Corpus corpus;
    corpus.text_vocab = Vocab{header.at("text_vocab").get<int>(),
                              header.at("eos_text").get<int>(), VocabKind::text};
    corpus.speech_vocab = Vocab{header.at("speech_vocab").get<int>(),
                                header.at("eos_speech").get<int>(), VocabKind::speech};
    corpus.text_vocab.validate();
    corpus.speech_vocab.validate();
    const LossDirection direction = loss_direction_from_string(header.value("direction", "tts"));

    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) {
            continue;
        }
        json row;
        try {
            row = json::parse(line);
        } catch (const json::parse_error& e) {
            throw ConfigError("corpus line " + std::to_string(line_no) +
                              " is not valid JSON: " + std::string(e.what()));
        }
        JointSequence pair;
        pair.loss_direction = direction;
        pair.text = row.at("text").get<std::vector<int>>();
        pair.speech = row.at("speech").get<std::vector<int>>();
        validate_pair(pair, corpus.text_vocab, corpus.speech_vocab, 2048);
        corpus.pairs.push_back(std::move(pair));
    }
    return corpus;
}

} // namespace ttc
