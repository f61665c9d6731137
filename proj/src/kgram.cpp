#include "ttc/kgram.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <json.hpp>

#include "ttc/errors.hpp"

namespace ttc {

using nlohmann::json;

// ─── Hashing ────────────────────────────────────────────────────────────────

std::size_t KGramModel::WindowHash::operator()(const std::vector<int>& w) const {
    std::uint64_t h = 0x51ED2701554AB35Bull;
    for (int id : w) {
        h = detail::combine(h, static_cast<std::uint64_t>(static_cast<std::uint32_t>(id)));
    }
    return static_cast<std::size_t>(h);
}

// ─── Stream construction ────────────────────────────────────────────────────

std::vector<int> KGramModel::joint_stream(const JointSequence& pair) const {
    const JointIdMap map = id_map();
    std::vector<int> stream;
    stream.reserve(pair.text.size() + pair.speech.size());
    auto push_text = [&] {
        for (int t : pair.text) {
            stream.push_back(map.text_id(t));
        }
    };
    auto push_speech = [&] {
        for (int s : pair.speech) {
            stream.push_back(map.speech_id(s));
        }
    };
    if (pair.loss_direction == LossDirection::tts) {
        push_text();
        push_speech();
    } else {
        push_speech();
        push_text();
    }
    return stream;
}

std::vector<int> KGramModel::window_before(const std::vector<int>& stream, std::size_t pos) const {
    const int pad = id_map().pad_id();
    std::vector<int> window(static_cast<std::size_t>(order_k_), pad);
    for (int j = 0; j < order_k_; ++j) {
        const std::ptrdiff_t src = static_cast<std::ptrdiff_t>(pos) - order_k_ + j;
        if (src >= 0) {
            window[static_cast<std::size_t>(j)] = stream[static_cast<std::size_t>(src)];
        }
    }
    return window;
}

// ─── Training ───────────────────────────────────────────────────────────────

void KGramModel::add_count(const std::vector<int>& window, int y) {
    ContextCounts& ctx = counts_[window];
    ++ctx.by_token[y];
    ++ctx.total;
}

KGramModel KGramModel::train(const Corpus& corpus, int order_k, double alpha) {
    if (order_k < 1) {
        throw ConfigError("order_k must be at least 1");
    }
    if (!(alpha > 0.0)) {
        throw ConfigError("alpha must be positive");
    }
    if (corpus.pairs.empty()) {
        throw ConfigError("cannot train on an empty corpus");
    }

    KGramModel model;
    model.order_k_ = order_k;
    model.alpha_ = alpha;
    model.text_vocab_ = corpus.text_vocab;
    model.speech_vocab_ = corpus.speech_vocab;
    model.direction_ = corpus.pairs.front().loss_direction;

    for (const JointSequence& pair : corpus.pairs) {
        if (pair.loss_direction != model.direction_) {
            throw ConfigError("corpus mixes loss directions; train on one direction at a time");
        }
        const std::vector<int> stream = model.joint_stream(pair);
        // Predicted positions are the trailing segment of the stream: the
        // speech suffix for tts, the text suffix for asr.
        const std::size_t first_predicted =
            model.direction_ == LossDirection::tts ? pair.text.size() : pair.speech.size();
        const std::size_t predicted_len =
            model.direction_ == LossDirection::tts ? pair.speech.size() : pair.text.size();
        const std::vector<int>& predicted =
            model.direction_ == LossDirection::tts ? pair.speech : pair.text;
        for (std::size_t i = 0; i < predicted_len; ++i) {
            model.add_count(model.window_before(stream, first_predicted + i), predicted[i]);
        }
    }
    return model;
}

// ─── Lookup and probabilities ───────────────────────────────────────────────

const KGramModel::ContextCounts* KGramModel::find_context(const std::vector<int>& window) const {
    if (static_cast<int>(window.size()) != order_k_) {
        throw std::invalid_argument("context window must have exactly order_k entries");
    }
    const auto it = counts_.find(window);
    return it == counts_.end() ? nullptr : &it->second;
}

std::uint64_t KGramModel::count(const std::vector<int>& window, int y) const {
    const ContextCounts* ctx = find_context(window);
    if (ctx == nullptr) {
        return 0;
    }
    const auto it = ctx->by_token.find(y);
    return it == ctx->by_token.end() ? 0 : it->second;
}

std::uint64_t KGramModel::context_total(const std::vector<int>& window) const {
    const ContextCounts* ctx = find_context(window);
    return ctx == nullptr ? 0 : ctx->total;
}

double KGramModel::prob(const std::vector<int>& window, int y) const {
    const int size = predicted_vocab().size;
    if (y < 0 || y >= size) {
        throw std::invalid_argument("predicted token id out of range");
    }
    const ContextCounts* ctx = find_context(window);
    std::uint64_t c = 0;
    std::uint64_t total = 0;
    if (ctx != nullptr) {
        total = ctx->total;
        const auto it = ctx->by_token.find(y);
        if (it != ctx->by_token.end()) {
            c = it->second;
        }
    }
    return (static_cast<double>(c) + alpha_) /
           (static_cast<double>(total) + alpha_ * static_cast<double>(size));
}

// ─── Scoring ────────────────────────────────────────────────────────────────

LossReport KGramModel::log_prob(const JointSequence& pair) const {
    if (pair.loss_direction != direction_) {
        throw ConfigError("sequence loss direction does not match the model's");
    }
    validate_pair(pair, text_vocab_, speech_vocab_, 1 << 30);

    const std::vector<int> stream = joint_stream(pair);
    const std::size_t first_predicted =
        direction_ == LossDirection::tts ? pair.text.size() : pair.speech.size();
    const std::vector<int>& predicted = direction_ == LossDirection::tts ? pair.speech : pair.text;

    LossReport report;
    report.per_position.reserve(predicted.size());
    for (std::size_t i = 0; i < predicted.size(); ++i) {
        const double p = prob(window_before(stream, first_predicted + i), predicted[i]);
        report.per_position.push_back(-std::log(p));
    }
    report.token_count = static_cast<int>(predicted.size());
    report.nll = 0.0;
    for (double v : report.per_position) {
        report.nll += v;
    }
    return report;
}

// ─── Sampling ───────────────────────────────────────────────────────────────

int KGramModel::sample_next(const std::vector<int>& window, RngStream& rng,
                            double temperature) const {
    if (!(temperature > 0.0)) {
        throw ConfigError("temperature must be positive");
    }
    const int size = predicted_vocab().size;

    std::vector<double> weights(static_cast<std::size_t>(size));
    double total = 0.0;
    for (int y = 0; y < size; ++y) {
        const double p = prob(window, y);
        const double w = temperature == 1.0 ? p : std::pow(p, 1.0 / temperature);
        weights[static_cast<std::size_t>(y)] = w;
        total += w;
    }

    // Inverse-transform in token-id order: cumulative sums are evaluated in
    // one fixed arithmetic order, so the draw is reproducible everywhere.
    const double u = rng.next_double() * total;
    double cum = 0.0;
    for (int y = 0; y < size; ++y) {
        cum += weights[static_cast<std::size_t>(y)];
        if (u < cum) {
            return y;
        }
    }
    return size - 1;  // guard against rounding at the top of the CDF
}

std::vector<int> KGramModel::generate(const std::vector<int>& text, RngStream& rng, int max_len,
                                      double temperature,
                                      const std::vector<int>& speech_prefix) const {
    if (direction_ != LossDirection::tts) {
        throw ConfigError("generate requires a tts-direction model");
    }
    if (max_len < 1) {
        throw ConfigError("max_len must be at least 1");
    }

    const JointIdMap map = id_map();
    std::vector<int> stream;
    stream.reserve(text.size() + static_cast<std::size_t>(max_len));
    for (int t : text) {
        stream.push_back(map.text_id(t));
    }
    std::vector<int> speech = speech_prefix;
    for (int s : speech_prefix) {
        stream.push_back(map.speech_id(s));
    }
    if (!speech.empty() && speech.back() == speech_vocab_.eos) {
        return speech; // the prefix is already terminal
    }

    while (static_cast<int>(speech.size()) < max_len) {
        const int y = sample_next(window_before(stream, stream.size()), rng, temperature);
        speech.push_back(y);
        stream.push_back(map.speech_id(y));
        if (y == speech_vocab_.eos) {
            break;
        }
    }
    return speech;
}

// ─── Persistence ────────────────────────────────────────────────────────────

void KGramModel::save_json(const std::string& path) const {
    // Entries are written sorted by window then token id, so the dump is
    // byte-deterministic regardless of hash-map iteration order.
    std::vector<std::pair<std::vector<int>, const ContextCounts*>> entries;
    entries.reserve(counts_.size());
    for (const auto& [window, ctx] : counts_) {
        entries.emplace_back(window, &ctx);
    }
    std::sort(entries.begin(), entries.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });

    json counts = json::array();
    for (const auto& [window, ctx] : entries) {
        std::vector<std::pair<int, std::uint64_t>> by_token(ctx->by_token.begin(),
                                                            ctx->by_token.end());
        std::sort(by_token.begin(), by_token.end());
        json tokens = json::array();
        for (const auto& [y, c] : by_token) {
            tokens.push_back(json::array({y, c}));
        }
        counts.push_back(json::array({json(window), tokens}));
    }

    json doc;
    doc["format_version"] = 1;
    doc["order_k"] = order_k_;
    doc["alpha"] = alpha_;
    doc["direction"] = to_string(direction_);
    doc["text_vocab"] = {{"size", text_vocab_.size}, {"eos", text_vocab_.eos}};
    doc["speech_vocab"] = {{"size", speech_vocab_.size}, {"eos", speech_vocab_.eos}};
    doc["counts"] = std::move(counts);

    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError("cannot open '" + path + "' for writing");
    }
    out << doc.dump() << '\n';
    if (!out) {
        throw IoError("write to '" + path + "' failed");
    }
}

KGramModel KGramModel::load_json(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open '" + path + "' for reading");
    }
    json doc;
    try {
        in >> doc;
    } catch (const json::parse_error& e) {
        throw ConfigError("model file is not valid JSON: " + std::string(e.what()));
    }
    if (doc.value("format_version", 0) != 1) {
        throw ConfigError("unsupported model format_version (expected 1)");
    }

    KGramModel model;
    model.order_k_ = doc.at("order_k").get<int>();
    model.alpha_ = doc.at("alpha").get<double>();
    model.direction_ = loss_direction_from_string(doc.at("direction").get<std::string>());
    model.text_vocab_ = Vocab{doc.at("text_vocab").at("size").get<int>(),
                              doc.at("text_vocab").at("eos").get<int>(), VocabKind::text};
    model.speech_vocab_ = Vocab{doc.at("speech_vocab").at("size").get<int>(),
                                doc.at("speech_vocab").at("eos").get<int>(), VocabKind::speech};
    model.text_vocab_.validate();
    model.speech_vocab_.validate();
    if (model.order_k_ < 1 || !(model.alpha_ > 0.0)) {
        throw ConfigError("model file has invalid order_k or alpha");
    }

    for (const json& entry : doc.at("counts")) {
        const std::vector<int> window = entry.at(0).get<std::vector<int>>();
        if (static_cast<int>(window.size()) != model.order_k_) {
            throw ConfigError("model count entry has a window of the wrong length");
        }
        ContextCounts& ctx = model.counts_[window];
        for (const json& tc : entry.at(1)) {
            const int y = tc.at(0).get<int>();
            const std::uint64_t c = tc.at(1).get<std::uint64_t>();
            ctx.by_token[y] += c;
            ctx.total += c;
        }
    }
    return model;
}

} // namespace ttc
