#include "ttc/oracle.hpp"

#include <algorithm>
#include <string>

#include "ttc/errors.hpp"

namespace ttc {

OracleResult brute_force_optimum(const Vocab& speech_vocab, const Verifier& verifier,
                                 int max_len) {
    speech_vocab.validate();
    if (max_len < 0) {
        throw ConfigError("oracle max_len must be non-negative");
    }

    const std::uint64_t v = static_cast<std::uint64_t>(speech_vocab.size);
    std::uint64_t top = 1;
    for (int i = 0; i < max_len; ++i) {
        if (top > kOracleGuard / v) {
            throw ConfigError("oracle refuses: " + std::to_string(speech_vocab.size) + "^" +
                              std::to_string(max_len) + " sequences exceed the enumeration bound " +
                              std::to_string(kOracleGuard));
        }
        top *= v;
    }

    OracleResult result;
    bool have_best = false;
    std::vector<int> tokens;

    auto consider = [&](const std::vector<int>& seq) {
        const double score = verifier.score(seq, true).value;
        ++result.enumerated;
        if (!have_best || score > result.best_score ||
            (score == result.best_score &&
             std::lexicographical_compare(seq.begin(), seq.end(), result.best_tokens.begin(),
                                          result.best_tokens.end()))) {
            result.best_score = score;
            result.best_tokens = seq;
            have_best = true;
        }
    };

    consider(tokens); // the empty sequence
    for (int len = 1; len <= max_len; ++len) {
        tokens.assign(static_cast<std::size_t>(len), 0);
        for (;;) {
            consider(tokens);
            // Odometer increment, least-significant position last.
            int pos = len - 1;
            while (pos >= 0 && tokens[static_cast<std::size_t>(pos)] == speech_vocab.size - 1) {
                tokens[static_cast<std::size_t>(pos)] = 0;
                --pos;
            }
            if (pos < 0) {
                break;
            }
            ++tokens[static_cast<std::size_t>(pos)];
        }
    }
    return result;
}

} // namespace ttc
