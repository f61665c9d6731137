#include "ttc/verify.hpp"

#include <algorithm>
#include <stdexcept>

#include "ttc/errors.hpp"

namespace ttc {

// ─── Sequence metrics ───────────────────────────────────────────────────────

std::size_t edit_distance(const std::vector<int>& a, const std::vector<int>& b) {
    const std::size_t n = a.size();
    const std::size_t m = b.size();
    std::vector<std::size_t> prev(m + 1);
    std::vector<std::size_t> cur(m + 1);
    for (std::size_t j = 0; j <= m; ++j) {
        prev[j] = j;
    }
    for (std::size_t i = 1; i <= n; ++i) {
        cur[0] = i;
        for (std::size_t j = 1; j <= m; ++j) {
            const std::size_t subst = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
            cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, subst});
        }
        std::swap(prev, cur);
    }
    return prev[m];
}

double similarity_score(const std::vector<int>& candidate, const std::vector<int>& reference) {
    if (reference.empty()) {
        throw std::domain_error("similarity reference must be non-empty");
    }
    const std::size_t denom = std::max(candidate.size(), reference.size());
    const std::size_t d = edit_distance(candidate, reference);
    return 1.0 - static_cast<double>(d) / static_cast<double>(denom);
}

double prefix_similarity_score(const std::vector<int>& candidate,
                               const std::vector<int>& reference) {
    if (reference.empty()) {
        throw std::domain_error("similarity reference must be non-empty");
    }
    if (candidate.empty()) {
        return 1.0;
    }
    const std::size_t len = std::min(candidate.size(), reference.size());
    const std::vector<int> ref_prefix(reference.begin(),
                                      reference.begin() + static_cast<std::ptrdiff_t>(len));
    const std::size_t denom = std::max(candidate.size(), ref_prefix.size());
    const std::size_t d = edit_distance(candidate, ref_prefix);
    return 1.0 - static_cast<double>(d) / static_cast<double>(denom);
}

double wer(const std::vector<int>& hypothesis, const std::vector<int>& reference) {
    if (reference.empty()) {
        throw std::domain_error("wer reference must be non-empty");
    }
    return static_cast<double>(edit_distance(hypothesis, reference)) /
           static_cast<double>(reference.size());
}

double transcription_score(const std::vector<int>& candidate, const std::vector<int>& text,
                           const CorpusConfig& channel) {
    return -wer(channel_decode(candidate, channel), text);
}

// ─── Verifiers ──────────────────────────────────────────────────────────────

Verifier Verifier::similarity(std::vector<int> reference) {
    if (reference.empty()) {
        throw std::domain_error("similarity reference must be non-empty");
    }
    auto impl = std::make_shared<Impl>();
    impl->kind = Kind::similarity;
    impl->name = "similarity";
    impl->keys = {"similarity"};
    impl->reference = std::move(reference);
    return Verifier(std::move(impl));
}

Verifier Verifier::transcription(std::vector<int> text, CorpusConfig channel) {
    if (text.empty()) {
        throw std::domain_error("transcription target text must be non-empty");
    }
    channel.validate();
    auto impl = std::make_shared<Impl>();
    impl->kind = Kind::wer_negated;
    impl->name = "wer";
    impl->keys = {"wer"};
    impl->text = std::move(text);
    impl->channel = std::move(channel);
    return Verifier(std::move(impl));
}

Verifier Verifier::constant(double value) {
    auto impl = std::make_shared<Impl>();
    impl->kind = Kind::constant;
    impl->name = "constant";
    impl->keys = {"constant"};
    impl->constant_value = value;
    return Verifier(std::move(impl));
}

Verifier Verifier::composite(std::vector<Verifier> parts, std::vector<std::string> keys) {
    if (parts.empty()) {
        throw ConfigError("composite verifier needs at least one part");
    }
    auto impl = std::make_shared<Impl>();
    impl->kind = Kind::composite;
    impl->name = "composite";
    if (keys.empty()) {
        for (const Verifier& part : parts) {
            impl->keys.push_back(part.name());
        }
    } else {
        impl->keys = std::move(keys);
    }
    impl->parts = std::move(parts);
    return Verifier(std::move(impl));
}

Score Verifier::score(const std::vector<int>& candidate, bool finished) const {
    Score s;
    switch (impl_->kind) {
        case Kind::similarity:
            s.value = finished ? similarity_score(candidate, impl_->reference)
                               : prefix_similarity_score(candidate, impl_->reference);
            s.components["similarity"] = s.value;
            break;
        case Kind::wer_negated:
            s.value = transcription_score(candidate, impl_->text, impl_->channel);
            s.components["wer"] = s.value;
            break;
        case Kind::constant:
            s.value = impl_->constant_value;
            s.components["constant"] = s.value;
            break;
        case Kind::composite: {
            for (const Verifier& part : impl_->parts) {
                const Score part_score = part.score(candidate, finished);
                s.components.insert(part_score.components.begin(), part_score.components.end());
            }
            const auto primary = s.components.find(impl_->keys.front());
            if (primary == s.components.end()) {
                throw ConfigError("composite key '" + impl_->keys.front() +
                                  "' matches no component verifier");
            }
            s.value = primary->second;
            break;
        }
    }
    return s;
}

bool Verifier::accepts_prefix() const {
    switch (impl_->kind) {
        case Kind::similarity:
        case Kind::constant:
            return true;
        case Kind::wer_negated:
            return false;
        case Kind::composite:
            return std::all_of(impl_->parts.begin(), impl_->parts.end(),
                               [](const Verifier& part) { return part.accepts_prefix(); });
    }
    return false;
}

const std::string& Verifier::name() const { return impl_->name; }

const std::vector<std::string>& Verifier::keys() const { return impl_->keys; }

// ─── Selection ──────────────────────────────────────────────────────────────

std::size_t composite_select(const std::vector<Score>& pool,
                             const std::vector<std::string>& keys) {
    if (pool.empty()) {
        throw ConfigError("cannot select from an empty pool");
    }
    if (keys.empty()) {
        throw ConfigError("selection needs at least one key");
    }

    auto component = [&](std::size_t i, const std::string& key) {
        const auto it = pool[i].components.find(key);
        if (it == pool[i].components.end()) {
            throw ConfigError("pool entry is missing selection key '" + key + "'");
        }
        return it->second;
    };

    std::size_t best = 0;
    for (std::size_t i = 1; i < pool.size(); ++i) {
        for (const std::string& key : keys) {
            const double a = component(i, key);
            const double b = component(best, key);
            if (a > b) {
                best = i;
                break;
            }
            if (a < b) {
                break;
            }
            // equal on this key: fall through to the next one; a full tie
            // keeps the earlier (lower-index) entry
        }
    }
    return best;
}

} // namespace ttc
