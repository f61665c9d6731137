#pragma once

#include <cstdint>

namespace ttc {

// ─── Hash mixing primitives ─────────────────────────────────────────────────
//
// The generator is splitmix64: a counter advanced by a fixed odd constant,
// pushed through an avalanche finalizer. Because every draw is a pure
// function of the counter value, streams can be keyed, replayed, and forked
// without any shared state — which is what makes results independent of
// thread scheduling.

namespace detail {

inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;

inline std::uint64_t avalanche(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xBF58476D1CE4E5B9ull;
    z ^= z >> 27;
    z *= 0x94D049BB133111EBull;
    z ^= z >> 31;
    return z;
}

// Order-sensitive combiner for deriving stream keys from (seed, id) pairs.
inline std::uint64_t combine(std::uint64_t a, std::uint64_t b) {
    return avalanche(a ^ (avalanche(b) + kGolden + (a << 6) + (a >> 2)));
}

} // namespace detail

// ─── RngStream ──────────────────────────────────────────────────────────────
//
// A deterministic random stream addressed by (master_seed, stream_id).
// The draw sequence is a pure function of that address: re-deriving the
// same stream anywhere — another thread, another process, another run —
// replays the identical sequence. Distinct stream_ids give streams that are
// independent by construction of the mixing function.
//
// fork(salt) derives a child stream from the parent's current position, so a
// candidate that branches mid-generation gets fresh draws that still depend
// only on its lineage (never on scheduling).
class RngStream {
  public:
    RngStream(std::uint64_t master_seed, std::uint64_t stream_id)
        : master_seed_(master_seed),
          stream_id_(stream_id),
          state_(detail::combine(master_seed, stream_id)) {}

    std::uint64_t master_seed() const { return master_seed_; }
    std::uint64_t stream_id() const { return stream_id_; }

    std::uint64_t next_u64() {
        state_ += detail::kGolden;
        return detail::avalanche(state_);
    }

    // Uniform double in [0, 1) with 53 random bits.
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Uniform integer in [0, n), unbiased via rejection. n must be ≥ 1.
    std::uint64_t next_below(std::uint64_t n) {
        if (n <= 1) {
            return 0;
        }
        const std::uint64_t threshold = (0 - n) % n;
        for (;;) {
            const std::uint64_t r = next_u64();
            if (r >= threshold) {
                return r % n;
            }
        }
    }

    // Child stream keyed by the parent's current position plus a salt.
    // Children with distinct salts, or forked at distinct positions, are
    // distinct; the parent's own future draws are unaffected.
    RngStream fork(std::uint64_t salt) const {
        return RngStream(master_seed_, detail::combine(detail::avalanche(state_), salt));
    }

  private:
    std::uint64_t master_seed_;
    std::uint64_t stream_id_;
    std::uint64_t state_;
};

inline RngStream derive_stream(std::uint64_t master_seed, std::uint64_t stream_id) {
    return RngStream(master_seed, stream_id);
}

// ─── Stream-id namespaces ───────────────────────────────────────────────────
//
// Every consumer of randomness draws from a stream whose id is assigned by
// enumeration order, never by execution order. The namespaces below keep the
// id spaces of different consumers disjoint.

// Candidate rollouts: best-of-N candidate i, and hybrid-search completion
// (beam b, expansion e) at id b*N+e, share this flat namespace so that a
// zero-length guided phase reproduces best-of-N draw-for-draw.
inline std::uint64_t candidate_stream_id(std::uint64_t index) { return index; }

// Initial beam streams for guided search.
inline std::uint64_t beam_stream_id(std::uint64_t beam) { return (1ull << 32) + beam; }

// Per-instance material for experiment harnesses.
inline constexpr std::uint64_t kInstanceTextStream = (2ull << 32);
inline constexpr std::uint64_t kInstanceReferenceStream = (2ull << 32) + 1;

} // namespace ttc
