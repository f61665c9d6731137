#pragma once

#include <cstdint>
#include <vector>

namespace ttc {

// ─── Finite scalar quantization ─────────────────────────────────────────────
//
// Each dimension d carries a uniform grid of L_d points on [-1, 1]:
//
//     grid(L) = { -1 + 2i/(L-1) : i = 0 .. L-1 }
//
// A vector is quantized by clamping each coordinate to [-1, 1] and snapping
// to the nearest grid point (exact midpoints snap to the lower index). The
// cross-product of grids is the codebook, enumerated little-endian
// mixed-radix: index = Σ_d i_d · Π_{d'<d} L_{d'}.

struct FsqConfig {
    std::vector<int> levels;          // per-dimension grid sizes, each ≥ 2
    double sample_rate_hz = 16000.0;
    double downsample_ratio = 320.0;

    // Eight dimensions of four levels: a 65536-entry codebook at 50 tokens/s.
    static FsqConfig default_config();

    int dim() const { return static_cast<int>(levels.size()); }
    std::uint64_t codebook_size() const;
    double token_rate_hz() const { return sample_rate_hz / downsample_ratio; }
    void validate() const;

    // Grid point i of dimension d.
    double grid_point(int d, int i) const;
};

struct FsqCode {
    std::vector<double> values;  // on-grid coordinates
    std::uint64_t index = 0;     // mixed-radix codebook index
};

// Clamp-and-snap quantization; throws std::domain_error on non-finite input.
FsqCode quantize(const FsqConfig& cfg, const std::vector<double>& h);

// Mixed-radix encoding of an exactly-on-grid vector; throws
// std::domain_error if any coordinate is off-grid.
std::uint64_t codes_to_index(const FsqConfig& cfg, const std::vector<double>& values);

// Exact inverse of codes_to_index; throws std::domain_error out of range.
std::vector<double> index_to_codes(const FsqConfig& cfg, std::uint64_t index);

// ─── Self-check ─────────────────────────────────────────────────────────────

struct FsqCheckReport {
    std::uint64_t bijection_total = 0;  // indices tested
    std::uint64_t bijection_ok = 0;     // indices that round-tripped exactly
    std::uint64_t coverage_total = 0;   // codebook size
    std::uint64_t coverage_hit = 0;     // distinct indices reached by sampling
    std::uint64_t samples = 0;          // random vectors drawn
};

// Exhaustive index round-trip plus uniform-sampling codebook coverage.
FsqCheckReport run_fsq_check(const FsqConfig& cfg, std::uint64_t samples, std::uint64_t seed);

} // namespace ttc
