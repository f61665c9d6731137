#include "ttc/fsq.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "ttc/errors.hpp"
#include "ttc/rng.hpp"

namespace ttc {

// ─── Config ─────────────────────────────────────────────────────────────────

FsqConfig FsqConfig::default_config() {
    FsqConfig cfg;
    cfg.levels.assign(8, 4);
    return cfg;
}

std::uint64_t FsqConfig::codebook_size() const {
    std::uint64_t size = 1;
    for (int l : levels) {
        size *= static_cast<std::uint64_t>(l);
    }
    return size;
}

void FsqConfig::validate() const {
    if (levels.empty()) {
        throw ConfigError("fsq config needs at least one dimension");
    }
    for (int l : levels) {
        if (l < 2) {
            throw ConfigError("every fsq level count must be at least 2");
        }
    }
    if (!(sample_rate_hz > 0.0) || !(downsample_ratio > 0.0)) {
        throw ConfigError("sample rate and downsample ratio must be positive");
    }
}

double FsqConfig::grid_point(int d, int i) const {
    const int l = levels[static_cast<std::size_t>(d)];
    return -1.0 + 2.0 * static_cast<double>(i) / static_cast<double>(l - 1);
}

// ─── Quantization ───────────────────────────────────────────────────────────

namespace {

// Index of the nearest grid point to x (x already clamped). Comparing
// against explicit midpoints makes the tie rule exact: a coordinate equal to
// a midpoint stays with the lower grid index.
int snap_index(const FsqConfig& cfg, int d, double x) {
    const int l = cfg.levels[static_cast<std::size_t>(d)];
    for (int i = 0; i + 1 < l; ++i) {
        const double midpoint = 0.5 * (cfg.grid_point(d, i) + cfg.grid_point(d, i + 1));
        if (x <= midpoint) {
            return i;
        }
    }
    return l - 1;
}

} // namespace

FsqCode quantize(const FsqConfig& cfg, const std::vector<double>& h) {
    cfg.validate();
    if (h.size() != cfg.levels.size()) {
        throw std::domain_error("input has " + std::to_string(h.size()) + " dims, config has " +
                                std::to_string(cfg.levels.size()));
    }

    FsqCode code;
    code.values.resize(h.size());
    std::uint64_t radix = 1;
    for (int d = 0; d < cfg.dim(); ++d) {
        const double x = h[static_cast<std::size_t>(d)];
        if (!std::isfinite(x)) {
            throw std::domain_error("non-finite coordinate at dimension " + std::to_string(d));
        }
        const double clamped = x < -1.0 ? -1.0 : (x > 1.0 ? 1.0 : x);
        const int i = snap_index(cfg, d, clamped);
        code.values[static_cast<std::size_t>(d)] = cfg.grid_point(d, i);
        code.index += static_cast<std::uint64_t>(i) * radix;
        radix *= static_cast<std::uint64_t>(cfg.levels[static_cast<std::size_t>(d)]);
    }
    return code;
}

// ─── Mixed-radix codec ──────────────────────────────────────────────────────

std::uint64_t codes_to_index(const FsqConfig& cfg, const std::vector<double>& values) {
    cfg.validate();
    if (values.size() != cfg.levels.size()) {
        throw std::domain_error("value vector has the wrong number of dimensions");
    }

    std::uint64_t index = 0;
    std::uint64_t radix = 1;
    for (int d = 0; d < cfg.dim(); ++d) {
        const int l = cfg.levels[static_cast<std::size_t>(d)];
        const double v = values[static_cast<std::size_t>(d)];
        int position = -1;
        for (int i = 0; i < l; ++i) {
            if (v == cfg.grid_point(d, i)) {
                position = i;
                break;
            }
        }
        if (position < 0) {
            throw std::domain_error("coordinate " + std::to_string(v) +
                                    " is off-grid at dimension " + std::to_string(d));
        }
        index += static_cast<std::uint64_t>(position) * radix;
        radix *= static_cast<std::uint64_t>(l);
    }
    return index;
}

std::vector<double> index_to_codes(const FsqConfig& cfg, std::uint64_t index) {
    cfg.validate();
    if (index >= cfg.codebook_size()) {
        throw std::domain_error("index " + std::to_string(index) + " outside codebook of size " +
                                std::to_string(cfg.codebook_size()));
    }

    std::vector<double> values(cfg.levels.size());
    std::uint64_t rest = index;
    for (int d = 0; d < cfg.dim(); ++d) {
        const std::uint64_t l = static_cast<std::uint64_t>(cfg.levels[static_cast<std::size_t>(d)]);
        values[static_cast<std::size_t>(d)] = cfg.grid_point(d, static_cast<int>(rest % l));
        rest /= l;
    }
    return values;
}

// ─── Self-check ─────────────────────────────────────────────────────────────

FsqCheckReport run_fsq_check(const FsqConfig& cfg, std::uint64_t samples, std::uint64_t seed) {
    cfg.validate();

    FsqCheckReport report;
    report.bijection_total = cfg.codebook_size();
    report.coverage_total = cfg.codebook_size();
    report.samples = samples;

    for (std::uint64_t index = 0; index < report.bijection_total; ++index) {
        const std::vector<double> values = index_to_codes(cfg, index);
        if (codes_to_index(cfg, values) == index) {
            ++report.bijection_ok;
        }
    }

    std::vector<bool> hit(static_cast<std::size_t>(cfg.codebook_size()), false);
    RngStream rng = derive_stream(seed, 0);
    std::vector<double> h(cfg.levels.size());
    std::uint64_t distinct = 0;
    for (std::uint64_t n = 0; n < samples; ++n) {
        for (double& x : h) {
            x = 2.0 * rng.next_double() - 1.0;
        }
        const std::uint64_t index = quantize(cfg, h).index;
        if (!hit[static_cast<std::size_t>(index)]) {
            hit[static_cast<std::size_t>(index)] = true;
            ++distinct;
        }
    }
    report.coverage_hit = distinct;
    return report;
}

} // namespace ttc
