#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

#include "hcad/core/error.hpp"
#include "hcad/core/manifest.hpp"
#include "hcad/core/random.hpp"

namespace hcad::train {

struct SplitSpec {
    double test_fraction = 0.15;
    std::uint64_t seed = 0;
    bool stratify = true;

    void validate() const {
        if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
            throw Error(ErrorKind::Config, "test_fraction must lie in (0,1)");
        }
    }
};

/// Number of held-out samples for a group of n: round(f*n), at least 1 and
/// leaving at least 1 behind.
inline std::size_t held_out_count(std::size_t n, double fraction) {
    const auto k = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n)));
    return std::clamp<std::size_t>(k, 1, n - 1);
}

/// Splits into (kept, held out). Both halves keep the input's entry order.
inline std::pair<DatasetManifest, DatasetManifest> stratified_split(const DatasetManifest& m, const SplitSpec& s) {
    s.validate();
    std::vector<std::vector<std::size_t>> groups;
    if (s.stratify) {
        groups.resize(m.classes.size());
        for (std::size_t i = 0; i < m.entries.size(); ++i) groups[m.label_index(m.entries[i])].push_back(i);
    } else {
        groups.emplace_back(m.entries.size());
        for (std::size_t i = 0; i < m.entries.size(); ++i) groups[0][i] = i;
    }

    std::vector<char> held(m.entries.size(), 0);
    for (std::size_t g = 0; g < groups.size(); ++g) {
        auto& idx = groups[g];
        if (idx.size() < 2) {
            const std::string name = s.stratify ? "class " + m.classes.label(g) : std::string("dataset");
            throw Error(ErrorKind::Validation,
                        name + " has " + std::to_string(idx.size()) + " samples; splitting needs at least 2");
        }
        Rng rng(mix_seed(s.seed, g));
        rng.shuffle(idx);
        const std::size_t k = held_out_count(idx.size(), s.test_fraction);
        for (std::size_t j = 0; j < k; ++j) held[idx[j]] = 1;
    }

    DatasetManifest kept, out;
    kept.classes = out.classes = m.classes;
    for (std::size_t i = 0; i < m.entries.size(); ++i) (held[i] ? out : kept).entries.push_back(m.entries[i]);
    return {std::move(kept), std::move(out)};
}

}  // namespace hcad::train
