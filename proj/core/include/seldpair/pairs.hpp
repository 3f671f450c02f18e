#pragma once

#include <utility>
#include <vector>

#include "seldpair/errors.hpp"

namespace seldpair {

/// Canonical microphone pair order: (0,1),(0,2),...,(0,M-1),(1,2),...
/// Every per-pair vector in the library and in the file formats follows it.
inline std::vector<std::pair<int, int>> enumerate_pairs(int num_mics) {
    if (num_mics < 2) throw ValidationError("enumerate_pairs: need at least 2 microphones");
    std::vector<std::pair<int, int>> pairs;
    pairs.reserve(static_cast<size_t>(num_mics) * (num_mics - 1) / 2);
    for (int i = 0; i < num_mics; ++i)
        for (int j = i + 1; j < num_mics; ++j) pairs.emplace_back(i, j);
    return pairs;
}

inline int num_pairs(int num_mics) { return num_mics * (num_mics - 1) / 2; }

/// Index of pair (i,j), i < j, in the canonical order.
inline int pair_index(int i, int j, int num_mics) {
    if (i < 0 || j <= i || j >= num_mics)
        throw ValidationError("pair_index: pair out of range");
    // pairs starting at i' < i: sum of (M-1-i') terms
    int base = i * num_mics - i * (i + 1) / 2;
    return base + (j - i - 1);
}

}  // namespace seldpair
