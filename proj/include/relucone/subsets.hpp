#pragma once

#include <vector>

namespace relucone {

/// Subsets of {0..d-1}, ordered by cardinality then lexicographically.
inline std::vector<std::vector<int>> subsets_by_cardinality(int d, bool include_empty) {
    std::vector<std::vector<int>> out;
    for (int p = include_empty ? 0 : 1; p <= d; ++p) {
        std::vector<int> pick(static_cast<size_t>(p));
        for (int i = 0; i < p; ++i) pick[static_cast<size_t>(i)] = i;
        while (true) {
            out.push_back(pick);
            if (p == 0) break;
            int k = p - 1;
            while (k >= 0 && pick[static_cast<size_t>(k)] == d - p + k) --k;
            if (k < 0) break;
            ++pick[static_cast<size_t>(k)];
            for (int j = k + 1; j < p; ++j)
                pick[static_cast<size_t>(j)] = pick[static_cast<size_t>(j - 1)] + 1;
        }
    }
    return out;
}

/// True iff sorted `sub` is a subset of sorted `super`.
inline bool subset_contains(const std::vector<int>& super, const std::vector<int>& sub) {
    size_t i = 0;
    for (int v : sub) {
        while (i < super.size() && super[i] < v) ++i;
        if (i == super.size() || super[i] != v) return false;
    }
    return true;
}

}  // namespace relucone
