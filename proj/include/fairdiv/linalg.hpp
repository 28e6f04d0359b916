#pragma once

#include <optional>
#include <vector>

#include "fairdiv/rational.hpp"

namespace fairdiv {

/// Exact reduced row echelon form, in place. Returns the pivot column of each
/// reduced row. Deterministic: first nonzero entry in column order pivots.
inline std::vector<int> rref(std::vector<std::vector<Rational>>& a) {
    std::vector<int> pivot_cols;
    if (a.empty()) return pivot_cols;
    const int rows = static_cast<int>(a.size());
    const int cols = static_cast<int>(a[0].size());
    int row = 0;
    for (int col = 0; col < cols && row < rows; ++col) {
        int pivot = -1;
        for (int r = row; r < rows; ++r)
            if (a[r][col] != 0) {
                pivot = r;
                break;
            }
        if (pivot == -1) continue;
        std::swap(a[row], a[pivot]);
        const Rational inv = 1 / a[row][col];
        for (int c = col; c < cols; ++c) a[row][c] *= inv;
        for (int r = 0; r < rows; ++r) {
            if (r == row || a[r][col] == 0) continue;
            const Rational factor = a[r][col];
            for (int c = col; c < cols; ++c) a[r][c] -= factor * a[row][c];
        }
        pivot_cols.push_back(col);
        ++row;
    }
    return pivot_cols;
}

/// A nonzero vector in the null space of a, or nullopt when the columns are
/// linearly independent. Uses the first free column, so the result is
/// deterministic.
inline std::optional<std::vector<Rational>> kernel_vector(std::vector<std::vector<Rational>> a) {
    if (a.empty() || a[0].empty()) return std::nullopt;
    const int cols = static_cast<int>(a[0].size());
    const std::vector<int> pivots = rref(a);
    if (static_cast<int>(pivots.size()) == cols) return std::nullopt;
    std::vector<char> is_pivot(cols, 0);
    for (int c : pivots) is_pivot[c] = 1;
    int free_col = 0;
    while (is_pivot[free_col]) ++free_col;
    std::vector<Rational> z(cols, Rational(0));
    z[free_col] = 1;
    for (std::size_t r = 0; r < pivots.size(); ++r) z[pivots[r]] = -a[r][free_col];
    return z;
}

}  // namespace fairdiv
