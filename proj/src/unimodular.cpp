#include "ponmpc/unimodular.hpp"

#include <cstdlib>
#include <string>

#include "ponmpc/errors.hpp"

namespace ponmpc {

namespace {

void validate_ternary(const TernaryMatrix& m) {
    const std::size_t cols = m.empty() ? 0 : m[0].size();
    for (const auto& row : m) {
        if (row.size() != cols)
            throw NonTernaryEntryError("matrix is ragged");
        for (int v : row)
            if (v < -1 || v > 1)
                throw NonTernaryEntryError("entry " + std::to_string(v) + " outside {-1,0,1}");
    }
}

bool is_unit_row(const std::vector<int>& row) {
    int nonzero = 0;
    for (int v : row)
        if (v != 0) ++nonzero;
    return nonzero == 1;
}

} // namespace

TernaryMatrix reduce_by_unit_rows(const TernaryMatrix& input) {
    validate_ternary(input);
    TernaryMatrix m = input;
    bool changed = true;
    while (changed) {
        changed = false;

        TernaryMatrix kept;
        for (const auto& row : m) {
            if (is_unit_row(row))
                changed = true;
            else
                kept.push_back(row);
        }
        m = std::move(kept);
        if (m.empty()) return m;

        const std::size_t ncols = m[0].size();
        std::vector<char> drop_col(ncols, 0);
        for (std::size_t j = 0; j < ncols; ++j) {
            int nonzero = 0;
            for (const auto& row : m)
                if (row[j] != 0) ++nonzero;
            if (nonzero == 1) {
                drop_col[j] = 1;
                changed = true;
            }
        }
        if (changed) {
            for (auto& row : m) {
                std::vector<int> next;
                next.reserve(row.size());
                for (std::size_t j = 0; j < row.size(); ++j)
                    if (!drop_col[j]) next.push_back(row[j]);
                row = std::move(next);
            }
            if (!m.empty() && m[0].empty()) return {};
        }
    }
    return m;
}

bool check_totally_unimodular_ghouila_houri(const TernaryMatrix& m) {
    validate_ternary(m);
    const int rows = static_cast<int>(m.size());
    if (rows > 20)
        throw MatrixTooLargeError("Ghouila-Houri check limited to 20 rows, got " +
                                  std::to_string(rows));
    if (rows == 0) return true;
    const int cols = static_cast<int>(m[0].size());
    if (cols == 0) return true;

    std::vector<int> selected;
    std::vector<int> colsum(static_cast<std::size_t>(cols));
    std::vector<int> suffix_abs(static_cast<std::size_t>(cols));

    // For one subset: assign +-1 signs via DFS. A column is hopeless when its
    // partial sum cannot be pulled back into [-1, 1] by the rows still
    // unsigned; `bad` counts such columns.
    struct Dfs {
        const TernaryMatrix& m;
        const std::vector<int>& selected;
        std::vector<int>& colsum;
        std::vector<int>& suffix_abs;  // sum over rows at depth >= d of |a|
        int cols;

        bool feasible(std::size_t depth) {
            if (depth == selected.size()) {
                for (int j = 0; j < cols; ++j)
                    if (std::abs(colsum[static_cast<std::size_t>(j)]) > 1) return false;
                return true;
            }
            const auto& row = m[static_cast<std::size_t>(selected[depth])];
            for (int sign = 0; sign < 2; ++sign) {
                const int s = (depth == 0 && sign == 1) ? 0 : (sign == 0 ? 1 : -1);
                if (s == 0) break;  // first row fixed to +1 by symmetry
                bool ok = true;
                for (int j = 0; j < cols && ok; ++j) {
                    const int a = row[static_cast<std::size_t>(j)];
                    if (a == 0) continue;
                    const int ns = colsum[static_cast<std::size_t>(j)] + s * a;
                    const int slack = suffix_abs[static_cast<std::size_t>(j)] - std::abs(a);
                    if (std::abs(ns) > 1 + slack) ok = false;
                }
                if (!ok) continue;
                for (int j = 0; j < cols; ++j) {
                    const int a = row[static_cast<std::size_t>(j)];
                    if (a != 0) {
                        colsum[static_cast<std::size_t>(j)] += s * a;
                        suffix_abs[static_cast<std::size_t>(j)] -= std::abs(a);
                    }
                }
                const bool found = feasible(depth + 1);
                for (int j = 0; j < cols; ++j) {
                    const int a = row[static_cast<std::size_t>(j)];
                    if (a != 0) {
                        colsum[static_cast<std::size_t>(j)] -= s * a;
                        suffix_abs[static_cast<std::size_t>(j)] += std::abs(a);
                    }
                }
                if (found) return true;
            }
            return false;
        }
    };

    for (unsigned mask = 1; mask < (1u << rows); ++mask) {
        selected.clear();
        for (int r = 0; r < rows; ++r)
            if (mask & (1u << r)) selected.push_back(r);

        std::fill(colsum.begin(), colsum.end(), 0);
        std::fill(suffix_abs.begin(), suffix_abs.end(), 0);
        for (int r : selected)
            for (int j = 0; j < cols; ++j)
                suffix_abs[static_cast<std::size_t>(j)] += std::abs(m[static_cast<std::size_t>(r)][static_cast<std::size_t>(j)]);

        Dfs dfs{m, selected, colsum, suffix_abs, cols};
        if (!dfs.feasible(0)) return false;
    }
    return true;
}

} // namespace ponmpc
