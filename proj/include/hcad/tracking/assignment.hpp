#pragma once

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <utility>
#include <vector>

namespace hcad::tracking {

using CostMatrix = Eigen::MatrixXd;

inline constexpr double kForbidden = std::numeric_limits<double>::infinity();

struct Assignment {
    std::vector<std::pair<int, int>> pairs;  // (row, col), ascending by row
    double total_cost = 0.0;
};

namespace detail {

/// Shortest-augmenting-path Hungarian method on a square matrix (1-based
/// internals). Returns row -> col plus the optimal dual potentials.
struct HungarianResult {
    std::vector<int> row_to_col;
    std::vector<double> u;
    std::vector<double> v;
};

inline HungarianResult hungarian_square(const CostMatrix& c) {
    const int n = static_cast<int>(c.rows());
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
    std::vector<int> p(n + 1, 0), way(n + 1, 0);
    std::vector<char> used(n + 1);
    for (int i = 1; i <= n; ++i) {
        p[0] = i;
        int j0 = 0;
        std::fill(minv.begin(), minv.end(), inf);
        std::fill(used.begin(), used.end(), 0);
        do {
            used[j0] = 1;
            const int i0 = p[j0];
            double delta = inf;
            int j1 = 0;
            for (int j = 1; j <= n; ++j) {
                if (used[j]) continue;
                const double cur = c(i0 - 1, j - 1) - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (int j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (p[j0] != 0);
        do {
            const int j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0 != 0);
    }
    HungarianResult r;
    r.row_to_col.assign(n, -1);
    for (int j = 1; j <= n; ++j) {
        if (p[j] != 0) r.row_to_col[p[j] - 1] = j - 1;
    }
    r.u.assign(u.begin() + 1, u.end());
    r.v.assign(v.begin() + 1, v.end());
    return r;
}

/// Among all perfect matchings inside the tight-edge graph (all of which are
/// optimal by complementary slackness), pick the one where each row in turn
/// takes its lowest-indexed feasible column.
inline std::vector<int> lexicographic_tight_matching(const std::vector<std::vector<char>>& tight,
                                                     std::vector<int> row_to_col) {
    const int n = static_cast<int>(row_to_col.size());
    std::vector<int> col_to_row(n);
    for (int r = 0; r < n; ++r) col_to_row[row_to_col[r]] = r;
    std::vector<char> fixed_row(n, 0);
    std::vector<char> visited(n);

    // Finds an alternating path that re-homes `row` onto some column and ends by
    // taking `target`; rotates the matching along it on success.
    std::function<bool(int, int, int)> rehome = [&](int row, int banned, int target) -> bool {
        for (int c = 0; c < n; ++c) {
            if (!tight[row][c] || c == banned || c == row_to_col[row]) continue;
            if (c == target) {
                row_to_col[row] = c;
                col_to_row[c] = row;
                return true;
            }
            const int holder = col_to_row[c];
            if (fixed_row[holder] || visited[holder]) continue;
            visited[holder] = 1;
            if (rehome(holder, banned, target)) {
                row_to_col[row] = c;
                col_to_row[c] = row;
                return true;
            }
        }
        return false;
    };

    for (int r = 0; r < n; ++r) {
        for (int c = 0; c < n; ++c) {
            if (!tight[r][c]) continue;
            if (row_to_col[r] == c) break;
            const int holder = col_to_row[c];
            if (fixed_row[holder]) continue;
            std::fill(visited.begin(), visited.end(), 0);
            visited[r] = 1;
            visited[holder] = 1;
            const int old = row_to_col[r];
            if (rehome(holder, c, old)) {
                row_to_col[r] = c;
                col_to_row[c] = r;
                break;
            }
        }
        fixed_row[r] = 1;
    }
    return row_to_col;
}

}  // namespace detail

/// Minimum-cost one-to-one matching on an M x N matrix. Entries equal to
/// +infinity are forbidden: the result first maximizes the number of allowed
/// pairs, then minimizes their total cost. Ties between optimal matchings go to
/// the lexicographically smallest (row, col) sequence.
inline Assignment solve_assignment(const CostMatrix& cost) {
    const int m = static_cast<int>(cost.rows());
    const int ncols = static_cast<int>(cost.cols());
    Assignment result;
    if (m == 0 || ncols == 0) return result;

    const int n = std::max(m, ncols);
    double finite_sum = 0.0;
    double finite_max = 0.0;
    for (int i = 0; i < m; ++i) {
        for (int j = 0; j < ncols; ++j) {
            if (std::isfinite(cost(i, j))) {
                finite_sum += std::abs(cost(i, j));
                finite_max = std::max(finite_max, std::abs(cost(i, j)));
            }
        }
    }
    // Large enough that trading one forbidden pair for any set of allowed ones always wins.
    const double big = 4.0 * finite_sum + 1.0;

    CostMatrix square = CostMatrix::Zero(n, n);
    for (int i = 0; i < m; ++i) {
        for (int j = 0; j < ncols; ++j) square(i, j) = std::isfinite(cost(i, j)) ? cost(i, j) : big;
    }

    auto h = detail::hungarian_square(square);
    const double tol = 1e-11 * (1.0 + big + finite_max);
    std::vector<std::vector<char>> tight(n, std::vector<char>(n, 0));
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) tight[i][j] = square(i, j) - h.u[i] - h.v[j] <= tol;
    }
    // Guarantee the Hungarian matching itself is inside the tight graph.
    for (int i = 0; i < n; ++i) tight[i][h.row_to_col[i]] = 1;
    const auto row_to_col = detail::lexicographic_tight_matching(tight, h.row_to_col);

    for (int i = 0; i < m; ++i) {
        const int j = row_to_col[i];
        if (j < ncols && std::isfinite(cost(i, j))) {
            result.pairs.emplace_back(i, j);
            result.total_cost += cost(i, j);
        }
    }
    return result;
}

}  // namespace hcad::tracking
