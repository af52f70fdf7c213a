#include "ppcmt/assignment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>

namespace ppcmt {

AssignmentResult hungarian_assign(const std::vector<double>& cost, std::size_t n) {
    if (n == 0) throw std::invalid_argument("empty input");
    if (cost.size() != n * n) throw std::invalid_argument("cost matrix size mismatch");

    constexpr double kInf = std::numeric_limits<double>::infinity();
    // 1-based arrays; p[j] = row matched to column j, column 0 is the virtual root.
    std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
    std::vector<std::size_t> p(n + 1, 0), way(n + 1, 0);
    std::vector<char> used(n + 1);

    for (std::size_t i = 1; i <= n; ++i) {
        p[0] = i;
        std::size_t j0 = 0;
        std::fill(minv.begin(), minv.end(), kInf);
        std::fill(used.begin(), used.end(), char{0});
        do {
            used[j0] = 1;
            const std::size_t i0 = p[j0];
            const double* row = cost.data() + (i0 - 1) * n;
            double delta = kInf;
            std::size_t j1 = 0;
            for (std::size_t j = 1; j <= n; ++j) {
                if (used[j]) continue;
                const double cur = row[j - 1] - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (std::size_t j = 0; j <= n; ++j) {
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
            const std::size_t j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0 != 0);
    }

    AssignmentResult result;
    result.row_to_col.assign(n, 0);
    result.u.assign(n, 0.0);
    result.v.assign(n, 0.0);
    for (std::size_t j = 1; j <= n; ++j) result.row_to_col[p[j] - 1] = j - 1;
    for (std::size_t i = 0; i < n; ++i) {
        result.u[i] = u[i + 1];
        result.total_cost += cost[i * n + result.row_to_col[i]];
    }
    for (std::size_t j = 0; j < n; ++j) result.v[j] = v[j + 1];
    result.exact = true;
    return result;
}

AssignmentResult auction_assign(const std::function<double(std::size_t, std::size_t)>& cost,
                                std::size_t n, double eps_final) {
    if (n == 0) throw std::invalid_argument("empty input");
    if (!(eps_final > 0.0)) throw std::invalid_argument("epsilon must be positive");

    constexpr double kInf = std::numeric_limits<double>::infinity();
    double cmax = 0.0;
    for (std::size_t i = 0; i < n; ++i) cmax = std::max(cmax, std::abs(cost(i, 0)));
    for (std::size_t j = 0; j < n; ++j) cmax = std::max(cmax, std::abs(cost(0, j)));

    std::vector<double> price(n, 0.0);
    std::vector<std::size_t> owner(n, SIZE_MAX), assigned(n, SIZE_MAX);

    double eps = std::max(eps_final, cmax / 2.0);
    while (true) {
        std::fill(owner.begin(), owner.end(), SIZE_MAX);
        std::fill(assigned.begin(), assigned.end(), SIZE_MAX);
        std::vector<std::size_t> queue(n);
        for (std::size_t i = 0; i < n; ++i) queue[i] = i;

        while (!queue.empty()) {
            const std::size_t i = queue.back();
            queue.pop_back();
            // Bid on the best column at benefit -cost(i,j) - price[j].
            double best = -kInf, second = -kInf;
            std::size_t best_j = 0;
            for (std::size_t j = 0; j < n; ++j) {
                const double val = -cost(i, j) - price[j];
                if (val > best) {
                    second = best;
                    best = val;
                    best_j = j;
                } else if (val > second) {
                    second = val;
                }
            }
            const double increment = (second == -kInf ? 0.0 : best - second) + eps;
            price[best_j] += increment;
            if (owner[best_j] != SIZE_MAX) {
                assigned[owner[best_j]] = SIZE_MAX;
                queue.push_back(owner[best_j]);
            }
            owner[best_j] = i;
            assigned[i] = best_j;
        }
        if (eps <= eps_final) break;
        eps = std::max(eps_final, eps / 4.0);
    }

    AssignmentResult result;
    result.row_to_col = assigned;
    for (std::size_t i = 0; i < n; ++i) result.total_cost += cost(i, assigned[i]);
    result.exact = false;
    result.epsilon = eps;
    return result;
}

}  // namespace ppcmt
