#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace ppcmt {

struct AssignmentResult {
    std::vector<std::size_t> row_to_col;  // permutation, row i matched to col row_to_col[i]
    double total_cost = 0.0;
    std::vector<double> u, v;  // dual potentials; u[i] + v[j] <= cost(i,j), tight on matches
    bool exact = true;
    double epsilon = 0.0;  // final auction epsilon (0 on the exact path)
};

// Exact minimum-cost perfect matching on a dense n x n matrix (row-major),
// shortest augmenting paths with potentials. O(n^3), deterministic.
AssignmentResult hungarian_assign(const std::vector<double>& cost, std::size_t n);

// Forward auction with epsilon scaling. Total cost is within n*eps_final of
// the optimum. Costs are queried on demand, so no n^2 matrix is stored.
AssignmentResult auction_assign(const std::function<double(std::size_t, std::size_t)>& cost,
                                std::size_t n, double eps_final);

}  // namespace ppcmt
