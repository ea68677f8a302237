#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <vector>

namespace parid {

/// Degree histogram of one snapshot G(t): N_k(t) and the derived fractions.
struct EmpiricalStats {
    std::uint64_t t = 0;
    /// L_t, the sum of initial degrees (number of edges).
    std::uint64_t edges = 0;
    /// Sparse N_k; only degrees that occur are stored.
    std::map<std::uint64_t, std::uint64_t> counts;

    static EmpiricalStats from_degrees(std::uint64_t t, std::uint64_t edges,
                                       std::span<const std::uint64_t> degrees);

    std::uint64_t vertex_count() const noexcept { return t + 1; }
    std::uint64_t count(std::uint64_t k) const;
    double p(std::uint64_t k) const;
    /// N_{>=k}(t).
    std::uint64_t count_at_least(std::uint64_t k) const;
    double p_at_least(std::uint64_t k) const;
    std::uint64_t max_degree() const noexcept { return counts.empty() ? 0 : counts.rbegin()->first; }
    /// Sum over k of N_k and of k N_k, in exact integer arithmetic.
    std::uint64_t total_count() const;
    std::uint64_t degree_sum() const;

    /// All degrees as a multiset expanded in descending order.
    std::vector<std::uint64_t> sorted_degrees_desc() const;

    bool operator==(const EmpiricalStats&) const = default;
};

}  // namespace parid
