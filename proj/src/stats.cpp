#include "parid/stats.hpp"

namespace parid {

EmpiricalStats EmpiricalStats::from_degrees(std::uint64_t t, std::uint64_t edges,
                                            std::span<const std::uint64_t> degrees) {
    EmpiricalStats s;
    s.t = t;
    s.edges = edges;
    for (const auto d : degrees) {
        ++s.counts[d];
    }
    return s;
}

std::uint64_t EmpiricalStats::count(std::uint64_t k) const {
    const auto it = counts.find(k);
    return it == counts.end() ? 0 : it->second;
}

double EmpiricalStats::p(std::uint64_t k) const {
    return static_cast<double>(count(k)) / static_cast<double>(vertex_count());
}

std::uint64_t EmpiricalStats::count_at_least(std::uint64_t k) const {
    std::uint64_t n = 0;
    for (auto it = counts.lower_bound(k); it != counts.end(); ++it) {
        n += it->second;
    }
    return n;
}

double EmpiricalStats::p_at_least(std::uint64_t k) const {
    return static_cast<double>(count_at_least(k)) / static_cast<double>(vertex_count());
}

std::uint64_t EmpiricalStats::total_count() const {
    std::uint64_t n = 0;
    for (const auto& [k, c] : counts) {
        n += c;
    }
    return n;
}

std::uint64_t EmpiricalStats::degree_sum() const {
    std::uint64_t n = 0;
    for (const auto& [k, c] : counts) {
        n += k * c;
    }
    return n;
}

std::vector<std::uint64_t> EmpiricalStats::sorted_degrees_desc() const {
    std::vector<std::uint64_t> out;
    out.reserve(total_count());
    for (auto it = counts.rbegin(); it != counts.rend(); ++it) {
        out.insert(out.end(), it->second, it->first);
    }
    return out;
}

}  // namespace parid
