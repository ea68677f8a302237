#pragma once

#include <bit>
#include <cassert>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

#include "parid/rng.hpp"

namespace parid {

/// Dynamic weighted index sampler: a Fenwick tree over non-negative double
/// weights with O(log n) point update, O(log n) inverse-prefix sampling and
/// multinomial batch sampling by binomial splitting.
///
/// The exact per-index weights are kept next to the tree, so floating drift in
/// the tree's partial sums can be discarded at any time with rebuild().
class FenwickSampler {
public:
    /// Number of point updates after which the tree is re-summed regardless of
    /// observed drift.
    static constexpr std::uint64_t kRebuildInterval = std::uint64_t{1} << 20;
    static constexpr double kDriftTolerance = 1e-6;

    FenwickSampler() = default;

    explicit FenwickSampler(std::size_t capacity) { reserve(capacity); }

    std::size_t size() const noexcept { return values_.size(); }
    double value(std::size_t i) const noexcept { return values_[i]; }
    double total() const noexcept { return capacity_ == 0 ? 0.0 : tree_[capacity_]; }
    std::uint64_t updates_since_rebuild() const noexcept { return updates_; }

    void reserve(std::size_t n) {
        if (n > capacity_) {
            capacity_ = std::bit_ceil(n);
            values_.reserve(capacity_);
            rebuild();
        }
    }

    void push_back(double w) {
        assert(w >= 0.0);
        if (values_.size() == capacity_) {
            values_.push_back(w);
            capacity_ = std::bit_ceil(values_.size() * 2);
            rebuild();
            return;
        }
        values_.push_back(w);
        add_to_tree(values_.size() - 1, w);
    }

    void set(std::size_t i, double w) {
        assert(w >= 0.0);
        const double diff = w - values_[i];
        values_[i] = w;
        add_to_tree(i, diff);
    }

    /// Re-sums the tree from the stored exact weights.
    void rebuild() {
        tree_.assign(capacity_ + 1, 0.0);
        for (std::size_t i = 0; i < values_.size(); ++i) {
            tree_[i + 1] = values_[i];
        }
        for (std::size_t i = 1; i <= capacity_; ++i) {
            const std::size_t parent = i + (i & (~i + 1));
            if (parent <= capacity_) {
                tree_[parent] += tree_[i];
            }
        }
        updates_ = 0;
    }

    /// Rebuilds when the update budget is spent or the tree total has drifted
    /// from `expected_total` by more than the relative tolerance. Returns true
    /// if a rebuild happened.
    bool refresh(double expected_total) {
        const double scale = std::abs(expected_total);
        if (updates_ >= kRebuildInterval || std::abs(total() - expected_total) > kDriftTolerance * scale) {
            rebuild();
            return true;
        }
        return false;
    }

    /// Index i such that prefix(i) <= target < prefix(i + 1).
    std::size_t find(double target) const noexcept {
        std::size_t pos = 0;
        for (std::size_t step = capacity_ >> 1; step > 0; step >>= 1) {
            const std::size_t next = pos + step;
            if (tree_[next] <= target) {
                pos = next;
                target -= tree_[next];
            }
        }
        return settle(pos);
    }

    std::size_t sample(Stream& rng) const noexcept { return find(rng.uniform() * total()); }

    /// Distributes `n` independent draws over the indices, calling
    /// on_hit(index, count) once for every index with a positive count.
    /// Equivalent in law to n calls of sample().
    template <typename OnHit>
    void sample_multinomial(std::uint64_t n, Stream& rng, OnHit&& on_hit) const {
        if (n == 0 || capacity_ == 0) {
            return;
        }
        split(0, capacity_, n, total(), rng, on_hit);
    }

private:
    void add_to_tree(std::size_t i, double diff) noexcept {
        for (std::size_t j = i + 1; j <= capacity_; j += j & (~j + 1)) {
            tree_[j] += diff;
        }
        ++updates_;
    }

    // Rounding can push a descent onto padding or a zero-weight slot.
    std::size_t settle(std::size_t pos) const noexcept {
        if (pos >= values_.size()) {
            pos = values_.size() - 1;
        }
        while (pos > 0 && values_[pos] <= 0.0) {
            --pos;
        }
        if (values_[pos] <= 0.0) {
            while (pos + 1 < values_.size() && values_[pos] <= 0.0) {
                ++pos;
            }
        }
        return pos;
    }

    template <typename OnHit>
    void split(std::size_t pos, std::size_t len, std::uint64_t n, double range_total, Stream& rng,
               OnHit& on_hit) const {
        if (len == 1) {
            on_hit(settle(pos), n);
            return;
        }
        const std::size_t half = len >> 1;
        const double left = pos + half <= capacity_ ? std::max(tree_[pos + half], 0.0) : 0.0;
        const double right = std::max(range_total - left, 0.0);
        std::uint64_t to_left = 0;
        if (right <= 0.0 || pos + half >= values_.size()) {
            to_left = n;
        } else if (left > 0.0) {
            const double p = std::min(left / (left + right), 1.0);
            std::binomial_distribution<std::uint64_t> binom(n, p);
            to_left = binom(rng);
        }
        if (to_left > 0) {
            split(pos, half, to_left, left, rng, on_hit);
        }
        if (n - to_left > 0) {
            split(pos + half, half, n - to_left, right, rng, on_hit);
        }
    }

    std::vector<double> values_;
    std::vector<double> tree_ = std::vector<double>(1, 0.0);
    std::size_t capacity_ = 0;
    std::uint64_t updates_ = 0;
};

}  // namespace parid
