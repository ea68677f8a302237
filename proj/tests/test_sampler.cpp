#include <doctest.h>

#include <array>
#include <cmath>
#include <vector>

#include "parid/engine.hpp"
#include "parid/sampler.hpp"

using parid::FenwickSampler;
using parid::Stream;

namespace {

double tv(const std::vector<std::uint64_t>& counts, const std::vector<double>& probs, std::uint64_t n) {
    double sum = 0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        sum += std::abs(static_cast<double>(counts[i]) / static_cast<double>(n) - probs[i]);
    }
    return sum / 2;
}

}  // namespace

TEST_CASE("prefix search lands on the owning slot") {
    FenwickSampler s;
    for (double w : {1.0, 0.0, 2.0, 3.0, 0.0}) {
        s.push_back(w);
    }
    CHECK(s.total() == 6.0);
    CHECK(s.find(0.0) == 0);
    CHECK(s.find(0.999) == 0);
    CHECK(s.find(1.0) == 2);  // slot 1 has zero weight and is never chosen
    CHECK(s.find(2.999) == 2);
    CHECK(s.find(3.0) == 3);
    CHECK(s.find(5.999) == 3);
    CHECK(s.find(6.0) == 3);  // a target rounded up to the total stays in range
    s.set(1, 4.0);
    CHECK(s.total() == 10.0);
    CHECK(s.find(1.5) == 1);
}

TEST_CASE("growth past capacity keeps prefix sums") {
    FenwickSampler s(2);
    double total = 0;
    for (int i = 1; i <= 1000; ++i) {
        s.push_back(i);
        total += i;
    }
    CHECK(s.total() == total);
    CHECK(s.find(0.5) == 0);
    CHECK(s.find(total - 0.5) == 999);
    CHECK(s.find(1.0 + 2.0 + 0.5) == 2);
}

TEST_CASE("refresh rebuilds after drift") {
    FenwickSampler s;
    s.push_back(1e16);
    s.push_back(1.0);
    for (int i = 0; i < 1000; ++i) {
        s.set(0, 1e16 + (i % 2));
    }
    CHECK(s.refresh(1e16 + 1.0) == false);
    CHECK(s.refresh(5.0));
    CHECK(s.total() == 1e16 + 1.0);
}

TEST_CASE("frozen-state endpoint draws match the attachment law") {
    for (const double delta : {-0.5, 0.0, 2.0}) {
        CAPTURE(delta);
        parid::ModelParams p;
        p.delta = delta;
        p.weights = parid::WeightDistribution::zeta(2.5, 1);
        p.t_max = 99;
        p.seed = 21;
        const std::array<std::uint64_t, 1> snap{99};
        const auto state = parid::run(p, snap).final_state;
        REQUIRE(state.vertex_count() == 100);

        std::vector<double> probs;
        double z = 0;
        for (const auto d : state.degrees()) {
            z += static_cast<double>(d) + delta;
        }
        for (const auto d : state.degrees()) {
            probs.push_back((static_cast<double>(d) + delta) / z);
        }
        CHECK(z == doctest::Approx(2.0 * static_cast<double>(state.total_initial_degree()) + 100 * delta));

        const std::uint64_t n = 1'000'000;
        std::vector<std::uint64_t> counts(100, 0);
        Stream rng(22, 0, Stream::kEndpoints);
        for (std::uint64_t i = 0; i < n; ++i) {
            ++counts[state.draw_endpoint(rng)];
        }
        CHECK(tv(counts, probs, n) <= 0.005);

        FenwickSampler s;
        for (const auto d : state.degrees()) {
            s.push_back(static_cast<double>(d) + delta);
        }
        std::vector<std::uint64_t> multi(100, 0);
        std::uint64_t hits = 0;
        s.sample_multinomial(n, rng, [&](std::size_t i, std::uint64_t c) {
            multi[i] += c;
            hits += c;
        });
        CHECK(hits == n);
        CHECK(tv(multi, probs, n) <= 0.005);
    }
}

TEST_CASE("multinomial splitting never hits zero-weight slots") {
    FenwickSampler s;
    for (int i = 0; i < 37; ++i) {
        s.push_back(i % 3 == 0 ? 0.0 : 1.0);
    }
    Stream rng(23, 0);
    std::uint64_t hits = 0;
    s.sample_multinomial(100000, rng, [&](std::size_t i, std::uint64_t c) {
        REQUIRE(i % 3 != 0);
        REQUIRE(i < 37);
        hits += c;
    });
    CHECK(hits == 100000);
}
