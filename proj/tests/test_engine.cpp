#include <doctest.h>

#include <array>
#include <cmath>
#include <numeric>

#include "oracle.hpp"
#include "parid/engine.hpp"
#include "parid/error.hpp"

using parid::EngineStreams;
using parid::GraphState;
using parid::ModelParams;
using parid::WeightDistribution;

namespace {

ModelParams params(WeightDistribution w, double delta, std::uint64_t t_max, std::uint64_t seed = 1) {
    ModelParams p;
    p.weights = std::move(w);
    p.delta = delta;
    p.t_max = t_max;
    p.seed = seed;
    return p;
}

double to_double(const oracle::Rational& r) {
    return static_cast<double>(r.numerator()) / static_cast<double>(r.denominator());
}

}  // namespace

TEST_CASE("G(1) is two vertices joined by W_1 edges") {
    auto p = params(WeightDistribution::constant(3), 0.0, 1);
    EngineStreams rng(p.seed, 0);
    const auto g = GraphState::init(p, rng);
    CHECK(g.vertex_count() == 2);
    CHECK(g.degrees()[0] == 3);
    CHECK(g.degrees()[1] == 3);
    CHECK(g.total_initial_degree() == 3);
    CHECK(g.time() == 1);

    auto q = params(WeightDistribution::constant(1), -0.5, 1);
    EngineStreams rng2(q.seed, 0);
    const auto h = GraphState::init(q, rng2);
    CHECK(h.degrees()[0] == 1);
    CHECK(h.degrees()[1] == 1);

    auto bad = params(WeightDistribution::constant(1), -1.0, 1);
    EngineStreams rng3(bad.seed, 0);
    CHECK_THROWS_AS(GraphState::init(bad, rng3), parid::ConfigError);
}

TEST_CASE("first step from G(1) attaches to v_0 and v_1 symmetrically") {
    const auto p = params(WeightDistribution::constant(1), 0.0, 2);
    int on_v0 = 0;
    const int n = 100000;
    for (int r = 0; r < n; ++r) {
        EngineStreams rng(p.seed, static_cast<std::uint64_t>(r));
        auto g = GraphState::init(p, rng);
        g.step(rng);
        std::array<std::uint64_t, 3> d{g.degrees()[0], g.degrees()[1], g.degrees()[2]};
        REQUIRE(d[2] == 1);
        REQUIRE(d[0] + d[1] == 3);
        on_v0 += d[0] == 2;
    }
    CHECK(std::abs(on_v0 / static_cast<double>(n) - 0.5) <= 3 * std::sqrt(0.25 / n));
}

TEST_CASE("exhaustive oracle: E[N_1(3)] for constant weights 1, delta 0") {
    const auto e = oracle::expected_counts(1, 0, 3);
    CHECK(e[2].at(1) == oracle::Rational(2));
    CHECK(e[2].at(2) == oracle::Rational(1));
    // v_3 hits the degree-2 vertex with probability 2/4, leaving degrees
    // {3,1,1,1}; otherwise {2,2,1,1}. E[N_1(3)] = (3 + 2) / 2.
    CHECK(e[3].at(1) == oracle::Rational(5, 2));
    oracle::Rational vertices(0);
    oracle::Rational degree_sum(0);
    for (const auto& [k, c] : e[3]) {
        vertices += c;
        degree_sum += c * static_cast<std::int64_t>(k);
    }
    CHECK(vertices == oracle::Rational(4));
    CHECK(degree_sum == oracle::Rational(6));
}

TEST_CASE("simulation matches the exhaustive oracle for tiny t") {
    const std::array<std::uint64_t, 4> times{1, 2, 3, 4};
    for (const std::int64_t m : {1, 2}) {
        for (const std::int64_t delta : {0, 1}) {
            CAPTURE(m);
            CAPTURE(delta);
            const auto exact = oracle::expected_counts(m, delta, 4);
            const auto p = params(WeightDistribution::constant(static_cast<std::uint64_t>(m)),
                                  static_cast<double>(delta), 4, 99);
            const std::uint64_t reps = 100'000;
            std::vector<std::map<std::uint64_t, std::pair<double, double>>> moments(5);
            for (std::uint64_t r = 0; r < reps; ++r) {
                const auto res = parid::run(p, times, r);
                for (std::size_t j = 0; j < times.size(); ++j) {
                    for (const auto& [k, c] : exact[times[j]]) {
                        const double x = static_cast<double>(res.snapshots[j].count(k));
                        moments[times[j]][k].first += x;
                        moments[times[j]][k].second += x * x;
                    }
                }
            }
            for (std::uint64_t t = 1; t <= 4; ++t) {
                for (const auto& [k, c] : exact[t]) {
                    const auto [s, sq] = moments[t][k];
                    const double mean = s / reps;
                    const double var = std::max(sq / reps - mean * mean, 0.0);
                    const double se = std::sqrt(var / reps);
                    CAPTURE(t);
                    CAPTURE(k);
                    CHECK(std::abs(mean - to_double(c)) <= 4 * se + 1e-12);
                }
            }
        }
    }
}

TEST_CASE("run captures snapshots and is deterministic") {
    {
        auto p = params(WeightDistribution::constant(2), 0.0, 1);
        const std::array<std::uint64_t, 1> t1{1};
        const auto res = parid::run(p, t1);
        REQUIRE(res.snapshots.size() == 1);
        CHECK(res.snapshots[0].count(2) == 2);
        CHECK(res.snapshots[0].total_count() == 2);
    }
    const auto p = params(WeightDistribution::zeta(2.2, 1), 0.5, 5000, 77);
    const std::array<std::uint64_t, 3> times{10, 500, 5000};
    const auto a = parid::run(p, times, 3);
    const auto b = parid::run(p, times, 3);
    CHECK(a.snapshots == b.snapshots);
    CHECK(std::equal(a.final_state.degrees().begin(), a.final_state.degrees().end(),
                     b.final_state.degrees().begin(), b.final_state.degrees().end()));
    const auto c = parid::run(p, times, 4);
    CHECK_FALSE(a.snapshots == c.snapshots);
}

TEST_CASE("degree-sum identity at t = 1e5 for constant weights 1") {
    const auto p = params(WeightDistribution::constant(1), 0.0, 100000, 5);
    const std::array<std::uint64_t, 1> t{100000};
    const auto res = parid::run(p, t);
    const auto& h = res.snapshots[0];
    CHECK(h.total_count() == 100001);
    CHECK(h.degree_sum() == 200000);
    CHECK(h.edges == 100000);
}

TEST_CASE("per-step invariants hold along a heavy-tailed run") {
    for (const bool sequential : {false, true}) {
        auto p = params(WeightDistribution::zeta(1.5, 1), 0.0, 3000, 8);
        p.sequential_update = sequential;
        p.record_edges = true;
        EngineStreams rng(p.seed, 0);
        auto g = GraphState::init(p, rng);
        std::vector<std::uint64_t> prev(g.degrees().begin(), g.degrees().end());
        for (std::uint64_t t = 2; t <= p.t_max; ++t) {
            g.step(rng);
            REQUIRE(g.time() == t);
            REQUIRE(g.vertex_count() == t + 1);
            const auto d = g.degrees();
            REQUIRE(std::accumulate(d.begin(), d.end(), std::uint64_t{0}) == 2 * g.total_initial_degree());
            for (std::size_t i = 0; i < prev.size(); ++i) {
                REQUIRE(d[i] >= prev[i]);
            }
            REQUIRE(d[t] == g.initial_degrees()[t]);
            prev.assign(d.begin(), d.end());
            if (t % 500 == 0) {
                g.check_invariants();
            }
        }
        CHECK(g.edges().size() == g.total_initial_degree());
        for (const auto& e : g.edges()) {
            REQUIRE(e.target < e.source);
        }
    }
}

TEST_CASE("the multinomial path handles very large initial degrees") {
    auto p = params(WeightDistribution::zeta(1.3, 1), 0.0, 2000, 9);
    EngineStreams rng(p.seed, 0);
    auto g = GraphState::init(p, rng);
    for (std::uint64_t t = 2; t <= p.t_max; ++t) {
        g.step(rng);
    }
    g.check_invariants();
    CHECK(g.total_initial_degree() > 100000);
}

TEST_CASE("fitness rule with eta = 1 and zeta = delta reproduces the parid weights") {
    auto p = params(WeightDistribution::zeta(2.5, 1), 0.0, 2000, 10);
    p.rule = parid::parse_rule("fitness(eta=const:c=1;zeta=const:c=0.75)");
    EngineStreams rng(p.seed, 0);
    auto g = GraphState::init(p, rng);
    for (std::uint64_t t = 2; t <= p.t_max; ++t) {
        g.step(rng);
    }
    double total = 0;
    for (std::size_t i = 0; i < g.vertex_count(); ++i) {
        REQUIRE(g.attachment_weight(i) == static_cast<double>(g.degrees()[i]) + 0.75);
        total += g.attachment_weight(i);
    }
    CHECK(g.expected_total_weight() ==
          doctest::Approx(2.0 * static_cast<double>(g.total_initial_degree()) + 0.75 * 2001));
    CHECK(total == doctest::Approx(g.expected_total_weight()));

    // The same model under both rules has the same tiny-t law.
    const auto exact = oracle::expected_counts(1, 1, 3);
    auto q = params(WeightDistribution::constant(1), 0.0, 3, 11);
    q.rule = parid::parse_rule("fitness(eta=const:c=1;zeta=const:c=1)");
    const std::array<std::uint64_t, 1> t3{3};
    double sum = 0, sq = 0;
    const int reps = 100000;
    for (int r = 0; r < reps; ++r) {
        const double x = static_cast<double>(parid::run(q, t3, static_cast<std::uint64_t>(r)).snapshots[0].count(1));
        sum += x;
        sq += x * x;
    }
    const double mean = sum / reps;
    const double se = std::sqrt((sq / reps - mean * mean) / reps);
    CHECK(std::abs(mean - to_double(exact[3].at(1))) <= 4 * se);
}

TEST_CASE("fitness rule: eta = 0, zeta = 1 attaches uniformly") {
    auto p = params(WeightDistribution::constant(2), 0.0, 500, 12);
    p.rule = parid::parse_rule("fitness(eta=const:c=0;zeta=const:c=1)");
    EngineStreams rng(p.seed, 0);
    auto g = GraphState::init(p, rng);
    for (std::uint64_t t = 2; t <= p.t_max; ++t) {
        g.step(rng);
    }
    for (std::size_t i = 0; i < g.vertex_count(); ++i) {
        REQUIRE(g.attachment_weight(i) == 1.0);
    }
    std::vector<std::uint64_t> counts(g.vertex_count(), 0);
    parid::Stream draw(13, 0);
    const std::uint64_t n = 1'000'000;
    for (std::uint64_t i = 0; i < n; ++i) {
        ++counts[g.draw_endpoint(draw)];
    }
    double tv = 0;
    for (const auto c : counts) {
        tv += std::abs(static_cast<double>(c) / n - 1.0 / static_cast<double>(counts.size()));
    }
    CHECK(tv / 2 <= 0.01);
}

TEST_CASE("fitness rule: hit probabilities are proportional to eta d + zeta") {
    auto p = params(WeightDistribution::constant(1), 0.0, 200, 14);
    p.rule = parid::parse_rule("fitness(eta=uniform:lo=0.5,hi=2;zeta=const:c=0)");
    EngineStreams rng(p.seed, 0);
    auto g = GraphState::init(p, rng);
    for (std::uint64_t t = 2; t <= p.t_max; ++t) {
        g.step(rng);
    }
    std::vector<double> w;
    double total = 0;
    for (std::size_t i = 0; i < g.vertex_count(); ++i) {
        w.push_back(g.attachment_weight(i));
        total += w.back();
    }
    std::vector<std::uint64_t> counts(w.size(), 0);
    parid::Stream draw(15, 0);
    const std::uint64_t n = 1'000'000;
    for (std::uint64_t i = 0; i < n; ++i) {
        ++counts[g.draw_endpoint(draw)];
    }
    double tv = 0;
    for (std::size_t i = 0; i < w.size(); ++i) {
        tv += std::abs(static_cast<double>(counts[i]) / n - w[i] / total);
    }
    CHECK(tv / 2 <= 0.01);
}

TEST_CASE("attachment rules parse and print") {
    for (const char* spec : {"parid", "fitness(eta=const:c=1;zeta=const:c=0)",
                             "fitness(eta=exp:rate=2;zeta=uniform:lo=0,hi=1)"}) {
        CHECK(parid::parse_rule(parid::rule_to_string(parid::parse_rule(spec))) == parid::parse_rule(spec));
    }
    CHECK_THROWS(parid::parse_rule("linear"));
    auto p = params(WeightDistribution::constant(1), 0.0, 10);
    p.rule = parid::parse_rule("fitness(eta=const:c=0;zeta=const:c=0)");
    CHECK_THROWS_AS(p.validate(), parid::ConfigError);
}
