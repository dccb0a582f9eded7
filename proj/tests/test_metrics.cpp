#include <doctest.h>

#include <cmath>

#include "lazyplan/errors.hpp"
#include "lazyplan/metrics.hpp"
#include "oracles.hpp"

using namespace lazyplan;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

ProposerCall call() { return ProposerCall{std::nullopt, nlohmann::json::object()}; }

AnytimeTrace trace_of(std::vector<TraceEvent> events) {
    AnytimeTrace t;
    t.events = std::move(events);
    for (const auto& ev : t.events) {
        if (const auto* e = std::get_if<EdgeEvaluated>(&ev)) {
            t.total_configs = e->total_configs;
        }
    }
    return t;
}

} // namespace

TEST_CASE("oracle shortest feasible path") {
    const Roadmap rm = build_roadmap(halton_points(2, 60), 0.25, default_start(2), default_goal(2));
    const auto free = oracle_shortest_feasible(rm, World(GeometricWorld(2)), 0.01);
    REQUIRE(free.path);
    CHECK(free.length == shortest_path(rm, EdgeStatusView(rm.num_edges()))->length);

    const World blocked(GeometricWorld(2, {}, {Box{{0.0, 0.0}, {1.0, 1.0}}}));
    const auto none = oracle_shortest_feasible(rm, blocked, 0.01);
    CHECK_FALSE(none.path);
    CHECK(none.length == kInf);
}

TEST_CASE("oracle agrees with exhaustive enumeration on small subgraphs") {
    // Eight-vertex subgraphs of a 200-vertex roadmap in a 30-sphere forest.
    const auto points = halton_points(2, 200);
    const World world(gen_forest_world({2, 30, 0.04, 0.1}, 7));
    Rng rng(31);
    std::size_t feasible = 0;
    for (int trial = 0; trial < 60; ++trial) {
        std::vector<Configuration> pick;
        for (int i = 0; i < 6; ++i) {
            pick.push_back(points[rng.below(points.size())]);
        }
        const Configuration start{rng.uniform(0.0, 0.5), rng.uniform(0.0, 0.5)};
        const Configuration goal{rng.uniform(0.5, 1.0), rng.uniform(0.5, 1.0)};
        const Roadmap rm = build_roadmap(pick, 0.6, start, goal);
        const double res = 0.002;
        const auto got = oracle_shortest_feasible(rm, world, res);
        const double expected = oracle::brute_force_shortest(
            rm,
            [&](EdgeId e) {
                return oracle::sweep_edge_free(world, rm.vertex(rm.edge(e).u), rm.vertex(rm.edge(e).v), res);
            },
            [&](EdgeId e) { return rm.edge(e).weight; });
        if (std::isfinite(expected)) {
            ++feasible;
            CHECK(got.length == doctest::Approx(expected).epsilon(1e-9));
        } else {
            CHECK_FALSE(got.path);
        }
    }
    CHECK(feasible > 0);
}

TEST_CASE("anytime curves") {
    const auto empty = anytime_curve(trace_of({call()}));
    REQUIRE(empty.size() == 1);
    CHECK(empty[0].configs_checked == 0);
    CHECK(empty[0].best_length == kInf);

    const auto one = anytime_curve(trace_of({call(), EdgeEvaluated{0, EdgeStatus::Free, 150, 150},
                                             IncumbentUpdated{{0, 1}, 2.0, 150}}));
    REQUIRE(one.size() == 2);
    CHECK(one[1].configs_checked == 150);
    CHECK(one[1].best_length == 2.0);

    const auto two = anytime_curve(trace_of({call(), EdgeEvaluated{0, EdgeStatus::Free, 150, 150},
                                             IncumbentUpdated{{0, 1}, 2.0, 150}, call(),
                                             EdgeEvaluated{1, EdgeStatus::Free, 750, 900},
                                             IncumbentUpdated{{0, 2, 1}, 1.4, 900}}));
    REQUIRE(two.size() == 3);
    CHECK(two[2].configs_checked == 900);
    CHECK(two[2].best_length == 1.4);
    CHECK(curve_value_at(two, 0) == kInf);
    CHECK(curve_value_at(two, 149) == kInf);
    CHECK(curve_value_at(two, 150) == 2.0);
    CHECK(curve_value_at(two, 899) == 2.0);
    CHECK(curve_value_at(two, 5000) == 1.4);
    CHECK(checks_to_first_feasible(trace_of({call()})) == std::nullopt);
    CHECK(checks_to_first_feasible(trace_of({call(), IncumbentUpdated{{0, 1}, 2.0, 150}})) == 150);
}

TEST_CASE("cumulative regret examples") {
    SUBCASE("no incumbent for three episodes") {
        const auto r = cumulative_regret(trace_of({call(), call(), call()}), 1.0, 5.0);
        REQUIRE(r.cumulative.size() == 3);
        CHECK(r.cumulative[2] == 12.0);
        CHECK(r.deltas == std::vector<double>{4.0, 4.0, 4.0});
    }
    SUBCASE("oracle-optimal from the first episode") {
        const auto r = cumulative_regret(
            trace_of({call(), IncumbentUpdated{{0, 1}, 1.5, 10}, call(), call(), call()}), 1.5, 9.0);
        CHECK(r.cumulative == std::vector<double>{0.0, 0.0, 0.0, 0.0});
    }
    SUBCASE("improvement mid-run") {
        const auto r = cumulative_regret(trace_of({call(), call(), IncumbentUpdated{{0, 1}, 3.0, 10}, call(),
                                                   IncumbentUpdated{{0, 2, 1}, 2.0, 30}}),
                                         2.0, 10.0);
        CHECK(r.deltas == std::vector<double>{8.0, 1.0, 0.0});
        CHECK(r.cumulative == std::vector<double>{8.0, 9.0, 9.0});
    }
    CHECK_THROWS_AS(cumulative_regret(trace_of({call()}), kInf, 5.0), InvalidOracle);
    CHECK_THROWS_AS(cumulative_regret(trace_of({call()}), std::nan(""), 5.0), InvalidOracle);
    CHECK(cumulative_regret(AnytimeTrace{}, 1.0, 5.0).cumulative.empty());
}

TEST_CASE("regret on real runs: non-negative gaps, non-increasing average, scale covariance") {
    const Roadmap rm = build_roadmap(halton_points(2, 120), 0.18, default_start(2), default_goal(2));
    std::size_t checked = 0;
    for (std::uint64_t id = 0; id < 12; ++id) {
        const auto set = gen_finite_set(ForestParams{}, 6, 500 + id);
        const auto tables = std::make_shared<const WorldStatusTables>(precompute_world_tables(rm, set.worlds, 0.001));
        const auto oracle = oracle_from_statuses(rm, tables->worlds[set.true_index]);
        if (!oracle.path) {
            continue;
        }
        ++checked;
        const FiniteSetPosterior post(tables, std::make_shared<const std::vector<World>>(set.worlds));
        PsmpProposer psmp;
        Rng rng(id);
        const auto trace = run_search(rm, set.true_world(), post, psmp, Termination{20000, 100}, 0.001, rng);
        const double penalty = default_fail_penalty(rm);
        const auto r = cumulative_regret(trace, oracle.length, penalty);
        REQUIRE_FALSE(r.cumulative.empty());
        for (std::size_t k = 0; k < r.deltas.size(); ++k) {
            CHECK(r.deltas[k] >= -1e-12);
            if (k > 0) {
                CHECK(r.cumulative[k] >= r.cumulative[k - 1]);
                CHECK(r.cumulative[k] / (k + 1.0) <= r.cumulative[k - 1] / static_cast<double>(k) + 1e-12);
            }
        }

        // Rescaling every weight by c scales every path length, the oracle and the penalty by c.
        for (const double c : {0.5, 3.0}) {
            AnytimeTrace st = trace;
            for (auto& ev : st.events) {
                if (auto* inc = std::get_if<IncumbentUpdated>(&ev)) {
                    inc->length = oracle::path_cost(rm, inc->path, [&](EdgeId e) { return c * rm.edge(e).weight; });
                }
            }
            const auto rs = cumulative_regret(st, c * oracle.length, c * penalty);
            REQUIRE(rs.cumulative.size() == r.cumulative.size());
            for (std::size_t k = 0; k < r.cumulative.size(); ++k) {
                CHECK(rs.cumulative[k] == doctest::Approx(c * r.cumulative[k]).epsilon(1e-9));
            }
        }
    }
    CHECK(checked > 0);
}

TEST_CASE("success versus budget") {
    std::vector<AnytimeTrace> traces;
    for (const std::size_t at : {40, 60, 100}) {
        traces.push_back(trace_of({call(), IncumbentUpdated{{0, 1}, 1.0, at}}));
    }
    std::vector<const AnytimeTrace*> ptrs;
    for (const auto& t : traces) {
        ptrs.push_back(&t);
    }
    const auto curve = success_budget_curve(ptrs, {50, 100});
    REQUIRE(curve.size() == 2);
    CHECK(curve[0] == std::pair<std::size_t, double>{50, 1.0 / 3.0});
    CHECK(curve[1] == std::pair<std::size_t, double>{100, 1.0});

    const AnytimeTrace never = trace_of({call()});
    ptrs.push_back(&never);
    const auto partial = success_budget_curve(ptrs, {0, 10, 50, 100, 1000});
    for (std::size_t i = 1; i < partial.size(); ++i) {
        CHECK(partial[i].second >= partial[i - 1].second);
    }
    CHECK(partial.back().second == 0.75);
    CHECK_THROWS_AS(success_budget_curve({}, {10}), EmptyInput);
}

TEST_CASE("trace audit") {
    const Roadmap rm = build_roadmap(halton_points(2, 80), 0.2, default_start(2), default_goal(2));
    const World world(gen_forest_world({2, 20, 0.04, 0.1}, 3));
    LazySpProposer lazysp;
    BernoulliPosterior post;
    Rng rng(0);
    const auto trace = run_search(rm, world, post, lazysp, {}, 0.001, rng);
    REQUIRE(trace.incumbent);
    CHECK(audit_trace(rm, world, 0.001, trace).ok());

    SUBCASE("broken running sum") {
        AnytimeTrace bad = trace;
        for (auto& ev : bad.events) {
            if (auto* e = std::get_if<EdgeEvaluated>(&ev)) {
                e->total_configs += 1;
                break;
            }
        }
        CHECK_FALSE(audit_trace(rm, world, 0.001, bad).ok());
    }
    SUBCASE("incumbent through an obstacle") {
        const World full(GeometricWorld(2, {}, {Box{{0.2, 0.2}, {0.8, 0.8}}}));
        const auto direct = oracle_shortest_feasible(rm, World(GeometricWorld(2)), 0.001);
        AnytimeTrace bad = trace_of({call(), IncumbentUpdated{direct.path->vertices, direct.length, 0}});
        CHECK_FALSE(audit_trace(rm, full, 0.001, bad).ok());
    }
    SUBCASE("non-decreasing incumbents") {
        AnytimeTrace bad = trace_of({call(), IncumbentUpdated{trace.incumbent->vertices, trace.incumbent->length, 0},
                                     call(), IncumbentUpdated{trace.incumbent->vertices, trace.incumbent->length, 0}});
        CHECK_FALSE(audit_trace(rm, world, 0.001, bad).ok());
    }
}
