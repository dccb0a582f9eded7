#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "lazyplan/errors.hpp"
#include "lazyplan/rng.hpp"
#include "lazyplan/roadmap.hpp"
#include "oracles.hpp"

using namespace lazyplan;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// start=0, a=1, goal=2; tests supply their own weights.
Roadmap triangle() {
    return build_roadmap({{0.0, 0.0}, {0.3, 0.0}, {0.3, 0.3}}, 1.0, {0.0, 0.0}, {0.3, 0.3});
}

Roadmap random_small_roadmap(Rng& rng, std::size_t n) {
    auto points = uniform_points(2, n - 2, rng);
    const double radius = rng.uniform(0.3, 0.9);
    return build_roadmap(points, radius, {rng.uniform(), rng.uniform()}, {rng.uniform(), rng.uniform()});
}

} // namespace

TEST_CASE("halton points match hand-computed radical inverses") {
    const auto pts = halton_points(2, 3);
    REQUIRE(pts.size() == 3);
    const double expected[3][2] = {{0.5, 1.0 / 3.0}, {0.25, 2.0 / 3.0}, {0.75, 1.0 / 9.0}};
    for (int i = 0; i < 3; ++i) {
        CHECK(pts[i][0] == doctest::Approx(expected[i][0]).epsilon(1e-15));
        CHECK(pts[i][1] == doctest::Approx(expected[i][1]).epsilon(1e-15));
    }
    const auto one = halton_points(1, 1);
    REQUIRE(one.size() == 1);
    CHECK(one[0][0] == 0.5);
    CHECK(halton_points(3, 0).empty());
}

TEST_CASE("halton points are pure and lie in the half-open unit cube") {
    const auto a = halton_points(7, 500);
    const auto b = halton_points(7, 500);
    CHECK(a == b);
    for (const auto& q : a) {
        for (double x : q.coords()) {
            CHECK(x >= 0.0);
            CHECK(x < 1.0);
        }
    }
    // Base 17 drives the seventh coordinate.
    CHECK(a[0][6] == doctest::Approx(1.0 / 17.0));
}

TEST_CASE("r-disk roadmap connects exactly the pairs within the radius") {
    SUBCASE("collinear example") {
        const auto rm = build_roadmap({{0.0, 0.0}, {0.0, 0.5}, {0.0, 1.0}}, 0.6, {0.0, 0.0}, {0.0, 1.0});
        REQUIRE(rm.num_vertices() == 3);
        REQUIRE(rm.num_edges() == 2);
        CHECK(rm.find_edge(0, 1).has_value());
        CHECK(rm.find_edge(1, 2).has_value());
        CHECK_FALSE(rm.find_edge(0, 2).has_value());
        CHECK(rm.start() == 0);
        CHECK(rm.goal() == 2);
    }
    SUBCASE("radius at the cube diagonal gives a complete graph") {
        const auto pts = halton_points(3, 12);
        const auto rm = build_roadmap(pts, std::sqrt(3.0), {0.0, 0.0, 0.0}, {1.0, 1.0, 1.0});
        const std::size_t n = rm.num_vertices();
        CHECK(rm.num_edges() == n * (n - 1) / 2);
    }
    SUBCASE("coincident points are not joined") {
        const auto rm = build_roadmap({{0.2, 0.2}, {0.2, 0.2}}, 0.5, {0.0, 0.0}, {1.0, 1.0});
        CHECK_FALSE(rm.find_edge(0, 1).has_value());
    }
    SUBCASE("start and goal are appended when absent") {
        const auto rm = build_roadmap({{0.5, 0.5}}, 1.0, {0.0, 0.0}, {1.0, 1.0});
        CHECK(rm.num_vertices() == 3);
        CHECK(rm.start() == 1);
        CHECK(rm.goal() == 2);
    }
}

TEST_CASE("r-disk edge set matches a brute-force distance filter") {
    Rng rng(17);
    for (int trial = 0; trial < 20; ++trial) {
        const auto pts = uniform_points(2, 40, rng);
        const double r = rng.uniform(0.05, 0.5);
        const auto rm = build_roadmap(pts, r, {0.0, 0.0}, {1.0, 1.0});
        std::size_t expected = 0;
        for (VertexId a = 0; a < rm.num_vertices(); ++a) {
            for (VertexId b = 0; b < rm.num_vertices(); ++b) {
                if (a == b) {
                    continue;
                }
                double s = 0;
                for (int k = 0; k < 2; ++k) {
                    s += std::pow(rm.vertex(a)[k] - rm.vertex(b)[k], 2);
                }
                const bool want = std::sqrt(s) > 0 && std::sqrt(s) <= r;
                CHECK(rm.find_edge(a, b).has_value() == want);
                CHECK(rm.find_edge(a, b) == rm.find_edge(b, a));
                expected += want ? 1 : 0;
            }
        }
        CHECK(rm.num_edges() * 2 == expected);
        for (const auto& e : rm.edges()) {
            CHECK(std::abs(e.weight - distance(rm.vertex(e.u), rm.vertex(e.v))) <= 1e-12);
        }
    }
}

TEST_CASE("disconnected start and goal are reported") {
    const auto rm = build_roadmap({{0.1, 0.1}, {0.9, 0.9}}, 0.2, {0.0, 0.0}, {1.0, 1.0});
    CHECK_FALSE(rm.start_goal_connected());
    CHECK(triangle().start_goal_connected());
}

TEST_CASE("roadmap construction rejects malformed graphs") {
    std::vector<Configuration> v{{0.0, 0.0}, {1.0, 0.0}};
    CHECK_THROWS_AS(Roadmap(v, {{0, 0, 1.0}}, 0, 1), Error);
    CHECK_THROWS_AS(Roadmap(v, {{0, 1, 1.0}, {1, 0, 1.0}}, 0, 1), Error);
    CHECK_THROWS_AS(Roadmap(v, {{0, 1, 0.9}}, 0, 1), Error);
    CHECK_THROWS_AS(Roadmap(v, {{0, 1, 1.0}}, 0, 0), Error);
    CHECK_THROWS_AS(Roadmap({{0.0, 0.0}, {1.5, 0.0}}, {}, 0, 1), Error);
}

TEST_CASE("shortest path examples on a triangle") {
    const Roadmap rm = triangle();
    const EdgeId sa = *rm.find_edge(0, 1);
    const EdgeId ag = *rm.find_edge(1, 2);
    const EdgeId sg = *rm.find_edge(0, 2);
    auto weights = [&](EdgeId e) { return e == sg ? 3.0 : 1.0; };

    EdgeStatusView status(rm.num_edges());
    auto p = shortest_path(rm, status, weights);
    REQUIRE(p);
    CHECK(p->vertices == std::vector<VertexId>{0, 1, 2});
    CHECK(oracle::path_cost(rm, p->vertices, weights) == 2.0);

    status.set(sa, EdgeStatus::Collision);
    p = shortest_path(rm, status, weights);
    REQUIRE(p);
    CHECK(p->vertices == std::vector<VertexId>{0, 2});
    CHECK(oracle::path_cost(rm, p->vertices, weights) == 3.0);

    status.set(ag, EdgeStatus::Collision);
    status.set(sg, EdgeStatus::Collision);
    CHECK_FALSE(shortest_path(rm, status, weights));
}

TEST_CASE("infinite weights make edges unusable") {
    const Roadmap rm = triangle();
    EdgeStatusView status(rm.num_edges());
    CHECK_FALSE(shortest_path(rm, status, [](EdgeId) { return kInf; }));
}

TEST_CASE("equal-weight paths resolve to the lexicographically smallest sequence") {
    // Square without diagonals: 0-1-3 and 0-2-3 are both two unit hops.
    const auto rm = build_roadmap({{0.0, 0.0}, {0.5, 0.0}, {0.0, 0.5}, {0.5, 0.5}}, 0.6, {0.0, 0.0}, {0.5, 0.5});
    EdgeStatusView status(rm.num_edges());
    const auto p = shortest_path(rm, status, [](EdgeId) { return 1.0; });
    REQUIRE(p);
    CHECK(p->vertices == std::vector<VertexId>{0, 1, 3});
}

TEST_CASE("zero-weight ties still yield a simple lexicographically smallest path") {
    const auto rm = build_roadmap({{0.0, 0.0}, {0.5, 0.0}, {0.0, 0.5}, {0.5, 0.5}}, 0.6, {0.0, 0.0}, {0.5, 0.5});
    EdgeStatusView status(rm.num_edges());
    const auto p = shortest_path(rm, status, [](EdgeId) { return 0.0; });
    REQUIRE(p);
    CHECK(p->vertices == std::vector<VertexId>{0, 1, 3});
}

TEST_CASE("shortest path agrees with exhaustive enumeration on small graphs") {
    Rng rng(2024);
    int checked = 0;
    for (int trial = 0; trial < 300; ++trial) {
        const Roadmap rm = random_small_roadmap(rng, 3 + rng.below(6));
        EdgeStatusView status(rm.num_edges());
        std::vector<double> w(rm.num_edges());
        for (EdgeId e = 0; e < rm.num_edges(); ++e) {
            const double u = rng.uniform();
            if (u < 0.15) {
                status.set(e, EdgeStatus::Collision);
            }
            w[e] = u < 0.25 ? kInf : rng.uniform(0.0, 2.0);
        }
        auto weight = [&](EdgeId e) { return w[e]; };
        auto usable = [&](EdgeId e) { return status[e] != EdgeStatus::Collision && w[e] != kInf; };
        const double expected = oracle::brute_force_shortest(rm, usable, weight);
        const auto p = shortest_path(rm, status, weight);
        if (expected == kInf) {
            CHECK_FALSE(p);
            continue;
        }
        REQUIRE(p);
        ++checked;
        CHECK(p->vertices.front() == rm.start());
        CHECK(p->vertices.back() == rm.goal());
        CHECK(oracle::path_cost(rm, p->vertices, weight) == doctest::Approx(expected).epsilon(1e-12));
        // Simple path.
        auto sorted = p->vertices;
        std::sort(sorted.begin(), sorted.end());
        CHECK(std::adjacent_find(sorted.begin(), sorted.end()) == sorted.end());
    }
    CHECK(checked > 100);
}

TEST_CASE("shortest path is invariant to positive rescaling") {
    Rng rng(99);
    for (int trial = 0; trial < 200; ++trial) {
        const Roadmap rm = random_small_roadmap(rng, 8);
        EdgeStatusView status(rm.num_edges());
        std::vector<double> w(rm.num_edges());
        for (auto& x : w) {
            x = rng.uniform(0.1, 1.0);
        }
        for (double scale : {2.0, 0.125, 3.7}) {
            const auto a = shortest_path(rm, status, [&](EdgeId e) { return w[e]; });
            const auto b = shortest_path(rm, status, [&](EdgeId e) { return scale * w[e]; });
            REQUIRE(a.has_value() == b.has_value());
            if (a) {
                CHECK(a->vertices == b->vertices);
            }
        }
    }
}

TEST_CASE("roadmap JSON round-trips bit-exactly") {
    const auto rm = build_roadmap(halton_points(2, 60), 0.2, {0.05, 0.05}, {0.95, 0.95});
    const auto path = (std::filesystem::temp_directory_path() / "lazyplan_roadmap_test.json").string();
    save_roadmap(rm, path);
    const Roadmap back = load_roadmap(path);
    REQUIRE(back.num_vertices() == rm.num_vertices());
    REQUIRE(back.num_edges() == rm.num_edges());
    for (VertexId v = 0; v < rm.num_vertices(); ++v) {
        CHECK(back.vertex(v) == rm.vertex(v));
    }
    for (EdgeId e = 0; e < rm.num_edges(); ++e) {
        CHECK(back.edge(e).u == rm.edge(e).u);
        CHECK(back.edge(e).v == rm.edge(e).v);
        CHECK(back.edge(e).weight == rm.edge(e).weight);
    }
    CHECK(back.start() == rm.start());
    CHECK(back.goal() == rm.goal());
    CHECK(roadmap_hash(back) == roadmap_hash(rm));
    std::filesystem::remove(path);
}

TEST_CASE("tie-breaking matches brute-force lexicographic minimum among shortest simple paths") {
    Rng rng(5);
    for (int trial = 0; trial < 300; ++trial) {
        const Roadmap rm = random_small_roadmap(rng, 4 + rng.below(5));
        EdgeStatusView status(rm.num_edges());
        std::vector<double> w(rm.num_edges());
        for (auto& x : w) {
            x = static_cast<double>(rng.below(3)); // small integers: exact sums, many ties, zero weights
        }
        auto weight = [&](EdgeId e) { return w[e]; };
        std::optional<std::vector<VertexId>> best;
        double best_cost = kInf;
        for (const auto& p : oracle::all_simple_paths(rm, [](EdgeId) { return true; })) {
            const double c = oracle::path_cost(rm, p, weight);
            if (c < best_cost || (c == best_cost && p < *best)) {
                best_cost = c;
                best = p;
            }
        }
        const auto got = shortest_path(rm, status, weight);
        REQUIRE(got.has_value() == best.has_value());
        if (best) {
            CHECK(got->vertices == *best);
        }
    }
}
