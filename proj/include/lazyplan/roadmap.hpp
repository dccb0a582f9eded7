#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

namespace lazyplan {

using VertexId = std::size_t;
using EdgeId = std::size_t;

/// A point in the unit d-cube.
class Configuration {
public:
    Configuration() = default;
    explicit Configuration(std::vector<double> coords);
    Configuration(std::initializer_list<double> coords);

    std::size_t dimension() const noexcept { return coords_.size(); }
    double operator[](std::size_t i) const { return coords_[i]; }
    const std::vector<double>& coords() const noexcept { return coords_; }

    /// u + t (v - u)
    static Configuration interpolate(const Configuration& u, const Configuration& v, double t);

    friend bool operator==(const Configuration&, const Configuration&) = default;

private:
    std::vector<double> coords_;
};

double distance(const Configuration& a, const Configuration& b);
double squared_distance(const Configuration& a, const Configuration& b);

struct Edge {
    VertexId u;
    VertexId v;
    double weight;

    VertexId other(VertexId x) const { return x == u ? v : u; }
};

enum class EdgeStatus : std::uint8_t { Unknown, Free, Collision };

const char* to_string(EdgeStatus status);

/// Per-edge evaluation status; one entry per roadmap edge, Unknown by default.
class EdgeStatusView {
public:
    EdgeStatusView() = default;
    explicit EdgeStatusView(std::size_t num_edges) : status_(num_edges, EdgeStatus::Unknown) {}

    std::size_t size() const noexcept { return status_.size(); }
    EdgeStatus operator[](EdgeId e) const { return status_.at(e); }
    void set(EdgeId e, EdgeStatus s) { status_.at(e) = s; }

    bool is_evaluated(EdgeId e) const { return status_.at(e) != EdgeStatus::Unknown; }

private:
    std::vector<EdgeStatus> status_;
};

/// Immutable explicit graph over configurations with designated start and goal.
class Roadmap {
public:
    struct Incidence {
        VertexId neighbor;
        EdgeId edge;
    };

    Roadmap(std::vector<Configuration> vertices, std::vector<Edge> edges, VertexId start, VertexId goal);

    std::size_t dimension() const noexcept { return vertices_.front().dimension(); }
    std::size_t num_vertices() const noexcept { return vertices_.size(); }
    std::size_t num_edges() const noexcept { return edges_.size(); }

    const Configuration& vertex(VertexId v) const { return vertices_.at(v); }
    const std::vector<Configuration>& vertices() const noexcept { return vertices_; }
    const Edge& edge(EdgeId e) const { return edges_.at(e); }
    const std::vector<Edge>& edges() const noexcept { return edges_; }
    const std::vector<Incidence>& incident(VertexId v) const { return adjacency_.at(v); }

    /// Edge joining a and b, if any.
    std::optional<EdgeId> find_edge(VertexId a, VertexId b) const;

    VertexId start() const noexcept { return start_; }
    VertexId goal() const noexcept { return goal_; }

    /// True if start and goal share a connected component of the full graph.
    bool start_goal_connected() const;

    double max_edge_weight() const;

private:
    std::vector<Configuration> vertices_;
    std::vector<Edge> edges_;
    std::vector<std::vector<Incidence>> adjacency_;
    VertexId start_;
    VertexId goal_;
};

struct Path {
    std::vector<VertexId> vertices;
    std::vector<EdgeId> edges;
    double length = 0.0;

    friend bool operator==(const Path& a, const Path& b) { return a.vertices == b.vertices; }
};

/// Builds a path from a vertex sequence. Throws if consecutive vertices are not adjacent.
Path make_path(const Roadmap& roadmap, std::vector<VertexId> vertices);

/// First n points of the Halton sequence in the first d prime bases, index starting at 1.
std::vector<Configuration> halton_points(std::size_t d, std::size_t n);

class Rng;
std::vector<Configuration> uniform_points(std::size_t d, std::size_t n, Rng& rng);

/// r-disk roadmap. Start and goal are appended unless an identical point is present.
/// Use Roadmap::start_goal_connected() to detect a disconnected problem.
Roadmap build_roadmap(const std::vector<Configuration>& points, double radius, const Configuration& start,
                      const Configuration& goal);

using WeightFn = std::function<double(EdgeId)>;

/// Minimum-weight start-goal path under weight_fn with Collision edges masked out.
/// Edges weighing +infinity are unusable. Equal-weight paths are ordered by
/// lexicographic comparison of their vertex sequences.
std::optional<Path> shortest_path(const Roadmap& roadmap, const EdgeStatusView& status, const WeightFn& weight_fn);

/// Shortest path under the true edge weights.
std::optional<Path> shortest_path(const Roadmap& roadmap, const EdgeStatusView& status);

nlohmann::json roadmap_to_json(const Roadmap& roadmap);
Roadmap roadmap_from_json(const nlohmann::json& j);

void save_roadmap(const Roadmap& roadmap, const std::string& path);
Roadmap load_roadmap(const std::string& path);

/// FNV-1a hash of the canonical JSON serialization; keys precomputed tables to a roadmap.
std::uint64_t roadmap_hash(const Roadmap& roadmap);

} // namespace lazyplan
