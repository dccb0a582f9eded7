#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <variant>
#include <vector>

#include <json.hpp>

#include "lazyplan/roadmap.hpp"

namespace lazyplan {

struct Sphere {
    Configuration center;
    double radius;
};

struct Box {
    Configuration lo;
    Configuration hi;
};

/// Union of hyperspheres and axis-aligned boxes. Boundaries count as obstacle.
class GeometricWorld {
public:
    explicit GeometricWorld(std::size_t dimension, std::vector<Sphere> spheres = {}, std::vector<Box> boxes = {});

    std::size_t dimension() const noexcept { return dimension_; }
    const std::vector<Sphere>& spheres() const noexcept { return spheres_; }
    const std::vector<Box>& boxes() const noexcept { return boxes_; }

    bool in_collision(const Configuration& q) const;

    friend bool operator==(const GeometricWorld&, const GeometricWorld&);

private:
    std::size_t dimension_;
    std::vector<Sphere> spheres_;
    std::vector<Box> boxes_;
};

/// 2-D occupancy grid over the unit square. Row 0 covers y in [0, 1/rows).
class BitmapWorld {
public:
    BitmapWorld(std::size_t rows, std::size_t cols, std::vector<std::uint8_t> occupied);
    BitmapWorld(std::size_t rows, std::size_t cols);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    bool occupied(std::size_t row, std::size_t col) const { return cells_[row * cols_ + col] != 0; }
    void set_occupied(std::size_t row, std::size_t col, bool value) { cells_[row * cols_ + col] = value ? 1 : 0; }

    /// Cell containing q: (floor(y * rows), floor(x * cols)), clamped to the grid.
    std::pair<std::size_t, std::size_t> cell_of(const Configuration& q) const;

    bool in_collision(const Configuration& q) const;

    friend bool operator==(const BitmapWorld&, const BitmapWorld&) = default;

private:
    std::size_t rows_;
    std::size_t cols_;
    std::vector<std::uint8_t> cells_;
};

/// Ground-truth point-collision oracle.
class World {
public:
    World(GeometricWorld world) : impl_(std::move(world)) {}
    World(BitmapWorld world) : impl_(std::move(world)) {}

    std::size_t dimension() const;
    bool is_bitmap() const noexcept { return std::holds_alternative<BitmapWorld>(impl_); }
    const GeometricWorld* geometric() const { return std::get_if<GeometricWorld>(&impl_); }
    const BitmapWorld* bitmap() const { return std::get_if<BitmapWorld>(&impl_); }

    friend bool operator==(const World&, const World&) = default;

private:
    std::variant<GeometricWorld, BitmapWorld> impl_;

    friend bool point_in_collision(const World& world, const Configuration& q);
};

/// Throws DimensionMismatch when q and the world disagree on dimension.
bool point_in_collision(const World& world, const Configuration& q);

struct ProbeResult {
    Configuration q;
    double t;
    bool collided;
};

struct EdgeEvaluation {
    EdgeStatus status = EdgeStatus::Free;
    std::vector<ProbeResult> checked;
};

/// Probe parameters along an edge of the given length, in evaluation order:
/// 0, 1, then odd multiples of 2^-k for k = 1, 2, ... breadth first, until the
/// spacing between adjacent parameters is at most `resolution` along the edge.
std::vector<double> probe_schedule(double length, double resolution);

/// Number of subdivision levels probe_schedule uses.
int subdivision_depth(double length, double resolution);

/// Remembers outcomes of configurations already checked during one run.
/// Endpoint probes are keyed by vertex, interior probes by (edge, t).
class ProbeCache {
public:
    std::optional<bool> vertex(VertexId v) const;
    std::optional<bool> edge_point(EdgeId e, double t) const;
    void store_vertex(VertexId v, bool collided) { vertices_[v] = collided; }
    void store_edge_point(EdgeId e, double t, bool collided) { edge_points_[{e, t}] = collided; }

private:
    std::unordered_map<VertexId, bool> vertices_;
    std::map<std::pair<EdgeId, double>, bool> edge_points_;
};

/// Evaluates the segment u-v without caching.
EdgeEvaluation evaluate_edge(const World& world, const Configuration& u, const Configuration& v, double resolution);

/// Evaluates roadmap edge e from edge(e).u to edge(e).v. Cache hits cost nothing
/// and are not recorded in `checked`.
EdgeEvaluation evaluate_edge(const World& world, const Roadmap& roadmap, EdgeId e, double resolution,
                             ProbeCache& cache);

struct ForestParams {
    std::size_t dimension = 2;
    std::size_t n_obstacles = 20;
    double radius_min = 0.04;
    double radius_max = 0.1;
};

struct MazeParams {
    std::size_t rows = 64;
    std::size_t cols = 64;
    std::size_t wall_cells = 2;
    std::size_t passage_cells = 6;
};

using GeneratorConfig = std::variant<ForestParams, MazeParams>;

/// Start and goal corners used by every generated problem: all-0.05 and all-0.95.
Configuration default_start(std::size_t dimension);
Configuration default_goal(std::size_t dimension);

GeometricWorld gen_forest_world(const ForestParams& params, std::uint64_t seed);
BitmapWorld gen_maze_world(const MazeParams& params, std::uint64_t seed);
World gen_world(const GeneratorConfig& config, std::uint64_t seed);
std::size_t generator_dimension(const GeneratorConfig& config);

/// 4-connected flood fill between the cells holding `from` and `to`.
bool bitmap_connected(const BitmapWorld& world, const Configuration& from, const Configuration& to);

struct FiniteWorldSet {
    std::vector<World> worlds;
    std::size_t true_index = 0;

    const World& true_world() const { return worlds.at(true_index); }
};

FiniteWorldSet gen_finite_set(const GeneratorConfig& config, std::size_t k, std::uint64_t seed);

/// Plain P2 PGM; values below 128 (on a 255 scale) are occupied. The first image
/// row is the top of the square (highest y).
BitmapWorld load_pgm(const std::string& path);
BitmapWorld parse_pgm(const std::string& text);
void save_pgm(const BitmapWorld& world, const std::string& path);
std::string format_pgm(const BitmapWorld& world);

nlohmann::json world_to_json(const World& world);
World world_from_json(const nlohmann::json& j);
nlohmann::json world_set_to_json(const FiniteWorldSet& set);
FiniteWorldSet world_set_from_json(const nlohmann::json& j);

nlohmann::json generator_to_json(const GeneratorConfig& config);
GeneratorConfig generator_from_json(const nlohmann::json& j);

} // namespace lazyplan
