#include "lazyplan/roadmap.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <queue>
#include <sstream>

#include "lazyplan/errors.hpp"
#include "lazyplan/hash.hpp"
#include "lazyplan/rng.hpp"

namespace lazyplan {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kWeightTolerance = 1e-12;

std::size_t nth_prime(std::size_t index) {
    std::size_t found = 0;
    for (std::size_t candidate = 2;; ++candidate) {
        bool prime = true;
        for (std::size_t f = 2; f * f <= candidate; ++f) {
            if (candidate % f == 0) {
                prime = false;
                break;
            }
        }
        if (prime && found++ == index) {
            return candidate;
        }
    }
}

double radical_inverse(std::size_t index, std::size_t base) {
    double result = 0.0;
    double scale = 1.0 / static_cast<double>(base);
    while (index > 0) {
        result += static_cast<double>(index % base) * scale;
        index /= base;
        scale /= static_cast<double>(base);
    }
    return result;
}

} // namespace

Configuration::Configuration(std::vector<double> coords) : coords_(std::move(coords)) {}

Configuration::Configuration(std::initializer_list<double> coords) : coords_(coords) {}

Configuration Configuration::interpolate(const Configuration& u, const Configuration& v, double t) {
    std::vector<double> out(u.dimension());
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = u[i] + t * (v[i] - u[i]);
    }
    return Configuration(std::move(out));
}

double squared_distance(const Configuration& a, const Configuration& b) {
    double sum = 0.0;
    for (std::size_t i = 0; i < a.dimension(); ++i) {
        const double diff = a[i] - b[i];
        sum += diff * diff;
    }
    return sum;
}

double distance(const Configuration& a, const Configuration& b) { return std::sqrt(squared_distance(a, b)); }

const char* to_string(EdgeStatus status) {
    switch (status) {
    case EdgeStatus::Unknown:
        return "unknown";
    case EdgeStatus::Free:
        return "free";
    case EdgeStatus::Collision:
        return "collision";
    }
    return "unknown";
}

Roadmap::Roadmap(std::vector<Configuration> vertices, std::vector<Edge> edges, VertexId start, VertexId goal)
    : vertices_(std::move(vertices)), edges_(std::move(edges)), start_(start), goal_(goal) {
    if (vertices_.size() < 2) {
        throw Error("roadmap needs at least two vertices");
    }
    const std::size_t d = vertices_.front().dimension();
    if (d == 0) {
        throw Error("configuration dimension must be at least 1");
    }
    for (const auto& q : vertices_) {
        if (q.dimension() != d) {
            throw DimensionMismatch("roadmap vertices have mixed dimensions");
        }
        for (double x : q.coords()) {
            if (!(x >= 0.0 && x <= 1.0)) {
                throw Error("configuration coordinate outside the unit cube");
            }
        }
    }
    if (start_ >= vertices_.size() || goal_ >= vertices_.size() || start_ == goal_) {
        throw Error("start and goal must be distinct valid vertices");
    }

    adjacency_.resize(vertices_.size());
    for (EdgeId e = 0; e < edges_.size(); ++e) {
        const Edge& edge = edges_[e];
        if (edge.u >= vertices_.size() || edge.v >= vertices_.size()) {
            throw Error("edge endpoint out of range");
        }
        if (edge.u == edge.v) {
            throw Error("self-loop in roadmap");
        }
        if (std::abs(edge.weight - distance(vertices_[edge.u], vertices_[edge.v])) > kWeightTolerance ||
            !(edge.weight > 0.0)) {
            throw Error("edge weight does not match endpoint distance");
        }
        for (const auto& inc : adjacency_[edge.u]) {
            if (inc.neighbor == edge.v) {
                throw Error("duplicate edge in roadmap");
            }
        }
        adjacency_[edge.u].push_back({edge.v, e});
        adjacency_[edge.v].push_back({edge.u, e});
    }
}

std::optional<EdgeId> Roadmap::find_edge(VertexId a, VertexId b) const {
    for (const auto& inc : adjacency_.at(a)) {
        if (inc.neighbor == b) {
            return inc.edge;
        }
    }
    return std::nullopt;
}

bool Roadmap::start_goal_connected() const {
    std::vector<bool> seen(vertices_.size(), false);
    std::vector<VertexId> stack{start_};
    seen[start_] = true;
    while (!stack.empty()) {
        const VertexId v = stack.back();
        stack.pop_back();
        if (v == goal_) {
            return true;
        }
        for (const auto& inc : adjacency_[v]) {
            if (!seen[inc.neighbor]) {
                seen[inc.neighbor] = true;
                stack.push_back(inc.neighbor);
            }
        }
    }
    return false;
}

double Roadmap::max_edge_weight() const {
    double best = 0.0;
    for (const auto& e : edges_) {
        best = std::max(best, e.weight);
    }
    return best;
}

Path make_path(const Roadmap& roadmap, std::vector<VertexId> vertices) {
    Path path;
    path.vertices = std::move(vertices);
    for (std::size_t i = 1; i < path.vertices.size(); ++i) {
        const auto e = roadmap.find_edge(path.vertices[i - 1], path.vertices[i]);
        if (!e) {
            throw Error("path vertices are not adjacent");
        }
        path.edges.push_back(*e);
        path.length += roadmap.edge(*e).weight;
    }
    return path;
}

std::vector<Configuration> halton_points(std::size_t d, std::size_t n) {
    std::vector<std::size_t> bases(d);
    for (std::size_t i = 0; i < d; ++i) {
        bases[i] = nth_prime(i);
    }
    std::vector<Configuration> points;
    points.reserve(n);
    for (std::size_t index = 1; index <= n; ++index) {
        std::vector<double> coords(d);
        for (std::size_t i = 0; i < d; ++i) {
            coords[i] = radical_inverse(index, bases[i]);
        }
        points.emplace_back(std::move(coords));
    }
    return points;
}

std::vector<Configuration> uniform_points(std::size_t d, std::size_t n, Rng& rng) {
    std::vector<Configuration> points;
    points.reserve(n);
    for (std::size_t k = 0; k < n; ++k) {
        std::vector<double> coords(d);
        for (auto& x : coords) {
            x = rng.uniform();
        }
        points.emplace_back(std::move(coords));
    }
    return points;
}

Roadmap build_roadmap(const std::vector<Configuration>& points, double radius, const Configuration& start,
                      const Configuration& goal) {
    if (!(radius > 0.0)) {
        throw Error("connection radius must be positive");
    }
    std::vector<Configuration> vertices = points;
    auto index_of = [&vertices](const Configuration& q) {
        const auto it = std::find(vertices.begin(), vertices.end(), q);
        if (it != vertices.end()) {
            return static_cast<VertexId>(it - vertices.begin());
        }
        vertices.push_back(q);
        return vertices.size() - 1;
    };
    const VertexId start_id = index_of(start);
    const VertexId goal_id = index_of(goal);

    std::vector<Edge> edges;
    for (VertexId a = 0; a < vertices.size(); ++a) {
        for (VertexId b = a + 1; b < vertices.size(); ++b) {
            const double dist = distance(vertices[a], vertices[b]);
            if (dist > 0.0 && dist <= radius) {
                edges.push_back({a, b, dist});
            }
        }
    }
    return Roadmap(std::move(vertices), std::move(edges), start_id, goal_id);
}

std::optional<Path> shortest_path(const Roadmap& roadmap, const EdgeStatusView& status, const WeightFn& weight_fn) {
    const std::size_t n = roadmap.num_vertices();
    auto cost = [&](EdgeId e) {
        if (status[e] == EdgeStatus::Collision) {
            return kInf;
        }
        const double w = weight_fn(e);
        return std::isnan(w) ? kInf : w;
    };

    // Dijkstra from start.
    std::vector<double> dist(n, kInf);
    using Entry = std::pair<double, VertexId>;
    std::priority_queue<Entry, std::vector<Entry>, std::greater<>> open;
    dist[roadmap.start()] = 0.0;
    open.emplace(0.0, roadmap.start());
    while (!open.empty()) {
        const auto [d, v] = open.top();
        open.pop();
        if (d > dist[v]) {
            continue;
        }
        for (const auto& inc : roadmap.incident(v)) {
            const double w = cost(inc.edge);
            if (w == kInf) {
                continue;
            }
            const double candidate = d + w;
            if (candidate < dist[inc.neighbor]) {
                dist[inc.neighbor] = candidate;
                open.emplace(candidate, inc.neighbor);
            }
        }
    }
    if (dist[roadmap.goal()] == kInf) {
        return std::nullopt;
    }

    // Tight edges form the graph of all minimum-weight paths; pick the
    // lexicographically smallest simple start-goal walk through it.
    std::vector<std::vector<VertexId>> tight(n);
    bool has_zero_tight = false;
    for (VertexId v = 0; v < n; ++v) {
        if (dist[v] == kInf) {
            continue;
        }
        for (const auto& inc : roadmap.incident(v)) {
            const double w = cost(inc.edge);
            if (w != kInf && dist[v] + w == dist[inc.neighbor]) {
                tight[v].push_back(inc.neighbor);
                has_zero_tight = has_zero_tight || w == 0.0;
            }
        }
        std::sort(tight[v].begin(), tight[v].end());
    }

    // Reachability of goal along tight edges, avoiding `blocked` vertices.
    std::vector<std::vector<VertexId>> reverse(n);
    for (VertexId v = 0; v < n; ++v) {
        for (VertexId w : tight[v]) {
            reverse[w].push_back(v);
        }
    }
    auto reaches_goal = [&](const std::vector<bool>& blocked) {
        std::vector<bool> reach(n, false);
        std::vector<VertexId> stack{roadmap.goal()};
        reach[roadmap.goal()] = true;
        while (!stack.empty()) {
            const VertexId w = stack.back();
            stack.pop_back();
            for (VertexId v : reverse[w]) {
                if (!reach[v] && !blocked[v]) {
                    reach[v] = true;
                    stack.push_back(v);
                }
            }
        }
        return reach;
    };

    std::vector<bool> visited(n, false);
    std::vector<bool> reach = reaches_goal(visited);
    std::vector<VertexId> sequence{roadmap.start()};
    visited[roadmap.start()] = true;
    while (sequence.back() != roadmap.goal()) {
        if (has_zero_tight) {
            // Zero-weight tight edges can form cycles; recompute reachability
            // without the vertices already on the path.
            reach = reaches_goal(visited);
        }
        bool advanced = false;
        for (VertexId next : tight[sequence.back()]) {
            if (!visited[next] && reach[next]) {
                sequence.push_back(next);
                visited[next] = true;
                advanced = true;
                break;
            }
        }
        if (!advanced) {
            return std::nullopt;
        }
    }
    return make_path(roadmap, std::move(sequence));
}

std::optional<Path> shortest_path(const Roadmap& roadmap, const EdgeStatusView& status) {
    return shortest_path(roadmap, status, [&roadmap](EdgeId e) { return roadmap.edge(e).weight; });
}

nlohmann::json roadmap_to_json(const Roadmap& roadmap) {
    nlohmann::json vertices = nlohmann::json::array();
    for (const auto& q : roadmap.vertices()) {
        vertices.push_back(q.coords());
    }
    nlohmann::json edges = nlohmann::json::array();
    for (const auto& e : roadmap.edges()) {
        edges.push_back(nlohmann::json::array({e.u, e.v, e.weight}));
    }
    return {{"d", roadmap.dimension()},
            {"vertices", std::move(vertices)},
            {"edges", std::move(edges)},
            {"start", roadmap.start()},
            {"goal", roadmap.goal()}};
}

Roadmap roadmap_from_json(const nlohmann::json& j) {
    try {
        const auto d = j.at("d").get<std::size_t>();
        std::vector<Configuration> vertices;
        for (const auto& v : j.at("vertices")) {
            auto coords = v.get<std::vector<double>>();
            if (coords.size() != d) {
                throw DimensionMismatch("vertex dimension differs from d");
            }
            vertices.emplace_back(std::move(coords));
        }
        std::vector<Edge> edges;
        for (const auto& e : j.at("edges")) {
            edges.push_back({e.at(0).get<VertexId>(), e.at(1).get<VertexId>(), e.at(2).get<double>()});
        }
        return Roadmap(std::move(vertices), std::move(edges), j.at("start").get<VertexId>(),
                       j.at("goal").get<VertexId>());
    } catch (const nlohmann::json::exception& ex) {
        throw Error(std::string("malformed roadmap JSON: ") + ex.what());
    }
}

void save_roadmap(const Roadmap& roadmap, const std::string& path) {
    std::ofstream out(path);
    if (!out) {
        throw IoError("cannot write " + path);
    }
    out << roadmap_to_json(roadmap).dump() << '\n';
}

Roadmap load_roadmap(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot read " + path);
    }
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::parse_error& ex) {
        throw Error(std::string("malformed roadmap JSON: ") + ex.what());
    }
    return roadmap_from_json(j);
}

std::uint64_t roadmap_hash(const Roadmap& roadmap) { return fnv1a64(roadmap_to_json(roadmap).dump()); }

} // namespace lazyplan
