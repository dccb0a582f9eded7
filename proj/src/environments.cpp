#include "lazyplan/environments.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stack>
#include <tuple>

#include "lazyplan/errors.hpp"
#include "lazyplan/rng.hpp"

namespace lazyplan {

namespace {

constexpr std::size_t kSphereRetries = 1000;
constexpr std::size_t kMazeAttempts = 100;

bool sphere_contains(const Sphere& s, const Configuration& q) {
    return squared_distance(s.center, q) <= s.radius * s.radius;
}

bool box_contains(const Box& b, const Configuration& q) {
    for (std::size_t i = 0; i < q.dimension(); ++i) {
        if (q[i] < b.lo[i] || q[i] > b.hi[i]) {
            return false;
        }
    }
    return true;
}

std::size_t clamp_cell(double x, std::size_t n) {
    const double scaled = std::floor(x * static_cast<double>(n));
    if (!(scaled > 0.0)) {
        return 0;
    }
    return std::min(static_cast<std::size_t>(scaled), n - 1);
}

} // namespace

GeometricWorld::GeometricWorld(std::size_t dimension, std::vector<Sphere> spheres, std::vector<Box> boxes)
    : dimension_(dimension), spheres_(std::move(spheres)), boxes_(std::move(boxes)) {
    for (const auto& s : spheres_) {
        if (s.center.dimension() != dimension_) {
            throw DimensionMismatch("sphere center dimension differs from world");
        }
        if (!(s.radius > 0.0)) {
            throw Error("sphere radius must be positive");
        }
    }
    for (const auto& b : boxes_) {
        if (b.lo.dimension() != dimension_ || b.hi.dimension() != dimension_) {
            throw DimensionMismatch("box corner dimension differs from world");
        }
        for (std::size_t i = 0; i < dimension_; ++i) {
            if (b.lo[i] > b.hi[i]) {
                throw Error("box lower corner exceeds upper corner");
            }
        }
    }
}

bool GeometricWorld::in_collision(const Configuration& q) const {
    for (const auto& s : spheres_) {
        if (sphere_contains(s, q)) {
            return true;
        }
    }
    for (const auto& b : boxes_) {
        if (box_contains(b, q)) {
            return true;
        }
    }
    return false;
}

bool operator==(const GeometricWorld& a, const GeometricWorld& b) {
    if (a.dimension_ != b.dimension_ || a.spheres_.size() != b.spheres_.size() || a.boxes_.size() != b.boxes_.size()) {
        return false;
    }
    for (std::size_t i = 0; i < a.spheres_.size(); ++i) {
        if (!(a.spheres_[i].center == b.spheres_[i].center) || a.spheres_[i].radius != b.spheres_[i].radius) {
            return false;
        }
    }
    for (std::size_t i = 0; i < a.boxes_.size(); ++i) {
        if (!(a.boxes_[i].lo == b.boxes_[i].lo) || !(a.boxes_[i].hi == b.boxes_[i].hi)) {
            return false;
        }
    }
    return true;
}

BitmapWorld::BitmapWorld(std::size_t rows, std::size_t cols, std::vector<std::uint8_t> occupied)
    : rows_(rows), cols_(cols), cells_(std::move(occupied)) {
    if (rows_ == 0 || cols_ == 0) {
        throw Error("bitmap needs at least one row and one column");
    }
    if (cells_.size() != rows_ * cols_) {
        throw Error("bitmap cell count does not match its shape");
    }
}

BitmapWorld::BitmapWorld(std::size_t rows, std::size_t cols)
    : BitmapWorld(rows, cols, std::vector<std::uint8_t>(rows * cols, 0)) {}

std::pair<std::size_t, std::size_t> BitmapWorld::cell_of(const Configuration& q) const {
    return {clamp_cell(q[1], rows_), clamp_cell(q[0], cols_)};
}

bool BitmapWorld::in_collision(const Configuration& q) const {
    const auto [row, col] = cell_of(q);
    return occupied(row, col);
}

std::size_t World::dimension() const {
    return std::visit(
        [](const auto& w) -> std::size_t {
            if constexpr (std::is_same_v<std::decay_t<decltype(w)>, BitmapWorld>) {
                return 2;
            } else {
                return w.dimension();
            }
        },
        impl_);
}

bool point_in_collision(const World& world, const Configuration& q) {
    if (q.dimension() != world.dimension()) {
        throw DimensionMismatch("configuration has dimension " + std::to_string(q.dimension()) + ", world has " +
                                std::to_string(world.dimension()));
    }
    return std::visit([&q](const auto& w) { return w.in_collision(q); }, world.impl_);
}

int subdivision_depth(double length, double resolution) {
    if (!(resolution > 0.0)) {
        throw Error("resolution must be positive");
    }
    int depth = 0;
    while (std::ldexp(length, -depth) > resolution) {
        ++depth;
    }
    return depth;
}

std::vector<double> probe_schedule(double length, double resolution) {
    const int depth = subdivision_depth(length, resolution);
    std::vector<double> ts{0.0, 1.0};
    for (int level = 1; level <= depth; ++level) {
        const std::uint64_t denom = std::uint64_t{1} << level;
        for (std::uint64_t num = 1; num < denom; num += 2) {
            ts.push_back(std::ldexp(static_cast<double>(num), -level));
        }
    }
    return ts;
}

std::optional<bool> ProbeCache::vertex(VertexId v) const {
    const auto it = vertices_.find(v);
    if (it == vertices_.end()) {
        return std::nullopt;
    }
    return it->second;
}

std::optional<bool> ProbeCache::edge_point(EdgeId e, double t) const {
    const auto it = edge_points_.find({e, t});
    if (it == edge_points_.end()) {
        return std::nullopt;
    }
    return it->second;
}

namespace {

// Shared probe loop; `lookup` returns a cached outcome, `store` records a fresh one.
template <class Lookup, class Store>
EdgeEvaluation run_probes(const World& world, const Configuration& u, const Configuration& v, double resolution,
                          Lookup&& lookup, Store&& store) {
    EdgeEvaluation result;
    for (const double t : probe_schedule(distance(u, v), resolution)) {
        bool collided;
        if (const auto cached = lookup(t)) {
            collided = *cached;
        } else {
            Configuration q = Configuration::interpolate(u, v, t);
            collided = point_in_collision(world, q);
            store(t, collided);
            result.checked.push_back({std::move(q), t, collided});
        }
        if (collided) {
            result.status = EdgeStatus::Collision;
            return result;
        }
    }
    result.status = EdgeStatus::Free;
    return result;
}

} // namespace

EdgeEvaluation evaluate_edge(const World& world, const Configuration& u, const Configuration& v, double resolution) {
    return run_probes(
        world, u, v, resolution, [](double) { return std::optional<bool>{}; }, [](double, bool) {});
}

EdgeEvaluation evaluate_edge(const World& world, const Roadmap& roadmap, EdgeId e, double resolution,
                             ProbeCache& cache) {
    const Edge& edge = roadmap.edge(e);
    auto lookup = [&](double t) -> std::optional<bool> {
        if (t == 0.0) {
            return cache.vertex(edge.u);
        }
        if (t == 1.0) {
            return cache.vertex(edge.v);
        }
        return cache.edge_point(e, t);
    };
    auto store = [&](double t, bool collided) {
        if (t == 0.0) {
            cache.store_vertex(edge.u, collided);
        } else if (t == 1.0) {
            cache.store_vertex(edge.v, collided);
        } else {
            cache.store_edge_point(e, t, collided);
        }
    };
    return run_probes(world, roadmap.vertex(edge.u), roadmap.vertex(edge.v), resolution, lookup, store);
}

Configuration default_start(std::size_t dimension) { return Configuration(std::vector<double>(dimension, 0.05)); }

Configuration default_goal(std::size_t dimension) { return Configuration(std::vector<double>(dimension, 0.95)); }

GeometricWorld gen_forest_world(const ForestParams& params, std::uint64_t seed) {
    if (params.dimension == 0) {
        throw Error("forest dimension must be at least 1");
    }
    if (!(params.radius_min > 0.0) || params.radius_min > params.radius_max) {
        throw Error("forest radii must satisfy 0 < min <= max");
    }
    Rng rng(seed);
    const Configuration start = default_start(params.dimension);
    const Configuration goal = default_goal(params.dimension);
    std::vector<Sphere> spheres;
    spheres.reserve(params.n_obstacles);
    for (std::size_t k = 0; k < params.n_obstacles; ++k) {
        bool placed = false;
        for (std::size_t attempt = 0; attempt <= kSphereRetries && !placed; ++attempt) {
            std::vector<double> center(params.dimension);
            for (auto& x : center) {
                x = rng.uniform();
            }
            Sphere s{Configuration(std::move(center)), rng.uniform(params.radius_min, params.radius_max)};
            if (!sphere_contains(s, start) && !sphere_contains(s, goal)) {
                spheres.push_back(std::move(s));
                placed = true;
            }
        }
        if (!placed) {
            throw GenerationFailed("could not place obstacle " + std::to_string(k) + " clear of start and goal");
        }
    }
    return GeometricWorld(params.dimension, std::move(spheres));
}

namespace {

// Recursive division on a logical grid: even indices are passages, odd
// indices are walls, doors sit on even indices so later walls never close them.
std::vector<std::uint8_t> divide_logical(std::size_t height, std::size_t width, Rng& rng) {
    std::vector<std::uint8_t> wall(height * width, 0);
    using Chamber = std::tuple<std::size_t, std::size_t, std::size_t, std::size_t>;
    std::stack<Chamber> chambers;
    chambers.emplace(0, 0, height, width);
    while (!chambers.empty()) {
        const auto [r0, c0, h, w] = chambers.top();
        chambers.pop();
        const bool can_split_rows = h >= 3;
        const bool can_split_cols = w >= 3;
        if (!can_split_rows && !can_split_cols) {
            continue;
        }
        bool horizontal;
        if (can_split_rows && can_split_cols) {
            horizontal = h > w || (h == w && rng.below(2) == 0);
        } else {
            horizontal = can_split_rows;
        }
        if (horizontal) {
            const std::size_t wr = r0 + 2 * rng.below((h - 1) / 2) + 1;
            const std::size_t door = c0 + 2 * rng.below((w + 1) / 2);
            for (std::size_t c = c0; c < c0 + w; ++c) {
                if (c != door) {
                    wall[wr * width + c] = 1;
                }
            }
            chambers.emplace(r0, c0, wr - r0, w);
            chambers.emplace(wr + 1, c0, r0 + h - wr - 1, w);
        } else {
            const std::size_t wc = c0 + 2 * rng.below((w - 1) / 2) + 1;
            const std::size_t door = r0 + 2 * rng.below((h + 1) / 2);
            for (std::size_t r = r0; r < r0 + h; ++r) {
                if (r != door) {
                    wall[r * width + wc] = 1;
                }
            }
            chambers.emplace(r0, c0, h, wc - c0);
            chambers.emplace(r0, wc + 1, h, c0 + w - wc - 1);
        }
    }
    return wall;
}

// Maps each pixel index along one axis to its logical index.
std::vector<std::size_t> logical_axis(std::size_t pixels, std::size_t passage, std::size_t wall, std::size_t& count) {
    const std::size_t passages = std::max<std::size_t>(1, (pixels + wall) / (passage + wall));
    count = 2 * passages - 1;
    std::vector<std::size_t> map(pixels);
    for (std::size_t p = 0; p < pixels; ++p) {
        const std::size_t period = p / (passage + wall);
        const std::size_t offset = p % (passage + wall);
        if (period >= passages) {
            map[p] = count - 1; // leftover pixels widen the last passage
        } else {
            map[p] = 2 * period + (offset < passage ? 0 : 1);
        }
    }
    return map;
}

} // namespace

BitmapWorld gen_maze_world(const MazeParams& params, std::uint64_t seed) {
    if (params.rows < 3 || params.cols < 3) {
        throw Error("maze needs at least 3 rows and 3 columns");
    }
    if (params.wall_cells == 0) {
        return BitmapWorld(params.rows, params.cols);
    }
    if (params.passage_cells == 0) {
        throw Error("maze passages must be at least one cell wide");
    }
    std::size_t logical_rows = 0;
    std::size_t logical_cols = 0;
    const auto row_map = logical_axis(params.rows, params.passage_cells, params.wall_cells, logical_rows);
    const auto col_map = logical_axis(params.cols, params.passage_cells, params.wall_cells, logical_cols);

    Rng master(seed);
    const Configuration start = default_start(2);
    const Configuration goal = default_goal(2);
    for (std::size_t attempt = 0; attempt < kMazeAttempts; ++attempt) {
        Rng rng(master.next());
        const auto logical = divide_logical(logical_rows, logical_cols, rng);
        BitmapWorld world(params.rows, params.cols);
        for (std::size_t r = 0; r < params.rows; ++r) {
            for (std::size_t c = 0; c < params.cols; ++c) {
                world.set_occupied(r, c, logical[row_map[r] * logical_cols + col_map[c]] != 0);
            }
        }
        if (bitmap_connected(world, start, goal)) {
            return world;
        }
    }
    throw GenerationFailed("maze generation found no start-goal connection in " + std::to_string(kMazeAttempts) +
                           " attempts");
}

World gen_world(const GeneratorConfig& config, std::uint64_t seed) {
    return std::visit(
        [seed](const auto& params) -> World {
            if constexpr (std::is_same_v<std::decay_t<decltype(params)>, ForestParams>) {
                return gen_forest_world(params, seed);
            } else {
                return gen_maze_world(params, seed);
            }
        },
        config);
}

std::size_t generator_dimension(const GeneratorConfig& config) {
    if (const auto* forest = std::get_if<ForestParams>(&config)) {
        return forest->dimension;
    }
    return 2;
}

bool bitmap_connected(const BitmapWorld& world, const Configuration& from, const Configuration& to) {
    const auto [r0, c0] = world.cell_of(from);
    const auto [r1, c1] = world.cell_of(to);
    if (world.occupied(r0, c0) || world.occupied(r1, c1)) {
        return false;
    }
    std::vector<bool> seen(world.rows() * world.cols(), false);
    std::vector<std::pair<std::size_t, std::size_t>> stack{{r0, c0}};
    seen[r0 * world.cols() + c0] = true;
    while (!stack.empty()) {
        const auto [r, c] = stack.back();
        stack.pop_back();
        if (r == r1 && c == c1) {
            return true;
        }
        auto visit = [&](std::size_t nr, std::size_t nc) {
            const std::size_t idx = nr * world.cols() + nc;
            if (!seen[idx] && !world.occupied(nr, nc)) {
                seen[idx] = true;
                stack.emplace_back(nr, nc);
            }
        };
        if (r > 0) {
            visit(r - 1, c);
        }
        if (r + 1 < world.rows()) {
            visit(r + 1, c);
        }
        if (c > 0) {
            visit(r, c - 1);
        }
        if (c + 1 < world.cols()) {
            visit(r, c + 1);
        }
    }
    return false;
}

FiniteWorldSet gen_finite_set(const GeneratorConfig& config, std::size_t k, std::uint64_t seed) {
    if (k == 0) {
        throw Error("finite world set needs at least one world");
    }
    Rng master(seed);
    std::vector<std::uint64_t> seeds(k);
    for (auto& s : seeds) {
        s = master.next();
    }
    FiniteWorldSet set;
    set.worlds.reserve(k);
    for (const auto s : seeds) {
        set.worlds.push_back(gen_world(config, s));
    }
    set.true_index = static_cast<std::size_t>(master.below(k));
    return set;
}

BitmapWorld parse_pgm(const std::string& text) {
    // Tokenize with line tracking; '#' starts a comment running to end of line.
    std::vector<std::pair<std::string, std::size_t>> tokens;
    std::size_t line = 1;
    std::string current;
    bool in_comment = false;
    auto flush = [&] {
        if (!current.empty()) {
            tokens.emplace_back(current, line);
            current.clear();
        }
    };
    for (const char ch : text) {
        if (ch == '\n') {
            flush();
            in_comment = false;
            ++line;
        } else if (in_comment) {
            continue;
        } else if (ch == '#') {
            flush();
            in_comment = true;
        } else if (std::isspace(static_cast<unsigned char>(ch))) {
            flush();
        } else {
            current.push_back(ch);
        }
    }
    flush();

    std::size_t pos = 0;
    auto next_number = [&](const char* what) -> long {
        if (pos >= tokens.size()) {
            throw ParseError(std::string("unexpected end of file, expected ") + what, line);
        }
        const auto& [tok, tok_line] = tokens[pos++];
        try {
            std::size_t used = 0;
            const long value = std::stol(tok, &used);
            if (used != tok.size() || value < 0) {
                throw std::invalid_argument(tok);
            }
            return value;
        } catch (const std::exception&) {
            throw ParseError(std::string("expected ") + what + ", got '" + tok + "'", tok_line);
        }
    };

    if (tokens.empty() || tokens[0].first != "P2") {
        throw ParseError("missing P2 magic number", tokens.empty() ? 1 : tokens[0].second);
    }
    pos = 1;
    const long cols = next_number("width");
    const long rows = next_number("height");
    const long maxval = next_number("maxval");
    if (cols < 1 || rows < 1) {
        throw ParseError("image dimensions must be positive", tokens[1].second);
    }
    if (maxval < 1 || maxval > 65535) {
        throw ParseError("maxval out of range", tokens[3].second);
    }
    BitmapWorld world(static_cast<std::size_t>(rows), static_cast<std::size_t>(cols));
    for (long image_row = 0; image_row < rows; ++image_row) {
        for (long c = 0; c < cols; ++c) {
            const std::size_t tok_line = pos < tokens.size() ? tokens[pos].second : line;
            const long value = next_number("pixel value");
            if (value > maxval) {
                throw ParseError("pixel value exceeds maxval", tok_line);
            }
            // Threshold on the 255 scale: value/maxval < 128/255.
            const bool occupied = value * 255 < 128 * maxval;
            world.set_occupied(static_cast<std::size_t>(rows - 1 - image_row), static_cast<std::size_t>(c), occupied);
        }
    }
    if (pos != tokens.size()) {
        throw ParseError("trailing data after pixel values", tokens[pos].second);
    }
    return world;
}

BitmapWorld load_pgm(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot read " + path);
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_pgm(buffer.str());
}

std::string format_pgm(const BitmapWorld& world) {
    std::ostringstream out;
    out << "P2\n" << world.cols() << ' ' << world.rows() << "\n255\n";
    for (std::size_t image_row = 0; image_row < world.rows(); ++image_row) {
        const std::size_t r = world.rows() - 1 - image_row;
        for (std::size_t c = 0; c < world.cols(); ++c) {
            out << (c == 0 ? "" : " ") << (world.occupied(r, c) ? 0 : 255);
        }
        out << '\n';
    }
    return out.str();
}

void save_pgm(const BitmapWorld& world, const std::string& path) {
    std::ofstream out(path);
    if (!out) {
        throw IoError("cannot write " + path);
    }
    out << format_pgm(world);
}

nlohmann::json world_to_json(const World& world) {
    if (const auto* bitmap = world.bitmap()) {
        nlohmann::json cells = nlohmann::json::array();
        for (std::size_t r = 0; r < bitmap->rows(); ++r) {
            std::string row(bitmap->cols(), '0');
            for (std::size_t c = 0; c < bitmap->cols(); ++c) {
                row[c] = bitmap->occupied(r, c) ? '1' : '0';
            }
            cells.push_back(std::move(row));
        }
        return {{"type", "bitmap"}, {"rows", bitmap->rows()}, {"cols", bitmap->cols()}, {"cells", std::move(cells)}};
    }
    const auto& geo = *world.geometric();
    nlohmann::json spheres = nlohmann::json::array();
    for (const auto& s : geo.spheres()) {
        spheres.push_back({{"c", s.center.coords()}, {"r", s.radius}});
    }
    nlohmann::json boxes = nlohmann::json::array();
    for (const auto& b : geo.boxes()) {
        boxes.push_back({{"lo", b.lo.coords()}, {"hi", b.hi.coords()}});
    }
    return {{"d", geo.dimension()}, {"spheres", std::move(spheres)}, {"boxes", std::move(boxes)}};
}

World world_from_json(const nlohmann::json& j) {
    try {
        if (j.value("type", std::string("geometric")) == "bitmap") {
            const auto rows = j.at("rows").get<std::size_t>();
            const auto cols = j.at("cols").get<std::size_t>();
            BitmapWorld world(rows, cols);
            const auto& cells = j.at("cells");
            if (cells.size() != rows) {
                throw Error("bitmap JSON row count mismatch");
            }
            for (std::size_t r = 0; r < rows; ++r) {
                const auto row = cells.at(r).get<std::string>();
                if (row.size() != cols) {
                    throw Error("bitmap JSON column count mismatch");
                }
                for (std::size_t c = 0; c < cols; ++c) {
                    world.set_occupied(r, c, row[c] == '1');
                }
            }
            return world;
        }
        const auto d = j.at("d").get<std::size_t>();
        std::vector<Sphere> spheres;
        for (const auto& s : j.value("spheres", nlohmann::json::array())) {
            spheres.push_back({Configuration(s.at("c").get<std::vector<double>>()), s.at("r").get<double>()});
        }
        std::vector<Box> boxes;
        for (const auto& b : j.value("boxes", nlohmann::json::array())) {
            boxes.push_back({Configuration(b.at("lo").get<std::vector<double>>()),
                             Configuration(b.at("hi").get<std::vector<double>>())});
        }
        return GeometricWorld(d, std::move(spheres), std::move(boxes));
    } catch (const nlohmann::json::exception& ex) {
        throw Error(std::string("malformed world JSON: ") + ex.what());
    }
}

nlohmann::json world_set_to_json(const FiniteWorldSet& set) {
    nlohmann::json worlds = nlohmann::json::array();
    for (const auto& w : set.worlds) {
        worlds.push_back(world_to_json(w));
    }
    return {{"worlds", std::move(worlds)}, {"true_index", set.true_index}};
}

FiniteWorldSet world_set_from_json(const nlohmann::json& j) {
    FiniteWorldSet set;
    try {
        for (const auto& w : j.at("worlds")) {
            set.worlds.push_back(world_from_json(w));
        }
        set.true_index = j.at("true_index").get<std::size_t>();
    } catch (const nlohmann::json::exception& ex) {
        throw Error(std::string("malformed world set JSON: ") + ex.what());
    }
    if (set.worlds.empty() || set.true_index >= set.worlds.size()) {
        throw Error("world set needs at least one world and a valid true_index");
    }
    return set;
}

nlohmann::json generator_to_json(const GeneratorConfig& config) {
    if (const auto* forest = std::get_if<ForestParams>(&config)) {
        return {{"type", "forest"},
                {"dimension", forest->dimension},
                {"n_obstacles", forest->n_obstacles},
                {"radius_min", forest->radius_min},
                {"radius_max", forest->radius_max}};
    }
    const auto& maze = std::get<MazeParams>(config);
    return {{"type", "maze"},
            {"rows", maze.rows},
            {"cols", maze.cols},
            {"wall_cells", maze.wall_cells},
            {"passage_cells", maze.passage_cells}};
}

GeneratorConfig generator_from_json(const nlohmann::json& j) {
    const auto type = j.value("type", std::string("forest"));
    if (type == "forest") {
        ForestParams p;
        p.dimension = j.value("dimension", p.dimension);
        p.n_obstacles = j.value("n_obstacles", p.n_obstacles);
        p.radius_min = j.value("radius_min", p.radius_min);
        p.radius_max = j.value("radius_max", p.radius_max);
        return p;
    }
    if (type == "maze") {
        MazeParams p;
        p.rows = j.value("rows", p.rows);
        p.cols = j.value("cols", p.cols);
        p.wall_cells = j.value("wall_cells", p.wall_cells);
        p.passage_cells = j.value("passage_cells", p.passage_cells);
        return p;
    }
    throw ConfigError("unknown world generator '" + type + "'");
}

} // namespace lazyplan
