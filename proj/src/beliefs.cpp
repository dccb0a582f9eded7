#include "lazyplan/beliefs.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "lazyplan/errors.hpp"

namespace lazyplan {

void EvaluationHistory::record(EdgeId e, const EdgeEvaluation& evaluation) {
    set_status(e, evaluation.status);
    for (const auto& probe : evaluation.checked) {
        checks_.push_back({probe.q, probe.collided});
    }
}

void EvaluationHistory::set_status(EdgeId e, EdgeStatus s) {
    if (!status_.is_evaluated(e) && s != EdgeStatus::Unknown) {
        evaluated_.push_back(e);
    }
    status_.set(e, s);
}

double Posterior::edge_free_prob(const Roadmap& roadmap, const EvaluationHistory& history, EdgeId e) const {
    switch (history.status(e)) {
    case EdgeStatus::Free:
        return 1.0;
    case EdgeStatus::Collision:
        return 0.0;
    case EdgeStatus::Unknown:
        break;
    }
    return std::clamp(unevaluated_free_prob(roadmap, history, e), 0.0, 1.0);
}

SampledWorld Posterior::sample_world(const Roadmap& roadmap, const EvaluationHistory& history, Rng& rng) const {
    SampledWorld world(roadmap.num_edges());
    for (EdgeId e = 0; e < roadmap.num_edges(); ++e) {
        switch (history.status(e)) {
        case EdgeStatus::Free:
            world[e] = 1;
            break;
        case EdgeStatus::Collision:
            world[e] = 0;
            break;
        case EdgeStatus::Unknown:
            // One draw per unevaluated edge keeps the random stream independent of outcomes.
            world[e] = rng.bernoulli(edge_free_prob(roadmap, history, e)) ? 1 : 0;
            break;
        }
    }
    return world;
}

double bernoulli_edge_free_prob(EdgeId e, const EvaluationHistory& history, double p0) {
    switch (history.status(e)) {
    case EdgeStatus::Free:
        return 1.0;
    case EdgeStatus::Collision:
        return 0.0;
    case EdgeStatus::Unknown:
        break;
    }
    return p0;
}

BernoulliPosterior::BernoulliPosterior(double p0) : p0_(p0) {
    if (!(p0 >= 0.0 && p0 <= 1.0)) {
        throw Error("prior free probability must lie in [0, 1]");
    }
}

BernoulliPosterior::BernoulliPosterior(std::vector<double> per_edge_p0) : p0_(0.5), per_edge_(std::move(per_edge_p0)) {
    for (double p : per_edge_) {
        if (!(p >= 0.0 && p <= 1.0)) {
            throw Error("prior free probability must lie in [0, 1]");
        }
    }
}

double BernoulliPosterior::unevaluated_free_prob(const Roadmap&, const EvaluationHistory& history, EdgeId e) const {
    return bernoulli_edge_free_prob(e, history, per_edge_.empty() ? p0_ : per_edge_.at(e));
}

namespace {

double beta_update(double dist, bool nearest_free, double eta) {
    const double m = std::exp(-eta * dist);
    return (m * (nearest_free ? 1.0 : 0.0) + 1.0) / (m + 2.0);
}

Configuration edge_point(const Roadmap& roadmap, EdgeId e, std::size_t i, std::size_t n_points) {
    const Edge& edge = roadmap.edge(e);
    const double t = static_cast<double>(i) / static_cast<double>(n_points + 1);
    return Configuration::interpolate(roadmap.vertex(edge.u), roadmap.vertex(edge.v), t);
}

} // namespace

double nn_config_free_prob(const Configuration& q, const EvaluationHistory& history, double eta) {
    const auto& checks = history.config_checks();
    if (checks.empty()) {
        return 0.5;
    }
    std::size_t nearest = 0;
    double best = squared_distance(q, checks[0].q);
    for (std::size_t i = 1; i < checks.size(); ++i) {
        const double d = squared_distance(q, checks[i].q);
        if (d < best) {
            best = d;
            nearest = i;
        }
    }
    return beta_update(std::sqrt(best), !checks[nearest].collided, eta);
}

double nn_edge_free_prob(EdgeId e, const Roadmap& roadmap, const EvaluationHistory& history, double eta,
                         std::size_t n_points) {
    if (n_points == 0) {
        throw Error("edge discretization needs at least one point");
    }
    switch (history.status(e)) {
    case EdgeStatus::Free:
        return 1.0;
    case EdgeStatus::Collision:
        return 0.0;
    case EdgeStatus::Unknown:
        break;
    }
    double lowest = 1.0;
    for (std::size_t i = 1; i <= n_points; ++i) {
        lowest = std::min(lowest, nn_config_free_prob(edge_point(roadmap, e, i, n_points), history, eta));
    }
    return lowest;
}

NearestNeighborPosterior::NearestNeighborPosterior(double eta, std::size_t n_points) : eta_(eta), n_points_(n_points) {
    if (!(eta > 0.0)) {
        throw Error("eta must be positive");
    }
    if (n_points == 0) {
        throw Error("edge discretization needs at least one point");
    }
}

double NearestNeighborPosterior::unevaluated_free_prob(const Roadmap& roadmap, const EvaluationHistory& history,
                                                       EdgeId e) const {
    if (cached_for_ != &roadmap || points_.size() != roadmap.num_edges()) {
        cached_for_ = &roadmap;
        points_.assign(roadmap.num_edges(), {});
    }
    auto& points = points_[e];
    if (points.empty()) {
        for (std::size_t i = 1; i <= n_points_; ++i) {
            points.push_back({edge_point(roadmap, e, i, n_points_)});
        }
    }
    const auto& checks = history.config_checks();
    double lowest = 1.0;
    for (auto& p : points) {
        if (p.synced > checks.size()) {
            p = PointCache{p.q};
        }
        // Strict improvement only, so the earliest check wins ties.
        for (; p.synced < checks.size(); ++p.synced) {
            const double d = squared_distance(p.q, checks[p.synced].q);
            if (!p.has_nearest || d < p.best_sq) {
                p.has_nearest = true;
                p.best_sq = d;
                p.nearest_free = !checks[p.synced].collided;
            }
        }
        const double prob = p.has_nearest ? beta_update(std::sqrt(p.best_sq), p.nearest_free, eta_) : 0.5;
        lowest = std::min(lowest, prob);
    }
    return lowest;
}

SampledWorld precompute_world_statuses(const Roadmap& roadmap, const World& world, double resolution) {
    // Vertex probes are shared between edges; caching changes counts, never statuses.
    ProbeCache cache;
    SampledWorld table(roadmap.num_edges());
    for (EdgeId e = 0; e < roadmap.num_edges(); ++e) {
        table[e] = evaluate_edge(world, roadmap, e, resolution, cache).status == EdgeStatus::Free ? 1 : 0;
    }
    return table;
}

WorldStatusTables precompute_world_tables(const Roadmap& roadmap, const std::vector<World>& worlds,
                                          double resolution) {
    WorldStatusTables tables;
    tables.resolution = resolution;
    tables.roadmap_hash = roadmap_hash(roadmap);
    tables.worlds.reserve(worlds.size());
    for (const auto& w : worlds) {
        tables.worlds.push_back(precompute_world_statuses(roadmap, w, resolution));
    }
    return tables;
}

nlohmann::json tables_to_json(const WorldStatusTables& tables) {
    nlohmann::json worlds = nlohmann::json::array();
    for (const auto& t : tables.worlds) {
        nlohmann::json row = nlohmann::json::array();
        for (auto flag : t) {
            row.push_back(static_cast<int>(flag));
        }
        worlds.push_back(std::move(row));
    }
    char hash[17];
    std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(tables.roadmap_hash));
    return {{"resolution", tables.resolution}, {"roadmap_hash", hash}, {"worlds", std::move(worlds)}};
}

WorldStatusTables tables_from_json(const nlohmann::json& j) {
    WorldStatusTables tables;
    try {
        tables.resolution = j.at("resolution").get<double>();
        tables.roadmap_hash = std::stoull(j.at("roadmap_hash").get<std::string>(), nullptr, 16);
        for (const auto& row : j.at("worlds")) {
            SampledWorld t;
            for (const auto& flag : row) {
                t.push_back(flag.get<int>() != 0 ? 1 : 0);
            }
            tables.worlds.push_back(std::move(t));
        }
    } catch (const std::exception& ex) {
        throw Error(std::string("malformed status table JSON: ") + ex.what());
    }
    return tables;
}

namespace {

bool world_agrees_on_edge(const SampledWorld& table, EdgeId e, EdgeStatus s) {
    return s == EdgeStatus::Unknown || (table.at(e) != 0) == (s == EdgeStatus::Free);
}

} // namespace

std::vector<std::size_t> finite_set_consistent(const WorldStatusTables& tables, const std::vector<World>& worlds,
                                               const EvaluationHistory& history) {
    std::vector<std::size_t> out;
    for (std::size_t w = 0; w < tables.worlds.size(); ++w) {
        bool ok = true;
        for (const EdgeId e : history.evaluated_edges()) {
            if (!world_agrees_on_edge(tables.worlds[w], e, history.status(e))) {
                ok = false;
                break;
            }
        }
        for (std::size_t i = 0; ok && i < history.config_checks().size(); ++i) {
            const auto& check = history.config_checks()[i];
            ok = point_in_collision(worlds.at(w), check.q) == check.collided;
        }
        if (ok) {
            out.push_back(w);
        }
    }
    if (out.empty()) {
        throw EmptyConsistentSet("no world in the finite set is consistent with the history");
    }
    return out;
}

FiniteSetPosterior::FiniteSetPosterior(std::shared_ptr<const WorldStatusTables> tables,
                                       std::shared_ptr<const std::vector<World>> worlds)
    : tables_(std::move(tables)), worlds_(std::move(worlds)) {
    if (!tables_ || !worlds_ || tables_->worlds.size() != worlds_->size() || worlds_->empty()) {
        throw Error("finite-set posterior needs one status table per world");
    }
    consistent_.resize(worlds_->size());
    for (std::size_t w = 0; w < consistent_.size(); ++w) {
        consistent_[w] = w;
    }
}

void FiniteSetPosterior::sync(const EvaluationHistory& history) const {
    if (fell_back_) {
        return;
    }
    const auto& edges = history.evaluated_edges();
    const auto& checks = history.config_checks();
    if (edges_synced_ > edges.size() || checks_synced_ > checks.size()) {
        // Not the history this instance has been following.
        edges_synced_ = edges.size();
        checks_synced_ = checks.size();
        try {
            consistent_ = finite_set_consistent(*tables_, *worlds_, history);
        } catch (const EmptyConsistentSet&) {
            consistent_.clear();
            fell_back_ = true;
        }
        return;
    }
    std::vector<std::size_t> kept;
    kept.reserve(consistent_.size());
    for (const std::size_t w : consistent_) {
        bool ok = true;
        for (std::size_t i = edges_synced_; ok && i < edges.size(); ++i) {
            ok = world_agrees_on_edge(tables_->worlds[w], edges[i], history.status(edges[i]));
        }
        for (std::size_t i = checks_synced_; ok && i < checks.size(); ++i) {
            ok = point_in_collision((*worlds_)[w], checks[i].q) == checks[i].collided;
        }
        if (ok) {
            kept.push_back(w);
        }
    }
    edges_synced_ = edges.size();
    checks_synced_ = checks.size();
    consistent_ = std::move(kept);
    if (consistent_.empty()) {
        fell_back_ = true;
    }
}

const std::vector<std::size_t>& FiniteSetPosterior::consistent(const EvaluationHistory& history) const {
    sync(history);
    return consistent_;
}

double FiniteSetPosterior::unevaluated_free_prob(const Roadmap& roadmap, const EvaluationHistory& history,
                                                 EdgeId e) const {
    sync(history);
    if (fell_back_) {
        return bernoulli_edge_free_prob(e, history, 0.5);
    }
    if (roadmap.num_edges() != tables_->worlds.front().size()) {
        throw Error("status tables were computed for a different roadmap");
    }
    std::size_t free_count = 0;
    for (const std::size_t w : consistent_) {
        free_count += tables_->worlds[w][e];
    }
    return static_cast<double>(free_count) / static_cast<double>(consistent_.size());
}

SampledWorld FiniteSetPosterior::sample_world(const Roadmap& roadmap, const EvaluationHistory& history,
                                              Rng& rng) const {
    sync(history);
    if (fell_back_) {
        return Posterior::sample_world(roadmap, history, rng);
    }
    SampledWorld world = tables_->worlds[consistent_[rng.below(consistent_.size())]];
    for (const EdgeId e : history.evaluated_edges()) {
        world[e] = history.status(e) == EdgeStatus::Free ? 1 : 0;
    }
    return world;
}

} // namespace lazyplan
