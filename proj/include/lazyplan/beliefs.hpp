#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "lazyplan/environments.hpp"
#include "lazyplan/rng.hpp"
#include "lazyplan/roadmap.hpp"

namespace lazyplan {

struct ConfigCheck {
    Configuration q;
    bool collided;
};

/// Everything observed so far in one run: per-edge statuses and every
/// configuration checked, in check order. Append-only.
class EvaluationHistory {
public:
    explicit EvaluationHistory(std::size_t num_edges) : status_(num_edges) {}

    const EdgeStatusView& edge_status() const noexcept { return status_; }
    EdgeStatus status(EdgeId e) const { return status_[e]; }
    const std::vector<ConfigCheck>& config_checks() const noexcept { return checks_; }
    /// Edges in the order their statuses became known.
    const std::vector<EdgeId>& evaluated_edges() const noexcept { return evaluated_; }

    void record(EdgeId e, const EdgeEvaluation& evaluation);

    void set_status(EdgeId e, EdgeStatus s);
    void add_check(Configuration q, bool collided) { checks_.push_back({std::move(q), collided}); }

private:
    EdgeStatusView status_;
    std::vector<ConfigCheck> checks_;
    std::vector<EdgeId> evaluated_;
};

/// One boolean per roadmap edge: 1 = free, 0 = blocked.
using SampledWorld = std::vector<std::uint8_t>;

/// Belief over worlds given an evaluation history.
///
/// Evaluated edges are pinned: edge_free_prob is exactly 1 for Free edges and
/// exactly 0 for Collision edges, and sampled worlds agree with the history.
/// Implementations may cache work across queries of one growing history, so an
/// instance belongs to a single run; use fresh() for the next one.
class Posterior {
public:
    virtual ~Posterior() = default;

    virtual std::string name() const = 0;

    double edge_free_prob(const Roadmap& roadmap, const EvaluationHistory& history, EdgeId e) const;

    /// Independent per-edge draws at edge_free_prob unless overridden.
    virtual SampledWorld sample_world(const Roadmap& roadmap, const EvaluationHistory& history, Rng& rng) const;

    /// Same model with no per-run state.
    virtual std::unique_ptr<Posterior> fresh() const = 0;

    /// True once the model abandoned its assumptions for this run.
    virtual bool fell_back() const { return false; }

protected:
    virtual double unevaluated_free_prob(const Roadmap& roadmap, const EvaluationHistory& history,
                                         EdgeId e) const = 0;
};

double bernoulli_edge_free_prob(EdgeId e, const EvaluationHistory& history, double p0);

/// Independent Bernoulli edges with prior free probability p0, or one prior per edge.
class BernoulliPosterior : public Posterior {
public:
    explicit BernoulliPosterior(double p0 = 0.5);
    explicit BernoulliPosterior(std::vector<double> per_edge_p0);

    std::string name() const override { return "bernoulli"; }
    std::unique_ptr<Posterior> fresh() const override { return std::make_unique<BernoulliPosterior>(*this); }

protected:
    double unevaluated_free_prob(const Roadmap& roadmap, const EvaluationHistory& history, EdgeId e) const override;

private:
    double p0_;
    std::vector<double> per_edge_;
};

inline constexpr double kDefaultEta = 1e3;
inline constexpr std::size_t kDefaultEdgePoints = 5;

/// Beta(1,1) prior updated by the nearest checked configuration with weight
/// m = exp(-eta * distance): (m * [nearest free] + 1) / (m + 2). Ties go to the
/// earliest check. Empty history gives 1/2.
double nn_config_free_prob(const Configuration& q, const EvaluationHistory& history, double eta);

/// Minimum of nn_config_free_prob over interior points t = i / (n_points + 1).
double nn_edge_free_prob(EdgeId e, const Roadmap& roadmap, const EvaluationHistory& history, double eta,
                         std::size_t n_points);

/// Nearest-neighbor posterior. Sampling treats edges as independent at their
/// marginal free probabilities.
class NearestNeighborPosterior : public Posterior {
public:
    explicit NearestNeighborPosterior(double eta = kDefaultEta, std::size_t n_points = kDefaultEdgePoints);

    std::string name() const override { return "nn"; }
    std::unique_ptr<Posterior> fresh() const override {
        return std::make_unique<NearestNeighborPosterior>(eta_, n_points_);
    }

protected:
    double unevaluated_free_prob(const Roadmap& roadmap, const EvaluationHistory& history, EdgeId e) const override;

private:
    struct PointCache {
        Configuration q;
        std::size_t synced = 0;
        double best_sq = 0.0;
        bool has_nearest = false;
        bool nearest_free = false;
    };

    double eta_;
    std::size_t n_points_;
    // Nearest-neighbor state per edge point, advanced over new history entries only.
    mutable const Roadmap* cached_for_ = nullptr;
    mutable std::vector<std::vector<PointCache>> points_;
};

/// Per-world, per-edge free flags for a finite world set at one resolution.
struct WorldStatusTables {
    double resolution = 0.0;
    std::uint64_t roadmap_hash = 0;
    std::vector<SampledWorld> worlds;
};

/// Evaluates every edge of the roadmap in `world`.
SampledWorld precompute_world_statuses(const Roadmap& roadmap, const World& world, double resolution);

WorldStatusTables precompute_world_tables(const Roadmap& roadmap, const std::vector<World>& worlds,
                                          double resolution);

nlohmann::json tables_to_json(const WorldStatusTables& tables);
WorldStatusTables tables_from_json(const nlohmann::json& j);

/// Indices of worlds agreeing with every edge status and every checked
/// configuration in the history. Throws EmptyConsistentSet if none remain.
std::vector<std::size_t> finite_set_consistent(const WorldStatusTables& tables, const std::vector<World>& worlds,
                                               const EvaluationHistory& history);

/// Uniform belief over the worlds consistent with the history. If the history
/// rules out every world, falls back to Bernoulli(0.5) for the rest of the run.
class FiniteSetPosterior : public Posterior {
public:
    FiniteSetPosterior(std::shared_ptr<const WorldStatusTables> tables, std::shared_ptr<const std::vector<World>> worlds);

    std::string name() const override { return "fs"; }
    std::unique_ptr<Posterior> fresh() const override {
        return std::make_unique<FiniteSetPosterior>(tables_, worlds_);
    }

    SampledWorld sample_world(const Roadmap& roadmap, const EvaluationHistory& history, Rng& rng) const override;
    bool fell_back() const override { return fell_back_; }

    /// Currently consistent world indices (empty after fallback).
    const std::vector<std::size_t>& consistent(const EvaluationHistory& history) const;

protected:
    double unevaluated_free_prob(const Roadmap& roadmap, const EvaluationHistory& history, EdgeId e) const override;

private:
    void sync(const EvaluationHistory& history) const;

    std::shared_ptr<const WorldStatusTables> tables_;
    std::shared_ptr<const std::vector<World>> worlds_;
    mutable std::vector<std::size_t> consistent_;
    mutable std::size_t checks_synced_ = 0;
    mutable std::size_t edges_synced_ = 0;
    mutable bool fell_back_ = false;
};

} // namespace lazyplan
