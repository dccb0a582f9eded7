#pragma once

#include <cstddef>
#include <limits>
#include <optional>
#include <utility>
#include <vector>

#include "lazyplan/beliefs.hpp"
#include "lazyplan/environments.hpp"
#include "lazyplan/planners.hpp"
#include "lazyplan/roadmap.hpp"

namespace lazyplan {

inline constexpr double kInfiniteLength = std::numeric_limits<double>::infinity();

struct OracleResult {
    std::optional<Path> path;
    double length = kInfiniteLength;
};

/// Ground truth: evaluate every edge, then the shortest path over Free edges.
OracleResult oracle_shortest_feasible(const Roadmap& roadmap, const World& world, double resolution);

/// Same, from a precomputed per-edge free table.
OracleResult oracle_from_statuses(const Roadmap& roadmap, const SampledWorld& statuses);

struct CurvePoint {
    std::size_t configs_checked;
    double best_length;
};

/// Best feasible length as a right-continuous step function of configuration checks.
using AnytimeCurve = std::vector<CurvePoint>;

AnytimeCurve anytime_curve(const AnytimeTrace& trace);

/// Best length known after `checks` configuration checks.
double curve_value_at(const AnytimeCurve& curve, std::size_t checks);

/// Checks at the first incumbent, if any.
std::optional<std::size_t> checks_to_first_feasible(const AnytimeTrace& trace);

struct RegretRecord {
    std::vector<double> deltas;
    std::vector<double> cumulative;
};

/// Upper bound on any simple path length: |V| times the largest edge weight.
double default_fail_penalty(const Roadmap& roadmap);

/// One episode per proposer call; the gap is measured for the incumbent held
/// at the end of the episode, or fail_penalty before the first one.
/// Throws InvalidOracle for a non-finite oracle length.
RegretRecord cumulative_regret(const AnytimeTrace& trace, double oracle_length, double fail_penalty);

/// Fraction of traces holding a feasible path within each budget.
/// Throws EmptyInput for an empty trace list.
std::vector<std::pair<std::size_t, double>> success_budget_curve(const std::vector<const AnytimeTrace*>& traces,
                                                                 const std::vector<std::size_t>& budgets);

/// Violations found by auditing one trace; empty means sound.
struct TraceAudit {
    std::vector<std::string> violations;
    bool ok() const { return violations.empty(); }
};

/// Checks that incumbents strictly decrease, configuration counts add up,
/// the anytime curve is non-increasing, and every incumbent path is Free in
/// an independent re-evaluation against `world`.
TraceAudit audit_trace(const Roadmap& roadmap, const World& world, double resolution, const AnytimeTrace& trace);

} // namespace lazyplan
