#include "lazyplan/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "lazyplan/errors.hpp"

namespace lazyplan {

OracleResult oracle_from_statuses(const Roadmap& roadmap, const SampledWorld& statuses) {
    EdgeStatusView view(roadmap.num_edges());
    for (EdgeId e = 0; e < roadmap.num_edges(); ++e) {
        view.set(e, statuses.at(e) != 0 ? EdgeStatus::Free : EdgeStatus::Collision);
    }
    OracleResult result;
    result.path = shortest_path(roadmap, view);
    if (result.path) {
        result.length = result.path->length;
    }
    return result;
}

OracleResult oracle_shortest_feasible(const Roadmap& roadmap, const World& world, double resolution) {
    return oracle_from_statuses(roadmap, precompute_world_statuses(roadmap, world, resolution));
}

AnytimeCurve anytime_curve(const AnytimeTrace& trace) {
    AnytimeCurve curve{{0, kInfiniteLength}};
    for (const auto& ev : trace.events) {
        if (const auto* inc = std::get_if<IncumbentUpdated>(&ev)) {
            if (inc->length >= curve.back().best_length) {
                continue;
            }
            if (inc->total_configs == curve.back().configs_checked) {
                curve.back().best_length = inc->length;
            } else {
                curve.push_back({inc->total_configs, inc->length});
            }
        }
    }
    return curve;
}

double curve_value_at(const AnytimeCurve& curve, std::size_t checks) {
    double value = kInfiniteLength;
    for (const auto& p : curve) {
        if (p.configs_checked > checks) {
            break;
        }
        value = p.best_length;
    }
    return value;
}

std::optional<std::size_t> checks_to_first_feasible(const AnytimeTrace& trace) {
    for (const auto& ev : trace.events) {
        if (const auto* inc = std::get_if<IncumbentUpdated>(&ev)) {
            return inc->total_configs;
        }
    }
    return std::nullopt;
}

double default_fail_penalty(const Roadmap& roadmap) {
    return static_cast<double>(roadmap.num_vertices()) * roadmap.max_edge_weight();
}

RegretRecord cumulative_regret(const AnytimeTrace& trace, double oracle_length, double fail_penalty) {
    if (!std::isfinite(oracle_length)) {
        throw InvalidOracle("regret needs a finite oracle length");
    }
    RegretRecord record;
    double best = kInfiniteLength;
    bool in_episode = false;
    auto close_episode = [&] {
        const double value = std::isfinite(best) ? best : fail_penalty;
        const double delta = value - oracle_length;
        record.deltas.push_back(delta);
        record.cumulative.push_back((record.cumulative.empty() ? 0.0 : record.cumulative.back()) + delta);
    };
    for (const auto& ev : trace.events) {
        if (std::holds_alternative<ProposerCall>(ev)) {
            if (in_episode) {
                close_episode();
            }
            in_episode = true;
        } else if (const auto* inc = std::get_if<IncumbentUpdated>(&ev)) {
            best = std::min(best, inc->length);
        }
    }
    if (in_episode) {
        close_episode();
    }
    return record;
}

std::vector<std::pair<std::size_t, double>> success_budget_curve(const std::vector<const AnytimeTrace*>& traces,
                                                                 const std::vector<std::size_t>& budgets) {
    if (traces.empty()) {
        throw EmptyInput("success curve needs at least one trace");
    }
    std::vector<std::optional<std::size_t>> first;
    first.reserve(traces.size());
    for (const auto* t : traces) {
        first.push_back(checks_to_first_feasible(*t));
    }
    std::vector<std::pair<std::size_t, double>> out;
    for (const auto budget : budgets) {
        std::size_t hits = 0;
        for (const auto& f : first) {
            hits += (f && *f <= budget) ? 1 : 0;
        }
        out.emplace_back(budget, static_cast<double>(hits) / static_cast<double>(traces.size()));
    }
    return out;
}

TraceAudit audit_trace(const Roadmap& roadmap, const World& world, double resolution, const AnytimeTrace& trace) {
    TraceAudit audit;
    auto fail = [&audit](std::string what) { audit.violations.push_back(std::move(what)); };

    std::size_t running = 0;
    double last_length = kInfiniteLength;
    for (std::size_t i = 0; i < trace.events.size(); ++i) {
        const auto& ev = trace.events[i];
        if (const auto* eval = std::get_if<EdgeEvaluated>(&ev)) {
            running += eval->configs_checked;
            if (eval->total_configs != running) {
                fail("event " + std::to_string(i) + ": total_configs is not the running sum");
            }
        } else if (const auto* inc = std::get_if<IncumbentUpdated>(&ev)) {
            if (!(inc->length < last_length)) {
                fail("event " + std::to_string(i) + ": incumbent length did not strictly decrease");
            }
            last_length = inc->length;
            if (inc->total_configs != running) {
                fail("event " + std::to_string(i) + ": incumbent check count out of step");
            }
            Path path;
            try {
                path = make_path(roadmap, inc->path);
            } catch (const Error&) {
                fail("event " + std::to_string(i) + ": incumbent is not a roadmap path");
                continue;
            }
            if (path.vertices.front() != roadmap.start() || path.vertices.back() != roadmap.goal()) {
                fail("event " + std::to_string(i) + ": incumbent does not join start and goal");
            }
            if (std::abs(path.length - inc->length) > 1e-12) {
                fail("event " + std::to_string(i) + ": incumbent length mismatch");
            }
            for (const EdgeId e : path.edges) {
                const Edge& edge = roadmap.edge(e);
                if (evaluate_edge(world, roadmap.vertex(edge.u), roadmap.vertex(edge.v), resolution).status !=
                    EdgeStatus::Free) {
                    fail("event " + std::to_string(i) + ": incumbent edge " + std::to_string(e) + " is in collision");
                }
            }
        }
    }
    if (running != trace.total_configs) {
        fail("trace total does not match the sum of edge evaluations");
    }
    const AnytimeCurve curve = anytime_curve(trace);
    for (std::size_t i = 1; i < curve.size(); ++i) {
        if (curve[i].configs_checked <= curve[i - 1].configs_checked ||
            curve[i].best_length > curve[i - 1].best_length) {
            fail("anytime curve is not a non-increasing step function");
        }
    }
    return audit;
}

} // namespace lazyplan
