#include "lazyplan/planners.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "lazyplan/errors.hpp"

namespace lazyplan {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double neg_log(double p) {
    if (p <= 0.0) {
        return kInf;
    }
    if (p >= 1.0) {
        return 0.0;
    }
    return -std::log(p);
}

bool fully_free(const Path& path, const EvaluationHistory& history) {
    for (const EdgeId e : path.edges) {
        if (history.status(e) != EdgeStatus::Free) {
            return false;
        }
    }
    return true;
}

} // namespace

std::optional<Path> propose_psmp(const Roadmap& roadmap, const Posterior& posterior, const EvaluationHistory& history,
                                 Rng& rng) {
    const SampledWorld sample = posterior.sample_world(roadmap, history, rng);
    return shortest_path(roadmap, history.edge_status(),
                         [&](EdgeId e) { return sample[e] != 0 ? roadmap.edge(e).weight : kInf; });
}

std::optional<Path> propose_lazysp(const Roadmap& roadmap, const EvaluationHistory& history) {
    return shortest_path(roadmap, history.edge_status());
}

std::optional<Path> propose_maxprob(const Roadmap& roadmap, const Posterior& posterior,
                                    const EvaluationHistory& history) {
    return shortest_path(roadmap, history.edge_status(),
                         [&](EdgeId e) { return neg_log(posterior.edge_free_prob(roadmap, history, e)); });
}

std::optional<Path> propose_pomp(const Roadmap& roadmap, const Posterior& posterior, const EvaluationHistory& history,
                                 double alpha, double weight_scale) {
    if (!(alpha >= 0.0 && alpha <= 1.0)) {
        throw Error("POMP alpha must lie in [0, 1]");
    }
    const double beta = 1.0 - alpha;
    return shortest_path(roadmap, history.edge_status(), [&](EdgeId e) {
        const double length_term = alpha * weight_scale * roadmap.edge(e).weight;
        if (beta == 0.0) {
            return length_term; // the probability term vanishes, including -log 0
        }
        return length_term + beta * neg_log(posterior.edge_free_prob(roadmap, history, e));
    });
}

EdgeId failfast_next_edge(const Roadmap& roadmap, const Path& path, const Posterior& posterior,
                          const EvaluationHistory& history) {
    std::optional<EdgeId> best;
    double best_prob = kInf;
    for (const EdgeId e : path.edges) {
        if (history.status(e) != EdgeStatus::Unknown) {
            continue;
        }
        const double p = posterior.edge_free_prob(roadmap, history, e);
        if (!best || p < best_prob) {
            best = e;
            best_prob = p;
        }
    }
    if (!best) {
        throw NoUnevaluatedEdge("every edge on the path is already evaluated");
    }
    return *best;
}

const char* to_string(ProposerKind kind) {
    switch (kind) {
    case ProposerKind::Psmp:
        return "psmp";
    case ProposerKind::LazySp:
        return "lazysp";
    case ProposerKind::MaxProb:
        return "maxprob";
    case ProposerKind::Pomp:
        return "pomp";
    }
    return "unknown";
}

ProposerKind proposer_kind_from_string(const std::string& name) {
    if (name == "psmp") {
        return ProposerKind::Psmp;
    }
    if (name == "lazysp") {
        return ProposerKind::LazySp;
    }
    if (name == "maxprob") {
        return ProposerKind::MaxProb;
    }
    if (name == "pomp") {
        return ProposerKind::Pomp;
    }
    throw ConfigError("unknown proposer '" + name + "'");
}

std::optional<Path> PsmpProposer::propose(const Roadmap& roadmap, const Posterior& posterior,
                                          const EvaluationHistory& history, Rng& rng) {
    return propose_psmp(roadmap, posterior, history, rng);
}

std::optional<Path> LazySpProposer::propose(const Roadmap& roadmap, const Posterior&, const EvaluationHistory& history,
                                            Rng&) {
    return propose_lazysp(roadmap, history);
}

std::optional<Path> MaxProbProposer::propose(const Roadmap& roadmap, const Posterior& posterior,
                                             const EvaluationHistory& history, Rng&) {
    return propose_maxprob(roadmap, posterior, history);
}

PompProposer::PompProposer(double step, double weight_scale) : step_(step), weight_scale_(weight_scale) {
    if (!(step > 0.0)) {
        throw Error("POMP step must be positive");
    }
    if (!(weight_scale > 0.0)) {
        throw Error("POMP weight scale must be positive");
    }
}

double PompProposer::alpha() const { return std::min(1.0, static_cast<double>(improvements_) * step_); }

std::optional<Path> PompProposer::propose(const Roadmap& roadmap, const Posterior& posterior,
                                          const EvaluationHistory& history, Rng&) {
    return propose_pomp(roadmap, posterior, history, alpha(), weight_scale_);
}

std::unique_ptr<Proposer> make_proposer(ProposerKind kind, double pomp_step, double weight_scale) {
    switch (kind) {
    case ProposerKind::Psmp:
        return std::make_unique<PsmpProposer>();
    case ProposerKind::LazySp:
        return std::make_unique<LazySpProposer>();
    case ProposerKind::MaxProb:
        return std::make_unique<MaxProbProposer>();
    case ProposerKind::Pomp:
        return std::make_unique<PompProposer>(pomp_step, weight_scale);
    }
    throw Error("unknown proposer kind");
}

const char* to_string(StopReason reason) {
    switch (reason) {
    case StopReason::BudgetExhausted:
        return "budget_exhausted";
    case StopReason::ShortestPathCertificate:
        return "shortest_path_certificate";
    case StopReason::ProposerExhausted:
        return "proposer_exhausted";
    case StopReason::Stalled:
        return "stalled";
    }
    return "unknown";
}

AnytimeTrace run_search(const Roadmap& roadmap, const World& world, const Posterior& posterior, Proposer& proposer,
                        const Termination& termination, double resolution, Rng& rng) {
    AnytimeTrace trace;
    EvaluationHistory history(roadmap.num_edges());
    ProbeCache cache;
    const auto budget = static_cast<std::size_t>(std::max<std::int64_t>(0, termination.max_configs));
    std::size_t consecutive_none = 0;
    std::size_t consecutive_idle = 0;

    auto finish = [&](StopReason reason) {
        trace.reason = reason;
        trace.posterior_fell_back = posterior.fell_back();
        return trace;
    };

    for (;;) {
        if (trace.total_configs >= budget) {
            return finish(StopReason::BudgetExhausted);
        }

        const std::optional<Path> path = proposer.propose(roadmap, posterior, history, rng);
        trace.events.emplace_back(ProposerCall{path ? std::optional(path->vertices) : std::nullopt, proposer.state()});

        if (!path) {
            ++consecutive_none;
            ++consecutive_idle;
            if (!proposer.stochastic() || consecutive_none >= termination.max_idle_proposals) {
                return finish(StopReason::ProposerExhausted);
            }
            continue;
        }
        consecutive_none = 0;

        bool evaluated_any = false;
        while (!fully_free(*path, history)) {
            bool invalid = false;
            for (const EdgeId e : path->edges) {
                invalid = invalid || history.status(e) == EdgeStatus::Collision;
            }
            if (invalid) {
                break;
            }
            if (trace.total_configs >= budget) {
                return finish(StopReason::BudgetExhausted);
            }
            const EdgeId e = failfast_next_edge(roadmap, *path, posterior, history);
            const EdgeEvaluation evaluation = evaluate_edge(world, roadmap, e, resolution, cache);
            history.record(e, evaluation);
            trace.total_configs += evaluation.checked.size();
            trace.events.emplace_back(
                EdgeEvaluated{e, evaluation.status, evaluation.checked.size(), trace.total_configs});
            evaluated_any = true;
        }

        bool improved = false;
        if (fully_free(*path, history)) {
            if (!trace.incumbent || path->length < trace.incumbent->length) {
                trace.incumbent = *path;
                trace.events.emplace_back(IncumbentUpdated{path->vertices, path->length, trace.total_configs});
                proposer.on_incumbent_updated();
                improved = true;
            }
            if (proposer.certifies_shortest()) {
                return finish(StopReason::ShortestPathCertificate);
            }
        }

        if (evaluated_any || improved) {
            consecutive_idle = 0;
        } else if (!proposer.stochastic() || ++consecutive_idle >= termination.max_idle_proposals) {
            // Nothing changed, so the proposer would keep returning evaluated paths.
            return finish(StopReason::Stalled);
        }
    }
}

nlohmann::json event_to_json(const TraceEvent& event) {
    return std::visit(
        [](const auto& ev) -> nlohmann::json {
            using T = std::decay_t<decltype(ev)>;
            if constexpr (std::is_same_v<T, ProposerCall>) {
                return {{"type", "proposer_call"},
                        {"path", ev.path ? nlohmann::json(*ev.path) : nlohmann::json(nullptr)},
                        {"proposer_state", ev.proposer_state}};
            } else if constexpr (std::is_same_v<T, EdgeEvaluated>) {
                return {{"type", "edge_evaluated"},
                        {"edge", ev.edge},
                        {"status", to_string(ev.status)},
                        {"configs_checked", ev.configs_checked},
                        {"total_configs", ev.total_configs}};
            } else {
                return {{"type", "incumbent_updated"},
                        {"path", ev.path},
                        {"length", ev.length},
                        {"total_configs", ev.total_configs}};
            }
        },
        event);
}

TraceEvent event_from_json(const nlohmann::json& j) {
    const auto type = j.at("type").get<std::string>();
    if (type == "proposer_call") {
        ProposerCall call;
        if (!j.at("path").is_null()) {
            call.path = j.at("path").get<std::vector<VertexId>>();
        }
        call.proposer_state = j.value("proposer_state", nlohmann::json::object());
        return call;
    }
    if (type == "edge_evaluated") {
        const auto status = j.at("status").get<std::string>();
        return EdgeEvaluated{j.at("edge").get<EdgeId>(),
                             status == "free" ? EdgeStatus::Free : EdgeStatus::Collision,
                             j.at("configs_checked").get<std::size_t>(), j.at("total_configs").get<std::size_t>()};
    }
    if (type == "incumbent_updated") {
        return IncumbentUpdated{j.at("path").get<std::vector<VertexId>>(), j.at("length").get<double>(),
                                j.at("total_configs").get<std::size_t>()};
    }
    throw Error("unknown trace event type '" + type + "'");
}

std::string trace_to_jsonl(const AnytimeTrace& trace) {
    std::ostringstream out;
    for (const auto& ev : trace.events) {
        out << event_to_json(ev).dump() << '\n';
    }
    nlohmann::json end = {{"type", "terminated"},
                          {"reason", to_string(trace.reason)},
                          {"total_configs", trace.total_configs},
                          {"posterior_fell_back", trace.posterior_fell_back},
                          {"incumbent", trace.incumbent ? nlohmann::json(trace.incumbent->vertices)
                                                        : nlohmann::json(nullptr)}};
    out << end.dump() << '\n';
    return out.str();
}

AnytimeTrace trace_from_jsonl(const Roadmap& roadmap, const std::string& text) {
    AnytimeTrace trace;
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) {
            continue;
        }
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error& ex) {
            throw ParseError(ex.what(), line_no);
        }
        if (j.at("type") == "terminated") {
            const auto reason = j.at("reason").get<std::string>();
            for (auto r : {StopReason::BudgetExhausted, StopReason::ShortestPathCertificate,
                           StopReason::ProposerExhausted, StopReason::Stalled}) {
                if (reason == to_string(r)) {
                    trace.reason = r;
                }
            }
            trace.total_configs = j.at("total_configs").get<std::size_t>();
            trace.posterior_fell_back = j.value("posterior_fell_back", false);
            if (!j.at("incumbent").is_null()) {
                trace.incumbent = make_path(roadmap, j.at("incumbent").get<std::vector<VertexId>>());
            }
            continue;
        }
        trace.events.push_back(event_from_json(j));
    }
    return trace;
}

} // namespace lazyplan
