#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "lazyplan/beliefs.hpp"
#include "lazyplan/environments.hpp"
#include "lazyplan/rng.hpp"
#include "lazyplan/roadmap.hpp"

namespace lazyplan {

/// Sample a world from the posterior and return its shortest path.
std::optional<Path> propose_psmp(const Roadmap& roadmap, const Posterior& posterior, const EvaluationHistory& history,
                                 Rng& rng);

/// Shortest path with every unevaluated edge assumed free.
std::optional<Path> propose_lazysp(const Roadmap& roadmap, const EvaluationHistory& history);

/// Most probable feasible path: weights -log P(edge free).
std::optional<Path> propose_maxprob(const Roadmap& roadmap, const Posterior& posterior,
                                    const EvaluationHistory& history);

/// Weights alpha * scale * w(e) - (1 - alpha) * log P(edge free).
std::optional<Path> propose_pomp(const Roadmap& roadmap, const Posterior& posterior, const EvaluationHistory& history,
                                 double alpha, double weight_scale = 1.0);

/// Unevaluated path edge with the lowest free probability; earliest on ties.
/// Throws NoUnevaluatedEdge when every edge on the path is evaluated.
EdgeId failfast_next_edge(const Roadmap& roadmap, const Path& path, const Posterior& posterior,
                          const EvaluationHistory& history);

enum class ProposerKind { Psmp, LazySp, MaxProb, Pomp };

const char* to_string(ProposerKind kind);
ProposerKind proposer_kind_from_string(const std::string& name);

/// Path selection strategy with its per-run state.
class Proposer {
public:
    virtual ~Proposer() = default;

    virtual ProposerKind kind() const = 0;
    virtual std::optional<Path> propose(const Roadmap& roadmap, const Posterior& posterior,
                                        const EvaluationHistory& history, Rng& rng) = 0;
    virtual void on_incumbent_updated() {}

    /// Repeated calls with unchanged inputs may return different paths.
    virtual bool stochastic() const { return false; }
    /// A fully valid proposal is the shortest feasible path.
    virtual bool certifies_shortest() const { return false; }

    virtual nlohmann::json state() const { return nlohmann::json::object(); }
    virtual std::unique_ptr<Proposer> fresh() const = 0;
};

class PsmpProposer : public Proposer {
public:
    ProposerKind kind() const override { return ProposerKind::Psmp; }
    std::optional<Path> propose(const Roadmap& roadmap, const Posterior& posterior, const EvaluationHistory& history,
                                Rng& rng) override;
    bool stochastic() const override { return true; }
    std::unique_ptr<Proposer> fresh() const override { return std::make_unique<PsmpProposer>(); }
};

class LazySpProposer : public Proposer {
public:
    ProposerKind kind() const override { return ProposerKind::LazySp; }
    std::optional<Path> propose(const Roadmap& roadmap, const Posterior& posterior, const EvaluationHistory& history,
                                Rng& rng) override;
    bool certifies_shortest() const override { return true; }
    std::unique_ptr<Proposer> fresh() const override { return std::make_unique<LazySpProposer>(); }
};

class MaxProbProposer : public Proposer {
public:
    ProposerKind kind() const override { return ProposerKind::MaxProb; }
    std::optional<Path> propose(const Roadmap& roadmap, const Posterior& posterior, const EvaluationHistory& history,
                                Rng& rng) override;
    std::unique_ptr<Proposer> fresh() const override { return std::make_unique<MaxProbProposer>(); }
};

inline constexpr double kDefaultPompStep = 0.1;

/// Alpha starts at 0 and rises by `step` (capped at 1) after every new incumbent.
class PompProposer : public Proposer {
public:
    explicit PompProposer(double step = kDefaultPompStep, double weight_scale = 1.0);

    ProposerKind kind() const override { return ProposerKind::Pomp; }
    std::optional<Path> propose(const Roadmap& roadmap, const Posterior& posterior, const EvaluationHistory& history,
                                Rng& rng) override;
    void on_incumbent_updated() override { ++improvements_; }
    nlohmann::json state() const override { return {{"alpha", alpha()}}; }
    std::unique_ptr<Proposer> fresh() const override { return std::make_unique<PompProposer>(step_, weight_scale_); }

    double alpha() const;

private:
    double step_;
    double weight_scale_;
    std::size_t improvements_ = 0;
};

std::unique_ptr<Proposer> make_proposer(ProposerKind kind, double pomp_step = kDefaultPompStep,
                                        double weight_scale = 1.0);

struct Termination {
    /// Edge evaluations start only while fewer than this many configurations were checked.
    std::int64_t max_configs = 50000;
    /// Consecutive proposer calls yielding nothing new before a stochastic proposer gives up.
    std::size_t max_idle_proposals = 100;
};

enum class StopReason { BudgetExhausted, ShortestPathCertificate, ProposerExhausted, Stalled };

const char* to_string(StopReason reason);

struct ProposerCall {
    std::optional<std::vector<VertexId>> path;
    nlohmann::json proposer_state;
};

struct EdgeEvaluated {
    EdgeId edge;
    EdgeStatus status;
    std::size_t configs_checked;
    std::size_t total_configs;
};

struct IncumbentUpdated {
    std::vector<VertexId> path;
    double length;
    std::size_t total_configs;
};

using TraceEvent = std::variant<ProposerCall, EdgeEvaluated, IncumbentUpdated>;

struct AnytimeTrace {
    std::vector<TraceEvent> events;
    std::optional<Path> incumbent;
    StopReason reason = StopReason::ProposerExhausted;
    std::size_t total_configs = 0;
    bool posterior_fell_back = false;
};

/// The lazy search loop: propose a path, validate it edge by edge in FailFast
/// order (the history is updated after every edge), emit it if valid and
/// shorter than the incumbent. Evaluations already underway when the budget
/// runs out complete.
AnytimeTrace run_search(const Roadmap& roadmap, const World& world, const Posterior& posterior, Proposer& proposer,
                        const Termination& termination, double resolution, Rng& rng);

nlohmann::json event_to_json(const TraceEvent& event);
TraceEvent event_from_json(const nlohmann::json& j);

/// One JSON object per line, ending with a "terminated" record.
std::string trace_to_jsonl(const AnytimeTrace& trace);
AnytimeTrace trace_from_jsonl(const Roadmap& roadmap, const std::string& text);

} // namespace lazyplan
