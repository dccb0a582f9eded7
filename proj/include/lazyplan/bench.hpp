#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "lazyplan/beliefs.hpp"
#include "lazyplan/environments.hpp"
#include "lazyplan/metrics.hpp"
#include "lazyplan/planners.hpp"
#include "lazyplan/roadmap.hpp"

namespace lazyplan {

enum class PosteriorKind { Bernoulli, NearestNeighbor, FiniteSet };

const char* to_string(PosteriorKind kind);
PosteriorKind posterior_kind_from_string(const std::string& name);

struct AlgorithmSpec {
    ProposerKind proposer;
    PosteriorKind posterior;

    /// e.g. "psmp-fs"
    std::string label() const;
};

/// Parses "psmp-fs", "lazysp", "pomp-nn", ... LazySP defaults to the Bernoulli posterior.
AlgorithmSpec algorithm_from_label(const std::string& label);

struct BenchConfig {
    std::size_t dimension = 2;
    std::size_t n_vertices = 200;
    double connect_radius = 0.15;
    std::string sampler = "halton"; // or "uniform"
    GeneratorConfig world_generator = ForestParams{};
    std::size_t n_problems = 200;
    std::size_t finite_set_k = 20;
    /// Collision-checking resolution per dimension; unset dimensions use default_resolution().
    std::map<std::size_t, double> resolutions;
    std::vector<AlgorithmSpec> algorithms;
    std::int64_t check_budget = 50000;
    std::vector<std::size_t> success_budgets;
    double eta = kDefaultEta;
    std::size_t edge_points = kDefaultEdgePoints;
    double pomp_step = kDefaultPompStep;
    double pomp_weight_scale = 1.0;
    double bernoulli_p0 = 0.5;
    std::uint64_t master_seed = 0;
    std::string output_dir = "bench_out";
    bool write_traces = true;
    std::size_t workers = 1;

    double resolution() const;
    /// Budgets for the success curve; ten even steps up to check_budget unless configured.
    std::vector<std::size_t> budgets() const;
    void validate() const;
};

/// 0.001 for d <= 2, 0.2 otherwise.
double default_resolution(std::size_t dimension);

BenchConfig default_bench_config();
nlohmann::json bench_config_to_json(const BenchConfig& config);
/// Missing keys keep their defaults. Throws ConfigError on bad values.
BenchConfig bench_config_from_json(const nlohmann::json& j);
BenchConfig load_bench_config(const std::string& path);

/// FNV-1a 64 of "master|problem|algo|trial".
std::uint64_t derive_seed(std::uint64_t master_seed, std::size_t problem_id, const std::string& algo_name,
                          std::size_t trial);

std::shared_ptr<const Roadmap> build_bench_roadmap(const BenchConfig& config);

enum class ProblemStatus { Feasible, Infeasible, Failed };

const char* to_string(ProblemStatus status);

/// Worlds, status tables, and ground truth of one benchmark problem.
struct ProblemInstance {
    std::size_t id = 0;
    ProblemStatus status = ProblemStatus::Failed;
    std::string failure;
    std::shared_ptr<const std::vector<World>> worlds;
    std::size_t true_index = 0;
    std::shared_ptr<const WorldStatusTables> tables;
    OracleResult oracle;

    const World& world() const { return worlds->at(true_index); }
};

ProblemInstance make_problem(const BenchConfig& config, const Roadmap& roadmap, std::size_t problem_id);

std::unique_ptr<Posterior> make_posterior(const BenchConfig& config, const ProblemInstance& problem,
                                          PosteriorKind kind);

struct AlgorithmRun {
    AlgorithmSpec algorithm;
    std::uint64_t seed = 0;
    AnytimeTrace trace;
};

struct ProblemResult {
    ProblemInstance problem;
    std::vector<AlgorithmRun> runs;
};

AlgorithmRun run_algorithm(const BenchConfig& config, const Roadmap& roadmap, const ProblemInstance& problem,
                           const AlgorithmSpec& algorithm);

struct BenchResult {
    std::shared_ptr<const Roadmap> roadmap;
    std::vector<ProblemResult> problems;
    nlohmann::json manifest;
};

/// Runs every algorithm on every problem. Writes anytime.csv, success.csv,
/// regret.csv, traces/ and manifest.json into output_dir unless it is empty.
/// Problems run on `workers` threads (LAZYPLAN_WORKERS overrides).
BenchResult run_benchmark(const BenchConfig& config);

std::string anytime_csv(const BenchResult& result);
std::string success_csv(const BenchConfig& config, const BenchResult& result);
std::string regret_csv(const BenchResult& result);

/// Fixed 9-digit decimal; "inf" for infinity.
std::string format_real(double x);

} // namespace lazyplan
