#include "lazyplan/bench.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

#include "lazyplan/errors.hpp"
#include "lazyplan/hash.hpp"
#include "lazyplan/rng.hpp"

namespace lazyplan {

namespace fs = std::filesystem;

const char* to_string(PosteriorKind kind) {
    switch (kind) {
    case PosteriorKind::Bernoulli:
        return "bernoulli";
    case PosteriorKind::NearestNeighbor:
        return "nn";
    case PosteriorKind::FiniteSet:
        return "fs";
    }
    return "unknown";
}

PosteriorKind posterior_kind_from_string(const std::string& name) {
    if (name == "bernoulli") {
        return PosteriorKind::Bernoulli;
    }
    if (name == "nn") {
        return PosteriorKind::NearestNeighbor;
    }
    if (name == "fs") {
        return PosteriorKind::FiniteSet;
    }
    throw ConfigError("unknown posterior '" + name + "'");
}

std::string AlgorithmSpec::label() const { return std::string(to_string(proposer)) + "-" + to_string(posterior); }

AlgorithmSpec algorithm_from_label(const std::string& label) {
    const auto dash = label.find('-');
    const ProposerKind proposer = proposer_kind_from_string(label.substr(0, dash));
    if (dash == std::string::npos) {
        if (proposer != ProposerKind::LazySp) {
            throw ConfigError("algorithm '" + label + "' needs a posterior suffix");
        }
        return {proposer, PosteriorKind::Bernoulli};
    }
    return {proposer, posterior_kind_from_string(label.substr(dash + 1))};
}

double default_resolution(std::size_t dimension) { return dimension <= 2 ? 0.001 : 0.2; }

double BenchConfig::resolution() const {
    const auto it = resolutions.find(dimension);
    return it != resolutions.end() ? it->second : default_resolution(dimension);
}

std::vector<std::size_t> BenchConfig::budgets() const {
    if (!success_budgets.empty()) {
        return success_budgets;
    }
    std::vector<std::size_t> out;
    const auto budget = static_cast<std::size_t>(std::max<std::int64_t>(0, check_budget));
    for (std::size_t i = 1; i <= 10; ++i) {
        out.push_back(budget * i / 10);
    }
    return out;
}

void BenchConfig::validate() const {
    if (dimension == 0 || n_vertices == 0 || n_problems == 0 || finite_set_k == 0) {
        throw ConfigError("dimension, n_vertices, n_problems and finite_set_k must be at least 1");
    }
    if (!(connect_radius > 0.0)) {
        throw ConfigError("connect_radius must be positive");
    }
    if (check_budget < 0) {
        throw ConfigError("check_budget must be non-negative");
    }
    if (sampler != "halton" && sampler != "uniform") {
        throw ConfigError("sampler must be 'halton' or 'uniform'");
    }
    if (generator_dimension(world_generator) != dimension) {
        throw ConfigError("world generator dimension does not match the roadmap dimension");
    }
    if (algorithms.empty()) {
        throw ConfigError("at least one algorithm is required");
    }
    if (!(resolution() > 0.0) || !(eta > 0.0) || !(pomp_step > 0.0) || !(pomp_weight_scale > 0.0) ||
        edge_points == 0 || !(bernoulli_p0 >= 0.0 && bernoulli_p0 <= 1.0)) {
        throw ConfigError("resolution, eta, pomp_step, pomp_weight_scale and edge_points must be positive; "
                          "bernoulli_p0 must lie in [0, 1]");
    }
    if (workers == 0) {
        throw ConfigError("workers must be at least 1");
    }
}

BenchConfig default_bench_config() {
    BenchConfig config;
    config.algorithms = {algorithm_from_label("lazysp"), algorithm_from_label("psmp-fs"),
                         algorithm_from_label("psmp-nn"), algorithm_from_label("pomp-fs"),
                         algorithm_from_label("pomp-nn")};
    return config;
}

nlohmann::json bench_config_to_json(const BenchConfig& config) {
    nlohmann::json algorithms = nlohmann::json::array();
    for (const auto& a : config.algorithms) {
        algorithms.push_back({{"proposer", to_string(a.proposer)}, {"posterior", to_string(a.posterior)}});
    }
    nlohmann::json resolutions = nlohmann::json::object();
    for (const auto& [d, r] : config.resolutions) {
        resolutions[std::to_string(d)] = r;
    }
    return {{"dimension", config.dimension},
            {"n_vertices", config.n_vertices},
            {"connect_radius", config.connect_radius},
            {"sampler", config.sampler},
            {"world_generator", generator_to_json(config.world_generator)},
            {"n_problems", config.n_problems},
            {"finite_set_k", config.finite_set_k},
            {"resolutions", resolutions},
            {"algorithms", algorithms},
            {"check_budget", config.check_budget},
            {"success_budgets", config.success_budgets},
            {"eta", config.eta},
            {"edge_points", config.edge_points},
            {"pomp_step", config.pomp_step},
            {"pomp_weight_scale", config.pomp_weight_scale},
            {"bernoulli_p0", config.bernoulli_p0},
            {"master_seed", config.master_seed},
            {"output_dir", config.output_dir},
            {"write_traces", config.write_traces},
            {"workers", config.workers}};
}

BenchConfig bench_config_from_json(const nlohmann::json& j) {
    BenchConfig config = default_bench_config();
    try {
        if (!j.is_object()) {
            throw ConfigError("benchmark config must be a JSON object");
        }
        config.dimension = j.value("dimension", config.dimension);
        config.n_vertices = j.value("n_vertices", config.n_vertices);
        config.connect_radius = j.value("connect_radius", config.connect_radius);
        config.sampler = j.value("sampler", config.sampler);
        if (j.contains("world_generator")) {
            config.world_generator = generator_from_json(j.at("world_generator"));
        } else if (auto* forest = std::get_if<ForestParams>(&config.world_generator)) {
            forest->dimension = config.dimension;
        }
        config.n_problems = j.value("n_problems", config.n_problems);
        config.finite_set_k = j.value("finite_set_k", config.finite_set_k);
        if (j.contains("resolutions")) {
            for (const auto& [key, value] : j.at("resolutions").items()) {
                config.resolutions[std::stoul(key)] = value.get<double>();
            }
        }
        if (j.contains("algorithms")) {
            config.algorithms.clear();
            for (const auto& a : j.at("algorithms")) {
                if (a.is_string()) {
                    config.algorithms.push_back(algorithm_from_label(a.get<std::string>()));
                } else {
                    config.algorithms.push_back(
                        {proposer_kind_from_string(a.at("proposer").get<std::string>()),
                         posterior_kind_from_string(a.value("posterior", std::string("bernoulli")))});
                }
            }
        }
        config.check_budget = j.value("check_budget", config.check_budget);
        config.success_budgets = j.value("success_budgets", config.success_budgets);
        config.eta = j.value("eta", config.eta);
        config.edge_points = j.value("edge_points", config.edge_points);
        config.pomp_step = j.value("pomp_step", config.pomp_step);
        config.pomp_weight_scale = j.value("pomp_weight_scale", config.pomp_weight_scale);
        config.bernoulli_p0 = j.value("bernoulli_p0", config.bernoulli_p0);
        config.master_seed = j.value("master_seed", config.master_seed);
        config.output_dir = j.value("output_dir", config.output_dir);
        config.write_traces = j.value("write_traces", config.write_traces);
        config.workers = j.value("workers", config.workers);
    } catch (const nlohmann::json::exception& ex) {
        throw ConfigError(std::string("bad benchmark config: ") + ex.what());
    } catch (const std::invalid_argument& ex) {
        throw ConfigError(std::string("bad benchmark config: ") + ex.what());
    }
    config.validate();
    return config;
}

BenchConfig load_bench_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot read " + path);
    }
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::parse_error& ex) {
        throw ConfigError(std::string("config is not valid JSON: ") + ex.what());
    }
    return bench_config_from_json(j);
}

std::uint64_t derive_seed(std::uint64_t master_seed, std::size_t problem_id, const std::string& algo_name,
                          std::size_t trial) {
    const std::string key =
        std::to_string(master_seed) + "|" + std::to_string(problem_id) + "|" + algo_name + "|" + std::to_string(trial);
    return fnv1a64(key);
}

std::shared_ptr<const Roadmap> build_bench_roadmap(const BenchConfig& config) {
    std::vector<Configuration> points;
    if (config.sampler == "uniform") {
        Rng rng(derive_seed(config.master_seed, 0, "roadmap", 0));
        points = uniform_points(config.dimension, config.n_vertices, rng);
    } else {
        points = halton_points(config.dimension, config.n_vertices);
    }
    return std::make_shared<const Roadmap>(build_roadmap(points, config.connect_radius,
                                                         default_start(config.dimension),
                                                         default_goal(config.dimension)));
}

const char* to_string(ProblemStatus status) {
    switch (status) {
    case ProblemStatus::Feasible:
        return "feasible";
    case ProblemStatus::Infeasible:
        return "infeasible";
    case ProblemStatus::Failed:
        return "failed";
    }
    return "unknown";
}

namespace {

bool uses_finite_set(const BenchConfig& config) {
    return std::any_of(config.algorithms.begin(), config.algorithms.end(),
                       [](const AlgorithmSpec& a) { return a.posterior == PosteriorKind::FiniteSet; });
}

} // namespace

ProblemInstance make_problem(const BenchConfig& config, const Roadmap& roadmap, std::size_t problem_id) {
    ProblemInstance problem;
    problem.id = problem_id;
    try {
        FiniteWorldSet set = gen_finite_set(config.world_generator, config.finite_set_k,
                                            derive_seed(config.master_seed, problem_id, "world", 0));
        problem.true_index = set.true_index;
        problem.worlds = std::make_shared<const std::vector<World>>(std::move(set.worlds));
    } catch (const GenerationFailed& ex) {
        problem.status = ProblemStatus::Failed;
        problem.failure = ex.what();
        return problem;
    }

    const double resolution = config.resolution();
    if (uses_finite_set(config)) {
        problem.tables = std::make_shared<const WorldStatusTables>(
            precompute_world_tables(roadmap, *problem.worlds, resolution));
        problem.oracle = oracle_from_statuses(roadmap, problem.tables->worlds.at(problem.true_index));
    } else {
        problem.oracle = oracle_shortest_feasible(roadmap, problem.world(), resolution);
    }
    problem.status = problem.oracle.path ? ProblemStatus::Feasible : ProblemStatus::Infeasible;
    return problem;
}

std::unique_ptr<Posterior> make_posterior(const BenchConfig& config, const ProblemInstance& problem,
                                          PosteriorKind kind) {
    switch (kind) {
    case PosteriorKind::Bernoulli:
        return std::make_unique<BernoulliPosterior>(config.bernoulli_p0);
    case PosteriorKind::NearestNeighbor:
        return std::make_unique<NearestNeighborPosterior>(config.eta, config.edge_points);
    case PosteriorKind::FiniteSet:
        if (!problem.tables) {
            throw Error("finite-set posterior requested without precomputed tables");
        }
        return std::make_unique<FiniteSetPosterior>(problem.tables, problem.worlds);
    }
    throw Error("unknown posterior kind");
}

AlgorithmRun run_algorithm(const BenchConfig& config, const Roadmap& roadmap, const ProblemInstance& problem,
                           const AlgorithmSpec& algorithm) {
    AlgorithmRun run;
    run.algorithm = algorithm;
    run.seed = derive_seed(config.master_seed, problem.id, algorithm.label(), 0);
    const auto posterior = make_posterior(config, problem, algorithm.posterior);
    const auto proposer = make_proposer(algorithm.proposer, config.pomp_step, config.pomp_weight_scale);
    Rng rng(run.seed);
    Termination termination;
    termination.max_configs = config.check_budget;
    run.trace = run_search(roadmap, problem.world(), *posterior, *proposer, termination, config.resolution(), rng);
    return run;
}

std::string format_real(double x) {
    if (std::isinf(x)) {
        return x > 0 ? "inf" : "-inf";
    }
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.9f", x);
    return buf;
}

namespace {

std::string hex64(std::uint64_t x) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(x));
    return buf;
}

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError("cannot write " + path.string());
    }
    out << content;
    if (!out) {
        throw IoError("failed writing " + path.string());
    }
}

std::size_t worker_count(const BenchConfig& config) {
    if (const char* env = std::getenv("LAZYPLAN_WORKERS")) {
        try {
            const auto n = std::stoul(env);
            if (n > 0) {
                return n;
            }
        } catch (const std::exception&) {
        }
        throw ConfigError(std::string("LAZYPLAN_WORKERS must be a positive integer, got '") + env + "'");
    }
    return config.workers;
}

std::string utc_timestamp() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

} // namespace

std::string anytime_csv(const BenchResult& result) {
    std::ostringstream out;
    out << "problem_id,algo,posterior,seed,checks,best_length\n";
    for (const auto& pr : result.problems) {
        for (const auto& run : pr.runs) {
            for (const auto& point : anytime_curve(run.trace)) {
                out << pr.problem.id << ',' << run.algorithm.label() << ',' << to_string(run.algorithm.posterior)
                    << ',' << run.seed << ',' << point.configs_checked << ',' << format_real(point.best_length)
                    << '\n';
            }
        }
    }
    return out.str();
}

std::string success_csv(const BenchConfig& config, const BenchResult& result) {
    std::ostringstream out;
    out << "algo,posterior,budget,fraction\n";
    for (std::size_t a = 0; a < config.algorithms.size(); ++a) {
        std::vector<const AnytimeTrace*> traces;
        for (const auto& pr : result.problems) {
            if (pr.problem.status == ProblemStatus::Feasible) {
                traces.push_back(&pr.runs.at(a).trace);
            }
        }
        if (traces.empty()) {
            continue;
        }
        for (const auto& [budget, fraction] : success_budget_curve(traces, config.budgets())) {
            out << config.algorithms[a].label() << ',' << to_string(config.algorithms[a].posterior) << ',' << budget
                << ',' << format_real(fraction) << '\n';
        }
    }
    return out.str();
}

std::string regret_csv(const BenchResult& result) {
    std::ostringstream out;
    out << "problem_id,algo,episode,delta,cumulative\n";
    const double penalty = default_fail_penalty(*result.roadmap);
    for (const auto& pr : result.problems) {
        if (pr.problem.status != ProblemStatus::Feasible) {
            continue;
        }
        for (const auto& run : pr.runs) {
            const RegretRecord regret = cumulative_regret(run.trace, pr.problem.oracle.length, penalty);
            for (std::size_t k = 0; k < regret.deltas.size(); ++k) {
                out << pr.problem.id << ',' << run.algorithm.label() << ',' << (k + 1) << ','
                    << format_real(regret.deltas[k]) << ',' << format_real(regret.cumulative[k]) << '\n';
            }
        }
    }
    return out.str();
}

BenchResult run_benchmark(const BenchConfig& config) {
    config.validate();
    const std::size_t workers = worker_count(config);

    const bool write = !config.output_dir.empty();
    const fs::path out_dir(config.output_dir);
    if (write) {
        std::error_code ec;
        fs::create_directories(config.write_traces ? out_dir / "traces" : out_dir, ec);
        if (ec) {
            throw IoError("cannot create output directory " + out_dir.string() + ": " + ec.message());
        }
        // Fail before any work if the directory is not writable.
        write_file(out_dir / ".write_probe", "");
        fs::remove(out_dir / ".write_probe", ec);
    }

    BenchResult result;
    result.roadmap = build_bench_roadmap(config);
    const Roadmap& roadmap = *result.roadmap;
    const bool connected = roadmap.start_goal_connected();
    result.problems.resize(config.n_problems);

    std::atomic<std::size_t> next{0};
    std::mutex log_mutex;
    auto work = [&] {
        for (;;) {
            const std::size_t id = next.fetch_add(1);
            if (id >= config.n_problems) {
                return;
            }
            ProblemResult& pr = result.problems[id];
            if (!connected) {
                pr.problem.id = id;
                pr.problem.status = ProblemStatus::Infeasible;
                pr.problem.failure = "start and goal are disconnected in the roadmap";
                continue;
            }
            pr.problem = make_problem(config, roadmap, id);
            if (pr.problem.status == ProblemStatus::Failed) {
                const std::lock_guard lock(log_mutex);
                std::cerr << "problem " << id << ": generation failed: " << pr.problem.failure << '\n';
                continue;
            }
            if (pr.problem.status != ProblemStatus::Feasible) {
                continue;
            }
            for (const auto& algorithm : config.algorithms) {
                pr.runs.push_back(run_algorithm(config, roadmap, pr.problem, algorithm));
            }
        }
    };
    if (workers <= 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t w = 0; w < std::min(workers, config.n_problems); ++w) {
            pool.emplace_back(work);
        }
        for (auto& t : pool) {
            t.join();
        }
    }

    std::size_t feasible = 0;
    std::size_t infeasible = 0;
    std::size_t failed = 0;
    nlohmann::json skipped = nlohmann::json::array();
    nlohmann::json overshoot = nlohmann::json::array();
    for (const auto& pr : result.problems) {
        switch (pr.problem.status) {
        case ProblemStatus::Feasible:
            ++feasible;
            break;
        case ProblemStatus::Infeasible:
            ++infeasible;
            skipped.push_back({{"problem_id", pr.problem.id}, {"status", "infeasible"}});
            break;
        case ProblemStatus::Failed:
            ++failed;
            skipped.push_back({{"problem_id", pr.problem.id}, {"status", "failed"}, {"reason", pr.problem.failure}});
            break;
        }
        for (const auto& run : pr.runs) {
            if (static_cast<std::int64_t>(run.trace.total_configs) > config.check_budget) {
                overshoot.push_back({{"problem_id", pr.problem.id},
                                     {"algo", run.algorithm.label()},
                                     {"overshoot", run.trace.total_configs -
                                                       static_cast<std::size_t>(config.check_budget)}});
            }
        }
    }

    const nlohmann::json config_json = bench_config_to_json(config);
    nlohmann::json manifest = {{"config_hash", hex64(fnv1a64(config_json.dump()))},
                               {"config", config_json},
                               {"roadmap_hash", hex64(roadmap_hash(roadmap))},
                               {"resolution", config.resolution()},
                               {"counts",
                                {{"n_problems", config.n_problems},
                                 {"feasible", feasible},
                                 {"infeasible", infeasible},
                                 {"failed", failed}}},
                               {"skipped", skipped},
                               {"budget_overshoot", overshoot}};

    if (write) {
        nlohmann::json files = nlohmann::json::object();
        auto emit = [&](const std::string& name, const std::string& content) {
            write_file(out_dir / name, content);
            files[name] = hex64(fnv1a64(content));
        };
        emit("anytime.csv", anytime_csv(result));
        emit("success.csv", success_csv(config, result));
        emit("regret.csv", regret_csv(result));
        save_roadmap(roadmap, (out_dir / "roadmap.json").string());
        if (config.write_traces) {
            for (const auto& pr : result.problems) {
                for (const auto& run : pr.runs) {
                    char name[64];
                    std::snprintf(name, sizeof name, "traces/problem_%04zu_", pr.problem.id);
                    emit(name + run.algorithm.label() + ".jsonl", trace_to_jsonl(run.trace));
                }
            }
        }
        manifest["files"] = files;
        manifest["timestamp"] = utc_timestamp();
        write_file(out_dir / "manifest.json", manifest.dump(2) + "\n");
    }
    result.manifest = std::move(manifest);
    return result;
}

} // namespace lazyplan
