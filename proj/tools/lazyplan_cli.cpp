// Command-line front end: gen, oracle, run, trace.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "lazyplan/bench.hpp"
#include "lazyplan/errors.hpp"

namespace {

using namespace lazyplan;
namespace fs = std::filesystem;

constexpr int kExitConfig = 2;
constexpr int kExitIo = 3;

struct Overrides {
    std::string config_path;
    std::optional<std::size_t> n_problems;
    std::optional<std::size_t> n_vertices;
    std::optional<double> radius;
    std::optional<std::int64_t> budget;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> output_dir;
    std::optional<std::size_t> finite_set_k;
    std::optional<std::string> algorithms;
    std::optional<std::size_t> workers;
    std::optional<double> eta;
    std::optional<double> pomp_step;
    std::optional<std::string> sampler;
    bool no_traces = false;

    void attach(CLI::App& app) {
        app.add_option("-c,--config", config_path, "Benchmark config JSON");
        app.add_option("--n-problems", n_problems);
        app.add_option("--n-vertices", n_vertices);
        app.add_option("--connect-radius", radius);
        app.add_option("--check-budget", budget);
        app.add_option("--master-seed", seed);
        app.add_option("-o,--output-dir", output_dir);
        app.add_option("--finite-set-k", finite_set_k);
        app.add_option("--algorithms", algorithms, "Comma-separated labels, e.g. lazysp,psmp-fs");
        app.add_option("--workers", workers);
        app.add_option("--eta", eta);
        app.add_option("--pomp-step", pomp_step);
        app.add_option("--sampler", sampler)->check(CLI::IsMember({"halton", "uniform"}));
        app.add_flag("--no-traces", no_traces, "Do not write per-run trace files");
    }

    BenchConfig resolve() const {
        nlohmann::json j = nlohmann::json::object();
        if (!config_path.empty()) {
            std::ifstream in(config_path);
            if (!in) {
                throw IoError("cannot read " + config_path);
            }
            try {
                in >> j;
            } catch (const nlohmann::json::parse_error& ex) {
                throw ConfigError(std::string("config is not valid JSON: ") + ex.what());
            }
        }
        auto set = [&j](const char* key, const auto& value) {
            if (value) {
                j[key] = *value;
            }
        };
        set("n_problems", n_problems);
        set("n_vertices", n_vertices);
        set("connect_radius", radius);
        set("check_budget", budget);
        set("master_seed", seed);
        set("output_dir", output_dir);
        set("finite_set_k", finite_set_k);
        set("workers", workers);
        set("eta", eta);
        set("pomp_step", pomp_step);
        set("sampler", sampler);
        if (algorithms) {
            nlohmann::json list = nlohmann::json::array();
            std::stringstream ss(*algorithms);
            for (std::string item; std::getline(ss, item, ',');) {
                if (!item.empty()) {
                    list.push_back(item);
                }
            }
            j["algorithms"] = list;
        }
        if (no_traces) {
            j["write_traces"] = false;
        }
        return bench_config_from_json(j);
    }
};

void ensure_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) {
        throw IoError("cannot create " + dir.string() + ": " + ec.message());
    }
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out || !(out << text)) {
        throw IoError("cannot write " + path.string());
    }
}

std::string problem_name(std::size_t id) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "problem_%04zu", id);
    return buf;
}

int cmd_gen(const BenchConfig& config) {
    const fs::path out(config.output_dir);
    ensure_dir(out / "problems");
    const auto roadmap = build_bench_roadmap(config);
    save_roadmap(*roadmap, (out / "roadmap.json").string());
    std::size_t generated = 0;
    for (std::size_t id = 0; id < config.n_problems; ++id) {
        try {
            const FiniteWorldSet set = gen_finite_set(config.world_generator, config.finite_set_k,
                                                      derive_seed(config.master_seed, id, "world", 0));
            const std::string name = problem_name(id);
            write_text(out / "problems" / (name + ".json"), world_set_to_json(set).dump() + "\n");
            const auto tables = precompute_world_tables(*roadmap, set.worlds, config.resolution());
            write_text(out / "problems" / (name + "_tables.json"), tables_to_json(tables).dump() + "\n");
            if (const auto* bitmap = set.true_world().bitmap()) {
                save_pgm(*bitmap, (out / "problems" / (name + ".pgm")).string());
            }
            ++generated;
        } catch (const GenerationFailed& ex) {
            std::cerr << "problem " << id << ": generation failed: " << ex.what() << '\n';
        }
    }
    std::cout << "generated " << generated << " of " << config.n_problems << " problems in " << out.string() << '\n';
    return 0;
}

int cmd_oracle(const BenchConfig& config) {
    const fs::path out(config.output_dir);
    ensure_dir(out);
    const auto roadmap = build_bench_roadmap(config);
    std::ostringstream csv;
    csv << "problem_id,status,length,path\n";
    for (std::size_t id = 0; id < config.n_problems; ++id) {
        const ProblemInstance problem = make_problem(config, *roadmap, id);
        csv << id << ',' << to_string(problem.status) << ',' << format_real(problem.oracle.length) << ',';
        if (problem.oracle.path) {
            for (std::size_t i = 0; i < problem.oracle.path->vertices.size(); ++i) {
                csv << (i ? " " : "") << problem.oracle.path->vertices[i];
            }
        }
        csv << '\n';
    }
    write_text(out / "oracle.csv", csv.str());
    std::cout << "wrote " << (out / "oracle.csv").string() << '\n';
    return 0;
}

int cmd_run(const BenchConfig& config) {
    const BenchResult result = run_benchmark(config);
    const auto& counts = result.manifest.at("counts");
    std::cout << "problems: " << counts.at("n_problems") << " (feasible " << counts.at("feasible") << ", infeasible "
              << counts.at("infeasible") << ", failed " << counts.at("failed") << ")\n"
              << "outputs in " << config.output_dir << '\n';
    return 0;
}

int cmd_trace(const BenchConfig& config, std::size_t problem_id, const std::string& algo, const std::string& out) {
    const auto roadmap = build_bench_roadmap(config);
    BenchConfig single = config;
    single.algorithms = {algorithm_from_label(algo)};
    const ProblemInstance problem = make_problem(single, *roadmap, problem_id);
    if (problem.status == ProblemStatus::Failed) {
        std::cerr << "problem " << problem_id << ": generation failed: " << problem.failure << '\n';
        return 1;
    }
    const AlgorithmRun run = run_algorithm(single, *roadmap, problem, single.algorithms.front());
    const std::string text = trace_to_jsonl(run.trace);
    if (out.empty() || out == "-") {
        std::cout << text;
    } else {
        write_text(out, text);
    }
    std::cerr << "oracle length " << format_real(problem.oracle.length) << ", final "
              << format_real(run.trace.incumbent ? run.trace.incumbent->length : kInfiniteLength) << " after "
              << run.trace.total_configs << " checks (" << to_string(run.trace.reason) << ")\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Lazy anytime roadmap planning benchmark"};
    app.require_subcommand(1);

    Overrides gen_opts, oracle_opts, run_opts, trace_opts;
    auto* gen = app.add_subcommand("gen", "Generate roadmap, world sets and status tables");
    gen_opts.attach(*gen);
    auto* oracle = app.add_subcommand("oracle", "Compute ground-truth shortest feasible paths");
    oracle_opts.attach(*oracle);
    auto* run = app.add_subcommand("run", "Run the full benchmark and write CSVs");
    run_opts.attach(*run);
    auto* trace = app.add_subcommand("trace", "Run one algorithm on one problem, print a JSON-lines trace");
    trace_opts.attach(*trace);
    std::size_t problem_id = 0;
    std::string algo = "psmp-fs";
    std::string trace_out;
    trace->add_option("--problem", problem_id, "Problem index");
    trace->add_option("--algo", algo, "Algorithm label");
    trace->add_option("--out", trace_out, "Output file (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    }

    try {
        if (gen->parsed()) {
            return cmd_gen(gen_opts.resolve());
        }
        if (oracle->parsed()) {
            return cmd_oracle(oracle_opts.resolve());
        }
        if (run->parsed()) {
            return cmd_run(run_opts.resolve());
        }
        return cmd_trace(trace_opts.resolve(), problem_id, algo, trace_out);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const IoError& e) {
        std::cerr << "I/O error: " << e.what() << '\n';
        return kExitIo;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
