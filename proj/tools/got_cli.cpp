#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "got/error.hpp"
#include "got/experiment.hpp"
#include "got/metrics.hpp"
#include "got/schemes.hpp"

namespace {

constexpr int exit_config = 2;
constexpr int exit_backend = 3;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw got::ConfigError("cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int default_size(got::UseCaseId u) {
  switch (u) {
    case got::UseCaseId::keyword_counting:
      return 16;
    case got::UseCaseId::document_merging:
      return 4;
    default:
      return 32;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Graph-structured LLM reasoning runner"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "Run a batch of seeded experiments");
  std::string scheme, usecase = "sorting", backend = "mock-perfect", out_path, config_path, max_cost;
  int size = 0, samples = 1, k = 0, levels = 0, window = 0;
  std::uint64_t seed = 0;
  bool timing = false;
  run->add_option("--scheme", scheme, "io, cot, cot-sc, tot, tot2, got, got4, got8, gotx")->required();
  run->add_option("--usecase", usecase, "sorting, set_intersection, keyword_counting, document_merging");
  run->add_option("--size", size, "Problem size");
  run->add_option("--samples", samples, "Number of seeds");
  run->add_option("--seed", seed, "First seed");
  run->add_option("--backend", backend, "mock-perfect | mock-faulty:<rate>[:kinds] | scripted:<file> | http");
  run->add_option("--out", out_path, "runs-v1 output file (default: stdout)");
  run->add_option("--config", config_path, "Backend configuration file");
  run->add_option("--max-cost", max_cost, "Abort the batch once the cost exceeds this amount");
  run->add_option("--k", k, "Branching factor for cot-sc and tot");
  run->add_option("--levels", levels, "Levels for tot");
  run->add_option("--window", window, "Concurrent calls per operation");
  run->add_flag("--timing", timing, "Include wall time in records");

  auto* summarize = app.add_subcommand("summarize", "Summarize a runs file");
  std::string in_path;
  summarize->add_option("--in", in_path, "runs-v1 file")->required();

  auto* compare = app.add_subcommand("compare", "Compare two runs files");
  std::string a_path, b_path;
  compare->add_option("--a", a_path, "runs-v1 file")->required();
  compare->add_option("--b", b_path, "Baseline runs-v1 file")->required();

  auto* topology = app.add_subcommand("topology", "Latency and volume of a thought topology");
  std::string shape;
  int tk = 2, tn = 1, depth = 0;
  topology->add_option("--shape", shape, "chain, multichain, tree, hourglass")->required();
  topology->add_option("--k", tk, "Branching factor");
  topology->add_option("--n", tn, "Thought count for chains");
  topology->add_option("--depth", depth, "Depth for trees");

  auto* validate = app.add_subcommand("validate-goo", "Check a goo-v1 plan");
  std::string goo_path;
  validate->add_option("--config", goo_path, "Plan file")->required();

  auto* plan = app.add_subcommand("plan", "Print the goo-v1 plan of a scheme");
  std::string p_scheme, p_usecase = "sorting";
  int p_size = 0, p_k = 0, p_levels = 0;
  plan->add_option("--scheme", p_scheme, "Scheme name")->required();
  plan->add_option("--usecase", p_usecase, "Use case");
  plan->add_option("--size", p_size, "Problem size");
  plan->add_option("--k", p_k, "Branching factor");
  plan->add_option("--levels", p_levels, "Levels");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : exit_config;
  }

  try {
    if (*run) {
      auto u = got::parse_usecase(usecase);
      if (size == 0) size = default_size(u);
      got::BackendConfig bc;
      bc.spec = backend;
      if (!config_path.empty()) got::apply_config_file(bc, config_path);
      if (window > 0) bc.window = window;
      auto sc = got::build_scheme(scheme, u, size, {k, levels});
      got::BatchOptions bo;
      bo.seed0 = seed;
      bo.samples = samples;
      bo.timing = timing;
      if (!max_cost.empty()) bo.max_cost = got::parse_decimal(max_cost);
      std::ofstream file;
      std::ostream* out = &std::cout;
      if (!out_path.empty()) {
        file.open(out_path, std::ios::trunc);
        if (!file) throw got::ConfigError("cannot write '" + out_path + "'");
        out = &file;
      }
      bo.sink = [out](const got::RunRecord& r) { *out << got::record_to_json(r) << '\n' << std::flush; };
      auto result = got::run_batch(sc, bc, bo);
      if (result.budget_exceeded) {
        std::cerr << "error: cost cap exceeded after " << result.records.size() << " runs\n";
        return exit_backend;
      }
      if (result.backend_failed) {
        std::cerr << "error: backend failures occurred\n";
        return exit_backend;
      }
    } else if (*summarize) {
      std::cout << got::summary_to_json(got::summarize(got::read_records(in_path)));
    } else if (*compare) {
      auto a = got::summarize(got::read_records(a_path));
      auto b = got::summarize(got::read_records(b_path));
      std::cout << got::comparison_to_json(got::compare(a, b));
    } else if (*topology) {
      auto kind = got::parse_shape(shape);
      got::Shape s{kind, tk, tn, depth};
      std::cout << got::metrics_csv({s});
    } else if (*validate) {
      auto goo = got::parse_goo(read_file(goo_path));
      auto report = got::validate_goo(goo, &got::default_registry());
      if (report.ok()) {
        std::cout << "ok\n";
      } else {
        for (const auto& e : report.errors) std::cout << e << '\n';
        return exit_config;
      }
    } else if (*plan) {
      auto u = got::parse_usecase(p_usecase);
      if (p_size == 0) p_size = default_size(u);
      std::cout << got::goo_to_json(got::build_scheme(p_scheme, u, p_size, {p_k, p_levels}).goo);
    }
  } catch (const got::BackendFailure& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_backend;
  } catch (const got::BudgetExceeded& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_backend;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_config;
  }
  return 0;
}
