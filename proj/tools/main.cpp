#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "pnstate/evalbench.hpp"
#include "pnstate/ngram.hpp"
#include "pnstate/parse.hpp"
#include "pnstate/query.hpp"
#include "pnstate/reach.hpp"
#include "pnstate/replay.hpp"

namespace {

using nlohmann::ordered_json;

pnstate::workflow_net load_model(const std::string& spec) {
  if (auto id = pnstate::find_fixture(spec)) return pnstate::fixture_net(*id);
  return pnstate::parse_net_file(spec);
}

pnstate::state_selector parse_selector(const std::string& s) {
  if (s == "lex") return pnstate::state_selector::lexicographic_min;
  if (s == "random") return pnstate::state_selector::seeded_random;
  throw CLI::ValidationError("--selector must be lex or random");
}

std::string marking_text(const std::vector<std::string>& place_names,
                         const pnstate::marking& m) {
  std::string s = "{";
  bool first = true;
  for (auto p : m) {
    if (!first) s += ",";
    s += place_names[p];
    first = false;
  }
  return s + "}";
}

std::vector<std::string> net_place_names(const pnstate::workflow_net& net) {
  std::vector<std::string> names;
  for (pnstate::place_id p = 0; p < net.place_count(); ++p) names.push_back(net.place_name(p));
  return names;
}

int cmd_build(const std::string& model, std::uint32_t n, const std::string& out_path,
              bool no_prune, std::uint64_t cap_entries, const std::string& dot_path,
              const std::string& edges_path, const std::string& model_out,
              const std::string& format) {
  pnstate::workflow_net net = pnstate::normalize_mixed_xor_splits(load_model(model));
  pnstate::reach_graph graph = pnstate::build_reach_graph(net);
  pnstate::index_options opts;
  opts.prune = !no_prune;
  if (cap_entries) opts.max_entries = cap_entries;
  pnstate::ngram_index index = pnstate::build_index(graph, n, opts);

  if (!out_path.empty()) {
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw pnstate::error("cannot open '" + out_path + "' for writing");
    pnstate::serialize_index(index, graph.initial_marking(), net_place_names(net),
                             net.observable_labels(), out);
  }
  if (!dot_path.empty()) {
    std::ofstream out(dot_path);
    pnstate::write_dot(graph, net, out);
  }
  if (!edges_path.empty()) {
    std::ofstream out(edges_path);
    pnstate::write_edges_text(graph, net, out);
  }
  if (!model_out.empty()) {
    std::ofstream out(model_out);
    out << pnstate::write_native_json(net);
  }

  ordered_json j{{"model", model},
                 {"n", n},
                 {"pruned", !no_prune},
                 {"graph_vertices", graph.vertex_count()},
                 {"graph_edges", graph.edge_count()},
                 {"index_entries", index.size()},
                 {"index_path", out_path}};
  if (format == "jsonl") {
    std::cout << j.dump() << "\n";
  } else {
    std::cout << "model:          " << model << "\n"
              << "n:              " << n << (no_prune ? " (unpruned)" : "") << "\n"
              << "graph vertices: " << graph.vertex_count() << "\n"
              << "graph edges:    " << graph.edge_count() << "\n"
              << "index entries:  " << index.size() << "\n";
    if (!out_path.empty()) std::cout << "written to:     " << out_path << "\n";
  }
  return 0;
}

int cmd_query(const std::string& index_path, const std::vector<std::string>& prefix,
              const std::string& selector, std::uint64_t seed, const std::string& format) {
  std::ifstream in(index_path, std::ios::binary);
  if (!in) throw pnstate::error("cannot open '" + index_path + "'");
  pnstate::index_file file = pnstate::deserialize_index(in);
  std::unordered_set<std::string> net_labels(file.net_labels.begin(), file.net_labels.end());

  pnstate::state_answer ans = pnstate::compute_state(file.index, file.initial, net_labels,
                                                     prefix, parse_selector(selector), seed);
  if (format == "jsonl") {
    ordered_json j;
    j["prefix"] = prefix;
    j["gram_len_used"] = ans.gram_len_used;
    j["filtered_events"] = ans.filtered_events;
    j["candidates"] = ordered_json::array();
    for (const auto& m : ans.markings)
      j["candidates"].push_back(marking_text(file.place_names, m));
    j["chosen"] = marking_text(file.place_names, ans.chosen);
    std::cout << j.dump() << "\n";
  } else {
    std::cout << "state:      " << marking_text(file.place_names, ans.chosen) << "\n"
              << "candidates:";
    for (const auto& m : ans.markings) std::cout << " " << marking_text(file.place_names, m);
    std::cout << "\n"
              << "gram used:  " << ans.gram_len_used << "\n"
              << "filtered:   " << ans.filtered_events << "\n";
  }
  return 0;
}

int cmd_eval(const std::string& model, std::vector<std::uint32_t> ns,
             std::vector<std::uint32_t> noise, std::uint32_t cases, std::uint64_t seed,
             const std::string& selector, bool with_alignment_slot, const std::string& format) {
  pnstate::workflow_net net = load_model(model);
  pnstate::eval_options opts;
  if (!ns.empty()) opts.ns = std::move(ns);
  if (!noise.empty()) opts.noise_levels = std::move(noise);
  opts.cases = cases;
  opts.seed = seed;
  opts.selector = parse_selector(selector);
  opts.include_alignment_slot = with_alignment_slot;
  auto rows = pnstate::run_eval(net, model, opts);

  if (format == "jsonl") {
    for (const auto& r : rows) {
      ordered_json j{{"model", r.model}, {"method", r.method}, {"noise", r.noise},
                     {"correct", r.correct}, {"counted", r.counted}, {"cases", r.cases}};
      if (r.accuracy) j["accuracy"] = *r.accuracy;
      else j["accuracy"] = nullptr;
      std::cout << j.dump() << "\n";
    }
  } else {
    std::cout << "model  noise  method            accuracy  (correct/counted)\n";
    for (const auto& r : rows) {
      char acc[16];
      if (r.accuracy) std::snprintf(acc, sizeof acc, "%.2f", *r.accuracy);
      else std::snprintf(acc, sizeof acc, "-");
      std::printf("%-6s %-6u %-17s %-9s %u/%u\n", r.model.c_str(), r.noise, r.method.c_str(),
                  acc, r.correct, r.counted);
    }
  }
  return 0;
}

int cmd_bench(const std::string& model, std::uint32_t n, const std::string& log_path,
              std::uint32_t cases, std::uint64_t seed, std::uint64_t min_queries,
              std::vector<std::uint32_t> workers, const std::string& format) {
  pnstate::workflow_net net = load_model(model);
  pnstate::event_log external;
  bool have_log = !log_path.empty();
  if (have_log) external = pnstate::read_log_file(log_path);
  if (workers.empty()) workers = {1};

  for (std::uint32_t w : workers) {
    pnstate::bench_options opts;
    opts.cases = cases;
    opts.seed = seed;
    opts.min_queries = min_queries;
    opts.workers = w;
    auto r = pnstate::run_bench(net, model, n, opts, have_log ? &external : nullptr);
    if (format == "jsonl") {
      ordered_json j{{"model", r.model},
                     {"n", r.n},
                     {"workers", r.workers},
                     {"graph_vertices", r.graph_vertices},
                     {"index_entries", r.index_entries},
                     {"graph_build_s", r.graph_build_s},
                     {"index_build_s", r.index_build_s},
                     {"queries", r.queries},
                     {"mean_us", r.mean_us},
                     {"median_us", r.median_us},
                     {"p99_us", r.p99_us},
                     {"cases_per_second", r.cases_per_second}};
      std::cout << j.dump() << "\n";
    } else {
      std::printf("model=%s n=%u workers=%u\n", r.model.c_str(), r.n, r.workers);
      std::printf("  offline: graph %.3fs (%zu vertices), index %.3fs (%zu entries)\n",
                  r.graph_build_s, r.graph_vertices, r.index_build_s, r.index_entries);
      std::printf("  online:  %llu queries, mean %.2fus median %.2fus p99 %.2fus, %.0f cases/s\n",
                  static_cast<unsigned long long>(r.queries), r.mean_us, r.median_us, r.p99_us,
                  r.cases_per_second);
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"n-gram state index over workflow nets: build, query, evaluate, benchmark"};
  app.require_subcommand(1);

  std::string model, out_path, index_path, selector = "lex", format = "table";
  std::string dot_path, edges_path, model_out, log_path;
  std::uint32_t n = 3, cases = 1000;
  std::uint64_t seed = 1, cap_entries = 0, min_queries = 100000;
  bool no_prune = false, alignment_slot = false;
  std::vector<std::uint32_t> ns, noise, workers;
  std::vector<std::string> prefix;

  auto* build = app.add_subcommand("build", "build the reachability graph and n-gram index");
  build->add_option("model", model,
                    "model file (.json/.pnml) or fixture name (Seq, Loop, K3, K5, K10, "
                    "OrderFulfillment, Invoicing, ChoiceDiamond)")
      ->required();
  build->add_option("-n,--n", n, "max gram length")->check(CLI::PositiveNumber);
  build->add_option("-o,--out", out_path, "index output file");
  build->add_flag("--no-prune", no_prune, "store every gram up to n");
  build->add_option("--cap-entries", cap_entries, "entry cap override");
  build->add_option("--dot", dot_path, "write the graph in dot format");
  build->add_option("--edges", edges_path, "write the graph as tab-separated edges");
  build->add_option("--write-model", model_out, "write the normalized model as native json");
  build->add_option("--format", format)->check(CLI::IsMember({"table", "jsonl"}));

  auto* query = app.add_subcommand("query", "map a trace prefix to its state");
  query->add_option("index", index_path, "index file from 'build'")->required();
  query->add_option("prefix", prefix, "activity labels, oldest first");
  query->add_option("--selector", selector)->check(CLI::IsMember({"lex", "random"}));
  query->add_option("--seed", seed);
  query->add_option("--format", format)->check(CLI::IsMember({"table", "jsonl"}));

  auto* eval = app.add_subcommand("eval", "synthetic accuracy evaluation with noise");
  eval->add_option("model", model)->required();
  eval->add_option("-n,--n", ns, "gram lengths to evaluate");
  eval->add_option("--noise", noise, "noise levels (0..3)")->check(CLI::Range(0, 3));
  eval->add_option("--cases", cases);
  eval->add_option("--seed", seed);
  eval->add_option("--selector", selector)->check(CLI::IsMember({"lex", "random"}));
  eval->add_flag("--with-alignment-slot", alignment_slot,
                 "emit an empty row for an externally computed alignment baseline");
  eval->add_option("--format", format)->check(CLI::IsMember({"table", "jsonl"}));

  auto* bench = app.add_subcommand("bench", "offline build times and online throughput");
  bench->add_option("model", model)->required();
  bench->add_option("-n,--n", n)->check(CLI::PositiveNumber);
  bench->add_option("--log", log_path, "query log (csv/xes); simulated when absent");
  bench->add_option("--cases", cases);
  bench->add_option("--seed", seed);
  bench->add_option("--min-queries", min_queries);
  bench->add_option("--workers", workers, "worker counts to run, e.g. --workers 1 2 4");
  bench->add_option("--format", format)->check(CLI::IsMember({"table", "jsonl"}));

  CLI11_PARSE(app, argc, argv);

  try {
    if (build->parsed())
      return cmd_build(model, n, out_path, no_prune, cap_entries, dot_path, edges_path,
                       model_out, format);
    if (query->parsed()) return cmd_query(index_path, prefix, selector, seed, format);
    if (eval->parsed())
      return cmd_eval(model, ns, noise, cases, seed, selector, alignment_slot, format);
    if (bench->parsed())
      return cmd_bench(model, n, log_path, cases, seed, min_queries, workers, format);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
