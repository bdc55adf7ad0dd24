// engine: command-line workflow over a project store.

#include <cstdio>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include "bpcite/api.hpp"
#include "bpcite/commands.hpp"
#include "bpcite/errors.hpp"
#include "bpcite/synth.hpp"

using namespace bpcite;

namespace {

constexpr int kExitData = 1;
constexpr int kExitUsage = 2;

std::vector<double> parse_grid(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != item.size() || !(v > 0.0)) throw ConfigError("invalid grid value '" + item + "'");
    out.push_back(v);
  }
  if (out.empty()) throw ConfigError("hyperparameter grid is empty");
  return out;
}

void print_grid(const TrainResult& r) {
  for (const auto& [c, acc] : r.accuracy_by_c) std::printf("  C=%-8g validation accuracy %.4f\n", c, acc);
  std::printf("selected C=%g\n", r.reg_c);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Binding-precedent citation engine"};
  app.require_subcommand(1);
  std::string store_path;
  bool verbose = false;
  app.add_option("--store", store_path, "Project store directory")->envname("ENGINE_STORE");
  app.add_flag("-v,--verbose", verbose, "Debug logging");

  auto* generate = app.add_subcommand("generate", "Write a seeded synthetic corpus (documents.jsonl, precedents.jsonl)");
  SynthConfig synth;
  std::string out_dir;
  generate->add_option("--out", out_dir, "Output directory")->required();
  generate->add_option("--seed", synth.seed, "Random seed");
  generate->add_option("--docs-per-class", synth.docs_per_class, "Single-label documents per class");

  auto* ingest = app.add_subcommand("ingest", "Validate, deduplicate and store a corpus");
  IngestOptions ingest_opts;
  ingest->add_option("--documents", ingest_opts.documents, "documents.jsonl")->required();
  ingest->add_option("--precedents", ingest_opts.precedents, "precedents.jsonl")->required();
  ingest->add_flag("--strict", ingest_opts.strict, "Fail when any input line is rejected");

  auto* train = app.add_subcommand("train", "Fit embedding and calibrated classifier");
  TrainConfig train_cfg;
  std::string grid;
  train->add_option("--seed", train_cfg.seed, "Random seed");
  train->add_option("--k", train_cfg.k, "Embedding dimension")->check(CLI::PositiveNumber);
  train->add_option("--grid", grid, "Comma-separated C values (default 0.01,0.1,1,10,100)");
  train->add_option("--classes", train_cfg.classes, "Number of most-cited precedents to model");

  auto* infer = app.add_subcommand("infer", "Build the citation index");
  double t_c = 0.95;
  infer->add_option("--tc", t_c, "Confidence threshold in [0,1]")->check(CLI::Range(0.0, 1.0));

  auto* explain_cmd = app.add_subcommand("explain", "Sentence-level explanation of one document");
  std::string doc_id;
  std::optional<int> bp;
  LimeConfig lime;
  explain_cmd->add_option("--doc", doc_id, "Document id")->required();
  explain_cmd->add_option("--bp", bp, "Binding precedent (default: the indexed or predicted one)");
  explain_cmd->add_option("--samples", lime.n_samples, "Perturbation samples");
  explain_cmd->add_option("--seed", lime.seed, "Random seed");

  auto* eval = app.add_subcommand("eval", "Re-score the stored validation and test split");

  auto* serve = app.add_subcommand("serve", "Serve the read-only HTTP API");
  std::string bind = "127.0.0.1:8080";
  serve->add_option("--bind", bind, "host:port");

  CLI11_PARSE(app, argc, argv);
  spdlog::set_level(verbose ? spdlog::level::debug : spdlog::level::info);

  try {
    if (generate->parsed()) {
      const auto corpus = generate_corpus(synth);
      write_corpus(corpus, out_dir);
      std::printf("wrote %zu documents and %zu precedents to %s\n", corpus.documents.size(),
                  corpus.precedents.size(), out_dir.c_str());
      return 0;
    }
    if (store_path.empty()) throw ConfigError("no store given; pass --store or set ENGINE_STORE");
    ProjectStore store(store_path);

    if (ingest->parsed()) {
      const auto r = cmd_ingest(store, ingest_opts);
      std::printf("loaded %zu documents, removed %zu duplicates, kept %zu, rejected %zu lines\n", r.loaded,
                  r.duplicates, r.kept, r.report.issues.size());
      std::printf("corpus fingerprint %s\n", r.fingerprint.c_str());
    } else if (train->parsed()) {
      if (!grid.empty()) train_cfg.grid = parse_grid(grid);
      const auto r = cmd_train(store, train_cfg);
      std::printf("classes:");
      for (BpId c : r.classes) std::printf(" %d", c);
      std::printf("  (%zu documents each)\n", r.per_class);
      print_grid(r);
      std::printf("validation\n%s", format_report(r.validation).c_str());
      std::printf("test\n%s", format_report(r.test).c_str());
      std::printf("model fingerprint %s\n", r.model_fingerprint.c_str());
    } else if (infer->parsed()) {
      const auto r = cmd_infer(store, t_c);
      std::printf("%zu documents: %zu explicit, %zu potential records, %zu skipped\n", r.documents,
                  r.explicit_records, r.potential_records, r.skipped);
      for (const auto& [b, n] : r.potential_by_bp) std::printf("  BP %d: %zu potential\n", b, n);
    } else if (explain_cmd->parsed()) {
      std::optional<BpId> target;
      if (bp) target = static_cast<BpId>(*bp);
      const auto r = cmd_explain(store, doc_id, target, lime);
      std::printf("%s (%s)\nr2 %.6f\n", r.file.c_str(), r.cached ? "cached" : "computed", r.explanation.r2);
    } else if (eval->parsed()) {
      const auto r = cmd_eval(store);
      std::printf("validation\n%s", format_report(r.validation).c_str());
      std::printf("test\n%s", format_report(r.test).c_str());
    } else if (serve->parsed()) {
      const Api api(store);
      HttpServer server(api);
      server.run(bind);
    }
    return 0;
  } catch (const ConfigError& e) {
    spdlog::error("{}", e.what());
    return kExitUsage;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return kExitData;
  }
}
