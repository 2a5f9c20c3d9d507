// csdial: command-line driver for the dialogue-corpus pipeline.
//
// Exit codes: 0 success, 1 hard error, 2 usage error, 3 missing prerequisite.

#include <CLI11.hpp>

#include <csignal>
#include <iostream>

#include "csdial/pipeline.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitUsage = 2;
constexpr int kExitDependency = 3;

csdial::AnnotationServer* g_server = nullptr;

void on_signal(int) {
  if (g_server) g_server->stop();
}

struct Flags {
  std::string config_file;
  csdial::ConfigLayer layer;
};

// Registers a flag that writes into the override layer only when given.
void value_flag(CLI::App& app, Flags& flags, const std::string& name, const std::string& key,
                const std::string& help) {
  app.add_option_function<std::string>(
      name, [&flags, key](const std::string& v) { flags.layer[key] = v; }, help);
}

void print_report(const csdial::StageReport& report) {
  std::cout << report.output;
  for (const auto& [name, n] : report.drops)
    if (n) std::cerr << "dropped " << n << " (" << name << ")\n";
  for (const auto& w : report.warnings) std::cerr << "warning: " << w << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Synthesize commonsense dialogue corpora, collect feedback and evaluate response improvement"};
  app.require_subcommand(1);
  app.fallthrough();

  Flags flags;
  app.add_option("--config", flags.config_file, "JSON config file (lowest precedence)");
  value_flag(app, flags, "--seed", "seed", "Master seed");
  value_flag(app, flags, "--backend", "backend", "Generation backend: mock or remote");
  value_flag(app, flags, "--split", "split", "Restrict the stage to one split (train, val, test)");
  value_flag(app, flags, "--work-dir", "work_dir", "Corpus working directory");
  value_flag(app, flags, "--graph", "graph", "Knowledge-graph TSV for ingest");
  value_flag(app, flags, "--relations", "relations", "Extra relation registry entries (tag<TAB>surface form)");
  value_flag(app, flags, "--workers", "workers", "Worker threads (0 = all cores)");
  value_flag(app, flags, "--serve-addr", "serve.addr", "host:port for the annotation server");
  app.add_flag_function(
      "--rephrase,!--no-rephrase", [&flags](std::int64_t n) { flags.layer["rephrase"] = n > 0 ? "true" : "false"; },
      "Paraphrase invalid responses at inference time");

  std::string count;
  std::string mode;
  std::string task;
  bool baseline = false;

  app.add_subcommand("ingest", "Load and validate the knowledge graph");
  auto* templates = app.add_subcommand("templates", "Sample dialogue templates from the graph");
  templates->add_option("--count", count, "Templates per split (with --split) or for every split");
  app.add_subcommand("synthesize", "Naturalize templates into dialogues");
  app.add_subcommand("inject", "Replace each valid response with its semantic opposite");
  app.add_subcommand("serve", "Run the annotation HTTP service");
  auto* export_train = app.add_subcommand("export-train", "Write fine-tune training pairs");
  export_train->add_option("--mode", mode, "direct, feedback, improve_nlhf or improve_multistep")
      ->required()
      ->check(CLI::IsMember({"direct", "feedback", "improve_nlhf", "improve_multistep"}));
  auto* improve = app.add_subcommand("improve", "Run response improvement over a split");
  improve->add_option("--mode", mode, "direct, multistep or nlhf")
      ->required()
      ->check(CLI::IsMember({"direct", "multistep", "nlhf"}));
  improve->add_flag("--baseline", baseline, "Use the untuned baseline model refs");
  auto* evaluate = app.add_subcommand("evaluate", "Score predictions against references");
  evaluate->add_option("--task", task, "feedback, improvement or preference")
      ->required()
      ->check(CLI::IsMember({"feedback", "improvement", "preference"}));
  app.add_subcommand("stats", "Corpus statistics per split");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  const auto* sub = app.get_subcommands().front();
  const std::string name = sub->get_name();
  try {
    if (!count.empty()) {
      if (auto it = flags.layer.find("split"); it != flags.layer.end()) {
        flags.layer["counts." + it->second] = count;
      } else {
        for (const char* s : {"train", "val", "test"}) flags.layer[std::string("counts.") + s] = count;
      }
    }
    std::vector<csdial::ConfigLayer> layers;
    if (!flags.config_file.empty()) layers.push_back(csdial::read_config_file(flags.config_file));
    layers.push_back(flags.layer);
    layers.push_back(csdial::env_layer(csdial::process_environment()));
    csdial::Pipeline pipeline(csdial::resolve_config(layers));

    if (name == "ingest") {
      print_report(pipeline.ingest());
    } else if (name == "templates") {
      print_report(pipeline.templates());
    } else if (name == "synthesize") {
      print_report(pipeline.synthesize());
    } else if (name == "inject") {
      print_report(pipeline.inject());
    } else if (name == "export-train") {
      print_report(pipeline.export_train(csdial::parse_finetune_mode(mode)));
    } else if (name == "improve") {
      print_report(pipeline.improve(csdial::parse_mode(mode), baseline));
    } else if (name == "evaluate") {
      print_report(pipeline.evaluate(task));
    } else if (name == "stats") {
      print_report(pipeline.stats());
    } else if (name == "serve") {
      std::signal(SIGINT, on_signal);
      std::signal(SIGTERM, on_signal);
      pipeline.serve([](int port, csdial::AnnotationServer& server) {
        g_server = &server;
        std::cout << "annotation service listening on port " << port << std::endl;
      });
      g_server = nullptr;
    }
    return kExitOk;
  } catch (const csdial::Error& e) {
    std::cerr << "error (" << csdial::to_string(e.kind()) << "): " << e.what() << "\n";
    switch (e.kind()) {
      case csdial::ErrorKind::kUsage: return kExitUsage;
      case csdial::ErrorKind::kDependency: return kExitDependency;
      default: return kExitError;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  }
}
