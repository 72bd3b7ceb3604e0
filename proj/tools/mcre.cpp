#include <cstdlib>
#include <iostream>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "mcre/cli.hpp"

namespace {

// MCRE_LOG takes a spdlog level name (trace, debug, info, warn, error, off).
void configure_logging() {
  auto logger = spdlog::stderr_color_mt("mcre");
  spdlog::set_default_logger(logger);
  spdlog::set_pattern("[%l] %v");
  spdlog::set_level(spdlog::level::warn);
  if (const char* level = std::getenv("MCRE_LOG")) {
    const auto parsed = spdlog::level::from_str(level);
    if (parsed == spdlog::level::off && std::string(level) != "off") {
      spdlog::warn("MCRE_LOG='{}' is not a log level; using warn", level);
    } else {
      spdlog::set_level(parsed);
    }
  }
}

}  // namespace

int main(int argc, char** argv) {
  configure_logging();

  CLI::App app{"Simulation and verification lab for Markov chains in random environments"};
  app.require_subcommand(1);
  mcre::cli::RunOptions options;
  std::uint64_t seed = 0;
  std::string out;

  for (const auto& name : mcre::cli::kSubcommands) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", options.config_path, "Experiment config file")->required();
    sub->add_option("--seed", seed, "Master seed (overrides the config)");
    sub->add_option("--workers", options.workers, "Worker threads (default: available parallelism)")
        ->check(CLI::NonNegativeNumber);
    sub->add_option("--out", out, "Output directory (overrides output.directory)");
    sub->callback([&options, &seed, &out, sub, name] {
      options.subcommand = name;
      if (sub->count("--seed") > 0) options.seed = seed;
      if (sub->count("--out") > 0) options.out_dir = out;
    });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : mcre::cli::kExitUsage;
  }
  return mcre::cli::run(options, std::cerr);
}
