// cosnet: generate -> vocab -> index -> train -> caption -> evaluate.

#include <cstdio>
#include <exception>
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "cosnet/app/checkpoint.hpp"
#include "cosnet/app/config.hpp"
#include "cosnet/app/grad_check.hpp"
#include "cosnet/app/pipeline.hpp"
#include "cosnet/numerics/errors.hpp"

namespace {

enum ExitCode : int { kOk = 0, kFailure = 1, kConfig = 2, kData = 3, kNumerical = 4 };

struct CommonOptions {
  std::string config_path;
  std::map<std::string, std::string> overrides;
};

void add_common(CLI::App* cmd, CommonOptions& opts) {
  cmd->add_option("-c,--config", opts.config_path, "INI configuration file");
  for (const auto& field : cosnet::app::config_fields()) {
    const std::string name = field.name;
    cmd->add_option_function<std::string>(
        "--" + name, [&opts, name](const std::string& v) { opts.overrides[name] = v; }, field.help);
  }
}

cosnet::app::RunConfig resolve(const CommonOptions& opts) {
  cosnet::app::RunConfig config;
  if (!opts.config_path.empty()) config = cosnet::app::load_config(opts.config_path);
  for (const auto& [k, v] : opts.overrides) cosnet::app::set_field(config, k, v);
  return config;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Comprehending-and-ordering-semantics captioner (desk scale)"};
  app.require_subcommand(1);

  CommonOptions opts;
  std::string section = "test";
  std::string captions_path;
  std::uint64_t check_seed = 1;
  double check_tolerance = 1e-4;

  auto* gen = app.add_subcommand("gen-corpus", "generate the synthetic corpus, lexicon and split");
  auto* vocab = app.add_subcommand("build-vocab", "build word and semantic vocabularies from the train split");
  auto* index = app.add_subcommand("build-index", "embed training sentences into the retrieval pool");
  auto* train = app.add_subcommand("train", "train and checkpoint the model");
  auto* caption = app.add_subcommand("caption", "beam-search captions for a split section");
  auto* evaluate = app.add_subcommand("evaluate", "score captions (BLEU, ROUGE-L, CIDEr, CHAIR)");
  auto* grad = app.add_subcommand("grad-check", "finite-difference check of a tiny model");
  for (auto* cmd : {gen, vocab, index, train, caption, evaluate}) add_common(cmd, opts);
  for (auto* cmd : {caption, evaluate}) {
    cmd->add_option("--section", section, "split section")->check(CLI::IsMember({"train", "val", "test"}));
  }
  evaluate->add_option("--captions", captions_path, "captions file (default: the run's captions_<section>.tsv)");
  grad->add_option("--seed", check_seed, "initialisation seed");
  grad->add_option("--tolerance", check_tolerance, "maximum relative error");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kConfig;
  }

  try {
    if (grad->parsed()) {
      const auto report = cosnet::app::run_grad_check(check_seed, check_tolerance, &std::cout);
      std::printf("max relative error %.3e over %zu parameters in %.1fs: %s\n", report.max_rel_error,
                  report.parameters.size(), report.seconds, report.passed() ? "PASS" : "FAIL");
      return report.passed() ? kOk : kNumerical;
    }
    const auto config = resolve(opts);
    if (gen->parsed()) {
      cosnet::app::run_gen_corpus(config, std::cout);
    } else if (vocab->parsed()) {
      cosnet::app::run_build_vocab(config, std::cout);
    } else if (index->parsed()) {
      cosnet::app::run_build_index(config, std::cout);
    } else if (train->parsed()) {
      const auto s = cosnet::app::run_train(config, std::cout);
      std::printf("trained %lld steps in %.1fs\n", static_cast<long long>(s.steps), s.seconds);
    } else if (caption->parsed()) {
      cosnet::app::run_caption(config, section, std::cout);
    } else if (evaluate->parsed()) {
      const auto path = captions_path.empty() ? cosnet::app::run_paths(config).captions(section)
                                              : std::filesystem::path(captions_path);
      cosnet::app::run_evaluate(config, section, path, std::cout);
    }
    return kOk;
  } catch (const cosnet::ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return kConfig;
  } catch (const cosnet::DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kData;
  } catch (const cosnet::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kFailure;
  }
}
