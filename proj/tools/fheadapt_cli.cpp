// Copyright 2026 The fheadapt Authors
// SPDX-License-Identifier: Apache-2.0

// fheadapt run|diff|report. Exit codes: 0 ok, 1 malformed input or config,
// 2 depth budget exhausted, 3 computation cannot be deferred, 4 other errors.

#include <cstdio>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "fheadapt/fheadapt.h"

namespace {

int exit_code(fa_status s) {
  switch (s) {
    case FA_OK:
      return 0;
    case FA_ERR_PARSE:
    case FA_ERR_INVALID:
    case FA_ERR_IO:
      return 1;
    case FA_ERR_DEPTH:
      return 2;
    case FA_ERR_DEFERRAL:
      return 3;
    default:
      return 4;
  }
}

int fail(fa_status s) {
  if (s == FA_ERR_DEPTH) {
    std::fprintf(stderr, "error: depth budget exhausted in stage %s: %s\n", fa_error_stage(),
                 fa_last_error());
  } else {
    std::fprintf(stderr, "error: %s\n", fa_last_error());
  }
  return exit_code(s);
}

int print_owned(fa_status s, char* text) {
  if (s != FA_OK) return fail(s);
  std::fputs(text, stdout);
  fa_string_free(text);
  return 0;
}

struct RunArgs {
  std::string image;
  std::string config;
  std::string mode;
  std::string out = "out";
  std::optional<std::uint64_t> seed;
};

int run(const RunArgs& a) {
  fa_config* cfg = nullptr;
  fa_status s = a.config.empty() ? fa_config_new(&cfg) : fa_config_load(a.config.c_str(), &cfg);
  if (s != FA_OK) return fail(s);
  if (!a.mode.empty()) s = fa_config_set(cfg, "mode", a.mode.c_str());
  if (s == FA_OK && a.seed) s = fa_config_set(cfg, "seed", std::to_string(*a.seed).c_str());
  fa_image* img = nullptr;
  if (s == FA_OK) s = fa_image_load(a.image.c_str(), &img);
  fa_result* result = nullptr;
  if (s == FA_OK) s = fa_run(img, cfg, &result);
  if (s == FA_OK) s = fa_result_write(result, a.out.c_str());
  char* text = nullptr;
  if (s == FA_OK) s = fa_result_report(result, &text);
  const int code = s == FA_OK ? print_owned(s, text) : fail(s);
  fa_result_free(result);
  fa_image_free(img);
  fa_config_free(cfg);
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Keypoint extraction on simulated encrypted images"};
  app.require_subcommand(1);

  RunArgs run_args;
  CLI::App* run_cmd = app.add_subcommand("run", "Run the pipeline on a PGM image");
  run_cmd->add_option("--image", run_args.image, "PGM image (P2 or P5)")->required();
  run_cmd->add_option("--config", run_args.config, "key = value config file");
  run_cmd->add_option("--mode", run_args.mode, "plaintext, interactive or deferred");
  run_cmd->add_option("--out", run_args.out, "output directory")->capture_default_str();
  run_cmd->add_option("--seed", run_args.seed, "seed for noise and decoys");

  std::string reference, candidate;
  CLI::App* diff_cmd = app.add_subcommand("diff", "Compare two keypoint files");
  diff_cmd->add_option("reference", reference)->required();
  diff_cmd->add_option("candidate", candidate)->required();

  std::string report_path;
  CLI::App* report_cmd = app.add_subcommand("report", "Pretty-print a report.kv file");
  report_cmd->add_option("report", report_path)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  if (*run_cmd) return run(run_args);
  char* text = nullptr;
  if (*diff_cmd) {
    const fa_status s = fa_diff_files(reference.c_str(), candidate.c_str(), &text);
    return print_owned(s, text);
  }
  const fa_status s = fa_report_format(report_path.c_str(), &text);
  return print_owned(s, text);
}
