// Copyright 2026 The fheadapt Authors
// SPDX-License-Identifier: Apache-2.0

#include "fheadapt/fheadapt.h"

#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <new>
#include <string>

#include "fheadapt/config.hpp"
#include "fheadapt/errors.hpp"
#include "fheadapt/image.hpp"
#include "fheadapt/keypoints.hpp"
#include "fheadapt/oracle.hpp"
#include "fheadapt/report.hpp"
#include "fheadapt/sift.hpp"

struct fa_config {
  fheadapt::RunConfig cfg;
};

struct fa_image {
  fheadapt::Image img;
};

struct fa_result {
  fheadapt::sift::PipelineResult result;
  fheadapt::report::RunReport report;
};

namespace {

thread_local std::string g_error;
thread_local std::string g_stage;

template <class F>
fa_status guarded(F&& f) {
  g_error.clear();
  g_stage.clear();
  try {
    f();
    return FA_OK;
  } catch (const fheadapt::ParseError& e) {
    g_error = e.what();
    return FA_ERR_PARSE;
  } catch (const fheadapt::DepthExhausted& e) {
    g_error = e.what();
    g_stage = e.stage();
    return FA_ERR_DEPTH;
  } catch (const fheadapt::DeferralUnsupported& e) {
    g_error = e.what();
    return FA_ERR_DEFERRAL;
  } catch (const fheadapt::InvalidArgument& e) {
    g_error = e.what();
    return FA_ERR_INVALID;
  } catch (const fheadapt::Error& e) {
    g_error = e.what();
    return FA_ERR_IO;
  } catch (const std::bad_alloc&) {
    g_error = "out of memory";
    return FA_ERR_INTERNAL;
  } catch (const std::exception& e) {
    g_error = e.what();
    return FA_ERR_INTERNAL;
  }
}

char* dup(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out == nullptr) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

void require(const void* p, const char* what) {
  if (p == nullptr) throw fheadapt::InvalidArgument(std::string(what) + " is null");
}

std::string text_file(const char* path) {
  const auto bytes = fheadapt::read_file(path);
  return std::string(bytes.begin(), bytes.end());
}

}  // namespace

extern "C" {

const char* fa_last_error(void) { return g_error.c_str(); }
const char* fa_error_stage(void) { return g_stage.c_str(); }
void fa_string_free(char* s) { std::free(s); }

fa_status fa_config_new(fa_config** out) {
  return guarded([&] {
    require(out, "out");
    *out = new fa_config;
  });
}

fa_status fa_config_load(const char* path, fa_config** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    auto c = std::make_unique<fa_config>();
    c->cfg = fheadapt::load_config(path);
    *out = c.release();
  });
}

fa_status fa_config_set(fa_config* cfg, const char* key, const char* value) {
  return guarded([&] {
    require(cfg, "cfg");
    require(key, "key");
    require(value, "value");
    cfg->cfg = fheadapt::parse_config(std::string(key) + " = " + value, cfg->cfg);
  });
}

fa_status fa_config_format(const fa_config* cfg, char** out) {
  return guarded([&] {
    require(cfg, "cfg");
    require(out, "out");
    *out = dup(fheadapt::format_config(cfg->cfg));
  });
}

void fa_config_free(fa_config* cfg) { delete cfg; }

fa_status fa_image_load(const char* path, fa_image** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    auto img = std::make_unique<fa_image>();
    img->img = fheadapt::read_pgm(path);
    *out = img.release();
  });
}

int fa_image_width(const fa_image* img) { return img ? img->img.width : 0; }
int fa_image_height(const fa_image* img) { return img ? img->img.height : 0; }
void fa_image_free(fa_image* img) { delete img; }

fa_status fa_run(const fa_image* img, const fa_config* cfg, fa_result** out) {
  return guarded([&] {
    require(img, "img");
    require(cfg, "cfg");
    require(out, "out");
    auto r = std::make_unique<fa_result>();
    r->result = fheadapt::sift::run_pipeline(img->img, cfg->cfg);
    r->report = fheadapt::report::make_report(r->result, cfg->cfg, img->img.width, img->img.height);
    if (cfg->cfg.mode != fheadapt::Mode::Plaintext) {
      const fheadapt::KeypointSet reference = fheadapt::oracle::run(img->img, cfg->cfg.pipeline);
      r->report.diff = fheadapt::diff_keypoints(reference, r->result.keypoints);
    }
    *out = r.release();
  });
}

size_t fa_result_keypoints(const fa_result* r) {
  return r ? r->result.keypoints.keypoints.size() : 0;
}
size_t fa_result_rounds(const fa_result* r) { return r ? r->result.trace.rounds.size() : 0; }
uint64_t fa_result_server_decrypts(const fa_result* r) { return r ? r->result.server_decrypts : 0; }

fa_status fa_result_write(const fa_result* r, const char* dir) {
  return guarded([&] {
    require(r, "result");
    require(dir, "dir");
    const std::filesystem::path base(dir);
    std::error_code ec;
    std::filesystem::create_directories(base, ec);
    if (ec) throw fheadapt::Error("cannot create " + base.string() + ": " + ec.message());
    fheadapt::write_file((base / "keypoints.txt").string(),
                         fheadapt::format_keypoints(r->result.keypoints));
    fheadapt::write_file((base / "report.txt").string(), fheadapt::report::format_text(r->report));
    fheadapt::write_file((base / "report.kv").string(), fheadapt::report::format_kv(r->report));
    fheadapt::write_file((base / "trace.txt").string(),
                         fheadapt::report::format_trace(r->result.trace));
  });
}

fa_status fa_result_report(const fa_result* r, char** out) {
  return guarded([&] {
    require(r, "result");
    require(out, "out");
    *out = dup(fheadapt::report::format_text(r->report));
  });
}

void fa_result_free(fa_result* r) { delete r; }

fa_status fa_diff_files(const char* reference, const char* candidate, char** out) {
  return guarded([&] {
    require(reference, "reference");
    require(candidate, "candidate");
    require(out, "out");
    const auto a = fheadapt::parse_keypoints(text_file(reference));
    const auto b = fheadapt::parse_keypoints(text_file(candidate));
    *out = dup(fheadapt::format_diff(fheadapt::diff_keypoints(a, b)));
  });
}

fa_status fa_report_format(const char* kv_path, char** out) {
  return guarded([&] {
    require(kv_path, "path");
    require(out, "out");
    *out = dup(fheadapt::report::format_text(fheadapt::report::parse_kv(text_file(kv_path))));
  });
}

}  // extern "C"
