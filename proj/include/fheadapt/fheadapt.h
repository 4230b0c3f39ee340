/* Copyright 2026 The fheadapt Authors
 * SPDX-License-Identifier: Apache-2.0 */

/* C interface. Every call returns an fa_status; on failure fa_last_error()
 * describes the problem (thread-local, valid until the next call). Strings
 * returned through char** must be released with fa_string_free. */

#ifndef FHEADAPT_FHEADAPT_H_
#define FHEADAPT_FHEADAPT_H_

#include <stddef.h>
#include <stdint.h>

#if defined(FHEADAPT_BUILDING_LIBRARY)
#define FA_API __attribute__((visibility("default")))
#else
#define FA_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum fa_status {
  FA_OK = 0,
  FA_ERR_PARSE = 1,          /* malformed image, config or file */
  FA_ERR_DEPTH = 2,          /* depth budget exhausted; see fa_error_stage */
  FA_ERR_DEFERRAL = 3,       /* computation cannot be deferred */
  FA_ERR_INVALID = 4,        /* bad argument or config value */
  FA_ERR_IO = 5,
  FA_ERR_INTERNAL = 6
} fa_status;

typedef struct fa_config fa_config;
typedef struct fa_image fa_image;
typedef struct fa_result fa_result;

FA_API const char* fa_last_error(void);
/* Stage named by the last FA_ERR_DEPTH, or "". */
FA_API const char* fa_error_stage(void);
FA_API void fa_string_free(char* s);

FA_API fa_status fa_config_new(fa_config** out);
FA_API fa_status fa_config_load(const char* path, fa_config** out);
/* Same keys as the config file, e.g. ("mode", "deferred"). */
FA_API fa_status fa_config_set(fa_config* cfg, const char* key, const char* value);
FA_API fa_status fa_config_format(const fa_config* cfg, char** out);
FA_API void fa_config_free(fa_config* cfg);

FA_API fa_status fa_image_load(const char* path, fa_image** out);
FA_API int fa_image_width(const fa_image* img);
FA_API int fa_image_height(const fa_image* img);
FA_API void fa_image_free(fa_image* img);

/* Runs the pipeline in the configured mode. Encrypted modes are also
 * diffed against the plaintext oracle. */
FA_API fa_status fa_run(const fa_image* img, const fa_config* cfg, fa_result** out);
FA_API size_t fa_result_keypoints(const fa_result* r);
FA_API size_t fa_result_rounds(const fa_result* r);
FA_API uint64_t fa_result_server_decrypts(const fa_result* r);
/* keypoints.txt, report.txt, report.kv and trace.txt under dir. */
FA_API fa_status fa_result_write(const fa_result* r, const char* dir);
FA_API fa_status fa_result_report(const fa_result* r, char** out);
FA_API void fa_result_free(fa_result* r);

/* Diff summary of two keypoint files, reference first. */
FA_API fa_status fa_diff_files(const char* reference, const char* candidate, char** out);
/* Human-readable rendering of a report.kv file. */
FA_API fa_status fa_report_format(const char* kv_path, char** out);

#ifdef __cplusplus
}
#endif

#endif /* FHEADAPT_FHEADAPT_H_ */
