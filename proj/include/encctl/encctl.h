#ifndef ENCCTL_ENCCTL_H
#define ENCCTL_ENCCTL_H

/* C interface to the encrypted-controller library.
 *
 * Every function returns an encctl_status. On failure the message of the
 * last error on the calling thread is available from encctl_last_error().
 * Strings returned through char** are owned by the caller and released with
 * encctl_string_free(). */

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(_WIN32)
#define ENCCTL_API __declspec(dllexport)
#else
#define ENCCTL_API __attribute__((visibility("default")))
#endif

typedef enum encctl_status {
  ENCCTL_OK = 0,
  ENCCTL_INVALID_ARGUMENT = 1,
  ENCCTL_NO_ROOT = 2,
  ENCCTL_MODULUS_MISMATCH = 3,
  ENCCTL_LENGTH_MISMATCH = 4,
  ENCCTL_SCALE_MISMATCH = 5,
  ENCCTL_TOO_MANY_TERMS = 6,
  ENCCTL_INVALID_PARAMS = 7,
  ENCCTL_NOT_OBSERVABLE = 8,
  ENCCTL_NOT_CONTROLLABLE = 9,
  ENCCTL_RANGE_EXCEEDED = 10,
  ENCCTL_DIM_MISMATCH = 11,
  ENCCTL_UNSTABLE = 12,
  ENCCTL_S_INVALID = 13,
  ENCCTL_CONFIG_INVALID = 14,
  ENCCTL_IO = 15,
  ENCCTL_INTERNAL = 16
} encctl_status;

typedef struct encctl_config encctl_config;
typedef struct encctl_trace encctl_trace;

ENCCTL_API const char* encctl_version(void);
ENCCTL_API const char* encctl_status_name(encctl_status status);
ENCCTL_API const char* encctl_last_error(void);
ENCCTL_API void encctl_string_free(char* s);

/* Golden-vector self test. *passed is set to 1 on success; report is JSON. */
ENCCTL_API encctl_status encctl_selftest(int* passed, char** report_json);

ENCCTL_API encctl_status encctl_config_load(const char* path, encctl_config** out);
ENCCTL_API encctl_status encctl_config_parse(const char* json_text, encctl_config** out);
ENCCTL_API void encctl_config_free(encctl_config* cfg);
/* kind: "nominal", "oracle", "general" or "packed". */
ENCCTL_API encctl_status encctl_config_set_kind(encctl_config* cfg, const char* kind);
/* mode: "strict" or "wraparound-demo". */
ENCCTL_API encctl_status encctl_config_set_mode(encctl_config* cfg, const char* mode);
ENCCTL_API encctl_status encctl_config_set_horizon(encctl_config* cfg, size_t T);
ENCCTL_API encctl_status encctl_config_set_seed(encctl_config* cfg, uint64_t seed);

/* Error budget and minimum moduli. *feasible is 0 or 1. */
ENCCTL_API encctl_status encctl_design(const encctl_config* cfg, int* feasible, char** report_json);
/* Per-step cost counters, measured and analytic. */
ENCCTL_API encctl_status encctl_analyze(const encctl_config* cfg, char** report_json);

ENCCTL_API encctl_status encctl_simulate(const encctl_config* cfg, encctl_trace** out);
ENCCTL_API void encctl_trace_free(encctl_trace* trace);
ENCCTL_API size_t encctl_trace_length(const encctl_trace* trace);
/* include_wall_time = 0 writes zeros in the wall_ns column. */
ENCCTL_API encctl_status encctl_trace_write_csv(const encctl_trace* trace, const char* path,
                                                int include_wall_time);
ENCCTL_API encctl_status encctl_trace_summary(const encctl_trace* trace, char** summary_json);

#ifdef __cplusplus
}
#endif

#endif /* ENCCTL_ENCCTL_H */
