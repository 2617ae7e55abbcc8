/*
 * Copyright 2026 The dfloc Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

/*
 * C interface of the dfloc shared library.
 *
 * Every function returns a dfloc_status. On failure a description is
 * available from dfloc_last_error() on the same thread until the next call.
 * Handles are opaque and must be released with their _free function.
 * Parameter overrides are "key=value" strings (beta, gamma, delta, q,
 * alpha_trim, anova_significance, anova_window, hist_bin_width,
 * hist_smooth_sigma, hist_floor, w, r, cluster_scale, hmm_order, contrast).
 */

#ifndef DFLOC_DFLOC_H
#define DFLOC_DFLOC_H

#include <stddef.h>
#include <stdint.h>

#if defined(DFLOC_BUILDING_LIBRARY)
#define DFLOC_API __attribute__((visibility("default")))
#else
#define DFLOC_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum dfloc_status {
  DFLOC_OK = 0,
  DFLOC_ERR_IO = 1,
  DFLOC_ERR_FORMAT = 2,
  DFLOC_ERR_VERSION = 3,
  DFLOC_ERR_CORRUPT = 4,
  DFLOC_ERR_INVALID_ARGUMENT = 5,
  DFLOC_ERR_OUT_OF_RANGE = 6,
  DFLOC_ERR_INTERNAL = 7
} dfloc_status;

typedef struct dfloc_fingerprint dfloc_fingerprint;
typedef struct dfloc_tracker dfloc_tracker;

typedef struct dfloc_point {
  double x;
  double y;
} dfloc_point;

DFLOC_API const char* dfloc_version(void);
DFLOC_API const char* dfloc_last_error(void);
DFLOC_API const char* dfloc_status_name(dfloc_status status);

/* Scenario written by dfloc_simulate. */
typedef struct dfloc_simulate_options {
  unsigned entities;       /* people in the test trace */
  int static_entities;     /* nonzero: standing still, otherwise walking */
  size_t frames;           /* test trace length in seconds, 0 selects 300 */
  size_t training_frames;  /* length of the prior-training walk, 0 selects 600 */
  int override_seed;       /* nonzero: use `seed` instead of the config's */
  uint64_t seed;
} dfloc_simulate_options;

DFLOC_API void dfloc_simulate_defaults(dfloc_simulate_options* options);

/* Writes testbed.cfg, session_NN.trace (one per location), train_truth.txt,
 * test.trace and test_truth.txt into out_dir, which is created if needed.
 * config_path may be NULL for the built-in testbed. */
DFLOC_API dfloc_status dfloc_simulate(const char* config_path, const char* out_dir,
                                      const dfloc_simulate_options* options);

/* Reads testbed.cfg, every session_NN.trace and, when present,
 * train_truth.txt from sessions_dir and writes the fingerprint file. */
DFLOC_API dfloc_status dfloc_calibrate(const char* sessions_dir, const char* out_path,
                                       const char* const* overrides, size_t n_overrides);

DFLOC_API dfloc_status dfloc_fingerprint_load(const char* path, dfloc_fingerprint** out);
DFLOC_API void dfloc_fingerprint_free(dfloc_fingerprint* fp);
DFLOC_API size_t dfloc_fingerprint_locations(const dfloc_fingerprint* fp);
DFLOC_API size_t dfloc_fingerprint_streams(const dfloc_fingerprint* fp);

/* The tracker keeps its own reference to the fingerprint. */
DFLOC_API dfloc_status dfloc_tracker_create(const dfloc_fingerprint* fp,
                                            const char* const* overrides, size_t n_overrides,
                                            dfloc_tracker** out);
DFLOC_API void dfloc_tracker_free(dfloc_tracker* tracker);

/* Processes one raw frame. *m_hat receives the entity count; at most
 * `capacity` positions are copied to `entities`. */
DFLOC_API dfloc_status dfloc_tracker_push(dfloc_tracker* tracker, double timestamp,
                                          const char* const* stream_ids, const double* dbm,
                                          size_t readings, size_t* m_hat, dfloc_point* entities,
                                          size_t capacity);

/* Copies the latest activation map (one byte per location). */
DFLOC_API dfloc_status dfloc_tracker_last_map(const dfloc_tracker* tracker, uint8_t* out,
                                              size_t n);

/* Tracks a whole trace file. maps_out and graph_dump may be NULL. */
DFLOC_API dfloc_status dfloc_track_file(const char* fp_path, const char* trace_path,
                                        const char* estimates_out, const char* maps_out,
                                        const char* graph_dump, const char* const* overrides,
                                        size_t n_overrides);

/* mode is "zones" or "locations". median_out may be NULL. */
DFLOC_API dfloc_status dfloc_evaluate(const char* estimates_path, const char* truth_path,
                                      const char* testbed_path, const char* mode,
                                      const char* report_path, double* median_out);

/* Heatmap of the last w maps at or before time `at` (all maps up to the
 * last one when has_at is zero). */
DFLOC_API dfloc_status dfloc_heatmap(const char* maps_path, const char* testbed_path, int has_at,
                                     double at, size_t w, const char* out_csv);

/* Random min-cut versus brute-force comparisons. Outputs may be NULL. */
DFLOC_API dfloc_status dfloc_verify_oracle(size_t instances, uint64_t seed, size_t max_n,
                                           size_t* mismatches, double* max_abs_diff,
                                           double* seconds);

#ifdef __cplusplus
}
#endif

#endif /* DFLOC_DFLOC_H */
