#ifndef MONOTOMO_H
#define MONOTOMO_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of a call.
 */
typedef enum MtStatus {
  MT_STATUS_OK = 0,
  MT_STATUS_NULL_POINTER = 1,
  MT_STATUS_INVALID_ARGUMENT = 2,
  MT_STATUS_CONFIG = 3,
  MT_STATUS_MISSING_ARTIFACT = 4,
  MT_STATUS_SOLVER_FAILURE = 5,
  MT_STATUS_IO = 6,
  MT_STATUS_INTERNAL = 7,
  MT_STATUS_PANIC = 8,
} MtStatus;

/**
 * Resolved run configuration.
 */
typedef struct MtConfig MtConfig;

/**
 * Test potentials with their stored responses.
 */
typedef struct MtPotentials MtPotentials;

/**
 * Per-cell verdicts of one reconstruction.
 */
typedef struct MtReconstruction MtReconstruction;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. The pointer
 * stays valid until the next call on the same thread.
 */
const char *mt_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *mt_version(void);

/**
 * Effective conductivity of a two-phase mixture.
 *
 * # Safety
 * `result` must be valid for writes.
 */
enum MtStatus mt_bruggeman_effective(double sigma1,
                                     double sigma2,
                                     double fraction1,
                                     double *result);

/**
 * Loads a TOML run configuration. Relative paths inside it resolve against
 * the file's directory.
 *
 * # Safety
 * `file` must be a NUL-terminated string; `config` must be valid for writes.
 */
enum MtStatus mt_config_load(const char *file, struct MtConfig **config);

/**
 * Parses a configuration from TOML text; `base_dir` may be null for the
 * current directory.
 *
 * # Safety
 * `text` and a non-null `base_dir` must be NUL-terminated strings;
 * `config` must be valid for writes.
 */
enum MtStatus mt_config_parse(const char *text, const char *base_dir, struct MtConfig **config);

/**
 * # Safety
 * `config` must come from this library and not be used afterwards.
 */
void mt_config_free(struct MtConfig *config);

/**
 * Replaces the noise seed.
 *
 * # Safety
 * `config` must be a live handle.
 */
enum MtStatus mt_config_set_seed(struct MtConfig *config, uint64_t seed);

/**
 * Number of boundary nodes, i.e. the length of a boundary trace.
 *
 * # Safety
 * `config` must be a live handle; `count` must be valid for writes.
 */
enum MtStatus mt_config_boundary_nodes(const struct MtConfig *config, uintptr_t *count);

/**
 * Grid cells per side.
 *
 * # Safety
 * `config` must be a live handle; `cells` must be valid for writes.
 */
enum MtStatus mt_config_grid_cells(const struct MtConfig *config, uintptr_t *cells);

/**
 * Boundary angles of the trace entries, `len` must equal the boundary
 * node count.
 *
 * # Safety
 * `angles` must be valid for `len` writes.
 */
enum MtStatus mt_config_boundary_angles(const struct MtConfig *config,
                                        double *angles,
                                        uintptr_t len);

/**
 * Energy `⟨Λ̄(f), f⟩` of the configured anomaly for the trace
 * `amplitude·trace` (the trace is made zero-mean first).
 *
 * # Safety
 * `trace` must be valid for `len` reads; `energy` must be valid for writes.
 */
enum MtStatus mt_forward_energy(const struct MtConfig *config,
                                const double *trace,
                                uintptr_t len,
                                double amplitude,
                                double *energy);

/**
 * Builds the test potentials in memory.
 *
 * # Safety
 * `config` must be a live handle; `potentials` must be valid for writes.
 */
enum MtStatus mt_precompute(const struct MtConfig *config, struct MtPotentials **potentials);

/**
 * # Safety
 * `potentials` must be a live handle; `count` must be valid for writes.
 */
enum MtStatus mt_potentials_count(const struct MtPotentials *potentials, uintptr_t *count);

/**
 * # Safety
 * `potentials` must come from this library and not be used afterwards.
 */
void mt_potentials_free(struct MtPotentials *potentials);

/**
 * Simulates readings of the configured anomaly with the configured noise
 * and seed, then classifies every test cell.
 *
 * # Safety
 * Handles must be live; `result` must be valid for writes.
 */
enum MtStatus mt_reconstruct(const struct MtConfig *config,
                             const struct MtPotentials *potentials,
                             struct MtReconstruction **result);

/**
 * Writes potentials and their responses under `dir`, as the `precompute`
 * command does.
 *
 * # Safety
 * `dir` must be a NUL-terminated string; `count` may be null.
 */
enum MtStatus mt_precompute_to_dir(const struct MtConfig *config,
                                   const char *dir,
                                   uintptr_t *count);

/**
 * Reconstructs from potentials stored under `potentials_dir` and writes the
 * result files under `out_dir`, as the `reconstruct` command does.
 *
 * # Safety
 * Strings must be NUL-terminated; `result` must be valid for writes.
 */
enum MtStatus mt_reconstruct_from_dir(const struct MtConfig *config,
                                      const char *potentials_dir,
                                      const char *out_dir,
                                      struct MtReconstruction **result);

/**
 * Verdict raster, row-major with row 0 at the bottom: 1 kept, 0 discarded.
 *
 * # Safety
 * `mask` must be valid for `len` writes and `len` must equal cells².
 */
enum MtStatus mt_reconstruction_mask(const struct MtReconstruction *result,
                                     uint8_t *mask,
                                     uintptr_t len);

/**
 * Cells per side and number of kept cells; either pointer may be null.
 *
 * # Safety
 * `result` must be a live handle.
 */
enum MtStatus mt_reconstruction_summary(const struct MtReconstruction *result,
                                        uintptr_t *cells_per_side,
                                        uintptr_t *kept);

/**
 * Smallest margin of one cell; NaN when no reading was evaluated.
 *
 * # Safety
 * `result` must be a live handle; `margin` must be valid for writes.
 */
enum MtStatus mt_reconstruction_margin(const struct MtReconstruction *result,
                                       uintptr_t cell,
                                       double *margin);

/**
 * # Safety
 * `result` must come from this library and not be used afterwards.
 */
void mt_reconstruction_free(struct MtReconstruction *result);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MONOTOMO_H */
