#ifndef NHDYN_H
#define NHDYN_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result of every fallible call.
typedef enum NhdynStatus {
  NHDYN_STATUS_OK = 0,
  NHDYN_STATUS_NULL_POINTER = 1,
  NHDYN_STATUS_INVALID_ARGUMENT = 2,
  NHDYN_STATUS_FILE_NOT_FOUND = 3,
  NHDYN_STATUS_PARSE = 4,
  NHDYN_STATUS_VALIDATION = 5,
  NHDYN_STATUS_SINGULAR_DECOMPOSITION = 6,
  NHDYN_STATUS_SINGULAR_FLOW = 7,
  NHDYN_STATUS_NO_STATIONARY_POINT = 8,
  NHDYN_STATUS_STIFFNESS = 9,
  NHDYN_STATUS_TRUNCATION_CONTAMINATED = 10,
  NHDYN_STATUS_UNDEFINED = 11,
  NHDYN_STATUS_IO = 12,
  NHDYN_STATUS_PANIC = 13,
} NhdynStatus;

typedef enum NhdynCommand {
  NHDYN_COMMAND_DECOMPOSE = 0,
  NHDYN_COMMAND_FLOW = 1,
  NHDYN_COMMAND_EVOLVE = 2,
  NHDYN_COMMAND_VERIFY = 3,
  NHDYN_COMMAND_SPECTRUM = 4,
} NhdynCommand;

typedef enum NhdynAlgebra {
  NHDYN_ALGEBRA_SU2 = 0,
  NHDYN_ALGEBRA_SU11 = 1,
} NhdynAlgebra;

// Validated run configuration.
typedef struct NhdynConfig NhdynConfig;

// Result of a run.
typedef struct NhdynReport NhdynReport;

// Matrix representation of the algebra.
typedef struct NhdynRepresentation NhdynRepresentation;

// Ordered factors `exp(θ+ K+) exp(ln θ0 K0) exp(θ- K-)`.
typedef struct NhdynGauss {
  double theta_plus_re;
  double theta_plus_im;
  double theta_zero_re;
  double theta_zero_im;
  double theta_minus_re;
  double theta_minus_im;
} NhdynGauss;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version as a static NUL-terminated string.
const char *nhdyn_version(void);

// Copy of the calling thread's last error message, or NULL if none.
// Release with `nhdyn_string_free`.
char *nhdyn_last_error_message(void);

// Releases a string returned by this library. NULL is ignored.
void nhdyn_string_free(char *s);

// Loads and validates a JSON run configuration from `path`.
enum NhdynStatus nhdyn_config_load(const char *path, struct NhdynConfig **out);

// Parses a JSON run configuration from memory. Relative table paths are
// resolved against `base_dir` (NULL means the working directory).
enum NhdynStatus nhdyn_config_parse(const char *json,
                                    const char *base_dir,
                                    struct NhdynConfig **out);

// Overrides the flow tolerances; a non-positive value keeps the current one.
enum NhdynStatus nhdyn_config_set_tolerances(struct NhdynConfig *cfg, double rtol, double atol);

void nhdyn_config_free(struct NhdynConfig *cfg);

// Runs `command`, writing its files into `out_dir`. A run that completes but
// fails certification still returns `Ok`; query `nhdyn_report_certified`.
enum NhdynStatus nhdyn_run(const struct NhdynConfig *cfg,
                           enum NhdynCommand command,
                           const char *out_dir,
                           struct NhdynReport **out);

// 1 if the run passed certification, 0 if not or if `report` is NULL.
int32_t nhdyn_report_certified(const struct NhdynReport *report);

// Largest closed-form vs oracle error; `Undefined` unless the run compared
// against the oracle.
enum NhdynStatus nhdyn_report_max_oracle_error(const struct NhdynReport *report, double *out);

// The report as JSON (same bytes as `report.json`). Release with
// `nhdyn_string_free`.
char *nhdyn_report_json(const struct NhdynReport *report);

void nhdyn_report_free(struct NhdynReport *report);

// Spin-`j` representation of su(2) (`twice_j` = 2j ≥ 1).
enum NhdynStatus nhdyn_representation_su2(uint32_t twice_j, struct NhdynRepresentation **out);

// Truncated boson representation of su(1,1) with Fock cutoff `cutoff`.
enum NhdynStatus nhdyn_representation_su11(size_t cutoff, struct NhdynRepresentation **out);

// Matrix dimension, or 0 for NULL.
size_t nhdyn_representation_dim(const struct NhdynRepresentation *rep);

// Copies K0, K+ or K- (`which` = 0, 1, 2) in column-major order into
// `re` / `im`, each of length `dim * dim`.
enum NhdynStatus nhdyn_representation_matrix(const struct NhdynRepresentation *rep,
                                             uint32_t which,
                                             double *re,
                                             double *im,
                                             size_t len);

void nhdyn_representation_free(struct NhdynRepresentation *rep);

// Ordered factors of `exp(2ε K0 + 2μ K- + 2μ* K+)`.
enum NhdynStatus nhdyn_gauss_decompose(enum NhdynAlgebra algebra,
                                       double eps,
                                       double mu_re,
                                       double mu_im,
                                       struct NhdynGauss *out);

// Eigenvalues of the constant su(1,1) Hamiltonian in a Fock cutoff, sorted
// by real part. Buffers have length `cutoff`; `trusted[n]` is 1 for the
// lowest `cutoff / 2` levels.
enum NhdynStatus nhdyn_swanson_spectrum(double omega_re,
                                        double omega_im,
                                        double alpha_re,
                                        double alpha_im,
                                        double beta_re,
                                        double beta_im,
                                        size_t cutoff,
                                        double *re,
                                        double *im,
                                        uint8_t *trusted);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* NHDYN_H */
