#ifndef FRACHILL_H
#define FRACHILL_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum FrachillStatus {
  FRACHILL_STATUS_OK = 0,
  FRACHILL_STATUS_NULL_POINTER = 1,
  // Bad parameter, malformed JSON or schema violation.
  FRACHILL_STATUS_INVALID_INPUT = 2,
  // A numerical routine failed.
  FRACHILL_STATUS_NUMERICAL = 3,
  FRACHILL_STATUS_IO = 4,
  FRACHILL_STATUS_INDEX_OUT_OF_RANGE = 5,
  FRACHILL_STATUS_PANIC = 6,
} FrachillStatus;

// Result set of `frachill_find_eigenvalues`.
typedef struct FrachillEigenvalues FrachillEigenvalues;

// Periodic system matrix; create with `frachill_system_from_json` or
// `frachill_system_scalar_sinusoid`.
typedef struct FrachillSystem FrachillSystem;

typedef struct FrachillStrip {
  double re_min;
  double re_max;
  double im_min;
  double im_max;
} FrachillStrip;

typedef struct FrachillEigenvalue {
  double re;
  double im;
  double residual;
  // 1 when Re >= 0, 0 otherwise.
  int32_t valid;
} FrachillEigenvalue;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version as a static NUL-terminated string.
const char *frachill_version(void);

// Copies the calling thread's last error message into `buf` (truncated,
// always NUL-terminated) and returns the full message length.
size_t frachill_last_error(char *buf, size_t len);

// E_{alpha,beta}(re + i im).
enum FrachillStatus frachill_mittag_leffler(double alpha,
                                            double beta,
                                            double re,
                                            double im,
                                            double *out_re,
                                            double *out_im);

// Parses a system document (UTF-8 JSON).
enum FrachillStatus frachill_system_from_json(const char *json, struct FrachillSystem **out_sys);

// Scalar system J(t) = a + b sin(omega t) of order alpha.
enum FrachillStatus frachill_system_scalar_sinusoid(double alpha,
                                                    double omega,
                                                    double a,
                                                    double b,
                                                    struct FrachillSystem **out_sys);

size_t frachill_system_dim(const struct FrachillSystem *sys);

void frachill_system_free(struct FrachillSystem *sys);

// log|det H_N(lambda)| and the smallest singular value.
enum FrachillStatus frachill_hill_log_abs_det(const struct FrachillSystem *sys,
                                              size_t truncation,
                                              double re,
                                              double im,
                                              double *out_log_abs_det,
                                              double *out_sigma_min);

// Roots of the Hill determinant. `strip` may be null for the default
// fundamental strip.
enum FrachillStatus frachill_find_eigenvalues(const struct FrachillSystem *sys,
                                              size_t truncation,
                                              double tol,
                                              const struct FrachillStrip *strip,
                                              struct FrachillEigenvalues **out_eigs);

size_t frachill_eigenvalues_len(const struct FrachillEigenvalues *eigs);

enum FrachillStatus frachill_eigenvalues_get(const struct FrachillEigenvalues *eigs,
                                             size_t index,
                                             struct FrachillEigenvalue *out_value);

// Maximum relative error between the Floquet form of eigenpair `index` and
// direct simulation over [0, t_end] with step dt.
enum FrachillStatus frachill_eigenvalues_verify(const struct FrachillEigenvalues *eigs,
                                                size_t index,
                                                const struct FrachillSystem *sys,
                                                double t_end,
                                                double dt,
                                                double *out_max_rel_err);

void frachill_eigenvalues_free(struct FrachillEigenvalues *eigs);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FRACHILL_H */
