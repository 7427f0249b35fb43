#ifndef CIC_H
#define CIC_H

/* Generated by cbindgen; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every call.
 */
typedef enum CicStatus {
  CIC_STATUS_OK = 0,
  CIC_STATUS_NULL_POINTER = 1,
  CIC_STATUS_INVALID_ARGUMENT = 2,
  CIC_STATUS_SHAPE = 3,
  CIC_STATUS_NON_FINITE = 4,
  CIC_STATUS_NOT_HERMITIAN = 5,
  CIC_STATUS_SINGULAR = 6,
  CIC_STATUS_NOT_POSITIVE_DEFINITE = 7,
  CIC_STATUS_AXIS_EIGENVALUE = 8,
  CIC_STATUS_NO_WITNESS = 9,
  CIC_STATUS_PRECONDITION = 10,
  CIC_STATUS_JSON = 11,
  CIC_STATUS_IO = 12,
  CIC_STATUS_PANIC = 13,
  CIC_STATUS_OTHER = 14,
} CicStatus;

/**
 * Opaque complex matrix.
 */
typedef struct CicMatrix CicMatrix;

/**
 * Opaque real rational matrix function.
 */
typedef struct CicRational CicRational;

/**
 * Opaque realization `[A B; C D]`.
 */
typedef struct CicRealization CicRealization;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or null. Valid until
 * the next failing call on the same thread.
 */
const char *cic_last_error_message(void);

/**
 * Releases a string returned by any `*_to_json` call.
 *
 * # Safety
 * `s` must come from this library, or be null.
 */
void cic_string_free(char *s);

/**
 * Builds a `rows x cols` matrix from row-major parts; `im` may be null.
 *
 * # Safety
 * `re` (and `im` when non-null) must hold `rows * cols` doubles.
 */
enum CicStatus cic_matrix_new(size_t rows,
                              size_t cols,
                              const double *re,
                              const double *im,
                              struct CicMatrix **out);

/**
 * # Safety
 * `m` must come from this library, or be null.
 */
void cic_matrix_free(struct CicMatrix *m);

/**
 * # Safety
 * Pointers must be valid.
 */
enum CicStatus cic_matrix_shape(const struct CicMatrix *m, size_t *rows, size_t *cols);

/**
 * Copies entries row-major into `re` and `im` (either may be null).
 *
 * # Safety
 * Non-null buffers must hold `rows * cols` doubles.
 */
enum CicStatus cic_matrix_read(const struct CicMatrix *m, double *re, double *im);

/**
 * # Safety
 * `s` must be a valid C string.
 */
enum CicStatus cic_matrix_from_json(const char *s, struct CicMatrix **out);

/**
 * # Safety
 * Pointers must be valid; release the string with [`cic_string_free`].
 */
enum CicStatus cic_matrix_to_json(const struct CicMatrix *m, char **out);

/**
 * Matrix sign function.
 *
 * # Safety
 * Pointers must be valid.
 */
enum CicStatus cic_sign(const struct CicMatrix *a, struct CicMatrix **out);

/**
 * `exp(t A)`.
 *
 * # Safety
 * Pointers must be valid.
 */
enum CicStatus cic_expm(const struct CicMatrix *a, double t, struct CicMatrix **out);

/**
 * Membership of `A` in the cone `L_H`; `h` null means `H = I`.
 *
 * # Safety
 * Pointers must be valid; `h` may be null.
 */
enum CicStatus cic_membership(const struct CicMatrix *a,
                              const struct CicMatrix *h,
                              double tol,
                              int *in_open,
                              int *in_closed);

/**
 * A member `A` of `L_I` with `A + B` singular.
 *
 * # Safety
 * Pointers must be valid.
 */
enum CicStatus cic_maximality_witness(const struct CicMatrix *b, struct CicMatrix **out);

/**
 * # Safety
 * `s` must be a valid C string.
 */
enum CicStatus cic_rational_from_json(const char *s, struct CicRational **out);

/**
 * # Safety
 * Pointers must be valid.
 */
enum CicStatus cic_rational_to_json(const struct CicRational *f, char **out);

/**
 * # Safety
 * `f` must come from this library, or be null.
 */
void cic_rational_free(struct CicRational *f);

/**
 * Evaluates `F(s)`; [`CicStatus::Singular`] at a pole.
 *
 * # Safety
 * Pointers must be valid.
 */
enum CicStatus cic_rational_eval(const struct CicRational *f,
                                 double re,
                                 double im,
                                 struct CicMatrix **out);

/**
 * Positive-real check on the default grid; `is_pr` receives 1 or 0.
 *
 * # Safety
 * Pointers must be valid.
 */
enum CicStatus cic_pr_check(const struct CicRational *f, int *is_pr);

/**
 * Assembles `[A B; C D]` from matrix handles (copied).
 *
 * # Safety
 * Pointers must be valid.
 */
enum CicStatus cic_realization_new(const struct CicMatrix *a,
                                   const struct CicMatrix *b,
                                   const struct CicMatrix *c,
                                   const struct CicMatrix *d,
                                   struct CicRealization **out);

/**
 * # Safety
 * `r` must come from this library, or be null.
 */
void cic_realization_free(struct CicRealization *r);

/**
 * # Safety
 * `s` must be a valid C string.
 */
enum CicStatus cic_realization_from_json(const char *s, struct CicRealization **out);

/**
 * # Safety
 * Pointers must be valid.
 */
enum CicStatus cic_realization_to_json(const struct CicRealization *r, char **out);

/**
 * The `(n+m) x (n+m)` matrix view.
 *
 * # Safety
 * Pointers must be valid.
 */
enum CicStatus cic_realization_matrix(const struct CicRealization *r, struct CicMatrix **out);

/**
 * Transfer function `C (sI - A)^-1 B + D`; [`CicStatus::Singular`] at a pole.
 *
 * # Safety
 * Pointers must be valid.
 */
enum CicStatus cic_transfer_eval(const struct CicRealization *r,
                                 double re,
                                 double im,
                                 struct CicMatrix **out);

/**
 * Transfer function as a rational matrix function.
 *
 * # Safety
 * Pointers must be valid.
 */
enum CicStatus cic_realization_to_rational(const struct CicRealization *r,
                                           struct CicRational **out);

/**
 * Checks the KYP certificate for weight `H` (null means `I`).
 *
 * # Safety
 * Pointers must be valid; `h` may be null.
 */
enum CicStatus cic_kyp_verify(const struct CicRealization *r,
                              const struct CicMatrix *h,
                              double tol,
                              int *valid);

/**
 * Searches for a KYP certificate; `found` receives 1 or 0 and `h_out`
 * (optional) the weight when found.
 *
 * # Safety
 * Pointers must be valid; `h_out` may be null.
 */
enum CicStatus cic_kyp_search(const struct CicRealization *r,
                              size_t max_iter,
                              int *found,
                              struct CicMatrix **h_out);

/**
 * Balanced realization and its common diagonal Gramian (optional).
 *
 * # Safety
 * Pointers must be valid; `gramian` may be null.
 */
enum CicStatus cic_gramian_balance(const struct CicRealization *r,
                                   struct CicRealization **out,
                                   struct CicMatrix **gramian);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CIC_H */
