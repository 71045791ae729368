#ifndef MAGWEYL_H
#define MAGWEYL_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Outcome of a call; zero is success.
 */
typedef enum MwStatus {
  MwStatus_Ok = 0,
  MwStatus_NullPointer = 1,
  MwStatus_InvalidArgument = 2,
  MwStatus_Config = 3,
  MwStatus_Io = 4,
  MwStatus_Unsupported = 5,
  MwStatus_BufferTooSmall = 6,
  MwStatus_Panic = 7,
} MwStatus;

/**
 * Vector potential family for [`mw_calculus_new`].
 */
typedef enum MwPotential {
  MwPotential_Zero = 0,
  /**
   * `A = b x₁` in `d = 1`, `(0, b x₁)` in `d = 2`.
   */
  MwPotential_Landau = 1,
  /**
   * `(−b x₂/2, b x₁/2)`, `d = 2` only.
   */
  MwPotential_Symmetric = 2,
} MwPotential;

typedef enum MwRoute {
  MwRoute_Operator = 0,
  MwRoute_Quadrature = 1,
} MwRoute;

typedef enum MwFormat {
  MwFormat_Json = 0,
  MwFormat_Csv = 1,
} MwFormat;

/**
 * A calculus: lattice, `ε`, `λ` and vector potential.
 */
typedef struct MwCalculus MwCalculus;

/**
 * A verification report.
 */
typedef struct MwReport MwReport;

/**
 * A phase-space symbol on a calculus lattice.
 */
typedef struct MwSymbol MwSymbol;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *mw_version(void);

/**
 * Message of the last failed call on this thread (empty after a success).
 *
 * # Safety
 * `buf` is writable for `len` bytes (or null with `len = 0`); `needed` is
 * null or writable and receives the size including the NUL.
 */
enum MwStatus mw_last_error(char *buf, size_t len, size_t *needed);

/**
 * New calculus on the `d`-dimensional lattice with `n` sites of box length `l`;
 * `potential` is an [`MwPotential`] value.
 *
 * # Safety
 * `out` is writable; the handle is released with [`mw_calculus_free`].
 */
enum MwStatus mw_calculus_new(size_t d,
                              size_t n,
                              double l,
                              double eps,
                              double lambda,
                              int32_t potential,
                              double b,
                              struct MwCalculus **out);

/**
 * # Safety
 * `c` is null or a handle from [`mw_calculus_new`] not yet freed.
 */
void mw_calculus_free(struct MwCalculus *c);

/**
 * Number of position sites `n^d`; operator matrices are `npos × npos`.
 *
 * # Safety
 * `c` is a live handle; `out` is writable.
 */
enum MwStatus mw_calculus_npos(const struct MwCalculus *c, size_t *out);

/**
 * Number of phase-space sites `n^{2d}`, the length of a symbol.
 *
 * # Safety
 * `c` is a live handle; `out` is writable.
 */
enum MwStatus mw_calculus_nphase(const struct MwCalculus *c, size_t *out);

/**
 * Gaussian symbol with `d` center and `d` momentum components.
 *
 * # Safety
 * `center` and `momentum` hold `d` values; `out` is writable.
 */
enum MwStatus mw_symbol_gaussian(const struct MwCalculus *c,
                                 const double *center,
                                 const double *momentum,
                                 double width,
                                 struct MwSymbol **out);

/**
 * Symbol from `len` real and imaginary parts in phase-index order.
 *
 * # Safety
 * `re` and `im` hold `len` values; `out` is writable.
 */
enum MwStatus mw_symbol_from_values(const struct MwCalculus *c,
                                    const double *re,
                                    const double *im,
                                    size_t len,
                                    struct MwSymbol **out);

/**
 * Copies the symbol values; `len` must equal the symbol length.
 *
 * # Safety
 * `re` and `im` are writable for `len` values.
 */
enum MwStatus mw_symbol_values(const struct MwSymbol *s, double *re, double *im, size_t len);

/**
 * # Safety
 * `s` is null or a symbol handle not yet freed.
 */
void mw_symbol_free(struct MwSymbol *s);

/**
 * Row-major matrix of `op(f)`; `len` must be `npos²`.
 *
 * # Safety
 * Handles are live; `re` and `im` are writable for `len` values.
 */
enum MwStatus mw_quantize(const struct MwCalculus *c,
                          const struct MwSymbol *f,
                          double *re,
                          double *im,
                          size_t len);

/**
 * Magnetic Moyal product `f ⋆ g` along `route`, an [`MwRoute`] value.
 *
 * # Safety
 * Handles are live; `out` is writable.
 */
enum MwStatus mw_moyal_product(const struct MwCalculus *c,
                               const struct MwSymbol *f,
                               const struct MwSymbol *g,
                               int32_t route,
                               struct MwSymbol **out);

/**
 * Runs the suites of a TOML config (null for the defaults).
 *
 * # Safety
 * `config` is null or a NUL-terminated UTF-8 string; `out` is writable.
 */
enum MwStatus mw_suite_run(const char *config, struct MwReport **out);

/**
 * Number of checks in the report.
 *
 * # Safety
 * `r` is live; `out` is writable.
 */
enum MwStatus mw_report_len(const struct MwReport *r, size_t *out);

/**
 * Residual, tolerance and verdict of check `index`.
 *
 * # Safety
 * `r` is live; the out pointers are writable.
 */
enum MwStatus mw_report_check(const struct MwReport *r,
                              size_t index,
                              double *residual,
                              double *tol,
                              bool *pass);

/**
 * Id of check `index` as a NUL-terminated string.
 *
 * # Safety
 * `r` is live; `buf` and `needed` as for [`mw_last_error`].
 */
enum MwStatus mw_report_check_id(const struct MwReport *r,
                                 size_t index,
                                 char *buf,
                                 size_t len,
                                 size_t *needed);

/**
 * The report rendered in `format`, an [`MwFormat`] value.
 *
 * # Safety
 * `r` is live; `buf` and `needed` as for [`mw_last_error`].
 */
enum MwStatus mw_report_render(const struct MwReport *r,
                               int32_t format,
                               char *buf,
                               size_t len,
                               size_t *needed);

/**
 * # Safety
 * `r` is null or a report handle not yet freed.
 */
void mw_report_free(struct MwReport *r);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MAGWEYL_H */
