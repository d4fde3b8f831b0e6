#ifndef CHESHIRE_H
#define CHESHIRE_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum CheshireStatus {
  CHESHIRE_STATUS_OK = 0,
  CHESHIRE_STATUS_NULL_POINTER = 1,
  CHESHIRE_STATUS_INVALID_UTF8 = 2,
  CHESHIRE_STATUS_INVALID_ARGUMENT = 3,
  CHESHIRE_STATUS_PARSE = 4,
  CHESHIRE_STATUS_VALIDATION = 5,
  CHESHIRE_STATUS_NUMERICAL = 6,
  CHESHIRE_STATUS_BUFFER_TOO_SMALL = 7,
  CHESHIRE_STATUS_IO = 8,
  CHESHIRE_STATUS_UNKNOWN_SCENARIO = 9,
  CHESHIRE_STATUS_PANIC = 10,
} CheshireStatus;

/*
 Opaque scenario handle.
 */
typedef struct CheshireScenario CheshireScenario;

typedef struct CheshireComplex {
  double re;
  double im;
} CheshireComplex;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Message of the last failed call on this thread, or null. The pointer is
 valid until the next call into this library on the same thread.
 */
const char *cheshire_last_error(void);

/*
 Built-in scenario `"single-cat"` or `"grin-swap"`.

 # Safety
 `name` must be a NUL-terminated string; `out` must be writable.
 */
enum CheshireStatus cheshire_scenario_builtin(const char *name, struct CheshireScenario **out);

/*
 Parses `.qcc` text.

 # Safety
 `text` must be a NUL-terminated string; `out` must be writable.
 */
enum CheshireStatus cheshire_scenario_parse(const char *text, struct CheshireScenario **out);

/*
 Reads and parses a `.qcc` file.

 # Safety
 `path` must be a NUL-terminated string; `out` must be writable.
 */
enum CheshireStatus cheshire_scenario_load(const char *path, struct CheshireScenario **out);

/*
 Releases a scenario. Null is ignored.

 # Safety
 `s` must come from a `cheshire_scenario_*` constructor and not be used
 afterwards.
 */
void cheshire_scenario_free(struct CheshireScenario *s);

/*
 # Safety
 `s` must be a live handle; `out` must be writable.
 */
enum CheshireStatus cheshire_scenario_observable_count(const struct CheshireScenario *s,
                                                       size_t *out);

/*
 Copies the NUL-terminated name of observable `index` into `buf`.
 `needed` (optional) receives the required capacity including the NUL.

 # Safety
 `s` must be a live handle; `buf` must hold `cap` bytes; `needed` may be null.
 */
enum CheshireStatus cheshire_scenario_observable_name(const struct CheshireScenario *s,
                                                      size_t index,
                                                      char *buf,
                                                      size_t cap,
                                                      size_t *needed);

/*
 `|⟨post|pre⟩|²` of the scenario.

 # Safety
 `s` must be a live handle; `out` must be writable.
 */
enum CheshireStatus cheshire_scenario_postselection_probability(const struct CheshireScenario *s,
                                                                double *out);

/*
 Canonical `.qcc` text; free it with [`cheshire_string_free`].

 # Safety
 `s` must be a live handle; `out` must be writable.
 */
enum CheshireStatus cheshire_scenario_serialize(const struct CheshireScenario *s, char **out);

/*
 # Safety
 `p` must come from this library or be null.
 */
void cheshire_string_free(char *p);

/*
 Exact weak values of every observable, in declaration order. Both arrays
 must hold at least `len >= observable count` entries.

 # Safety
 `s` must be a live handle; `out` must hold `len` elements.
 */
enum CheshireStatus cheshire_run_exact(const struct CheshireScenario *s,
                                       struct CheshireComplex *out,
                                       size_t len);

/*
 Pointer-model estimates `mean/g` at coupling `g` (the scenario's own
 coupling when `g` is 0).

 # Safety
 `s` must be a live handle; `estimates` must hold `len` elements.
 */
enum CheshireStatus cheshire_run_pointer(const struct CheshireScenario *s,
                                         double g,
                                         double *estimates,
                                         size_t len);

/*
 Monte Carlo estimates from `samples` trials per observable. Observable
 `k` draws from the stream seeded `seed + k`. `acceptance` may be null.

 # Safety
 `s` must be a live handle; each non-null array must hold `len` elements.
 */
enum CheshireStatus cheshire_run_montecarlo(const struct CheshireScenario *s,
                                            double g,
                                            size_t samples,
                                            uint64_t seed,
                                            double *estimates,
                                            double *std_errors,
                                            double *acceptance,
                                            size_t len);

/*
 Weak value `⟨post|A|pre⟩/⟨post|pre⟩` for dense inputs of dimension `dim`.
 `a` is row-major `dim × dim`; the states are normalized first.

 # Safety
 `a` must hold `dim*dim` elements, `pre` and `post` `dim` elements each;
 `out` must be writable.
 */
enum CheshireStatus cheshire_weak_value(size_t dim,
                                        const struct CheshireComplex *a,
                                        const struct CheshireComplex *pre,
                                        const struct CheshireComplex *post,
                                        struct CheshireComplex *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CHESHIRE_H */
