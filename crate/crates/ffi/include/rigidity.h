#ifndef RIGIDITY_H
#define RIGIDITY_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum RigidityStatus {
  RIGIDITY_STATUS_OK = 0,
  RIGIDITY_STATUS_NULL_POINTER = 1,
  RIGIDITY_STATUS_INVALID_ARGUMENT = 2,
  RIGIDITY_STATUS_INVALID_UTF8 = 3,
  RIGIDITY_STATUS_WORD_PARSE = 4,
  RIGIDITY_STATUS_DIMENSION = 5,
  RIGIDITY_STATUS_NUMERICAL = 6,
  RIGIDITY_STATUS_NOT_PROXIMAL = 7,
  RIGIDITY_STATUS_BUFFER_TOO_SMALL = 8,
  RIGIDITY_STATUS_SERIALIZATION = 9,
  RIGIDITY_STATUS_PANIC = 10,
} RigidityStatus;

// Opaque handle to a representation of a free group.
typedef struct RigidityRep RigidityRep;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the last failed call on this thread, or null. Valid until the
// next failing call on the same thread.
const char *rigidity_last_error(void);

// Schottky group of the given rank in `SO(1, k)`, acting on `H^k`.
// `seed = 0` places the axes perpendicularly; otherwise they are random.
//
// # Safety
// `out` must be a valid pointer to writable storage for one handle.
enum RigidityStatus rigidity_rep_klein(size_t k,
                                       size_t rank,
                                       double length,
                                       uint64_t seed,
                                       struct RigidityRep **out);

// `Sym^{d-1}` of a Schottky subgroup of `PSL(2, R)`, a representation in
// dimension `d`.
//
// # Safety
// `out` must be a valid pointer to writable storage for one handle.
enum RigidityStatus rigidity_rep_sym_power(size_t d,
                                           size_t rank,
                                           double length,
                                           uint64_t seed,
                                           struct RigidityRep **out);

// `n`-th exterior power of `rep`.
//
// # Safety
// `rep` must be a live handle and `out` valid for one write.
enum RigidityStatus rigidity_rep_exterior(const struct RigidityRep *rep,
                                          size_t n,
                                          struct RigidityRep **out);

// Adds to each generator a seeded Gaussian matrix of operator norm `eps`.
//
// # Safety
// `rep` must be a live handle and `out` valid for one write.
enum RigidityStatus rigidity_rep_perturb(const struct RigidityRep *rep,
                                         double eps,
                                         uint64_t seed,
                                         struct RigidityRep **out);

// Parses the representation JSON format.
//
// # Safety
// `json` must be a NUL-terminated string and `out` valid for one write.
enum RigidityStatus rigidity_rep_from_json(const char *json, struct RigidityRep **out);

// Serializes to the representation JSON format. Release the string with
// [`rigidity_string_free`].
//
// # Safety
// `rep` must be a live handle and `out` valid for one write.
enum RigidityStatus rigidity_rep_to_json(const struct RigidityRep *rep, char **out);

// # Safety
// `rep` must be null or a handle not yet freed.
void rigidity_rep_free(struct RigidityRep *rep);

// # Safety
// `s` must be null or a string returned by this library and not yet freed.
void rigidity_string_free(char *s);

// Dimension of the representation, or 0 for a null handle.
//
// # Safety
// `rep` must be null or a live handle.
size_t rigidity_rep_dim(const struct RigidityRep *rep);

// Rank of the free group, or 0 for a null handle.
//
// # Safety
// `rep` must be null or a live handle.
size_t rigidity_rep_rank(const struct RigidityRep *rep);

// Writes the `d * d` row-major entries of the image of `word`, normalized to
// unit Frobenius norm, into `buf`.
//
// # Safety
// `rep` must be a live handle, `word` NUL-terminated, and `buf` valid for
// `len` writes.
enum RigidityStatus rigidity_rep_evaluate(const struct RigidityRep *rep,
                                          const char *word,
                                          double *buf,
                                          size_t len);

// Writes the Jordan projection `lambda_1 >= ... >= lambda_d` of the image of
// `word` into `buf`.
//
// # Safety
// `rep` must be a live handle, `word` NUL-terminated, and `buf` valid for
// `len` writes.
enum RigidityStatus rigidity_rep_jordan(const struct RigidityRep *rep,
                                        const char *word,
                                        double *buf,
                                        size_t len);

// Exact `alpha(bar) / chi(bar)` for the root system `kind` (`"A"`, `"B"`,
// `"C"` or `"G2"`) with the given parameter.
//
// # Safety
// `kind` must be NUL-terminated; `num` and `den` valid for one write each.
enum RigidityStatus rigidity_weyl_ratio_bound(const char *kind,
                                              size_t parameter,
                                              int64_t *num,
                                              int64_t *den);

// Number of conjugacy classes of cyclic length `1..=max_len` in the free
// group of the given rank.
//
// # Safety
// `out` must be valid for one write.
enum RigidityStatus rigidity_class_count(size_t rank, size_t max_len, size_t *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* RIGIDITY_H */
