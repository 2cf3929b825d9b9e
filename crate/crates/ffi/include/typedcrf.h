#ifndef TYPEDCRF_H
#define TYPEDCRF_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum typedcrf_factor_kind {
  TYPEDCRF_FACTOR_KIND_XOR = 0,
  TYPEDCRF_FACTOR_KIND_AT_MOST_ONE = 1,
  TYPEDCRF_FACTOR_KIND_OR = 2,
  TYPEDCRF_FACTOR_KIND_IMPLY = 3,
} typedcrf_factor_kind;

typedef enum typedcrf_status {
  TYPEDCRF_STATUS_OK = 0,
  TYPEDCRF_STATUS_INVALID_ARGUMENT = 1,
  TYPEDCRF_STATUS_DIMENSION = 2,
  TYPEDCRF_STATUS_INVALID_FACTOR = 3,
  TYPEDCRF_STATUS_UNSUPPORTED_FACTOR = 4,
  TYPEDCRF_STATUS_INVALID_CONSTRAINT = 5,
  TYPEDCRF_STATUS_UNSATISFIABLE = 6,
  TYPEDCRF_STATUS_CAPACITY = 7,
  TYPEDCRF_STATUS_DEGENERATE_DATA = 8,
  TYPEDCRF_STATUS_PARSE = 9,
  TYPEDCRF_STATUS_IO = 10,
  TYPEDCRF_STATUS_NULL_POINTER = 11,
  TYPEDCRF_STATUS_PANIC = 12,
} typedcrf_status;

typedef struct typedcrf_dataset typedcrf_dataset;

typedef struct typedcrf_graph typedcrf_graph;

typedef struct typedcrf_weights typedcrf_weights;

typedef struct typedcrf_admm_settings {
  double penalty;
  size_t max_iterations;
  double residual_tolerance;
} typedcrf_admm_settings;

// `status`: 0 integral, 1 fractional, 2 iteration budget exhausted.
typedef struct typedcrf_solve_info {
  double relaxed_objective;
  double rounded_objective;
  size_t iterations;
  size_t violated_factors;
  int status;
} typedcrf_solve_info;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version as a static NUL-terminated string.
const char *typedcrf_version(void);

// Length in bytes of the calling thread's last error message, without the
// terminating NUL; 0 after a successful call.
size_t typedcrf_last_error_length(void);

// Copies the last error message into `buf` (truncated, always
// NUL-terminated when `len > 0`) and returns the number of bytes written
// before the NUL.
size_t typedcrf_last_error_message(char *buf, size_t len);

struct typedcrf_admm_settings typedcrf_admm_settings_default(void);

enum typedcrf_status typedcrf_graph_new(struct typedcrf_graph **out);

void typedcrf_graph_free(struct typedcrf_graph *g);

// Adds a binary variable with linear potential `potential`; its index goes
// to `out_id` when that is non-null.
enum typedcrf_status typedcrf_graph_add_variable(struct typedcrf_graph *g,
                                                 double potential,
                                                 size_t *out_id);

size_t typedcrf_graph_num_variables(const struct typedcrf_graph *g);

// Adds a hard factor over `n` literals; `negated` may be null when no
// literal is negated.
enum typedcrf_status typedcrf_graph_add_factor(struct typedcrf_graph *g,
                                               enum typedcrf_factor_kind kind,
                                               const size_t *variables,
                                               const bool *negated,
                                               size_t n);

// Approximate MAP. Writes one 0/1 byte per variable into `assignment`
// (`len` must cover every variable) and, when `info` is non-null, the
// solve summary. A null `settings` selects the defaults.
enum typedcrf_status typedcrf_graph_solve(const struct typedcrf_graph *g,
                                          const struct typedcrf_admm_settings *settings,
                                          uint8_t *assignment,
                                          size_t len,
                                          struct typedcrf_solve_info *info);

// Euclidean projection of `values` onto the polytope of a factor of
// `kind` over `n` literals; writes `n` values into `out`.
enum typedcrf_status typedcrf_project_factor(enum typedcrf_factor_kind kind,
                                             const bool *negated,
                                             const double *values,
                                             size_t n,
                                             double *out);

// Loads a weights file written by `typedcrf train`.
enum typedcrf_status typedcrf_weights_load(const char *file, struct typedcrf_weights **out);

void typedcrf_weights_free(struct typedcrf_weights *w);

// Node types of the model's schema; 0 for a null handle.
size_t typedcrf_weights_num_types(const struct typedcrf_weights *w);

// Flattened parameter count (with feature dimensions); 0 for a null handle.
size_t typedcrf_weights_len(const struct typedcrf_weights *w);

enum typedcrf_status typedcrf_dataset_load(const char *file, struct typedcrf_dataset **out);

// Generates `count` Snake images, plus their surviving corruptions when
// `hidden` is set.
enum typedcrf_status typedcrf_dataset_generate(size_t count,
                                               bool hidden,
                                               uint64_t seed,
                                               struct typedcrf_dataset **out);

void typedcrf_dataset_free(struct typedcrf_dataset *d);

size_t typedcrf_dataset_len(const struct typedcrf_dataset *d);

// Height and width of image `index`.
enum typedcrf_status typedcrf_dataset_shape(const struct typedcrf_dataset *d,
                                            size_t index,
                                            size_t *height,
                                            size_t *width);

// Gold cell labels (row-major, `len` >= cells) and image label
// (0 Snake, 1 NoSnake) of image `index`. Either output may be null.
enum typedcrf_status typedcrf_dataset_labels(const struct typedcrf_dataset *d,
                                             size_t index,
                                             size_t *labels,
                                             size_t len,
                                             int *image_label);

// Decodes image `index` with a single-type or pixel+image model. Cell
// labels go to `labels` (row-major, `len` >= cells); the image label goes
// to `image_label` (0 Snake, 1 NoSnake, -1 when the model has no image
// node). `constrained` adds one AT_MOST_ONE per snake label. A null
// `settings` selects the defaults.
enum typedcrf_status typedcrf_predict(const struct typedcrf_weights *w,
                                      const struct typedcrf_dataset *d,
                                      size_t index,
                                      bool constrained,
                                      const struct typedcrf_admm_settings *settings,
                                      size_t *labels,
                                      size_t len,
                                      int *image_label);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* TYPEDCRF_H */
