#ifndef QFLOW_H
#define QFLOW_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of every call.
 */
typedef enum QfStatus {
  QF_STATUS_OK = 0,
  QF_STATUS_NULL_POINTER = 1,
  QF_STATUS_INVALID_UTF8 = 2,
  QF_STATUS_PARSE_ERROR = 3,
  QF_STATUS_INVALID_ARGUMENT = 4,
  QF_STATUS_EVAL_ERROR = 5,
  QF_STATUS_BUFFER_TOO_SMALL = 6,
  QF_STATUS_PANIC = 7,
} QfStatus;

/**
 * Opaque diagram handle.
 */
typedef struct QfDiagram QfDiagram;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Parses diagram source text into a new handle stored in `*out`.
 *
 * # Safety
 * `src` must be a NUL-terminated string and `out` a valid pointer.
 */
enum QfStatus qf_diagram_parse(const char *src, struct QfDiagram **out);

/**
 * Releases a handle. Null is ignored.
 *
 * # Safety
 * `d` must come from [`qf_diagram_parse`] and not be used afterwards.
 */
void qf_diagram_free(struct QfDiagram *d);

/**
 * Total dimension of the input wires, the length (in complex numbers) of
 * the input expected by [`qf_simulate`].
 *
 * # Safety
 * `d` must be a live handle and `out` a valid pointer.
 */
enum QfStatus qf_input_dim(const struct QfDiagram *d, size_t *out);

/**
 * Runs the diagram on an input ket over its input wires (ascending id,
 * first wire most significant). Amplitudes are interleaved `re, im` pairs:
 * `input` holds `2 * input_len` doubles. The output, over all output wires
 * in ascending id order, is written to `output` (capacity `2 * output_cap`
 * doubles) and its length in complex numbers to `*output_len`. When the
 * buffer is too small nothing is written except `*output_len`.
 *
 * # Safety
 * Pointers must be valid for the stated lengths.
 */
enum QfStatus qf_simulate(const struct QfDiagram *d,
                          const double *input,
                          size_t input_len,
                          double *output,
                          size_t output_cap,
                          size_t *output_len);

/**
 * Cross-checks every semantics against direct simulation on `trials`
 * seeded trials. `*pass` and `*max_rel_err` receive the summary;
 * `report_json`, when not null, receives the full report.
 *
 * # Safety
 * `d` must be a live handle; `pass` and `max_rel_err` valid pointers.
 */
enum QfStatus qf_verify(const struct QfDiagram *d,
                        size_t trials,
                        uint64_t seed,
                        double tolerance,
                        bool *pass,
                        double *max_rel_err,
                        char **report_json);

/**
 * Canonical forms of all components as a JSON array in `*out`. With
 * `random_v`, internal spaces are re-homed through unitaries drawn from
 * `seed`.
 *
 * # Safety
 * `d` must be a live handle and `out` a valid pointer.
 */
enum QfStatus qf_canon_json(const struct QfDiagram *d, bool random_v, uint64_t seed, char **out);

/**
 * Renders the diagram: `style` 0 for DOT, 1 for an ASCII grid.
 *
 * # Safety
 * `d` must be a live handle and `out` a valid pointer.
 */
enum QfStatus qf_render(const struct QfDiagram *d, uint32_t style, char **out);

/**
 * Teleports a random qudit of dimension `dim` (seeded) through every
 * measurement branch; the report is written to `*out` as JSON.
 *
 * # Safety
 * `pass` and `out` must be valid pointers.
 */
enum QfStatus qf_teleport_demo(size_t dim, uint64_t seed, bool *pass, char **out);

/**
 * Releases a string returned by this library. Null is ignored.
 *
 * # Safety
 * `s` must come from this library and not be used afterwards.
 */
void qf_string_free(char *s);

/**
 * Message for the last failed call on this thread, or null. Valid until the
 * next call on the same thread.
 */
const char *qf_last_error_message(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* QFLOW_H */
