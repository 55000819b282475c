#ifndef ZEROSUM_ALIEN_H
#define ZEROSUM_ALIEN_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum ZsStatus {
  ZS_STATUS_OK = 0,
  ZS_STATUS_NULL_POINTER = 1,
  ZS_STATUS_INVALID_ARGUMENT = 2,
  ZS_STATUS_CONFIG = 3,
  ZS_STATUS_DOMAIN = 4,
  ZS_STATUS_SOLVER_FAULT = 5,
  ZS_STATUS_BUFFER_TOO_SMALL = 6,
  ZS_STATUS_PANIC = 7,
} ZsStatus;

/**
 * Opaque game handle.
 */
typedef struct ZsGame ZsGame;

typedef struct ZsOptResult {
  double arg;
  double value;
  bool at_boundary;
  bool plateau;
} ZsOptResult;

typedef struct ZsFixedPoint {
  /**
   * Common group-1 strategy.
   */
  double s;
  /**
   * `|map(s) - s|`.
   */
  double residual;
  /**
   * Alien strategy of the constructed equilibrium.
   */
  double alien;
  double transfer_gap;
} ZsFixedPoint;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Four-firm Cournot game with demand intercept `a` and unit costs `c[0..4]`;
 * firm D (`c[3]`) is the alien.
 *
 * # Safety
 * `c` must point to four doubles and `out` must be writable.
 */
enum ZsStatus zs_game_cournot4(double a, const double *c, struct ZsGame **out);

/**
 * Game and settings from a JSON run configuration (the CLI's `--config` format).
 *
 * # Safety
 * `json` must be a NUL-terminated string and `out` must be writable.
 */
enum ZsStatus zs_game_from_config_json(const char *json, struct ZsGame **out);

/**
 * # Safety
 * `game` must come from a constructor of this library and not be freed twice.
 */
void zs_game_free(struct ZsGame *game);

/**
 * Number of players, or 0 for a null handle.
 *
 * # Safety
 * `game` must be null or a live handle.
 */
size_t zs_game_player_count(const struct ZsGame *game);

/**
 * Payoff of `player` (0-based; the alien is `n - 1`) at `profile[0..len]`.
 *
 * # Safety
 * `profile` must point to `len` doubles and `out` must be writable.
 */
enum ZsStatus zs_evaluate_payoff(const struct ZsGame *game,
                                 size_t player,
                                 const double *profile,
                                 size_t len,
                                 double *out);

/**
 * Nash equilibrium written to `out[0..len]` (`len` must be at least `n`).
 * `converged` receives whether best-response iteration met its tolerances.
 *
 * # Safety
 * `out` must point to `len` writable doubles and `converged` must be writable.
 */
enum ZsStatus zs_solve_nash(const struct ZsGame *game, double *out, size_t len, bool *converged);

/**
 * `max_{s_i} min_{s_n} u_i` with the other group-1 players at `pinning`.
 *
 * # Safety
 * `out` must be writable.
 */
enum ZsStatus zs_maximin(const struct ZsGame *game,
                         size_t player,
                         double pinning,
                         struct ZsOptResult *out);

/**
 * `min_{s_n} max_{s_i} u_i` with the other group-1 players at `pinning`.
 *
 * # Safety
 * `out` must be writable.
 */
enum ZsStatus zs_minimax(const struct ZsGame *game,
                         size_t player,
                         double pinning,
                         struct ZsOptResult *out);

/**
 * Symmetric fixed point of the group-1 maximin map and the alien strategy
 * of the Nash profile constructed from it.
 *
 * # Safety
 * `out` must be writable.
 */
enum ZsStatus zs_fixed_point(const struct ZsGame *game, struct ZsFixedPoint *out);

/**
 * Runs a CLI command (`nash`, `maximin`, `fixedpoint`, `verify`,
 * `counterexample`) and returns its JSON report in `*out`, to be released
 * with [`zs_string_free`]. A report whose verdict is `fail` or `fault`
 * still returns `ZS_STATUS_OK`.
 *
 * # Safety
 * `command` must be a NUL-terminated string and `out` must be writable.
 */
enum ZsStatus zs_run_command_json(const struct ZsGame *game, const char *command, char **out);

/**
 * # Safety
 * `s` must be null or a string returned by this library, freed once.
 */
void zs_string_free(char *s);

/**
 * Message for the last failed call on this thread, or null. The pointer is
 * valid until the next call into the library from the same thread.
 */
const char *zs_last_error_message(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ZEROSUM_ALIEN_H */
