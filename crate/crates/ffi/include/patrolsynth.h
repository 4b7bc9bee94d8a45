/* C interface for patrolsynth.
 *
 * All functions return a ps_status code; results go through out-pointers.
 * Handles are opaque and must be released with the matching _free function.
 * Strings returned by the library are released with ps_string_free.
 * ps_last_error_message returns the last error on the calling thread; the
 * pointer stays valid until the next failing call on that thread.
 */

#ifndef PATROLSYNTH_H
#define PATROLSYNTH_H

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum ps_status {
  PS_OK = 0,
  PS_ERR_INVALID_ARGUMENT = 1,
  PS_ERR_VALIDATION = 2,
  PS_ERR_INFEASIBLE = 3,
  PS_ERR_INTERNAL = 4,
} ps_status;

typedef struct PsGame PsGame;
typedef struct PsStrategy PsStrategy;

const char *ps_last_error_message(void);

/* Game handles. The JSON layout matches the CLI spec files:
 * {"detection_prob": <0..1>, "groups": [{"count", "attack_length", "cost"}]}
 */
int32_t ps_game_from_json(const char *json, PsGame **out);
void ps_game_free(PsGame *game);
int32_t ps_game_vertex_count(const PsGame *game, uint64_t *out);

/* Bounds. */
int32_t ps_protection_upper_bound(const PsGame *game, uint64_t patrollers,
                                  double *out_bound);
int32_t ps_min_patrollers(const PsGame *game, double target,
                          uint64_t *out_patrollers);

/* Strategy synthesis and evaluation. */
int32_t ps_synthesize(const PsGame *game, uint64_t patrollers,
                      PsStrategy **out);
void ps_strategy_free(PsStrategy *strategy);
int32_t ps_strategy_level(const PsStrategy *strategy, double *out_level);
int32_t ps_strategy_upper_bound(const PsStrategy *strategy, double *out_bound);
int32_t ps_strategy_to_json(const PsStrategy *strategy, char **out_json);
int32_t ps_naive_level(const PsGame *game, uint64_t patrollers,
                       double *out_level);

void ps_string_free(char *s);

#ifdef __cplusplus
}
#endif

#endif /* PATROLSYNTH_H */
