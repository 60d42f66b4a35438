/* C interface for the ledgerlearn collaborative fraud-detection node. */

#ifndef LEDGERLEARN_H
#define LEDGERLEARN_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by every FFI call.
 */
typedef enum LlnStatus {
  LLN_STATUS_OK = 0,
  LLN_STATUS_NULL_POINTER = 1,
  LLN_STATUS_INVALID_UTF8 = 2,
  LLN_STATUS_INVALID_ARGUMENT = 3,
  LLN_STATUS_IO_ERROR = 4,
  LLN_STATUS_NOT_AUTHORIZED = 5,
  LLN_STATUS_UNKNOWN_ACCOUNT = 6,
  /**
   * The dataset was rejected by the preparation pipeline.
   */
  LLN_STATUS_REJECTED = 7,
  LLN_STATUS_INTERNAL = 8,
} LlnStatus;

/**
 * Account roles, mirrored for C callers.
 */
typedef enum LlnRole {
  LLN_ROLE_REGULATOR = 0,
  LLN_ROLE_CONTRIBUTOR = 1,
  LLN_ROLE_USER = 2,
} LlnRole;

/**
 * Opaque simulation handle.
 */
typedef struct LlnSim LlnSim;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Detail message for the most recent failure on this thread. The pointer
 * stays valid until the next failing call on the same thread.
 */
const char *lln_last_error_message(void);

/**
 * Frees a string handed out by this library.
 */
void lln_string_free(char *s);

/**
 * Generates a synthetic transaction CSV; identical inputs give identical
 * bytes.
 */
enum LlnStatus lln_generate_csv(uint64_t rows,
                                double fraud_rate,
                                uint64_t seed,
                                double noise,
                                char **out_csv);

/**
 * Runs a deterministic scenario and returns a live handle plus the report
 * as JSON (pass NULL to skip the report). `config_json` is a JSON object
 * matching the simulation config; NULL or empty uses the defaults.
 */
enum LlnStatus lln_sim_scenario(const char *config_json,
                                uint32_t contributions,
                                struct LlnSim **out_sim,
                                char **out_report_json);

/**
 * Loads a simulation state previously saved to a data directory; the load
 * replays the journals and re-verifies the chain.
 */
enum LlnStatus lln_sim_load(const char *data_dir, struct LlnSim **out_sim);

/**
 * Saves the simulation state under a data directory.
 */
enum LlnStatus lln_sim_save(struct LlnSim *sim, const char *data_dir);

/**
 * Destroys a simulation handle.
 */
void lln_sim_free(struct LlnSim *sim);

/**
 * Registers an account through the regulator; returns its 64-hex id.
 */
enum LlnStatus lln_sim_register(struct LlnSim *sim,
                                const char *name,
                                enum LlnRole role,
                                char **out_id);

/**
 * Submits a dataset (CSV bytes) as a contributor; the outcome is returned
 * as JSON. A dataset the pipeline rejects yields `Rejected` and the reason
 * is still written to the outcome JSON.
 */
enum LlnStatus lln_sim_contribute(struct LlnSim *sim,
                                  const char *contributor_id,
                                  const uint8_t *csv,
                                  uintptr_t csv_len,
                                  char **out_outcome_json);

/**
 * Predicts one feature row with the current best model. The serving model
 * hash is returned when `out_model_hash` is non-NULL.
 */
enum LlnStatus lln_sim_query(struct LlnSim *sim,
                             const char *caller_id,
                             const double *row,
                             uintptr_t row_len,
                             uint8_t *out_prediction,
                             char **out_model_hash);

/**
 * Verifies the chain; writes -1 for a valid chain, otherwise the index of
 * the first invalid block.
 */
enum LlnStatus lln_sim_chain_verify(const struct LlnSim *sim, int64_t *out_first_invalid);

/**
 * Counters and chain facts as JSON.
 */
enum LlnStatus lln_sim_stats_json(const struct LlnSim *sim, char **out_json);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* LEDGERLEARN_H */
