/* C interface to the role and motivation platform.
 *
 * Every string returned through a `char**` out-parameter is owned by the
 * caller and released with roma_string_free. Requests and responses are
 * UTF-8 JSON. On failure a function returns a non-zero status and, when it
 * has an out-parameter, stores {"error": {"code": ..., "message": ...}} in it.
 */
#ifndef ROMA_ROMA_H
#define ROMA_ROMA_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define ROMA_API __declspec(dllexport)
#else
#define ROMA_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef struct roma_platform roma_platform;

typedef enum roma_status {
  ROMA_OK = 0,
  ROMA_ERR_INVALID_ARGUMENT = 1,
  ROMA_ERR_FORMAT = 2,
  ROMA_ERR_CHECKSUM_MISMATCH = 3,
  ROMA_ERR_MISSING_ITEM = 4,
  ROMA_ERR_DUPLICATE_ITEM = 5,
  ROMA_ERR_UNKNOWN_ITEM = 6,
  ROMA_ERR_OUT_OF_SCALE_VALUE = 7,
  ROMA_ERR_ZERO_VARIANCE = 8,
  ROMA_ERR_TOO_FEW_PROFILES = 9,
  ROMA_ERR_INVALID_K = 10,
  ROMA_ERR_EMPTY_MODEL = 11,
  ROMA_ERR_UNCLASSIFIED_MEMBER = 12,
  ROMA_ERR_INFEASIBLE_MATCHING = 13,
  ROMA_ERR_INSUFFICIENT_SAMPLES = 14,
  ROMA_ERR_NO_BASELINE = 15,
  ROMA_ERR_DEGENERATE_VARIANCE = 16,
  ROMA_ERR_ALL_TIED = 17,
  ROMA_ERR_ZERO_EXPECTED_CELL = 18,
  ROMA_ERR_ZERO_POOLED_SD = 19,
  ROMA_ERR_SERIALIZATION = 20,
  ROMA_ERR_STORAGE = 21,
  ROMA_ERR_UNVERIFIED_RANGE = 22,
  ROMA_ERR_INCOMPLETE_ASSESSMENTS = 23,
  ROMA_ERR_NO_DATA = 24,
  ROMA_ERR_PROJECT_OPEN = 25,
  ROMA_ERR_ANONYMITY_THRESHOLD = 26,
  ROMA_ERR_UNKNOWN_ANCHOR = 27,
  ROMA_ERR_NO_CONSENT = 28,
  ROMA_ERR_CONSENT_REVOKED = 29,
  ROMA_ERR_UNKNOWN_INSTRUMENT = 30,
  ROMA_ERR_VALIDATION = 31,
  ROMA_ERR_FORBIDDEN_PAIR_INTRODUCED = 32,
  ROMA_ERR_STALE_PROPOSAL = 33,
  ROMA_ERR_NOT_FOUND = 34,
  ROMA_ERR_CONFLICT = 35,
  ROMA_ERR_UNAUTHORIZED = 36,
  ROMA_ERR_CONFIG = 37,
  ROMA_ERR_INTERNAL = 99
} roma_status;

typedef enum roma_scope {
  ROMA_SCOPE_ADMIN = 0,
  ROMA_SCOPE_LEAD = 1,
  ROMA_SCOPE_MEMBER = 2
} roma_scope;

ROMA_API const char* roma_version(void);
/* Stable name such as "NoConsent"; "Ok" for ROMA_OK. */
ROMA_API const char* roma_status_name(roma_status status);
/* Message of the last failure on the calling thread ("" if none). */
ROMA_API const char* roma_last_error(void);
ROMA_API void roma_string_free(char* s);

/* Opens (creating if needed) a data directory holding ledger.bin and
 * store.db. `config_path` may be NULL for the defaults. */
ROMA_API roma_status roma_platform_open(const char* data_dir, const char* config_path,
                                        roma_platform** out);
ROMA_API void roma_platform_close(roma_platform* platform);

/* Runs one operation (create_team, register_member, grant_consent,
 * revoke_consent, submit_assessment, submit_pulse, get_profile, get_team,
 * recommend, accept_or_adjust, report, signal, list_triggers, set_sprint,
 * close_project, verify, export_memos). */
ROMA_API roma_status roma_platform_call(roma_platform* platform, const char* op,
                                        const char* request_json, char** response_json);
ROMA_API int roma_is_mutating(const char* op);

/* 1 when `token` grants `scope`; `member_id` may be NULL except for
 * ROMA_SCOPE_MEMBER. */
ROMA_API int roma_platform_authorize(const roma_platform* platform, roma_scope scope,
                                     const char* team_id, const char* member_id,
                                     const char* token);
/* Effective config as JSON (secrets omitted). */
ROMA_API roma_status roma_platform_config(const roma_platform* platform, char** config_json);
/* Canonical persisted state and the same state rebuilt from the ledger. */
ROMA_API roma_status roma_platform_snapshot(const roma_platform* platform, int replayed,
                                            char** state_json);

/* Stateless batch operations. `config_path` may be NULL. */
ROMA_API roma_status roma_score(const char* config_path, const char* request_json, char** out_json);
/* `k` = 0 selects k over [k_min, k_max] by the Dunn index. */
ROMA_API roma_status roma_cluster(const char* cohort_text, size_t k_min, size_t k_max, size_t k,
                                  char** out_json);
ROMA_API roma_status roma_recommend(const char* config_path, const char* request_json,
                                    char** out_json);
ROMA_API roma_status roma_match(const char* config_path, const char* request_json,
                                char** out_json);
/* ROMA_OK when the chain verifies, ROMA_ERR_CHECKSUM_MISMATCH when it does
 * not; the result JSON is filled in both cases. */
ROMA_API roma_status roma_verify_ledger(const char* ledger_path, char** out_json);
/* JSONL memo export of [from, to]; `to` = 0 means the head. */
ROMA_API roma_status roma_export_memos(const char* ledger_path, uint64_t from, uint64_t to,
                                       char** out_jsonl);

#ifdef __cplusplus
}
#endif

#endif
