#ifndef PPP_ASE_H
#define PPP_ASE_H

/* Generated by cbindgen from crates/ffi/src. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum PpaStatus {
  PPA_STATUS_OK = 0,
  PPA_STATUS_NULL_POINTER = 1,
  // Argument outside the mathematical domain.
  PPA_STATUS_DOMAIN = 2,
  // Bad profile or configuration.
  PPA_STATUS_CONFIG = 3,
  // Quadrature, bisection or bracketing failed to converge.
  PPA_STATUS_CONVERGENCE = 4,
  PPA_STATUS_RANK_DEFICIENT = 5,
  PPA_STATUS_IO = 6,
  PPA_STATUS_INVALID_UTF8 = 7,
  PPA_STATUS_PANIC = 8,
} PpaStatus;

typedef enum PpaPlanMethod {
  PPA_PLAN_METHOD_OPTIMAL = 0,
  PPA_PLAN_METHOD_SUBOPTIMAL = 1,
  PPA_PLAN_METHOD_SU_MIMO_BASELINE = 2,
  PPA_PLAN_METHOD_SINGLE_ANTENNA_BASELINE = 3,
} PpaPlanMethod;

typedef enum PpaSimMode {
  PPA_SIM_MODE_FULL_ZF = 0,
  PPA_SIM_MODE_GAMMA_APPROX = 1,
} PpaSimMode;

// Opaque BS power profile.
typedef struct PpaProfile PpaProfile;

// Opaque rate model bound to one path-loss exponent.
typedef struct PpaRateModel PpaRateModel;

typedef struct PpaRate {
  // nats/s/Hz.
  double mean_rate;
  bool is_lower_bound;
  double quadrature_error_estimate;
} PpaRate;

typedef struct PpaLoading {
  double u_star;
  double gapa;
  double alpha;
} PpaLoading;

typedef struct PpaPlan {
  double lambda_b_star;
  uint32_t m_star;
  uint32_t k_star;
  double nec;
  double energy_efficiency;
  uint64_t iterations;
  enum PpaPlanMethod method;
  bool converged;
  // NaN unless `method` is suboptimal.
  double m_relaxed;
  double k_relaxed;
} PpaPlan;

typedef struct PpaSimResult {
  double mean_rate;
  double std_error;
  uint64_t trials_used;
  double sir_q05;
  double sir_q50;
  double sir_q95;
  double g00_mean;
  double g00_variance;
  double gi0_mean;
  double gi0_variance;
} PpaSimResult;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Copies the calling thread's last error message into `buf` (NUL
// terminated, truncated to `len - 1` bytes) and returns the full message
// length excluding the terminator. Pass `buf = NULL` to query the length.
size_t ppa_last_error_message(char *buf, size_t len);

// Static, NUL-terminated crate version.
const char *ppa_version(void);

enum PpaStatus ppa_rate_model_new(double alpha, struct PpaRateModel **model_out);

// Accepts NULL.
void ppa_rate_model_free(struct PpaRateModel *model);

// Exact mean rate for integer `1 ≤ k ≤ m`.
enum PpaStatus ppa_mean_rate_exact(const struct PpaRateModel *model,
                                   uint32_t m,
                                   uint32_t k,
                                   struct PpaRate *rate_out);

// Lower bound on the mean rate; real `0 < k ≤ m`.
enum PpaStatus ppa_mean_rate_lower_bound(const struct PpaRateModel *model,
                                         double m,
                                         double k,
                                         struct PpaRate *rate_out);

// ASE in nats/s/Hz/km². With `lower_bound = false`, `m` and `k` must be integers.
enum PpaStatus ppa_ase(const struct PpaRateModel *model,
                       double lambda_b,
                       double m,
                       double k,
                       bool lower_bound,
                       double *ase_out);

enum PpaStatus ppa_optimal_user_fraction(double alpha, struct PpaLoading *loading_out);

// ASE-maximizing `K` for `m` antennas by exhaustive exact evaluation.
enum PpaStatus ppa_optimal_k_exact(uint32_t m, double alpha, uint32_t *k_out);

// Built-in profile: "macro", "micro", "pico", "macro-nominal" or "micro-nominal".
enum PpaStatus ppa_profile_builtin(const char *name, struct PpaProfile **profile_out);

// Profile from explicit values: `p` W, `eta` in (0, 1], `pc`, `ppre`, `p0` W.
enum PpaStatus ppa_profile_new(double p,
                               double eta,
                               double pc,
                               double ppre,
                               double p0,
                               struct PpaProfile **profile_out);

// Accepts NULL.
void ppa_profile_free(struct PpaProfile *profile);

// Per-BS power in W.
enum PpaStatus ppa_bs_energy(const struct PpaProfile *profile,
                             uint32_t m,
                             uint32_t k,
                             double *watts_out);

// Energy plan for ASE target `t_target` (nats/s/Hz/km²). The suboptimal
// method starts its alternation from K = 1.
enum PpaStatus ppa_plan(const struct PpaProfile *profile,
                        double alpha,
                        double t_target,
                        enum PpaPlanMethod method,
                        struct PpaPlan *plan_out);

// Monte Carlo rate of the typical user at unit density with the default
// window. Results are a function of the arguments only.
enum PpaStatus ppa_simulate(uint32_t m,
                            uint32_t k,
                            double alpha,
                            uint64_t trials,
                            uint64_t seed,
                            enum PpaSimMode mode,
                            struct PpaSimResult *result_out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PPP_ASE_H */
