#ifndef CURVFLOW_CAPI_H
#define CURVFLOW_CAPI_H

/* C interface to the curvature-flow laboratory. All entry points return a
 * status code; outputs go through pointer arguments. Handles are opaque and
 * must be released with the matching destroy call. Strings returned through
 * char** are heap-allocated; release them with cf_free_string. */

#include <stddef.h>

#if defined(_WIN32)
#define CF_EXPORT __declspec(dllexport)
#else
#define CF_EXPORT __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum cf_status_t {
  CF_SUCCESS = 0,
  CF_BAD_ARG = 1,
  CF_PARSE_ERROR = 2,   /* malformed speed expression */
  CF_DOMAIN_ERROR = 3,  /* evaluation outside the positive cone */
  CF_HYPOTHESIS = 4,    /* requested analysis needs a condition that fails */
  CF_NUMERIC = 5,       /* iteration failed to converge / non-finite values */
  CF_INTERNAL = 6
} cf_status_t;

typedef struct cf_speed cf_speed_t;
typedef struct cf_profile cf_profile_t;
typedef struct cf_trajectory cf_trajectory_t;

CF_EXPORT const char* cf_status_string(cf_status_t status);

/* Message for the most recent failure on this thread; empty if none. The
 * pointer stays valid until the next failing call on the same thread. */
CF_EXPORT const char* cf_last_error(void);

CF_EXPORT void cf_free_string(char* s);

/* Speeds ------------------------------------------------------------------ */

CF_EXPORT cf_status_t cf_speed_parse(const char* text, int n, double alpha,
                                     cf_speed_t** out);
CF_EXPORT void cf_speed_destroy(cf_speed_t* speed);

CF_EXPORT cf_status_t cf_speed_value(const cf_speed_t* speed, const double* kappa,
                                     int n, double* out);
CF_EXPORT cf_status_t cf_speed_dual(const cf_speed_t* speed, cf_speed_t** out);
CF_EXPORT cf_status_t cf_speed_restrict(const cf_speed_t* speed, int m,
                                        cf_speed_t** out);

/* Full structural report as a JSON document (conditions, flat-side behaviour,
 * persistence of lower-dimensional pieces, singularity certificates,
 * regularity of the closing shape). */
CF_EXPORT cf_status_t cf_classify(const cf_speed_t* speed, int samples,
                                  unsigned long long seed, char** json_out);

/* Profiles and flows ------------------------------------------------------ */

/* init strings: "sphere:R" | "bump:theta0,h" | "band:theta1,theta2,h1,h2" |
 * "fourier:c0,c1,.." | "cylinder:R,u0,umax" */
CF_EXPORT cf_status_t cf_profile_create(const char* init, int n, double alpha,
                                        int grid_points, cf_profile_t** out);
CF_EXPORT void cf_profile_destroy(cf_profile_t* profile);
CF_EXPORT cf_status_t cf_profile_size(const cf_profile_t* profile, int* out);
CF_EXPORT cf_status_t cf_profile_values(const cf_profile_t* profile, double* buffer,
                                        int capacity);

CF_EXPORT cf_status_t cf_evolve(const cf_profile_t* initial, const cf_speed_t* speed,
                                double t_end, int stored_steps, int extend_past_convexity,
                                cf_trajectory_t** out);
CF_EXPORT void cf_trajectory_destroy(cf_trajectory_t* traj);

CF_EXPORT cf_status_t cf_trajectory_steps(const cf_trajectory_t* traj, int* out);
CF_EXPORT cf_status_t cf_trajectory_time(const cf_trajectory_t* traj, int index,
                                         double* out);
CF_EXPORT cf_status_t cf_trajectory_profile(const cf_trajectory_t* traj, int index,
                                            cf_profile_t** out);

/* First event of the given kind ("r1_negative", "domain_exit", "extinction");
 * CF_HYPOTHESIS if the trajectory has no such event. */
CF_EXPORT cf_status_t cf_trajectory_event(const cf_trajectory_t* traj,
                                          const char* kind, double* t_out);

/* Audit a stored trajectory against the comparison bounds; JSON report. */
CF_EXPORT cf_status_t cf_verify(const cf_trajectory_t* traj, const cf_speed_t* speed,
                                char** json_out);

/* CSV serialisations (header comment line + %.17g rows). */
CF_EXPORT cf_status_t cf_trajectory_csv(const cf_trajectory_t* traj,
                                        const char* config_line, char** csv_out);
CF_EXPORT cf_status_t cf_diagnostics_csv(const cf_trajectory_t* traj,
                                         const char* config_line, char** csv_out);
CF_EXPORT cf_status_t cf_embedding_csv(const cf_profile_t* profile,
                                       const char* config_line, char** csv_out);

/* Barrier profiles --------------------------------------------------------- */

/* kinds: "flat_sub" (alpha > 1), "graph_super" (alpha = 1, needs r_plus = p1,
 * v = p2), "cyl_sub", "ridge_super" (u0 = p1). Result is a CSV table
 * x,value,margin plus a trailing comment with the certificate numbers. */
CF_EXPORT cf_status_t cf_barrier_csv(const cf_speed_t* speed, const char* kind,
                                     double p1, double p2, const char* config_line,
                                     char** csv_out);

#ifdef __cplusplus
}
#endif

#endif /* CURVFLOW_CAPI_H */
