#ifndef TML_TML_H
#define TML_TML_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define TML_API __declspec(dllexport)
#else
#define TML_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum tml_status {
    TML_OK = 0,
    TML_INVALID_ARGUMENT = 1, /* bad parameters, malformed JSON, null pointers */
    TML_DOMAIN_ERROR = 2,     /* index or value outside the domain of the operation */
    TML_REFUSED = 3,          /* a hypothesis of the computation could not be established */
    TML_BUFFER_TOO_SMALL = 4,
    TML_INTERNAL = 5
} tml_status;

typedef enum tml_boundary { TML_DIRICHLET = 0, TML_NEUMANN = 1 } tml_boundary;

typedef struct tml_potential tml_potential;

/* Message for the last failing call on this thread; empty after success. */
TML_API const char* tml_last_error(void);
TML_API const char* tml_version(void);

/* Potential from its JSON description (family, domain and parameters). */
TML_API tml_status tml_potential_create_json(const char* json, tml_potential** out);
TML_API void tml_potential_destroy(tml_potential* p);
TML_API tml_status tml_potential_eval(const tml_potential* p, int64_t n, double* out);
TML_API uint64_t tml_potential_fingerprint(const tml_potential* p);

/* T_E(n, m) = exp(*log_scale) * mat, mat row-major with operator norm 1. */
TML_API tml_status tml_transfer(const tml_potential* p, double E, int64_t n, int64_t m, double mat[4],
                                double* log_scale);
/* out[n-1] = log ||T_E(n)||, n = 1..L. */
TML_API tml_status tml_norm_trajectory(const tml_potential* p, double E, int64_t L, double* out);
/* Herglotz m-function at z = re + i im, im > 0. depth 0 picks the default truncation. */
TML_API tml_status tml_m_function(const tml_potential* p, double re, double im, tml_boundary bc, int64_t depth,
                                  double* out_re, double* out_im);
/* Eigenvalues and spectral weights of the truncation to N sites; E and w hold N entries each. */
TML_API tml_status tml_eig(const tml_potential* p, int64_t N, tml_boundary bc, double* E, double* w);
/* First K terms of the binary-word concatenation sequence. */
TML_API tml_status tml_bernoulli_sequence(int64_t K, int* out);

/* Runs an experiment from a JSON config. *exit_code receives 0 (ok), 1 (failure), 2 (config error)
   or 3 (refusal); the diagnostic is available through tml_last_error. threads <= 0 uses the
   TMLAB_THREADS environment variable or the hardware concurrency. */
TML_API tml_status tml_run_experiment(const char* config_json, const char* out_dir, int threads, int* exit_code);
/* Names of all experiments, newline separated. */
TML_API const char* tml_experiment_names(void);
/* Description of an experiment into buf (NUL terminated). *needed receives the required size
   including the terminator. Unknown names give TML_INVALID_ARGUMENT. */
TML_API tml_status tml_describe(const char* experiment, char* buf, size_t buflen, size_t* needed);

#ifdef __cplusplus
}
#endif

#endif
