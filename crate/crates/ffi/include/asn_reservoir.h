#ifndef ASN_RESERVOIR_H
#define ASN_RESERVOIR_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum AsnStatus {
  ASN_STATUS_OK = 0,
  ASN_STATUS_NULL_POINTER = 1,
  ASN_STATUS_INVALID_ARGUMENT = 2,
  ASN_STATUS_DIMENSION = 3,
  ASN_STATUS_NOT_FOUND = 4,
  ASN_STATUS_VERSION = 5,
  ASN_STATUS_MALFORMED = 6,
  ASN_STATUS_IO = 7,
  ASN_STATUS_UNTRAINED = 8,
  ASN_STATUS_NUMERIC = 9,
  ASN_STATUS_PANIC = 10,
} AsnStatus;

typedef struct AsnModel AsnModel;

typedef struct AsnSimulator AsnSimulator;

typedef struct AsnTopologySpec {
  size_t n;
  size_t inputs;
  size_t outputs;
  double connectivity;
  double spectral_radius;
  double input_scale;
  double fb_scale;
  double tau0;
  uint32_t d_max;
} AsnTopologySpec;

/*
 Ideal-backend dynamics.
 */
typedef struct AsnDynamics {
  double activation_gain;
  double noise_gain;
  double decay;
  size_t washout;
} AsnDynamics;

typedef struct AsnDeviceParams {
  double v_dd;
  double slope_beta;
  double noise_amp_alpha;
} AsnDeviceParams;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Message for the last failed call on this thread; empty after success.
 Valid until the next call into this library from the same thread.
 */
const char *asn_last_error(void);

struct AsnTopologySpec asn_topology_spec_default(void);

struct AsnDynamics asn_dynamics_default(void);

struct AsnDeviceParams asn_device_default(void);

/*
 Builds a random topology with ideal-backend dynamics.

 # Safety
 `spec`, `dynamics` and `out` must be valid pointers.
 */
enum AsnStatus asn_model_generate(const struct AsnTopologySpec *spec,
                                  const struct AsnDynamics *dynamics,
                                  uint64_t seed,
                                  struct AsnModel **out);

/*
 # Safety
 `path` must be a NUL-terminated string and `out` a valid pointer.
 */
enum AsnStatus asn_model_load(const char *path, struct AsnModel **out);

/*
 # Safety
 `model` must come from this library; `path` must be NUL-terminated.
 */
enum AsnStatus asn_model_save(const struct AsnModel *model, const char *path);

/*
 # Safety
 `model` must come from this library and not be used afterwards.
 */
void asn_model_free(struct AsnModel *model);

/*
 # Safety
 `model` must come from this library; output pointers may be null.
 */
enum AsnStatus asn_model_dims(const struct AsnModel *model,
                              size_t *n,
                              size_t *inputs,
                              size_t *outputs);

/*
 1 if the model carries readout weights, 0 otherwise (or for null).

 # Safety
 `model` must be null or come from this library.
 */
int32_t asn_model_has_readout(const struct AsnModel *model);

/*
 Fits the readout from `states` (n×samples) and `targets`
 (outputs×samples), both row-major.

 # Safety
 `model` must come from this library; arrays must hold the stated sizes.
 */
enum AsnStatus asn_model_train_readout(struct AsnModel *model,
                                       const double *states,
                                       const double *targets,
                                       size_t samples,
                                       double ridge);

/*
 Starts a simulator from the zero state. The model is copied.

 # Safety
 `model` must come from this library and `out` be a valid pointer.
 */
enum AsnStatus asn_simulator_new(const struct AsnModel *model,
                                 uint64_t seed,
                                 struct AsnSimulator **out);

/*
 # Safety
 `sim` must come from this library and not be used afterwards.
 */
void asn_simulator_free(struct AsnSimulator *sim);

/*
 Advances one step with input `u` and fed-back output `y_prev` (null for
 zero feedback), writing the new state into `x_out` when non-null.

 # Safety
 `sim` must come from this library; arrays must hold the stated lengths.
 */
enum AsnStatus asn_simulator_step(struct AsnSimulator *sim,
                                  const double *u,
                                  size_t u_len,
                                  const double *y_prev,
                                  size_t y_len,
                                  double *x_out,
                                  size_t x_len);

/*
 Readout of the current state into `y_out` (length = outputs).

 # Safety
 `sim` must come from this library; `y_out` must hold `y_len` doubles.
 */
enum AsnStatus asn_simulator_output(const struct AsnSimulator *sim, double *y_out, size_t y_len);

/*
 Moore-Penrose pseudo-inverse of a rows×cols row-major matrix into `out`
 (cols×rows, row-major). `rcond <= 0` selects the default cutoff.

 # Safety
 `a` must hold rows·cols doubles and `out` cols·rows doubles.
 */
enum AsnStatus asn_pinv(const double *a, size_t rows, size_t cols, double rcond, double *out);

/*
 Noise-free device response `(v_dd/2)·tanh(β·v)`.

 # Safety
 `device` must be a valid pointer.
 */
enum AsnStatus asn_device_mean(const struct AsnDeviceParams *device, double v, double *out);

/*
 Draws `count` stochastic device responses at input `v`.

 # Safety
 `device` must be valid and `out` must hold `count` doubles.
 */
enum AsnStatus asn_device_sample(const struct AsnDeviceParams *device,
                                 double v,
                                 uint64_t seed,
                                 double *out,
                                 size_t count);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ASN_RESERVOIR_H */
