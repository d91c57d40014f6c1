#include <stdio.h>
#include <string.h>

#include "asn_reservoir.h"

int main(void) {
    AsnTopologySpec spec = asn_topology_spec_default();
    AsnDynamics dyn = asn_dynamics_default();
    AsnModel *model = NULL;
    if (asn_model_generate(&spec, &dyn, 1, &model) != ASN_STATUS_OK) {
        fprintf(stderr, "generate: %s\n", asn_last_error());
        return 1;
    }

    size_t n = 0, inputs = 0, outputs = 0;
    asn_model_dims(model, &n, &inputs, &outputs);

    AsnSimulator *sim = NULL;
    if (asn_simulator_new(model, 7, &sim) != ASN_STATUS_OK) {
        return 1;
    }
    double u = 0.5, x[256];
    for (int t = 0; t < 10; t++) {
        if (asn_simulator_step(sim, &u, 1, NULL, 0, x, n) != ASN_STATUS_OK) {
            fprintf(stderr, "step: %s\n", asn_last_error());
            return 1;
        }
    }

    AsnModel *missing = NULL;
    AsnStatus st = asn_model_load("/nonexistent/model.json", &missing);
    int ok = st == ASN_STATUS_NOT_FOUND && strstr(asn_last_error(), "model not found") != NULL;

    printf("n=%zu inputs=%zu outputs=%zu x0=%.6f missing=%d\n", n, inputs, outputs, x[0], (int)st);
    asn_simulator_free(sim);
    asn_model_free(model);
    return ok ? 0 : 1;
}
