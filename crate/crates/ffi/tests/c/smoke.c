#include <stdio.h>
#include "frachill.h"

int main(void) {
    FrachillSystem *sys = NULL;
    if (frachill_system_scalar_sinusoid(0.5, 1.0, -1.0, 2.2, &sys) != FRACHILL_STATUS_OK) return 1;
    double logdet = 0.0, sigma = 0.0;
    if (frachill_hill_log_abs_det(sys, 5, 0.3, 0.1, &logdet, &sigma) != FRACHILL_STATUS_OK) return 2;
    FrachillEigenvalues *eigs = NULL;
    if (frachill_find_eigenvalues(sys, 10, 1e-9, NULL, &eigs) != FRACHILL_STATUS_OK) return 3;
    size_t n = frachill_eigenvalues_len(eigs);
    FrachillEigenvalue ev;
    for (size_t i = 0; i < n; i++) {
        if (frachill_eigenvalues_get(eigs, i, &ev) != FRACHILL_STATUS_OK) return 4;
        printf("%.12f %.12f %d\n", ev.re, ev.im, ev.valid);
    }
    if (frachill_eigenvalues_get(eigs, n, &ev) != FRACHILL_STATUS_INDEX_OUT_OF_RANGE) return 5;
    char msg[256];
    frachill_last_error(msg, sizeof msg);
    fprintf(stderr, "%s\n", msg);
    frachill_eigenvalues_free(eigs);
    frachill_system_free(sys);
    return 0;
}
