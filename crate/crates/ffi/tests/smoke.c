#include <stdio.h>
#include <stdlib.h>
#include "hmfe.h"

int main(void) {
    HmfeSolution *sol = NULL;
    HmfeCurve *curve = NULL;
    if (hmfe_construct("1,1,1", &sol) != HMFE_STATUS_OK) {
        fprintf(stderr, "construct: %s\n", hmfe_last_error());
        return 1;
    }
    if (hmfe_curve_roots_of_unity(8, 2.0, &curve) != HMFE_STATUS_OK) {
        return 1;
    }
    double a = 0.0, phi = 0.0, est = 0.0, expected = 0.0;
    size_t len = 0;
    double u[8];
    hmfe_solution_a(sol, &a);
    hmfe_solution_u(sol, u, 8, &len);
    hmfe_phi(sol, curve, HMFE_CHART_C0, 0.0, 0.0, &phi);
    hmfe_mass(sol, curve, 400, &est, &expected);
    printf("a=%.1f len=%zu u2=%.2f phi0=%.1f mass=%.3f expected=%.3f\n", a, len, u[2], phi, est, expected);
    if (hmfe_psi(sol, curve, HMFE_CHART_C0, 2.0, 0.0, &phi) != HMFE_STATUS_SINGULARITY) {
        return 2;
    }
    hmfe_solution_free(sol);
    hmfe_curve_free(curve);
    return 0;
}
