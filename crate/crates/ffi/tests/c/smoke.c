#include <math.h>
#include <stdio.h>
#include <stdlib.h>
#include "harmonica.h"

int main(void) {
    HarmFamily *fam = NULL;
    if (harm_family_new("{\"family\":\"torus\",\"params\":{\"a\":0.5}}", &fam) != HARM_STATUS_OK) {
        fprintf(stderr, "%s\n", harm_last_error());
        return 1;
    }
    double b = 0.0;
    if (harm_torus_period_b(0.5, &b) != HARM_STATUS_OK || !(b > -2.0 && b < 0.0)) return 2;
    HarmMesh *mesh = NULL;
    if (harm_mesh_sample(fam, 16, 16, &mesh) != HARM_STATUS_OK) return 3;
    size_t nv = harm_mesh_vertex_count(mesh);
    double *v = malloc(3 * nv * sizeof(double));
    if (harm_mesh_vertices(mesh, v, 3 * nv) != HARM_STATUS_OK) return 4;
    for (size_t k = 0; k < 3 * nv; k++)
        if (!isfinite(v[k])) return 5;
    free(v);
    harm_mesh_free(mesh);
    harm_family_free(fam);
    if (harm_family_new("{\"family\":\"rotational\",\"params\":{\"b\":\"-1+0i\"}}", &fam) != HARM_STATUS_INVALID_ARGUMENT)
        return 6;
    printf("ok %zu %.9f\n", nv, b);
    return 0;
}
