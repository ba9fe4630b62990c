#include <math.h>
#include <stdio.h>
#include <string.h>

#include "terascope.h"

#define CHECK(cond)                                                   \
    do {                                                              \
        if (!(cond)) {                                                \
            fprintf(stderr, "%s:%d: check failed: %s\n", __FILE__,    \
                    __LINE__, #cond);                                 \
            return 1;                                                 \
        }                                                             \
    } while (0)

int main(void) {
    TsParams *p = ts_params_new_default();
    CHECK(p != NULL);

    double rt = 0.0;
    CHECK(ts_max_association_radius(p, &rt) == TS_STATUS_OK);
    CHECK(fabs(rt - 9.813604017351714) < 1e-10);

    TsCoverage c;
    CHECK(ts_coverage(p, 5.0, &c) == TS_STATUS_OK);
    CHECK(fabs(c.p_c - 0.7730739425989041) < 1e-9);

    CHECK(ts_params_set(p, "tau_dB", 60.0) == TS_STATUS_OK);
    CHECK(ts_max_association_radius(p, &rt) == TS_STATUS_INFEASIBLE_GEOMETRY);
    CHECK(ts_last_error() != NULL);
    CHECK(ts_params_set(p, "nope", 1.0) == TS_STATUS_UNKNOWN_KEY);

    double w = 0.0;
    CHECK(ts_lambert_w0(1.0, &w) == TS_STATUS_OK);
    CHECK(fabs(w - 0.5671432904097838) < 1e-15);
    CHECK(ts_lambert_w0(-1.0, &w) == TS_STATUS_DOMAIN);

    CHECK(strlen(ts_version()) > 0);
    ts_params_free(p);
    printf("ok\n");
    return 0;
}
