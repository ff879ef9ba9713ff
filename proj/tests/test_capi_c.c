/* Compile-and-run check that the shared-library header is usable from C. */
#include <cvqkd.h>

#include <math.h>
#include <stdio.h>
#include <string.h>

static int set(cvqkd_opts* o, const char* key, double v) {
    if (cvqkd_opts_set(o, key, v) != CVQKD_OK) {
        fprintf(stderr, "set %s: %s\n", key, cvqkd_last_error());
        return 1;
    }
    return 0;
}

int main(void) {
    int failures = 0;
    cvqkd_opts* o = cvqkd_opts_new();
    if (!o) return 1;

    failures += cvqkd_opts_set(o, "no.such.key", 1.0) == CVQKD_ERR_KEY ? 0 : 1;
    failures += set(o, "channel.eta", 1.0);
    failures += set(o, "channel.xi", 0.0);
    failures += set(o, "protocol.mu", 0.6);
    failures += set(o, "protocol.p_sig", 0.8);
    failures += set(o, "protocol.x_th", 0.5);
    failures += set(o, "protocol.kappa", 2.0);
    failures += set(o, "protocol.gamma", 0.3);

    cvqkd_table* t = NULL;
    if (cvqkd_run_rate(o, &t) != CVQKD_OK) {
        fprintf(stderr, "rate: %s\n", cvqkd_last_error());
        failures += 1;
    } else {
        if (cvqkd_table_rows(t) != 1) failures += 1;
        double security = 0.0;
        size_t c;
        for (c = 0; c < cvqkd_table_cols(t); ++c)
            if (strcmp(cvqkd_table_col_name(t, c), "security_level") == 0)
                security = cvqkd_table_value(t, 0, c);
        if (fabs(security - ldexp(1.0, -50)) > 1e-30) failures += 1;
    }
    cvqkd_table_free(t);
    cvqkd_opts_free(o);
    if (failures) fprintf(stderr, "%d C-API check(s) failed\n", failures);
    return failures;
}
