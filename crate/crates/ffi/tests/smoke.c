#include <stdio.h>
#include "confhyp.h"

int main(void) {
    ConfhypScenario *s = NULL;
    if (confhyp_scenario_generate(4, 3, 1, true, &s) != CONFHYP_STATUS_OK) {
        fprintf(stderr, "generate: %s\n", confhyp_last_error());
        return 1;
    }
    ConfhypReport *r = NULL;
    ConfhypStatus st = confhyp_verify(s, CONFHYP_MODE_EXACT, 1, 0, &r);
    if (st != CONFHYP_STATUS_OK || !confhyp_report_passed(r)) {
        fprintf(stderr, "verify: %d\n", (int)st);
        return 1;
    }
    double h = -1.0;
    if (confhyp_report_value(r, "residual.identity.fialkow_gauss", &h) != CONFHYP_STATUS_OK || h != 0.0) {
        return 1;
    }
    confhyp_report_free(r);
    confhyp_scenario_free(s);
    if (confhyp_enumerate_count(3) != 2) {
        return 1;
    }
    puts("ok");
    return 0;
}
