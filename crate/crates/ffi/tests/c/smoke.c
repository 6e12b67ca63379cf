#include <stdio.h>
#include <string.h>

#include "msrg.h"

#define CHECK(cond)                                            \
    do {                                                       \
        if (!(cond)) {                                         \
            fprintf(stderr, "check failed: %s\n", #cond);      \
            return 1;                                          \
        }                                                      \
    } while (0)

int main(void) {
    uint8_t a[] = {0, 1};
    uint8_t b[] = {1, 0};
    MsrgProblem *p = NULL;
    CHECK(msrg_problem_new(MSRG_MODEL_B, a, 2, b, 2, &p) == MSRG_STATUS_OK);

    MsrgSolution *s = NULL;
    CHECK(msrg_solve(p, 6, MSRG_REG_CUTOFF, 2, 0, &s) == MSRG_STATUS_OK);
    size_t len = 0;
    CHECK(msrg_solution_row_len(s, 1, &len) == MSRG_STATUS_OK);
    CHECK(len == 5);
    uint8_t bit = 9, ok = 0;
    CHECK(msrg_solution_value(s, 0, 0, &bit) == MSRG_STATUS_OK && bit == 1);
    CHECK(msrg_solution_residual_ok(s, &ok) == MSRG_STATUS_OK && ok == 1);

    CHECK(msrg_solution_value(s, 1, 1000, &bit) == MSRG_STATUS_OUT_OF_RANGE);
    char msg[256];
    CHECK(msrg_last_error_message(msg, sizeof msg) > 1);
    CHECK(strstr(msg, "1000") != NULL);

    MsrgFlowMap *psi = NULL, *next = NULL;
    CHECK(msrg_flow_psi_new(MSRG_MODEL_A, 3, MSRG_REG_CUTOFF, &psi) == MSRG_STATUS_OK);
    CHECK(msrg_flow_rg_apply(psi, &next) == MSRG_STATUS_OK);
    uint8_t in[] = {1, 0, 1}, outv[3];
    CHECK(msrg_flow_apply(next, in, 3, outv, 3) == MSRG_STATUS_OK);

    char digits[64];
    size_t needed = 0;
    CHECK(msrg_phase_p_coefficient(2, 5, digits, sizeof digits, &needed) == MSRG_STATUS_OK);
    CHECK(strcmp(digits, "32") == 0 && needed == 3);

    msrg_flow_free(next);
    msrg_flow_free(psi);
    msrg_solution_free(s);
    msrg_problem_free(p);
    printf("ok %s\n", msrg_version());
    return 0;
}
