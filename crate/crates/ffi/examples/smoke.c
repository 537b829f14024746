#include <stdio.h>
#include "tsvha.h"

int main(void) {
    double c[3];
    if (tsvha_c2_coefficients(3, c, 3) != TSVHA_STATUS_OK) {
        fprintf(stderr, "%s\n", tsvha_last_error());
        return 1;
    }
    printf("c2: %.6f %.6f %.6f\n", c[0], c[1], c[2]);

    TsvhaPolicy *policy = NULL;
    if (tsvha_policy_new(TSVHA_POLICY_KIND_TS, TSVHA_FAMILY_BETA, 1, 0.0, 2, 7, &policy) != TSVHA_STATUS_OK) {
        fprintf(stderr, "%s\n", tsvha_last_error());
        return 1;
    }
    size_t arm = 0;
    for (int t = 0; t < 100; t++) {
        tsvha_policy_select(policy, &arm);
        tsvha_policy_update(policy, arm, arm == 0 ? 1.0 : 0.0);
    }
    uint64_t plays = 0;
    tsvha_policy_plays(policy, 0, &plays);
    printf("arm 0 plays: %llu\n", (unsigned long long)plays);
    tsvha_policy_free(policy);

    double b = 0.0;
    double gaps[1] = {0.5};
    if (tsvha_theorem1_bound(2.0, 1.0, 0.5, gaps, 1, 1000, &b) != TSVHA_STATUS_DOMAIN) {
        return 1;
    }
    printf("rejected: %s\n", tsvha_last_error());
    return 0;
}
