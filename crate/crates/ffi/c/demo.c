/* Builds the Klein Schottky group in SO(1, 2) and prints the Jordan
 * projection of a few words, then the exact A(3) ratio bound. */
#include <stdio.h>
#include "rigidity.h"

int main(void) {
    RigidityRep *rep = NULL;
    if (rigidity_rep_klein(2, 2, 2.0, 0, &rep) != RIGIDITY_STATUS_OK) {
        fprintf(stderr, "%s\n", rigidity_last_error());
        return 1;
    }
    const char *words[] = {"a", "ab", "aB"};
    double lambda[3];
    for (int i = 0; i < 3; i++) {
        if (rigidity_rep_jordan(rep, words[i], lambda, 3) != RIGIDITY_STATUS_OK) {
            fprintf(stderr, "%s\n", rigidity_last_error());
            return 1;
        }
        printf("%s %.12f %.12f %.12f\n", words[i], lambda[0], lambda[1], lambda[2]);
    }
    if (rigidity_rep_jordan(rep, "x", lambda, 3) != RIGIDITY_STATUS_WORD_PARSE) {
        return 1;
    }
    rigidity_rep_free(rep);
    int64_t num, den;
    if (rigidity_weyl_ratio_bound("A", 3, &num, &den) != RIGIDITY_STATUS_OK) {
        return 1;
    }
    printf("A(3) %lld/%lld\n", (long long)num, (long long)den);
    return 0;
}
