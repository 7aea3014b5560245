#include <stdio.h>
#include <string.h>
#include "cabsat.h"

#define CHECK(cond) do { if (!(cond)) { fprintf(stderr, "check failed line %d: %s\n", __LINE__, #cond); return 1; } } while (0)

int main(void) {
    CabGraph *g = NULL;
    CHECK(cab_graph_generate("caterpillar:5,4", &g) == CAB_STATUS_OK);
    CHECK(cab_graph_num_vertices(g) == 20);

    CabSolveOptions opts = cab_solve_options_default();
    opts.processes = 2;
    opts.order = CAB_ORDER_BFS;
    CabResult *r = NULL;
    CHECK(cab_solve(g, &opts, &r) == CAB_STATUS_OK);
    CHECK(cab_result_k_opt(r) == 8);
    CHECK(cab_result_certified(r));

    size_t labels[20];
    size_t value = 0;
    CHECK(cab_result_labeling(r, labels, 20) == CAB_STATUS_OK);
    CHECK(cab_labeling_value(g, labels, 20, &value) == CAB_STATUS_OK);
    CHECK(value >= 8);

    char *json = cab_result_to_json(r);
    CHECK(json != NULL && strstr(json, "\"k_opt\": 8") != NULL);
    cab_string_free(json);
    cab_result_free(r);
    cab_graph_free(g);

    CHECK(cab_graph_generate("nope:3", &g) == CAB_STATUS_INVALID_INPUT);
    CHECK(cab_last_error_message() != NULL);
    printf("ok\n");
    return 0;
}
