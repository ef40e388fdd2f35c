#include <math.h>
#include <stdio.h>
#include <stdlib.h>
#include <string.h>

#include "rda/rda.h"

static int failures = 0;

#define CHECK(cond)                                                                                      \
    do {                                                                                                 \
        if (!(cond)) {                                                                                   \
            fprintf(stderr, "%s:%d: CHECK(%s) failed (last error: %s)\n", __FILE__, __LINE__, #cond,   \
                    rda_last_error());                                                                   \
            ++failures;                                                                                  \
        }                                                                                                \
    } while (0)

static char *read_all(const char *path)
{
    FILE *f = fopen(path, "rb");
    if (!f)
        return NULL;
    fseek(f, 0, SEEK_END);
    long n = ftell(f);
    fseek(f, 0, SEEK_SET);
    char *s = malloc((size_t)n + 1);
    size_t got = fread(s, 1, (size_t)n, f);
    s[got] = '\0';
    fclose(f);
    return s;
}

static void test_status(void)
{
    CHECK(strlen(rda_version()) > 0);
    CHECK(strcmp(rda_status_name(RDA_OK), "ok") == 0);
    CHECK(strcmp(rda_status_name(RDA_ERR_CONFIG), "config") == 0);
    CHECK(strcmp(rda_status_name(RDA_ERR_SIGMA_EXHAUSTED), "sigma_exhausted") == 0);
    CHECK(strcmp(rda_status_name(RDA_ERR_INTERNAL), "internal") == 0);
    CHECK(strcmp(rda_status_name((rda_status)57), "unknown") == 0);
}

static void test_config(void)
{
    rda_config *c = NULL;
    CHECK(rda_config_new(&c) == RDA_OK);
    CHECK(c != NULL);
    CHECK(strcmp(rda_last_error(), "") == 0);
    CHECK(strcmp(rda_config_output(c), "out") == 0);
    CHECK(rda_config_set(c, "run.output", "elsewhere") == RDA_OK);
    CHECK(strcmp(rda_config_output(c), "elsewhere") == 0);
    CHECK(rda_config_set(c, "mesh.colour", "red") == RDA_ERR_CONFIG);
    CHECK(strstr(rda_last_error(), "mesh.colour") != NULL);
    CHECK(rda_config_set(c, "mesh.h", "0.3") == RDA_ERR_CONFIG);
    CHECK(rda_config_set(c, "problem.alpha0", "-2") == RDA_ERR_CONFIG);
    CHECK(rda_config_set(NULL, "mesh.h", "0.1") == RDA_ERR_INVALID_ARGUMENT);
    CHECK(rda_config_set(c, NULL, "0.1") == RDA_ERR_INVALID_ARGUMENT);
    rda_config_free(c);
    rda_config_free(NULL);

    rda_config *p = (rda_config *)1;
    CHECK(rda_config_parse("[problem]\nunknown = 1\n", &p) == RDA_ERR_CONFIG);
    CHECK(p == NULL);
    CHECK(rda_config_parse("[mesh]\nh = 0.1\ndegrees = 1\n", &p) == RDA_OK);
    rda_config_free(p);
    CHECK(rda_config_load("/nonexistent/run.ini", &p) == RDA_ERR_IO);
    CHECK(rda_config_new(NULL) == RDA_ERR_INVALID_ARGUMENT);
}

static void test_tables(void)
{
    rda_config *c = NULL;
    CHECK(rda_config_parse("[lambda-sweep]\nthresholds = 6, 8\nh = 0.1\n", &c) == RDA_OK);
    const char *path = "test_c_api_lambda.csv";
    CHECK(rda_run_lambda_sweep(c, path, 0) == RDA_OK);
    char *text = read_all(path);
    CHECK(text != NULL);
    if (text) {
        CHECK(strncmp(text, "m,N,lambda,adequate\n1,6,", 24) == 0);
        free(text);
    }
    remove(path);
    CHECK(rda_run_lambda_sweep(c, "/nonexistent/dir/x.csv", 0) == RDA_ERR_IO);
    CHECK(rda_run_convergence(c, NULL, 0) == RDA_ERR_INVALID_ARGUMENT);
    rda_config_free(c);
}

static void test_solve(void)
{
    rda_config *c = NULL;
    CHECK(rda_config_new(&c) == RDA_OK);
    rda_result *r = NULL;
    CHECK(rda_solve(c, 1, 0.1, NULL, &r) == RDA_OK);
    CHECK(r != NULL);
    CHECK(rda_result_dofs(r) > 0);
    CHECK(rda_result_converged(r) == 1);
    CHECK(rda_result_iterations(r) > 0);
    CHECK(rda_result_residual(r) <= 1e-8);
    CHECK(rda_result_l2_error(r) > 0.0 && rda_result_l2_error(r) < rda_result_energy_error(r));
    CHECK(rda_result_seconds(r) >= 0.0);
    rda_result_free(r);

    CHECK(rda_solve(c, 1, 0.3, NULL, &r) == RDA_ERR_CONFIG);
    CHECK(r == NULL);
    CHECK(rda_solve(c, -1, 0.1, NULL, &r) == RDA_ERR_INVALID_ARGUMENT);
    CHECK(rda_result_dofs(NULL) == -1);
    CHECK(isnan(rda_result_l2_error(NULL)));
    rda_config_free(c);
}

int main(void)
{
    test_status();
    test_config();
    test_tables();
    test_solve();
    if (failures)
        fprintf(stderr, "%d check(s) failed\n", failures);
    else
        printf("all C API checks passed\n");
    return failures ? 1 : 0;
}
