#include "dstrsort.h"
#include <stdio.h>
#include <string.h>

#define CHECK(cond) do { if (!(cond)) { fprintf(stderr, "line %d: %s (%s)\n", __LINE__, #cond, ds_last_error()); return 1; } } while (0)

static int cmp(const uint8_t *a, size_t la, const uint8_t *b, size_t lb) {
    size_t n = la < lb ? la : lb;
    int c = memcmp(a, b, n);
    if (c != 0) return c;
    return (la > lb) - (la < lb);
}

int main(void) {
    DsCorpus *corpus = NULL;
    CHECK(ds_corpus_generate(2000, 40, 0.5, 4, 7, &corpus) == DS_STATUS_OK);
    CHECK(ds_corpus_len(corpus) == 2000);

    uint32_t schedule[2] = {4, 2};
    DsSortOptions opt = ds_sort_options_default();
    opt.pes = 8;
    opt.schedule = schedule;
    opt.schedule_len = 2;
    opt.compress_lcp = true;
    DsResult *res = NULL;
    CHECK(ds_sort(corpus, &opt, &res) == DS_STATUS_OK);
    CHECK(ds_result_correct(res));
    CHECK(!ds_result_is_permutation(res));
    CHECK(ds_result_len(res) == 2000);
    const uint8_t *prev = NULL, *cur = NULL;
    size_t lprev = 0, lcur = 0;
    for (size_t i = 0; i < 2000; i++) {
        CHECK(ds_result_string(res, i, &cur, &lcur) == DS_STATUS_OK);
        if (prev) CHECK(cmp(prev, lprev, cur, lcur) <= 0);
        prev = cur;
        lprev = lcur;
    }
    CHECK(strstr(ds_result_report_json(res), "\"schema_version\": 1") != NULL);
    ds_result_free(res);

    opt.algo = DS_ALGO_PDMS;
    CHECK(ds_sort(corpus, &opt, &res) == DS_STATUS_OK);
    CHECK(ds_result_is_permutation(res));
    const uint64_t *perm = NULL;
    size_t n = 0;
    CHECK(ds_result_permutation(res, &perm, &n) == DS_STATUS_OK && n == 2000);
    for (size_t i = 1; i < n; i++) {
        const uint8_t *a, *b;
        size_t la, lb;
        ds_corpus_get(corpus, perm[i - 1], &a, &la);
        ds_corpus_get(corpus, perm[i], &b, &lb);
        CHECK(cmp(a, la, b, lb) <= 0);
    }
    ds_result_free(res);

    schedule[1] = 3;
    CHECK(ds_sort(corpus, &opt, &res) == DS_STATUS_BAD_SCHEDULE);
    CHECK(strlen(ds_last_error()) > 0);
    DsCorpus *bad = NULL;
    CHECK(ds_corpus_generate(10, 5, 2.0, 4, 1, &bad) == DS_STATUS_INFEASIBLE_SPEC && bad == NULL);

    ds_corpus_free(corpus);
    printf("ok %s\n", ds_version());
    return 0;
}
