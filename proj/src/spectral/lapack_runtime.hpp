#pragma once

namespace bowtie::detail {

using dsyevd_fn = void (*)(const char* jobz, const char* uplo, const int* n, double* a, const int* lda, double* w,
                           double* work, const int* lwork, int* iwork, const int* liwork, int* info);

struct LapackRuntime {
    dsyevd_fn dsyevd = nullptr;
    const char* corename = "";
};

/// OpenBLAS loaded on first use, single-threaded, with its kernel family
/// chosen before the library initializes. Throws NumericalError if the
/// library is missing or fails a dgemm self-test.
const LapackRuntime& lapack_runtime();

}  // namespace bowtie::detail
