#include "spectral/lapack_runtime.hpp"

#include <dlfcn.h>

#include <cmath>
#include <cstdlib>
#include <mutex>
#include <string>
#include <vector>

#include "bowtie/errors.hpp"

#ifndef BOWTIE_OPENBLAS_PATH
#define BOWTIE_OPENBLAS_PATH "libopenblas.so.0"
#endif

namespace bowtie::detail {

namespace {

using dgemm_fn = void (*)(const char*, const char*, const int*, const int*, const int*, const double*, const double*,
                          const int*, const double*, const int*, const double*, double*, const int*);

void* symbol(void* handle, const char* name) {
    void* p = dlsym(handle, name);
    if (!p) throw NumericalError(std::string("OpenBLAS does not export ") + name);
    return p;
}

// Blocked kernels are only exercised above ~100; compare against a plain triple loop.
void self_test(dgemm_fn dgemm, const char* corename) {
    const int n = 160;
    std::vector<double> a(n * n), b(n * n), c(n * n, 0.0);
    for (int i = 0; i < n * n; ++i) {
        a[i] = std::sin(0.37 * i + 0.1);
        b[i] = std::cos(0.23 * i - 0.4);
    }
    const double one = 1.0, zero = 0.0;
    dgemm("N", "N", &n, &n, &n, &one, a.data(), &n, b.data(), &n, &zero, c.data(), &n);
    double worst = 0.0;
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            double s = 0.0;
            for (int k = 0; k < n; ++k) s += a[i + k * n] * b[k + j * n];
            worst = std::max(worst, std::abs(s - c[i + j * n]));
        }
    if (!(worst < 1e-10))
        throw NumericalError(std::string("OpenBLAS dgemm self-test failed with kernels '") + corename +
                             "'; set OPENBLAS_CORETYPE to a kernel family this CPU runs correctly");
}

}  // namespace

const LapackRuntime& lapack_runtime() {
    static LapackRuntime rt;
    static std::once_flag once;
    std::call_once(once, [] {
        // OpenBLAS 0.3.20 auto-detects some AVX-512 machines as Cooperlake and
        // its kernels there return wrong dgemm results. Haswell kernels (AVX2)
        // are correct and fast; an explicit OPENBLAS_CORETYPE always wins.
        if (!std::getenv("OPENBLAS_CORETYPE") && __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma"))
            setenv("OPENBLAS_CORETYPE", "Haswell", 0);
        void* h = dlopen(BOWTIE_OPENBLAS_PATH, RTLD_NOW | RTLD_LOCAL);
        if (!h) h = dlopen("libopenblas.so.0", RTLD_NOW | RTLD_LOCAL);
        if (!h) throw NumericalError(std::string("cannot load OpenBLAS: ") + dlerror());
        // One BLAS thread per call: results must not depend on how many sweep
        // tasks run concurrently.
        reinterpret_cast<void (*)(int)>(symbol(h, "openblas_set_num_threads"))(1);
        rt.corename = reinterpret_cast<char* (*)()>(symbol(h, "openblas_get_corename"))();
        self_test(reinterpret_cast<dgemm_fn>(symbol(h, "dgemm_")), rt.corename);
        rt.dsyevd = reinterpret_cast<dsyevd_fn>(symbol(h, "dsyevd_"));
    });
    return rt;
}

}  // namespace bowtie::detail
