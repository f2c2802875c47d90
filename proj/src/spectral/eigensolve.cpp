#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "bowtie/errors.hpp"
#include "bowtie/spectral.hpp"
#include "spectral/factor.hpp"
#include "spectral/lapack_runtime.hpp"

namespace bowtie {

std::pair<double, double> essential_band_formula(double alpha) {
    if (!std::isfinite(alpha) || !(alpha > 0.0) || !(alpha < std::numbers::pi))
        throw ValidationError("alpha", "must lie in (0, pi)");
    const double low = alpha / (2.0 * std::numbers::pi);
    return {low, 1.0 - low};
}

std::pair<double, double> essential_band(double alpha) {
    if (!std::isfinite(alpha) || !(alpha > 0.0) || !(alpha < std::numbers::pi / 3))
        throw ValidationError("alpha", "band formula needs the apex to be the most acute angle (0 < alpha < pi/3)");
    return essential_band_formula(alpha);
}

SpectrumResult eigensolve(const StiffnessPair& pair, const TriangleMesh& m, const EigensolveOptions& options) {
    const Eigen::Index n = pair.size();
    if (n > options.dense_cap) {
        const double suggested = m.options.h * std::sqrt(static_cast<double>(n) / options.dense_cap);
        throw ResourceError("eigensolve: " + std::to_string(n) + " unknowns exceed the dense cap of " +
                                std::to_string(options.dense_cap) + "; try mesh.h = " + std::to_string(suggested),
                            suggested);
    }
    const auto& lapack = detail::lapack_runtime();
    const auto& llt = pair.factor->llt;

    // C = L^{-1} (P A_D P^T) L^{-T}, where P A_omega P^T = L L^T.
    SparseMatrix B;
    B = pair.A_D.twistedBy(llt.permutationP());
    Eigen::MatrixXd C = Eigen::MatrixXd(B);
    B.resize(0, 0);
    llt.matrixL().solveInPlace(C);
    C.transposeInPlace();
    llt.matrixL().solveInPlace(C);

    std::vector<double> w(static_cast<std::size_t>(n));
    const char jobz = options.vectors ? 'V' : 'N';
    if (n > 0) {
        const int nn = static_cast<int>(n), query = -1;
        const char uplo = 'L';
        int info = 0, liwork = 0;
        double lwork_d = 0.0;
        // Workspace query: sizes come back in work[0] and iwork[0].
        lapack.dsyevd(&jobz, &uplo, &nn, C.data(), &nn, w.data(), &lwork_d, &query, &liwork, &query, &info);
        if (info == 0) {
            const int lwork = static_cast<int>(lwork_d) + 1;
            std::vector<double> work(static_cast<std::size_t>(lwork));
            std::vector<int> iwork(static_cast<std::size_t>(std::max(liwork, 1)));
            lapack.dsyevd(&jobz, &uplo, &nn, C.data(), &nn, w.data(), work.data(), &lwork, iwork.data(), &liwork,
                          &info);
        }
        if (info != 0) throw NumericalError("eigensolve: dsyevd failed with info " + std::to_string(info));
    }

    SpectrumResult r;
    r.delta = m.spec.delta;
    r.h = m.options.h;
    r.alpha = m.spec.alpha;
    r.n_dofs = n;
    r.eigenvalues = std::move(w);
    r.band = essential_band(m.spec.alpha);
    r.min_nontrivial = std::numeric_limits<double>::quiet_NaN();
    r.max_nontrivial = std::numeric_limits<double>::quiet_NaN();
    for (double lam : r.eigenvalues) {
        if (lam < kTrivialTol) {
            ++r.trivial_0_mult;
        } else if (lam > 1.0 - kTrivialTol) {
            ++r.trivial_1_mult;
        } else {
            if (lam < r.band.first) ++r.n_below_band;
            if (lam > r.band.second) ++r.n_above_band;
            if (!(r.min_nontrivial <= lam)) r.min_nontrivial = lam;
            if (!(r.max_nontrivial >= lam)) r.max_nontrivial = lam;
        }
    }
    if (options.vectors) {
        // x = P^{-1} L^{-T} z is A_omega-orthonormal.
        llt.matrixU().solveInPlace(C);
        r.eigenvectors = llt.permutationPinv() * C;
    }
    return r;
}

}  // namespace bowtie
