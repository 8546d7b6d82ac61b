#include "csiloc/eig.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "csiloc/errors.hpp"

namespace csiloc {

namespace {

double frobenius(std::span<const cplx> m) {
    double s = 0.0;
    for (const auto& v : m) s += std::norm(v);
    return std::sqrt(s);
}

double offdiag_norm(const std::vector<cplx>& a, int n) {
    double s = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) s += std::norm(a[static_cast<size_t>(i) * n + j]);
    return std::sqrt(2.0 * s);
}

} // namespace

EigResult hermitian_eig(std::span<const cplx> m, int dim) {
    require(dim >= 1, Errc::invalid_input, "matrix dimension must be positive");
    require(m.size() == static_cast<size_t>(dim) * dim, Errc::invalid_input,
            "matrix buffer size does not match dimension");

    const double scale = frobenius(m);
    std::vector<cplx> a(m.begin(), m.end());

    // Symmetrize and reject matrices that are not Hermitian to tolerance.
    double asym = 0.0;
    for (int i = 0; i < dim; ++i) {
        for (int j = i; j < dim; ++j) {
            cplx upper = a[static_cast<size_t>(i) * dim + j];
            cplx lower = a[static_cast<size_t>(j) * dim + i];
            asym = std::max(asym, std::abs(upper - std::conj(lower)));
            cplx sym = (upper + std::conj(lower)) / 2.0;
            a[static_cast<size_t>(i) * dim + j] = sym;
            a[static_cast<size_t>(j) * dim + i] = std::conj(sym);
        }
        a[static_cast<size_t>(i) * dim + i] = a[static_cast<size_t>(i) * dim + i].real();
    }
    require(asym <= 1e-9 * std::max(scale, 1e-300) || asym <= 1e-300, Errc::invalid_input,
            "matrix is not Hermitian within tolerance");

    std::vector<cplx> v(static_cast<size_t>(dim) * dim, cplx(0.0, 0.0));
    for (int i = 0; i < dim; ++i) v[static_cast<size_t>(i) * dim + i] = 1.0;

    auto A = [&](int i, int j) -> cplx& { return a[static_cast<size_t>(i) * dim + j]; };
    auto V = [&](int i, int j) -> cplx& { return v[static_cast<size_t>(i) * dim + j]; };

    const double tol = 1e-14 * std::max(scale, 1e-300);
    const int max_sweeps = 60;
    for (int sweep = 0; sweep < max_sweeps && offdiag_norm(a, dim) > tol; ++sweep) {
        for (int p = 0; p < dim - 1; ++p) {
            for (int q = p + 1; q < dim; ++q) {
                cplx apq = A(p, q);
                double r = std::abs(apq);
                if (r <= tol / dim) continue;
                cplx phase = apq / r;
                double app = A(p, p).real();
                double aqq = A(q, q).real();
                double tau = (aqq - app) / (2.0 * r);
                double t = (tau >= 0.0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
                double c = 1.0 / std::sqrt(1.0 + t * t);
                double s = t * c;
                cplx sp = s * phase;

                // A <- J^H A J with J = I except J(p,p)=c, J(p,q)=s*phase,
                // J(q,p)=-s*conj(phase), J(q,q)=c.
                for (int k = 0; k < dim; ++k) {
                    cplx akp = A(k, p);
                    cplx akq = A(k, q);
                    A(k, p) = c * akp - std::conj(sp) * akq;
                    A(k, q) = sp * akp + c * akq;
                }
                for (int k = 0; k < dim; ++k) {
                    cplx apk = A(p, k);
                    cplx aqk = A(q, k);
                    A(p, k) = c * apk - sp * aqk;
                    A(q, k) = std::conj(sp) * apk + c * aqk;
                }
                A(p, q) = 0.0;
                A(q, p) = 0.0;
                A(p, p) = A(p, p).real();
                A(q, q) = A(q, q).real();
                for (int k = 0; k < dim; ++k) {
                    cplx vkp = V(k, p);
                    cplx vkq = V(k, q);
                    V(k, p) = c * vkp - std::conj(sp) * vkq;
                    V(k, q) = sp * vkp + c * vkq;
                }
            }
        }
    }

    std::vector<int> order(dim);
    std::iota(order.begin(), order.end(), 0);
    std::vector<double> diag(dim);
    for (int i = 0; i < dim; ++i) diag[i] = A(i, i).real();
    std::stable_sort(order.begin(), order.end(), [&](int x, int y) { return diag[x] > diag[y]; });

    EigResult out;
    out.dim = dim;
    out.values.resize(dim);
    out.vectors.resize(static_cast<size_t>(dim) * dim);
    for (int k = 0; k < dim; ++k) {
        out.values[k] = diag[order[k]];
        for (int i = 0; i < dim; ++i)
            out.vectors[static_cast<size_t>(k) * dim + i] = V(i, order[k]);
    }
    return out;
}

} // namespace csiloc
