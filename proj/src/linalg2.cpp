#include "ptdisc/linalg2.hpp"

#include <cmath>

namespace ptdisc {

cplx inner_hermitian(const ComplexVec2& u, const ComplexVec2& v) {
    return std::conj(u.a) * v.a + std::conj(u.b) * v.b;
}

ComplexVec2 mat_apply(const ComplexMat2& M, const ComplexVec2& v) {
    return {M.m11 * v.a + M.m12 * v.b, M.m21 * v.a + M.m22 * v.b};
}

ComplexMat2 identity2() {
    return {1.0, 0.0, 0.0, 1.0};
}

ComplexMat2 adjoint(const ComplexMat2& M) {
    return {std::conj(M.m11), std::conj(M.m21), std::conj(M.m12), std::conj(M.m22)};
}

cplx trace(const ComplexMat2& M) {
    return M.m11 + M.m22;
}

cplx det(const ComplexMat2& M) {
    return M.m11 * M.m22 - M.m12 * M.m21;
}

ComplexVec2 conjugate(const ComplexVec2& v) {
    return {std::conj(v.a), std::conj(v.b)};
}

ComplexMat2 outer(const ComplexVec2& u, const ComplexVec2& w) {
    return {u.a * w.a, u.a * w.b, u.b * w.a, u.b * w.b};
}

double norm_hermitian(const ComplexVec2& v) {
    return std::sqrt(std::norm(v.a) + std::norm(v.b));
}

ComplexVec2 normalized(const ComplexVec2& v) {
    const double n = norm_hermitian(v);
    return {v.a / n, v.b / n};
}

double max_abs(const ComplexMat2& M) {
    return std::max(std::max(std::abs(M.m11), std::abs(M.m12)),
                    std::max(std::abs(M.m21), std::abs(M.m22)));
}

double max_abs(const ComplexVec2& v) {
    return std::max(std::abs(v.a), std::abs(v.b));
}

bool all_finite(const ComplexMat2& M) {
    return std::isfinite(M.m11.real()) && std::isfinite(M.m11.imag()) &&
           std::isfinite(M.m12.real()) && std::isfinite(M.m12.imag()) &&
           std::isfinite(M.m21.real()) && std::isfinite(M.m21.imag()) &&
           std::isfinite(M.m22.real()) && std::isfinite(M.m22.imag());
}

bool all_finite(const ComplexVec2& v) {
    return std::isfinite(v.a.real()) && std::isfinite(v.a.imag()) &&
           std::isfinite(v.b.real()) && std::isfinite(v.b.imag());
}

ComplexMat2 expm_2x2(const ComplexMat2& M) {
    // Eigenvalues are mu +- q with mu the mean of the diagonal and
    // q^2 the discriminant of the characteristic polynomial.
    const cplx mu = 0.5 * (M.m11 + M.m22);
    const cplx d = 0.5 * (M.m11 - M.m22);
    const cplx q = std::sqrt(d * d + M.m12 * M.m21);

    const ComplexMat2 N = M - mu * identity2();  // nilpotent part when q = 0
    const cplx emu = std::exp(mu);

    if (std::abs(2.0 * q) < 1e-12) {
        // Jordan limit: exp(mu) (I + (M - mu I)).
        return emu * (identity2() + N);
    }
    const cplx c = std::cosh(q);
    const cplx s = std::sinh(q) / q;
    return (emu * c) * identity2() + (emu * s) * N;
}

}  // namespace ptdisc
