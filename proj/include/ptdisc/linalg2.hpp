#pragma once

#include <complex>

namespace ptdisc {

using cplx = std::complex<double>;

// Complex 2-component column vector.
struct ComplexVec2 {
    cplx a{};
    cplx b{};
};

// Complex 2x2 matrix, [[m11, m12], [m21, m22]].
struct ComplexMat2 {
    cplx m11{};
    cplx m12{};
    cplx m21{};
    cplx m22{};
};

inline ComplexVec2 operator+(const ComplexVec2& u, const ComplexVec2& v) {
    return {u.a + v.a, u.b + v.b};
}
inline ComplexVec2 operator-(const ComplexVec2& u, const ComplexVec2& v) {
    return {u.a - v.a, u.b - v.b};
}
inline ComplexVec2 operator*(const cplx& c, const ComplexVec2& v) {
    return {c * v.a, c * v.b};
}

inline ComplexMat2 operator+(const ComplexMat2& A, const ComplexMat2& B) {
    return {A.m11 + B.m11, A.m12 + B.m12, A.m21 + B.m21, A.m22 + B.m22};
}
inline ComplexMat2 operator-(const ComplexMat2& A, const ComplexMat2& B) {
    return {A.m11 - B.m11, A.m12 - B.m12, A.m21 - B.m21, A.m22 - B.m22};
}
inline ComplexMat2 operator*(const cplx& c, const ComplexMat2& A) {
    return {c * A.m11, c * A.m12, c * A.m21, c * A.m22};
}
inline ComplexMat2 operator*(const ComplexMat2& A, const ComplexMat2& B) {
    return {A.m11 * B.m11 + A.m12 * B.m21, A.m11 * B.m12 + A.m12 * B.m22,
            A.m21 * B.m11 + A.m22 * B.m21, A.m21 * B.m12 + A.m22 * B.m22};
}

// <u|v> with conjugation on the first argument.
cplx inner_hermitian(const ComplexVec2& u, const ComplexVec2& v);

// M v.
ComplexVec2 mat_apply(const ComplexMat2& M, const ComplexVec2& v);

inline ComplexVec2 operator*(const ComplexMat2& M, const ComplexVec2& v) {
    return mat_apply(M, v);
}

// exp(M) by closed-form 2x2 eigendecomposition. Eigenvalue gaps below
// 1e-12 take the Jordan limit exp(mu) (I + (M - mu I)).
ComplexMat2 expm_2x2(const ComplexMat2& M);

ComplexMat2 identity2();
ComplexMat2 adjoint(const ComplexMat2& M);
cplx trace(const ComplexMat2& M);
cplx det(const ComplexMat2& M);

ComplexVec2 conjugate(const ComplexVec2& v);

// u w^T (no conjugation; pass an already-dualized w).
ComplexMat2 outer(const ComplexVec2& u, const ComplexVec2& w);

double norm_hermitian(const ComplexVec2& v);
ComplexVec2 normalized(const ComplexVec2& v);

double max_abs(const ComplexMat2& M);
double max_abs(const ComplexVec2& v);
bool all_finite(const ComplexMat2& M);
bool all_finite(const ComplexVec2& v);

}  // namespace ptdisc
