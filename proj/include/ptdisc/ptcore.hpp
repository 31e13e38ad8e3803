#pragma once

#include "ptdisc/errors.hpp"
#include "ptdisc/linalg2.hpp"

namespace ptdisc {

// Two-level PT-symmetric Hamiltonian
//
//     H = [[r e^{i beta}, s], [s, r e^{-i beta}]]
//
// restricted to the unbroken regime |r sin(beta)| < s, where both
// eigenvalues r cos(beta) +- s cos(alpha) are real. The metric angle
// alpha = arcsin(r sin(beta) / s) and the oscillation frequency
// omega = s cos(alpha) (half the eigenvalue gap, hbar = 1) are fixed at
// construction; use pt_hamiltonian() to build a validated value.
struct PTHamiltonian {
    double r;
    double s;
    double beta;
    double alpha;
    double omega;

    ComplexMat2 matrix() const;
};

// Validates s > 0 (InvalidParameter) and |r sin(beta)| < s
// (BrokenPTRegime) and derives alpha, omega.
PTHamiltonian pt_hamiltonian(double r, double s, double beta);

// C = (1/cos alpha) [[i sin alpha, 1], [1, -i sin alpha]];
// satisfies C^2 = I and [C, H] = 0.
ComplexMat2 c_operator(const PTHamiltonian& h);

// Parameters of the three-state candidate family. epsilon sets the
// angle between the first two states, (gamma, delta) place the third.
struct FamilyParams {
    double epsilon;
    double gamma = 0.0;
    double delta = 0.0;
};

struct StateTriple {
    ComplexVec2 psi1;
    ComplexVec2 psi2;
    ComplexVec2 psi3;
};

// psi1 = (cos t1, -i sin t1), psi2 = (cos t2, -i sin t2),
// psi3 = (cos(t1 + gamma), -i e^{i delta} sin(t1 + gamma)) with
// t1 = (pi - 2 eps)/4, t2 = (pi + 2 eps)/4. Requires 0 < eps <= pi/2.
StateTriple state_family(const FamilyParams& p);

// PT conjugation: parity (component swap) composed with complex
// conjugation.
ComplexVec2 pt_conjugate(const ComplexVec2& v);

// CPT scalar product (C P conj(u))^T v; conjugate-linear in u, linear
// in v, and positive definite in the unbroken regime.
cplx cpt_inner(const PTHamiltonian& h, const ComplexVec2& u, const ComplexVec2& v);

double cpt_norm(const PTHamiltonian& h, const ComplexVec2& v);

// Rank-one CPT projector u (C P conj(u))^T / <u|u>_CPT. Throws
// ZeroCPTNorm when the self-overlap magnitude is below 1e-10.
ComplexMat2 cpt_projector(const PTHamiltonian& h, const ComplexVec2& u);

// e^{-i H t} in closed form,
// (e^{-i r cos(beta) t}/cos a) [[cos(wt-a), -i sin wt], [-i sin wt, cos(wt+a)]].
ComplexMat2 propagator(const PTHamiltonian& h, double t);

// e^{i H^dag t} e^{-i H t}: the matrix carrying Hermitian overlaps of
// evolved states. Hermitian, positive definite, det 1, period pi/omega.
ComplexMat2 gram_evolution(const PTHamiltonian& h, double t);

}  // namespace ptdisc
