#include "ptdisc/ptcore.hpp"

#include <cmath>
#include <sstream>

namespace ptdisc {

namespace {

constexpr cplx kI{0.0, 1.0};
constexpr double kPi = 3.14159265358979323846;

// Plain (bilinear) dot product; the CPT form conjugates through
// pt_conjugate, not here.
cplx dot_plain(const ComplexVec2& u, const ComplexVec2& v) {
    return u.a * v.a + u.b * v.b;
}

}  // namespace

ComplexMat2 PTHamiltonian::matrix() const {
    return {r * std::exp(kI * beta), s, s, r * std::exp(-kI * beta)};
}

PTHamiltonian pt_hamiltonian(double r, double s, double beta) {
    if (!(s > 0.0) || !std::isfinite(r) || !std::isfinite(beta)) {
        std::ostringstream msg;
        msg << "pt_hamiltonian: requires finite parameters and s > 0, got s = " << s;
        throw InvalidParameter(msg.str());
    }
    const double rs = r * std::sin(beta);
    if (std::abs(rs) >= s) {
        std::ostringstream msg;
        msg << "pt_hamiltonian: broken PT regime, |r sin(beta)| = " << std::abs(rs)
            << " >= s = " << s;
        throw BrokenPTRegime(msg.str());
    }
    PTHamiltonian h{};
    h.r = r;
    h.s = s;
    h.beta = beta;
    h.alpha = std::asin(rs / s);
    h.omega = s * std::cos(h.alpha);
    return h;
}

ComplexMat2 c_operator(const PTHamiltonian& h) {
    const double sa = std::sin(h.alpha);
    const double ca = std::cos(h.alpha);
    return {kI * sa / ca, 1.0 / ca, 1.0 / ca, -kI * sa / ca};
}

StateTriple state_family(const FamilyParams& p) {
    if (!(p.epsilon > 0.0) || !(p.epsilon <= kPi / 2.0)) {
        std::ostringstream msg;
        msg << "state_family: epsilon must lie in (0, pi/2], got " << p.epsilon;
        throw InvalidParameter(msg.str());
    }
    if (!std::isfinite(p.gamma) || !std::isfinite(p.delta)) {
        throw InvalidParameter("state_family: gamma and delta must be finite");
    }
    const double t1 = (kPi - 2.0 * p.epsilon) / 4.0;
    const double t2 = (kPi + 2.0 * p.epsilon) / 4.0;
    const double t3 = t1 + p.gamma;
    StateTriple out;
    out.psi1 = {std::cos(t1), -kI * std::sin(t1)};
    out.psi2 = {std::cos(t2), -kI * std::sin(t2)};
    out.psi3 = {std::cos(t3), -kI * std::exp(kI * p.delta) * std::sin(t3)};
    return out;
}

ComplexVec2 pt_conjugate(const ComplexVec2& v) {
    return {std::conj(v.b), std::conj(v.a)};
}

cplx cpt_inner(const PTHamiltonian& h, const ComplexVec2& u, const ComplexVec2& v) {
    return dot_plain(c_operator(h) * pt_conjugate(u), v);
}

double cpt_norm(const PTHamiltonian& h, const ComplexVec2& v) {
    // Self-overlap is real and positive in the unbroken regime; clamp
    // rounding noise.
    return std::sqrt(std::max(0.0, cpt_inner(h, v, v).real()));
}

ComplexMat2 cpt_projector(const PTHamiltonian& h, const ComplexVec2& u) {
    const ComplexVec2 dual = c_operator(h) * pt_conjugate(u);
    const cplx n = dot_plain(dual, u);
    if (std::abs(n) <= 1e-10) {
        std::ostringstream msg;
        msg << "cpt_projector: CPT self-overlap magnitude " << std::abs(n)
            << " below threshold; state is self-orthogonal under this metric";
        throw ZeroCPTNorm(msg.str());
    }
    return (1.0 / n) * outer(u, dual);
}

ComplexMat2 propagator(const PTHamiltonian& h, double t) {
    const double wt = h.omega * t;
    const double ca = std::cos(h.alpha);
    const cplx phase = std::exp(-kI * (h.r * std::cos(h.beta) * t)) / ca;
    return {phase * std::cos(wt - h.alpha), phase * (-kI * std::sin(wt)),
            phase * (-kI * std::sin(wt)), phase * std::cos(wt + h.alpha)};
}

ComplexMat2 gram_evolution(const PTHamiltonian& h, double t) {
    const double wt = h.omega * t;
    const double sa = std::sin(h.alpha);
    const double ca2 = std::cos(h.alpha) * std::cos(h.alpha);
    const double s2 = std::sin(wt) * std::sin(wt);
    const double cm = std::cos(wt - h.alpha);
    const double cp = std::cos(wt + h.alpha);
    return {(cm * cm + s2) / ca2, -2.0 * kI * s2 * sa / ca2,
            2.0 * kI * s2 * sa / ca2, (cp * cp + s2) / ca2};
}

}  // namespace ptdisc
