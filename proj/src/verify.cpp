#include "ptdisc/verify.hpp"

#include <cmath>
#include <sstream>

#include "ptdisc/discriminate.hpp"
#include "ptdisc/ptcore.hpp"
#include "ptdisc/rng.hpp"

namespace ptdisc {

namespace {

constexpr double kPi = 3.14159265358979323846;

class Suite {
public:
    explicit Suite(std::string name) { result_.name = std::move(name); }

    void check(bool ok, const char* label) {
        ++result_.checks;
        if (!ok) {
            ++result_.failures;
            if (result_.first_failure.empty()) result_.first_failure = label;
        }
    }

    SuiteResult result() const { return result_; }

private:
    SuiteResult result_;
};

ComplexMat2 random_disc_matrix(RngStream& rng) {
    const auto entry = [&rng] {
        const double r = std::sqrt(rng.uniform());
        const double ph = 2.0 * kPi * rng.uniform();
        return cplx{r * std::cos(ph), r * std::sin(ph)};
    };
    return {entry(), entry(), entry(), entry()};
}

PTHamiltonian random_unbroken(RngStream& rng) {
    for (;;) {
        const double s = 0.5 + 2.0 * rng.uniform();
        const double beta = (2.0 * rng.uniform() - 1.0) * kPi;
        const double cap = 0.95 * s / std::max(std::abs(std::sin(beta)), 1e-6);
        const double r = (2.0 * rng.uniform() - 1.0) * std::min(3.0 * s, cap);
        if (std::abs(r * std::sin(beta)) < 0.95 * s) return pt_hamiltonian(r, s, beta);
    }
}

ComplexVec2 random_state(RngStream& rng) {
    const auto entry = [&rng] {
        return cplx{2.0 * rng.uniform() - 1.0, 2.0 * rng.uniform() - 1.0};
    };
    for (;;) {
        const ComplexVec2 v{entry(), entry()};
        if (norm_hermitian(v) > 0.1) return normalized(v);
    }
}

SuiteResult kernel_suite() {
    Suite s("kernel-expm");
    RngStream rng(0x5eed, 1);
    for (int n = 0; n < 100; ++n) {
        const ComplexMat2 m = random_disc_matrix(rng);
        const ComplexMat2 e = expm_2x2(m);
        const ComplexMat2 einv = expm_2x2(-1.0 * m);
        s.check(max_abs(e * einv - identity2()) <= 1e-10, "exp(M) exp(-M) = I");
        s.check(std::abs(det(e) - std::exp(trace(m))) <= 1e-10 * std::max(1.0, max_abs(e)),
                "det exp(M) = exp(tr M)");
        s.check(all_finite(e), "finite entries");
    }
    return s.result();
}

SuiteResult spectrum_suite() {
    Suite s("eigenvalue-reality");
    RngStream rng(0x5eed, 2);
    for (int n = 0; n < 1000; ++n) {
        const PTHamiltonian h = random_unbroken(rng);
        const ComplexMat2 m = h.matrix();
        const cplx mu = 0.5 * trace(m);
        const cplx q = std::sqrt(mu * mu - det(m));
        s.check(std::abs((mu + q).imag()) <= 1e-10 * h.s, "lambda+ real");
        s.check(std::abs((mu - q).imag()) <= 1e-10 * h.s, "lambda- real");
        s.check(std::abs(std::abs((mu + q - (mu - q)).real()) - 2.0 * h.omega) <= 1e-9 * h.s,
                "gap = 2 omega");
    }
    return s.result();
}

SuiteResult c_operator_suite() {
    Suite s("c-operator");
    RngStream rng(0x5eed, 3);
    for (int n = 0; n < 200; ++n) {
        const PTHamiltonian h = random_unbroken(rng);
        const ComplexMat2 c = c_operator(h);
        const ComplexMat2 m = h.matrix();
        s.check(max_abs(c * c - identity2()) <= 1e-12 * std::max(1.0, max_abs(c) * max_abs(c)),
                "C^2 = I");
        s.check(max_abs(c * m - m * c) <= 1e-12 * std::max(1.0, max_abs(c) * max_abs(m)) * 10,
                "[C, H] = 0");
        const ComplexVec2 v = random_state(rng);
        const ComplexVec2 lhs = pt_conjugate(c * v);
        const ComplexVec2 rhs = c * pt_conjugate(v);
        s.check(max_abs(lhs - rhs) <= 1e-12 * std::max(1.0, max_abs(c)), "[C, PT] = 0");
    }
    return s.result();
}

SuiteResult metric_suite() {
    Suite s("metric-positivity");
    RngStream rng(0x5eed, 4);
    for (int n = 0; n < 300; ++n) {
        const PTHamiltonian h = random_unbroken(rng);
        const ComplexVec2 v = random_state(rng);
        const cplx self = cpt_inner(h, v, v);
        s.check(std::abs(self.imag()) <= 1e-12 * std::max(1.0, std::abs(self)),
                "<v|v>_CPT real");
        s.check(self.real() > 0.0, "<v|v>_CPT > 0");
    }
    return s.result();
}

SuiteResult projector_suite() {
    Suite s("projector-algebra");
    for (int n = 1; n <= 15; ++n) {
        const double eps = 0.1 * n;
        const StateTriple st = state_family({eps});
        const PTHamiltonian h = design_cpt_orthogonal(st.psi1, st.psi2);
        const ComplexMat2 p1 = cpt_projector(h, st.psi1);
        const ComplexMat2 p2 = cpt_projector(h, st.psi2);
        const double scale = std::max(1.0, max_abs(p1));
        s.check(std::abs(cpt_inner(h, st.psi1, st.psi2)) <= 1e-12, "design orthogonality");
        s.check(max_abs(p1 * p1 - p1) <= 1e-10 * scale, "P1 idempotent");
        s.check(max_abs(p2 * p2 - p2) <= 1e-10 * scale, "P2 idempotent");
        s.check(std::abs(trace(p1) - 1.0) <= 1e-10, "tr P1 = 1");
        s.check(std::abs(trace(p2) - 1.0) <= 1e-10, "tr P2 = 1");
        s.check(max_abs(p1 + p2 - identity2()) <= 1e-10 * scale, "P1 + P2 = I");
    }
    return s.result();
}

SuiteResult gram_suite() {
    Suite s("gram-oracle");
    RngStream rng(0x5eed, 5);
    for (int n = 0; n < 20; ++n) {
        const PTHamiltonian h = random_unbroken(rng);
        const double period = kPi / h.omega;
        for (int step = 1; step <= 50; ++step) {
            const double t = period * step / 50.0;
            const ComplexMat2 g = gram_evolution(h, t);
            const ComplexMat2 u = expm_2x2((cplx{0.0, -1.0} * t) * h.matrix());
            const ComplexMat2 ref = adjoint(u) * u;
            const double scale = std::max(1.0, max_abs(ref));
            s.check(max_abs(g - ref) <= 1e-10 * scale, "closed form vs expm");
            s.check(max_abs(g - adjoint(g)) <= 1e-10 * scale, "Hermitian");
            s.check(std::abs(det(g) - 1.0) <= 1e-10 * scale * scale, "det = 1");
            s.check(max_abs(gram_evolution(h, t + period) - g) <= 1e-9 * scale,
                    "period pi/omega");
        }
        const ComplexMat2 u07 = propagator(h, 0.7);
        s.check(max_abs(u07 - expm_2x2(cplx{0.0, -0.7} * h.matrix())) <=
                    1e-10 * std::max(1.0, max_abs(u07)),
                "propagator vs expm");
    }
    return s.result();
}

SuiteResult persistence_suite() {
    Suite s("persistence");
    for (int n = 1; n <= 14; ++n) {
        const double eps = 0.1 * n;
        const StateTriple st = state_family({eps});
        const PTHamiltonian h = design_cpt_orthogonal(st.psi1, st.psi2);
        const double period = kPi / h.omega;
        for (int step = 0; step <= 40; ++step) {
            const double t = 2.0 * period * step / 40.0;
            const ComplexMat2 u = propagator(h, t);
            const ComplexVec2 a = u * st.psi1;
            const ComplexVec2 b = u * st.psi2;
            const double rel = std::abs(cpt_inner(h, a, b)) / (cpt_norm(h, a) * cpt_norm(h, b));
            s.check(rel <= 1e-10, "CPT orthogonality persists");
        }
    }
    return s.result();
}

}  // namespace

std::vector<SuiteResult> run_invariant_suites() {
    return {kernel_suite(),  spectrum_suite(),   c_operator_suite(), metric_suite(),
            projector_suite(), gram_suite(), persistence_suite()};
}

}  // namespace ptdisc
