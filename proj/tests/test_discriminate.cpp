#include <doctest.h>

#include <cmath>
#include <vector>

#include "ptdisc/discriminate.hpp"
#include "test_support.hpp"

using namespace ptdisc;
using namespace ptdisc::test;

namespace {

const cplx I{0.0, 1.0};

std::vector<ComplexVec2> family_states(double eps, double gamma, double delta) {
    const StateTriple t = state_family({eps, gamma, delta});
    return {t.psi1, t.psi2, t.psi3};
}

std::vector<ComplexVec2> spaced_states(std::size_t n, double spacing) {
    std::vector<ComplexVec2> states;
    for (std::size_t m = 0; m < n; ++m) {
        states.push_back(angle_state(kPi / 4 - spacing / 2 + m * spacing));
    }
    return states;
}

double rel_cpt(const PTHamiltonian& h, const ComplexVec2& u, const ComplexVec2& v) {
    return std::abs(cpt_inner(h, u, v)) / (cpt_norm(h, u) * cpt_norm(h, v));
}

double rel_hermitian(const ComplexVec2& u, const ComplexVec2& v) {
    return std::abs(inner_hermitian(u, v)) / (norm_hermitian(u) * norm_hermitian(v));
}

}  // namespace

TEST_CASE("design_cpt_orthogonal reproduces sin(alpha) = cos(eps)") {
    for (int n = 1; n <= 15; ++n) {
        const double eps = 0.1 * n;
        const StateTriple t = state_family({eps});
        const PTHamiltonian h = design_cpt_orthogonal(t.psi1, t.psi2);
        CHECK(std::sin(h.alpha) == doctest::Approx(std::cos(eps)).epsilon(1e-12));
        CHECK(h.s == 1.0);
        CHECK(h.beta == doctest::Approx(kPi / 2));
        CHECK(std::abs(cpt_inner(h, t.psi1, t.psi2)) < 1e-12);
    }
}

TEST_CASE("design_cpt_orthogonal on an already orthogonal pair") {
    const PTHamiltonian h = design_cpt_orthogonal({1, 0}, {0, 1});
    CHECK(h.alpha == 0.0);
    CHECK(std::abs(cpt_inner(h, {1, 0}, {0, 1})) < 1e-15);
}

TEST_CASE("design_cpt_orthogonal post-check on a generic family pair") {
    const StateTriple t = state_family({kPi / 6, 0.3, 0.0});
    const PTHamiltonian h = design_cpt_orthogonal(t.psi1, t.psi3);
    CHECK(std::abs(cpt_inner(h, t.psi1, t.psi3)) < 1e-10);
}

TEST_CASE("design_cpt_orthogonal failure modes") {
    const StateTriple t = state_family({kPi / 6, 0.4, 0.3});
    // A relative phase makes the sin(alpha) candidate complex.
    CHECK_THROWS_AS(design_cpt_orthogonal(t.psi1, t.psi3), NotOrthogonalizable);
    // No metric maps a state off itself.
    CHECK_THROWS_AS(design_cpt_orthogonal(t.psi1, t.psi1), NotOrthogonalizable);
    CHECK_THROWS_AS(design_cpt_orthogonal({0, 0}, {1, 0}), InvalidParameter);
}

TEST_CASE("tau_closed_form frozen branch values at eps = pi/6") {
    const double plus = tau_closed_form(kPi / 6, TauBranch::Plus);
    const double minus = tau_closed_form(kPi / 6, TauBranch::Minus);
    CHECK(std::tan(plus) == doctest::Approx(0.91209558646301348).epsilon(1e-12));
    CHECK(std::tan(minus) == doctest::Approx(-0.21927526343546256).epsilon(1e-12));
    CHECK(plus == doctest::Approx(0.73945769686140408).epsilon(1e-12));
    CHECK(minus == doctest::Approx(2.925733732326688).epsilon(1e-12));
    // The minus branch lands on pi - arctan(0.2193...): both in (0, pi).
    CHECK(plus > 0.0);
    CHECK(minus < kPi);
}

TEST_CASE("tau_closed_form agrees with direct formula evaluation") {
    for (double eps : {0.2, 0.5, 0.9, 1.3}) {
        const double ce = std::cos(eps);
        const double se = std::sin(eps);
        const double tn = std::tan((kPi + 2 * eps) / 4);
        const double rad = 2 * ce * tn - 1;
        REQUIRE(rad >= 0.0);
        const double den = 2 * ce * tn - ce * ce - 1;
        for (double sign : {1.0, -1.0}) {
            const double expect = se * (ce + sign * std::sqrt(rad)) / den;
            const double wt =
                tau_closed_form(eps, sign > 0 ? TauBranch::Plus : TauBranch::Minus);
            CHECK(std::tan(wt) == doctest::Approx(expect).epsilon(1e-10));
            CHECK(wt > 0.0);
            CHECK(wt <= kPi);
        }
    }
    // Small epsilon stays valid: radicand -> 1 as eps -> 0.
    CHECK_NOTHROW(tau_closed_form(1e-6, TauBranch::Plus));
    CHECK_THROWS_AS(tau_closed_form(0.0, TauBranch::Plus), InvalidParameter);
    CHECK_THROWS_AS(tau_closed_form(kPi / 2, TauBranch::Minus), InvalidParameter);
}

TEST_CASE("tau_numeric degenerate family hits omega tau = pi/4") {
    for (double eps : {0.3, kPi / 6, 0.8, 1.2}) {
        const StateTriple t = state_family({eps});
        const PTHamiltonian h = design_cpt_orthogonal(t.psi1, t.psi2);
        // gamma = delta = 0: psi3 = psi1 and the overlap is cos(eps)cos(2wt).
        const double tau = tau_numeric(h, t.psi2, t.psi1);
        CHECK(h.omega * tau == doctest::Approx(kPi / 4).epsilon(1e-8));
    }
}

TEST_CASE("tau_numeric post-verified on a feasible family point") {
    const StateTriple t = state_family({kPi / 6, 0.2, 0.0});
    const PTHamiltonian h = design_cpt_orthogonal(t.psi1, t.psi2);
    const double tau = tau_numeric(h, t.psi2, t.psi3);
    const ComplexMat2 u = propagator(h, tau);
    CHECK(std::abs(inner_hermitian(u * t.psi2, u * t.psi3)) < 1e-10);
    CHECK(tau > 0.0);
    CHECK(tau <= kPi / h.omega);
}

TEST_CASE("tau_numeric with an always-zero overlap returns the first grid point") {
    const PTHamiltonian h = pt_hamiltonian(0.5, 1.0, 0.0);  // Hermitian: G(t) = I
    const double tau = tau_numeric(h, {1, 0}, {0, 1});
    CHECK(tau > 0.0);
    CHECK(tau <= 2.0 * (kPi / h.omega) / 2048);
    CHECK(std::abs(inner_hermitian(ComplexVec2{1, 0},
                                   gram_evolution(h, tau) * ComplexVec2{0, 1})) < 1e-14);
}

TEST_CASE("tau_numeric reports the achieved minimum when no zero exists") {
    // The evolved overlap is A + B cos(2wt) + C sin(2wt); for these
    // parameters |A| exceeds the oscillation amplitude and the minimum
    // is (|A| - hypot(B, C)) / cos^2(alpha).
    const double eps = kPi / 6;
    const double gamma = 0.4;
    const StateTriple t = state_family({eps, gamma, 0.0});
    const PTHamiltonian h = design_cpt_orthogonal(t.psi1, t.psi2);

    const double a = std::cos(gamma - eps) - std::cos(eps) * std::cos(gamma);
    const double b =
        -std::cos(eps) * std::cos(eps) * std::cos(gamma - eps) + std::cos(eps) * std::cos(gamma);
    const double c = -std::cos(eps) * std::sin(eps) * std::sin(gamma);
    const double expected_min =
        (std::abs(a) - std::hypot(b, c)) / (std::cos(h.alpha) * std::cos(h.alpha));
    REQUIRE(expected_min > 0.0);

    try {
        tau_numeric(h, t.psi2, t.psi3);
        FAIL("expected NoOrthogonalizingTime");
    } catch (const NoOrthogonalizingTime& e) {
        CHECK(e.achieved_minimum == doctest::Approx(expected_min).epsilon(1e-6));
    }
}

TEST_CASE("measure_deterministic") {
    const double eps = kPi / 6;
    const StateTriple t = state_family({eps});
    const PTHamiltonian h = design_cpt_orthogonal(t.psi1, t.psi2);
    const Metric cpt = Metric::cpt(h);
    const ComplexMat2 p1 = cpt_projector(h, t.psi1);

    SUBCASE("projector annihilates the CPT-orthogonal state") {
        const MeasurementRecord r = measure_deterministic(p1, t.psi2, cpt);
        CHECK(r.verdict == Verdict::Zero);
        CHECK(r.residual < 1e-12);
        CHECK(r.kind == MeasurementKind::Cpt);
    }
    SUBCASE("projector fixes its own state") {
        const MeasurementRecord r = measure_deterministic(p1, t.psi1, cpt);
        CHECK(r.verdict == Verdict::Nonzero);
        CHECK(r.residual == doctest::Approx(1.0).epsilon(1e-12));
    }
    SUBCASE("Hermitian projector onto the evolved state") {
        const StateTriple f = state_family({eps, 0.2, 0.0});
        const PTHamiltonian hh = design_cpt_orthogonal(f.psi1, f.psi2);
        const double tau = tau_numeric(hh, f.psi2, f.psi3);
        const ComplexMat2 u = propagator(hh, tau);
        const ComplexVec2 w = normalized(u * f.psi2);
        const ComplexMat2 proj = outer(w, conjugate(w));
        const MeasurementRecord r =
            measure_deterministic(proj, u * f.psi3, Metric::hermitian());
        CHECK(r.verdict == Verdict::Zero);
        CHECK(r.kind == MeasurementKind::Hermitian);
    }
    SUBCASE("vanishing sample is rejected") {
        CHECK_THROWS_AS(measure_deterministic(p1, ComplexVec2{1e-9, 0}, cpt), ZeroCPTNorm);
    }
}

TEST_CASE("measure_stochastic edge probabilities") {
    const double eps = kPi / 6;
    const StateTriple t = state_family({eps});
    const PTHamiltonian h = design_cpt_orthogonal(t.psi1, t.psi2);
    const Metric cpt = Metric::cpt(h);
    RngStream rng(99, 0);

    for (int n = 0; n < 25; ++n) {
        const MeasurementRecord same = measure_stochastic(t.psi1, t.psi1, cpt, rng);
        CHECK(same.outcome_bit == OutcomeBit::Along);
        CHECK(same.verdict == Verdict::Nonzero);
        const MeasurementRecord orth = measure_stochastic(t.psi1, t.psi2, cpt, rng);
        CHECK(orth.outcome_bit == OutcomeBit::Orthogonal);
        CHECK(orth.verdict == Verdict::Zero);
    }
}

TEST_CASE("measure_stochastic matches the Born probability") {
    const StateTriple t = state_family({kPi / 6, 0.4, 0.2});
    const PTHamiltonian h = design_cpt_orthogonal(t.psi1, t.psi2);
    const Metric cpt = Metric::cpt(h);

    const double overlap = std::abs(cpt_inner(h, t.psi1, t.psi3));
    const double p =
        (overlap * overlap) / (cpt_inner(h, t.psi1, t.psi1).real() *
                               cpt_inner(h, t.psi3, t.psi3).real());
    REQUIRE(p > 0.01);
    REQUIRE(p < 0.99);

    const int draws = 100000;
    int along = 0;
    for (int n = 0; n < draws; ++n) {
        RngStream rng(424242, static_cast<std::uint64_t>(n));
        const MeasurementRecord r = measure_stochastic(t.psi1, t.psi3, cpt, rng);
        CHECK(r.residual == doctest::Approx(std::sqrt(p)).epsilon(1e-12));
        if (r.outcome_bit == OutcomeBit::Along) ++along;
    }
    const double freq = static_cast<double>(along) / draws;
    const double se = std::sqrt(p * (1.0 - p) / draws);
    CHECK(std::abs(freq - p) < 3.0 * se);
}

TEST_CASE("plan_round combined mode on the family triple") {
    const auto states = family_states(kPi / 6, 0.2, 0.0);
    const DiscriminationPlan plan = plan_round(states, 0, 1, 2, PlanMode::Combined);
    CHECK(std::sin(plan.hamiltonian.alpha) ==
          doctest::Approx(std::cos(kPi / 6)).epsilon(1e-12));
    CHECK(plan.tau > 0.0);
    CHECK(!plan.second_hamiltonian.has_value());
    CHECK(rel_cpt(plan.hamiltonian, states[0], states[1]) < 1e-10);
    const ComplexMat2 u = propagator(plan.hamiltonian, plan.tau);
    CHECK(rel_hermitian(u * states[1], u * states[2]) < 1e-10);
}

TEST_CASE("plan_round all-CPT mode designs two Hamiltonians") {
    const auto states = family_states(kPi / 6, 0.2, 0.0);
    const DiscriminationPlan plan = plan_round(states, 0, 1, 2, PlanMode::AllCpt);
    CHECK(plan.tau == 0.0);
    REQUIRE(plan.second_hamiltonian.has_value());
    CHECK(rel_cpt(plan.hamiltonian, states[0], states[1]) < 1e-10);
    CHECK(rel_cpt(*plan.second_hamiltonian, states[1], states[2]) < 1e-10);
}

TEST_CASE("plan_round rejects repeated indices") {
    const auto states = family_states(kPi / 6, 0.2, 0.0);
    CHECK_THROWS_AS(plan_round(states, 1, 1, 2, PlanMode::Combined), InvalidParameter);
    CHECK_THROWS_AS(plan_round(states, 0, 1, 5, PlanMode::Combined), InvalidParameter);
}

TEST_CASE("plan_round flags ambiguous zero outcomes") {
    // A third candidate on the psi2 line (up to phase) is also CPT
    // orthogonal to psi1, so Measurement 1 = 0 would be ambiguous.
    const StateTriple t = state_family({kPi / 6});
    const ComplexVec2 ghost = std::exp(I * 0.7) * t.psi2;
    const std::vector<ComplexVec2> states{t.psi1, t.psi2, ghost};
    CHECK_THROWS_AS(plan_round(states, 0, 1, 2, PlanMode::Combined), DegenerateTriple);
}

TEST_CASE("discriminate3 decision table") {
    const StateTriple t = state_family({kPi / 6, 0.2, 0.0});
    for (PlanMode mode : {PlanMode::Combined, PlanMode::AllCpt}) {
        // true state psi2 (index 1): first measurement reads zero.
        ProtocolResult r = discriminate3(t, 1, mode, MeasureMode::Deterministic);
        CHECK(r.identified == 1);
        CHECK(r.samples_used == 2);
        CHECK(r.rounds.size() == 1);
        CHECK(r.rounds[0].measurements[0].verdict == Verdict::Zero);

        // true state psi3 (index 2): first nonzero, second zero.
        r = discriminate3(t, 2, mode, MeasureMode::Deterministic);
        CHECK(r.identified == 2);
        CHECK(r.rounds[0].measurements[0].verdict == Verdict::Nonzero);
        CHECK(r.rounds[0].measurements[1].verdict == Verdict::Zero);

        // true state psi1 (index 0): both nonzero.
        r = discriminate3(t, 0, mode, MeasureMode::Deterministic);
        CHECK(r.identified == 0);
        CHECK(r.rounds[0].measurements[0].verdict == Verdict::Nonzero);
        CHECK(r.rounds[0].measurements[1].verdict == Verdict::Nonzero);
    }
}

TEST_CASE("discriminate_n with N = 3 reduces to discriminate3") {
    const StateTriple t = state_family({kPi / 6, 0.2, 0.0});
    const std::vector<ComplexVec2> states{t.psi1, t.psi2, t.psi3};
    for (std::size_t true_index = 0; true_index < 3; ++true_index) {
        const ProtocolResult a =
            discriminate3(t, true_index, PlanMode::Combined, MeasureMode::Deterministic);
        const ProtocolResult b = discriminate_n(states, true_index, PlanMode::Combined,
                                                MeasureMode::Deterministic);
        CHECK(a.identified == b.identified);
        CHECK(a.samples_used == b.samples_used);
    }
}

TEST_CASE("discriminate_n rejects coincident states and tiny lists") {
    const auto dup = family_states(0.9, 0.0, 0.0);  // psi3 = psi1
    CHECK_THROWS_AS(
        discriminate_n(dup, 0, PlanMode::Combined, MeasureMode::Deterministic),
        InvalidParameter);
    CHECK_THROWS_AS(discriminate_n({angle_state(0.3)}, 0, PlanMode::Combined,
                                   MeasureMode::Deterministic),
                    InvalidParameter);
}

TEST_CASE("discriminate_n identifies every true state within budget") {
    // Regular angular spacings known to plan in both modes.
    const std::vector<std::pair<std::size_t, double>> table{
        {2, 0.3}, {3, 0.3}, {4, 0.7}, {5, 0.5}, {6, 0.5}, {7, 0.4}};
    for (const auto& [n, spacing] : table) {
        const auto states = spaced_states(n, spacing);
        for (PlanMode mode : {PlanMode::Combined, PlanMode::AllCpt}) {
            for (std::size_t true_index = 0; true_index < n; ++true_index) {
                const ProtocolResult r =
                    discriminate_n(states, true_index, mode, MeasureMode::Deterministic);
                CHECK(r.identified == true_index);
                CHECK(r.samples_used <= n - 1);
            }
        }
    }
}

TEST_CASE("deterministic completeness on random admissible lists") {
    TestRng rng(5150);
    int planned = 0;
    for (std::size_t n = 2; n <= 7; ++n) {
        for (int list = 0; list < 12; ++list) {
            // Pairwise Hermitian overlap at most 0.99.
            std::vector<double> angles;
            int guard = 0;
            while (angles.size() < n && guard < 10000) {
                ++guard;
                const double a = rng.uniform(0.08, kPi / 2 - 0.08);
                bool ok = true;
                for (double b : angles) {
                    if (std::abs(std::cos(a - b)) > 0.99) ok = false;
                }
                if (ok) angles.push_back(a);
            }
            REQUIRE(angles.size() == n);
            std::vector<ComplexVec2> states;
            for (double a : angles) states.push_back(angle_state(a));

            try {
                const ProtocolPlanner planner(states, PlanMode::Combined);
                ++planned;
                for (std::size_t true_index = 0; true_index < n; ++true_index) {
                    const ProtocolResult r =
                        planner.run(true_index, MeasureMode::Deterministic);
                    CHECK(r.identified == true_index);
                    CHECK(r.samples_used <= n - 1);
                }
            } catch (const DomainError&) {
                // Not all random lists admit a full plan; those are outside
                // the property's precondition.
            }
        }
    }
    CHECK(planned >= 24);  // a healthy share of lists must be plannable
}

TEST_CASE("combined and all-CPT modes agree on the family triple") {
    for (double gamma : {0.1, 0.2, 0.25}) {
        const auto states = family_states(kPi / 6, gamma, 0.0);
        for (std::size_t true_index = 0; true_index < 3; ++true_index) {
            const ProtocolResult a = discriminate_n(states, true_index, PlanMode::Combined,
                                                    MeasureMode::Deterministic);
            const ProtocolResult b = discriminate_n(states, true_index, PlanMode::AllCpt,
                                                    MeasureMode::Deterministic);
            CHECK(a.identified == b.identified);
        }
    }
}

TEST_CASE("stochastic trials are reproducible and seed-driven") {
    const auto states = spaced_states(4, 0.7);
    const TrialStats one = run_trials(states, PlanMode::Combined, 2000, 777, 1);
    const TrialStats four = run_trials(states, PlanMode::Combined, 2000, 777, 4);
    CHECK(one.counts == four.counts);
    CHECK(one.accuracy == four.accuracy);

    const TrialStats redo = run_trials(states, PlanMode::Combined, 2000, 777, 2);
    CHECK(redo.counts == one.counts);

    const TrialStats other = run_trials(states, PlanMode::Combined, 2000, 778, 1);
    CHECK(other.counts != one.counts);

    // Confusion rows sum to the trial count; accuracy is strictly < 1.
    for (std::size_t t = 0; t < 4; ++t) {
        std::uint64_t row = 0;
        for (std::size_t i = 0; i < 4; ++i) row += one.counts[t * 4 + i];
        CHECK(row == 2000);
    }
    CHECK(one.accuracy < 1.0);
    CHECK(one.accuracy > 0.25);
}

TEST_CASE("stochastic four-state run at full trial count") {
    const auto states = spaced_states(4, 0.7);
    const std::size_t trials = 100000;
    const TrialStats stats = run_trials(states, PlanMode::Combined, trials, 4242, 4);
    for (std::size_t t = 0; t < 4; ++t) {
        std::uint64_t row = 0;
        for (std::size_t i = 0; i < 4; ++i) row += stats.counts[t * 4 + i];
        CHECK(row == trials);
    }
    CHECK(stats.accuracy < 1.0);
    CHECK(stats.accuracy > 0.0);
}

TEST_CASE("stochastic confusion frequencies follow the Born rule") {
    const auto states = family_states(kPi / 6, 0.2, 0.0);
    const ProtocolPlanner planner(states, PlanMode::Combined);
    REQUIRE(planner.triple_rounds().size() == 1);
    const auto& round = planner.triple_rounds()[0];
    REQUIRE(round.plan.i == 0);
    REQUIRE(round.plan.j == 1);
    REQUIRE(round.plan.k == 2);

    // Born parameters of the two measurements.
    const double q02 = std::pow(rel_cpt(round.plan.hamiltonian, states[0], states[2]), 2);
    const double p01 = std::pow(rel_hermitian(round.evolved[1], round.evolved[0]), 2);

    const std::size_t trials = 20000;
    const TrialStats stats = run_trials(states, PlanMode::Combined, trials, 31337, 2);
    const auto freq = [&](std::size_t truth, std::size_t got) {
        return static_cast<double>(stats.counts[truth * 3 + got]) / trials;
    };
    const auto se = [&](double p) { return std::sqrt(p * (1 - p) / trials); };

    // true = psi2: always identified correctly.
    CHECK(freq(1, 1) == 1.0);
    // true = psi3: identified 3 with prob q02, else misread as psi2.
    CHECK(std::abs(freq(2, 2) - q02) < 3 * se(q02));
    CHECK(std::abs(freq(2, 1) - (1 - q02)) < 3 * se(q02));
    // true = psi1: identified 1 with prob p01, else misread as psi3.
    CHECK(std::abs(freq(0, 0) - p01) < 3 * se(p01));
    CHECK(std::abs(freq(0, 2) - (1 - p01)) < 3 * se(p01));
    CHECK(stats.accuracy < 1.0);
}

TEST_CASE("stochastic single run keeps records and budget") {
    const auto states = spaced_states(5, 0.5);
    RngStream rng(2024, 7);
    const ProtocolResult r =
        discriminate_n(states, 3, PlanMode::Combined, MeasureMode::Stochastic, &rng);
    CHECK(r.samples_used <= 4);
    CHECK(r.mode == MeasureMode::Stochastic);
    for (const auto& round : r.rounds) {
        for (const auto& m : round.measurements) {
            CHECK(m.outcome_bit.has_value());
            CHECK(m.residual >= 0.0);
            CHECK(m.residual <= 1.0 + 1e-12);
        }
    }
    CHECK_THROWS_AS(
        discriminate_n(states, 3, PlanMode::Combined, MeasureMode::Stochastic, nullptr),
        InvalidParameter);
}
