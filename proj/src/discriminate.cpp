#include "ptdisc/discriminate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace ptdisc {

namespace {

constexpr cplx kI{0.0, 1.0};
constexpr double kPi = 3.14159265358979323846;

std::string index_msg(const char* what, std::size_t i, std::size_t j, std::size_t k) {
    std::ostringstream msg;
    msg << what << " (i, j, k) = (" << i << ", " << j << ", " << k << ")";
    return msg.str();
}

void require_normalized(std::span<const ComplexVec2> states) {
    for (std::size_t m = 0; m < states.size(); ++m) {
        if (std::abs(norm_hermitian(states[m]) - 1.0) > 1e-9) {
            std::ostringstream msg;
            msg << "state " << m << " is not Hermitian-normalized (norm = "
                << norm_hermitian(states[m]) << ")";
            throw InvalidParameter(msg.str());
        }
    }
}

// Relative CPT overlap of a candidate pair.
double cpt_overlap_rel(const PTHamiltonian& h, const ComplexVec2& u, const ComplexVec2& v) {
    return std::abs(cpt_inner(h, u, v)) / (cpt_norm(h, u) * cpt_norm(h, v));
}

double hermitian_overlap_rel(const ComplexVec2& u, const ComplexVec2& v) {
    return std::abs(inner_hermitian(u, v)) / (norm_hermitian(u) * norm_hermitian(v));
}

ComplexMat2 hermitian_projector(const ComplexVec2& w) {
    const double n2 = std::norm(w.a) + std::norm(w.b);
    return (1.0 / n2) * outer(w, conjugate(w));
}

// Designs a round for global indices (i, j, k) with degeneracy checks
// restricted to `candidates` (the states still in play).
DiscriminationPlan plan_round_impl(std::span<const ComplexVec2> states,
                                   std::span<const std::size_t> candidates, std::size_t i,
                                   std::size_t j, std::size_t k, PlanMode mode, double tol) {
    const PTHamiltonian h = design_cpt_orthogonal(states[i], states[j]);

    if (cpt_overlap_rel(h, states[i], states[j]) > tol) {
        throw NotOrthogonalizable("designed metric failed its CPT post-check");
    }
    // A zero first measurement must single out j.
    for (std::size_t m : candidates) {
        if (m == i || m == j) continue;
        if (cpt_overlap_rel(h, states[i], states[m]) <= tol) {
            throw DegenerateTriple(index_msg("first measurement is ambiguous for", i, j, m));
        }
    }

    DiscriminationPlan plan{i, j, k, h, 0.0, mode, std::nullopt};
    if (mode == PlanMode::Combined) {
        plan.tau = tau_numeric(h, states[j], states[k]);
        const ComplexMat2 u_tau = propagator(h, plan.tau);
        const ComplexVec2 wj = u_tau * states[j];
        if (hermitian_overlap_rel(wj, u_tau * states[k]) > tol) {
            throw NoOrthogonalizingTime("evolved pair failed its Hermitian post-check",
                                        hermitian_overlap_rel(wj, u_tau * states[k]));
        }
        // A zero second measurement must single out k.
        for (std::size_t m : candidates) {
            if (m == j || m == k) continue;
            if (hermitian_overlap_rel(wj, u_tau * states[m]) <= tol) {
                throw DegenerateTriple(index_msg("second measurement is ambiguous for", j, k, m));
            }
        }
    } else {
        const PTHamiltonian h2 = design_cpt_orthogonal(states[j], states[k]);
        if (cpt_overlap_rel(h2, states[j], states[k]) > tol) {
            throw NotOrthogonalizable("second metric failed its CPT post-check");
        }
        for (std::size_t m : candidates) {
            if (m == j || m == k) continue;
            if (cpt_overlap_rel(h2, states[j], states[m]) <= tol) {
                throw DegenerateTriple(index_msg("second measurement is ambiguous for", j, k, m));
            }
        }
        plan.second_hamiltonian = h2;
    }
    return plan;
}

}  // namespace

cplx metric_inner(const Metric& m, const ComplexVec2& u, const ComplexVec2& v) {
    return m.cpt_h ? cpt_inner(*m.cpt_h, u, v) : inner_hermitian(u, v);
}

double metric_norm(const Metric& m, const ComplexVec2& v) {
    return m.cpt_h ? cpt_norm(*m.cpt_h, v) : norm_hermitian(v);
}

PTHamiltonian design_cpt_orthogonal(const ComplexVec2& u, const ComplexVec2& v) {
    const double nu = norm_hermitian(u);
    const double nv = norm_hermitian(v);
    if (nu <= 0.0 || nv <= 0.0 || !all_finite(u) || !all_finite(v)) {
        throw InvalidParameter("design_cpt_orthogonal: states must be finite and nonzero");
    }

    // <u|v>_CPT vanishes iff sin(alpha) = <u|v> / (sigma_y conj(u))^T v.
    const cplx num = inner_hermitian(u, v);
    const ComplexVec2 syu{-kI * std::conj(u.b), kI * std::conj(u.a)};
    const cplx den = syu.a * v.a + syu.b * v.b;

    double sin_alpha = 0.0;
    if (std::abs(num) > 1e-15 * nu * nv) {  // else already Hermitian-orthogonal, parity metric
        if (std::abs(den) < 1e-300) {
            throw NotOrthogonalizable("design_cpt_orthogonal: overlap has no metric dependence");
        }
        const cplx ratio = num / den;
        if (std::abs(ratio.imag()) > 1e-9 * std::max(1.0, std::abs(ratio))) {
            std::ostringstream msg;
            msg << "design_cpt_orthogonal: sin(alpha) candidate is not real, ratio = ("
                << ratio.real() << ", " << ratio.imag() << ")";
            throw NotOrthogonalizable(msg.str());
        }
        sin_alpha = ratio.real();
        if (std::abs(sin_alpha) >= 1.0) {
            std::ostringstream msg;
            msg << "design_cpt_orthogonal: |sin(alpha)| = " << std::abs(sin_alpha)
                << " >= 1 leaves the unbroken regime";
            throw NotOrthogonalizable(msg.str());
        }
        if (std::sqrt(1.0 - sin_alpha * sin_alpha) < kMinCosAlpha) {
            std::ostringstream msg;
            msg << "design_cpt_orthogonal: cos(alpha) < " << kMinCosAlpha
                << ", metric too close to the broken boundary";
            throw NotOrthogonalizable(msg.str());
        }
    }
    return pt_hamiltonian(sin_alpha, 1.0, kPi / 2.0);
}

double tau_closed_form(double epsilon, TauBranch branch) {
    if (!(epsilon > 0.0) || !(epsilon < kPi / 2.0)) {
        std::ostringstream msg;
        msg << "tau_closed_form: epsilon must lie in (0, pi/2), got " << epsilon;
        throw InvalidParameter(msg.str());
    }
    const double ce = std::cos(epsilon);
    const double se = std::sin(epsilon);
    const double tn = std::tan((kPi + 2.0 * epsilon) / 4.0);
    const double radicand = 2.0 * ce * tn - 1.0;
    if (radicand < 0.0) {
        std::ostringstream msg;
        msg << "tau_closed_form: negative radicand " << radicand << " at epsilon = " << epsilon;
        throw InvalidParameter(msg.str());
    }
    const double sign = branch == TauBranch::Plus ? 1.0 : -1.0;
    const double numer = se * (ce + sign * std::sqrt(radicand));
    const double denom = 2.0 * ce * tn - ce * ce - 1.0;
    if (std::abs(denom) < 1e-300) return kPi / 2.0;  // tan(omega tau) -> +-inf

    const double tan_wt = numer / denom;
    // Map into (0, pi): the sign rule keeps tau positive.
    if (tan_wt > 0.0) return std::atan(tan_wt);
    if (tan_wt < 0.0) return kPi + std::atan(tan_wt);
    return kPi;
}

double tau_numeric(const PTHamiltonian& h, const ComplexVec2& u, const ComplexVec2& v,
                   double tol) {
    constexpr int kGridPoints = 2048;
    const double period = kPi / h.omega;
    const double step = period / kGridPoints;

    const auto overlap_sq = [&](double t) {
        return std::norm(inner_hermitian(u, gram_evolution(h, t) * v));
    };

    std::vector<double> g(kGridPoints + 1);
    for (int n = 1; n <= kGridPoints; ++n) g[n] = overlap_sq(n * step);

    constexpr double kGolden = 0.6180339887498949;
    double achieved = std::numeric_limits<double>::infinity();
    for (int n = 1; n <= kGridPoints; ++n) {
        const bool left_ok = n == 1 || g[n] <= g[n - 1];
        const bool right_ok = n == kGridPoints || g[n] <= g[n + 1];
        if (!left_ok || !right_ok) continue;

        // Refine the bracket around this local minimum; the left edge of
        // the first bracket stays strictly positive.
        double lo = n == 1 ? step * 1e-6 : (n - 1) * step;
        double hi = n == kGridPoints ? period : (n + 1) * step;
        while (hi - lo > 1e-15 * period) {
            const double x1 = hi - kGolden * (hi - lo);
            const double x2 = lo + kGolden * (hi - lo);
            if (overlap_sq(x1) < overlap_sq(x2)) {
                hi = x2;
            } else {
                lo = x1;
            }
        }
        const double t_min = 0.5 * (lo + hi);
        const double residual = std::sqrt(overlap_sq(t_min));
        achieved = std::min(achieved, residual);
        if (residual <= tol) return t_min;  // earliest qualifying time wins
    }

    std::ostringstream msg;
    msg << "tau_numeric: no orthogonalizing time in (0, pi/omega]; smallest |overlap| reached is "
        << achieved;
    throw NoOrthogonalizingTime(msg.str(), achieved);
}

MeasurementRecord measure_deterministic(const ComplexMat2& projector, const ComplexVec2& sample,
                                        const Metric& metric, double tol,
                                        std::size_t target_index) {
    const double ns = metric_norm(metric, sample);
    if (ns * ns <= 1e-10) {
        throw ZeroCPTNorm("measure_deterministic: sample has vanishing metric norm");
    }
    const double residual = metric_norm(metric, projector * sample) / ns;
    return {metric.kind(), target_index, residual,
            residual <= tol ? Verdict::Zero : Verdict::Nonzero, std::nullopt};
}

MeasurementRecord measure_stochastic(const ComplexVec2& basis_state, const ComplexVec2& sample,
                                     const Metric& metric, RngStream& rng,
                                     std::size_t target_index) {
    const double nb = metric_norm(metric, basis_state);
    const double ns = metric_norm(metric, sample);
    if (nb * nb <= 1e-10 || ns * ns <= 1e-10) {
        throw ZeroCPTNorm("measure_stochastic: vanishing metric norm");
    }
    const double overlap = std::abs(metric_inner(metric, basis_state, sample));
    const double p = std::clamp((overlap * overlap) / (nb * nb * ns * ns), 0.0, 1.0);
    const bool along = rng.bernoulli(p);
    return {metric.kind(), target_index, std::sqrt(p),
            along ? Verdict::Nonzero : Verdict::Zero,
            along ? OutcomeBit::Along : OutcomeBit::Orthogonal};
}

DiscriminationPlan plan_round(std::span<const ComplexVec2> states, std::size_t i, std::size_t j,
                              std::size_t k, PlanMode mode, double tol) {
    if (i >= states.size() || j >= states.size() || k >= states.size()) {
        throw InvalidParameter(index_msg("plan_round: index out of range,", i, j, k));
    }
    if (i == j || j == k || i == k) {
        throw InvalidParameter(index_msg("plan_round: indices must be distinct,", i, j, k));
    }
    require_normalized(states);
    std::vector<std::size_t> all(states.size());
    for (std::size_t m = 0; m < all.size(); ++m) all[m] = m;
    return plan_round_impl(states, all, i, j, k, mode, tol);
}

ProtocolPlanner::ProtocolPlanner(std::vector<ComplexVec2> states, PlanMode mode, double tol)
    : states_(std::move(states)), mode_(mode), tol_(tol) {
    const std::size_t n = states_.size();
    if (n < 2) throw InvalidParameter("ProtocolPlanner: need at least 2 candidate states");
    if (!(tol > 0.0) || tol > 1e-3) {
        throw InvalidParameter("ProtocolPlanner: tolerance must lie in (0, 1e-3]");
    }
    require_normalized(states_);
    for (std::size_t a = 0; a < n; ++a) {
        for (std::size_t b = a + 1; b < n; ++b) {
            if (hermitian_overlap_rel(states_[a], states_[b]) >= 1.0 - 1e-12) {
                std::ostringstream msg;
                msg << "ProtocolPlanner: states " << a << " and " << b
                    << " coincide up to phase";
                throw InvalidParameter(msg.str());
            }
        }
    }

    std::vector<std::size_t> cand(n);
    for (std::size_t m = 0; m < n; ++m) cand[m] = m;

    while (cand.size() > 2) {
        // First triple in candidate order, cyclic rotations, then later
        // combinations, until one plans cleanly.
        std::optional<DiscriminationPlan> plan;
        std::string first_failure;
        for (std::size_t a = 0; a < cand.size() - 2 && !plan; ++a) {
            for (std::size_t b = a + 1; b < cand.size() - 1 && !plan; ++b) {
                for (std::size_t c = b + 1; c < cand.size() && !plan; ++c) {
                    const std::size_t trio[3] = {cand[a], cand[b], cand[c]};
                    for (int rot = 0; rot < 3 && !plan; ++rot) {
                        try {
                            plan = plan_round_impl(states_, cand, trio[rot % 3],
                                                   trio[(rot + 1) % 3], trio[(rot + 2) % 3],
                                                   mode_, tol_);
                        } catch (const DomainError& e) {
                            if (first_failure.empty()) first_failure = e.what();
                        }
                    }
                }
            }
        }
        if (!plan) {
            throw DegenerateTriple("ProtocolPlanner: no orderable triple among remaining "
                                   "candidates; first failure: " +
                                   first_failure);
        }

        PlannedTriple round;
        round.plan = *plan;
        round.candidates = cand;
        const ComplexMat2 u_tau = propagator(plan->hamiltonian, plan->tau);
        round.evolved.reserve(n);
        for (const auto& psi : states_) round.evolved.push_back(u_tau * psi);
        round.m1_basis = round.evolved[plan->i];
        round.m1_projector = cpt_projector(plan->hamiltonian, round.m1_basis);
        round.m2_basis = round.evolved[plan->j];
        round.m2_projector = plan->second_hamiltonian
                                 ? cpt_projector(*plan->second_hamiltonian, round.m2_basis)
                                 : hermitian_projector(round.m2_basis);
        triples_.push_back(std::move(round));

        std::erase_if(cand, [&](std::size_t m) { return m == plan->j || m == plan->k; });
    }

    if (cand.size() == 2) {
        const PTHamiltonian h = design_cpt_orthogonal(states_[cand[0]], states_[cand[1]]);
        if (cpt_overlap_rel(h, states_[cand[0]], states_[cand[1]]) > tol_) {
            throw NotOrthogonalizable("ProtocolPlanner: final pair failed its CPT post-check");
        }
        pair_ = PlannedPair{{cand[0], cand[1], h}, cpt_projector(h, states_[cand[0]])};
    } else {
        remainder_ = cand[0];
    }
}

ProtocolResult ProtocolPlanner::run(std::size_t true_index, MeasureMode measurement,
                                    RngStream* rng) const {
    if (true_index >= states_.size()) {
        throw InvalidParameter("ProtocolPlanner::run: true_index out of range");
    }
    if (measurement == MeasureMode::Stochastic && rng == nullptr) {
        throw InvalidParameter("ProtocolPlanner::run: stochastic mode needs an RngStream");
    }
    const bool stochastic = measurement == MeasureMode::Stochastic;

    ProtocolResult result{};
    result.mode = measurement;
    result.samples_used = 0;

    for (const auto& round : triples_) {
        const auto& plan = round.plan;
        const ComplexVec2& sample = round.evolved[true_index];
        const Metric m1 = Metric::cpt(plan.hamiltonian);
        const Metric m2 = plan.second_hamiltonian ? Metric::cpt(*plan.second_hamiltonian)
                                                  : Metric::hermitian();

        const MeasurementRecord rec1 =
            stochastic ? measure_stochastic(round.m1_basis, sample, m1, *rng, plan.i)
                       : measure_deterministic(round.m1_projector, sample, m1, tol_, plan.i);
        const MeasurementRecord rec2 =
            stochastic ? measure_stochastic(round.m2_basis, sample, m2, *rng, plan.j)
                       : measure_deterministic(round.m2_projector, sample, m2, tol_, plan.j);
        result.samples_used += 2;
        result.rounds.push_back({plan, {rec1, rec2}});

        if (rec1.verdict == Verdict::Zero) {
            result.identified = plan.j;
            return result;
        }
        if (rec2.verdict == Verdict::Zero) {
            result.identified = plan.k;
            return result;
        }
    }

    if (pair_) {
        const auto& pr = *pair_;
        const Metric m = Metric::cpt(pr.plan.hamiltonian);
        const ComplexVec2& sample = states_[true_index];
        const MeasurementRecord rec =
            stochastic ? measure_stochastic(states_[pr.plan.i], sample, m, *rng, pr.plan.i)
                       : measure_deterministic(pr.projector, sample, m, tol_, pr.plan.i);
        result.samples_used += 1;
        result.rounds.push_back({pr.plan, {rec}});
        result.identified = rec.verdict == Verdict::Zero ? pr.plan.j : pr.plan.i;
    } else {
        result.identified = remainder_;
    }

    if (measurement == MeasureMode::Deterministic &&
        result.samples_used > states_.size() - 1) {
        throw std::logic_error("ProtocolPlanner::run: sample budget exceeded");
    }
    return result;
}

ProtocolResult discriminate3(const StateTriple& states, std::size_t true_index, PlanMode mode,
                             MeasureMode measurement, RngStream* rng, double tol) {
    return discriminate_n({states.psi1, states.psi2, states.psi3}, true_index, mode, measurement,
                          rng, tol);
}

ProtocolResult discriminate_n(const std::vector<ComplexVec2>& states, std::size_t true_index,
                              PlanMode mode, MeasureMode measurement, RngStream* rng,
                              double tol) {
    const ProtocolPlanner planner(states, mode, tol);
    return planner.run(true_index, measurement, rng);
}

TrialStats run_trials(const std::vector<ComplexVec2>& states, PlanMode mode,
                      std::size_t trials_per_state, std::uint64_t seed, unsigned workers,
                      double tol) {
    if (trials_per_state < 1) {
        throw InvalidParameter("run_trials: trials_per_state must be >= 1");
    }
    const ProtocolPlanner planner(states, mode, tol);
    const std::size_t n = states.size();
    const std::size_t total = n * trials_per_state;

    // Trial identity fixes both the true state and the RNG stream, so
    // any partition over workers reproduces the same outcomes.
    std::vector<std::uint32_t> identified(total);
    const auto work = [&](std::size_t begin, std::size_t end) {
        for (std::size_t t = begin; t < end; ++t) {
            RngStream rng = RngStream::for_trial(seed, t);
            const std::size_t true_index = t / trials_per_state;
            const ProtocolResult r = planner.run(true_index, MeasureMode::Stochastic, &rng);
            identified[t] = static_cast<std::uint32_t>(r.identified);
        }
    };

    const unsigned w = std::max(1u, workers);
    if (w == 1) {
        work(0, total);
    } else {
        std::vector<std::thread> pool;
        std::vector<std::exception_ptr> errors(w);
        const std::size_t chunk = (total + w - 1) / w;
        for (unsigned id = 0; id < w; ++id) {
            const std::size_t begin = std::min<std::size_t>(id * chunk, total);
            const std::size_t end = std::min<std::size_t>(begin + chunk, total);
            pool.emplace_back([&, id, begin, end] {
                try {
                    work(begin, end);
                } catch (...) {
                    errors[id] = std::current_exception();
                }
            });
        }
        for (auto& th : pool) th.join();
        for (const auto& e : errors) {
            if (e) std::rethrow_exception(e);
        }
    }

    TrialStats stats{n, trials_per_state, std::vector<std::uint64_t>(n * n, 0), 0.0};
    std::uint64_t correct = 0;
    for (std::size_t t = 0; t < total; ++t) {
        const std::size_t true_index = t / trials_per_state;
        stats.counts[true_index * n + identified[t]] += 1;
        if (identified[t] == true_index) ++correct;
    }
    stats.accuracy = static_cast<double>(correct) / static_cast<double>(total);
    return stats;
}

}  // namespace ptdisc
