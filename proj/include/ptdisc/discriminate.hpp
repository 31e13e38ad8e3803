#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "ptdisc/ptcore.hpp"
#include "ptdisc/rng.hpp"

namespace ptdisc {

// "Orthogonal" means |overlap| <= tolerance x (product of metric norms).
inline constexpr double kDefaultTolerance = 1e-9;

// Residual the numeric time solver must reach at the returned time.
inline constexpr double kTauResidualTolerance = 1e-10;

// Metrics scale like 1/cos^2(alpha); designs closer to the broken
// boundary than this are rejected as numerically useless.
inline constexpr double kMinCosAlpha = 1e-3;

enum class PlanMode { Combined, AllCpt };
enum class MeasureMode { Deterministic, Stochastic };
enum class MeasurementKind { Cpt, Hermitian };
enum class Verdict { Zero, Nonzero };
enum class OutcomeBit { Along, Orthogonal };
enum class TauBranch { Plus, Minus };

// Measurement metric: plain Hermitian, or the CPT product induced by a
// Hamiltonian.
struct Metric {
    static Metric hermitian() { return {}; }
    static Metric cpt(const PTHamiltonian& h) { return {h}; }

    std::optional<PTHamiltonian> cpt_h;

    MeasurementKind kind() const {
        return cpt_h ? MeasurementKind::Cpt : MeasurementKind::Hermitian;
    }
};

cplx metric_inner(const Metric& m, const ComplexVec2& u, const ComplexVec2& v);
double metric_norm(const Metric& m, const ComplexVec2& v);

// One elimination round over candidates (i, j, k): the Hamiltonian's
// CPT product separates i from j, and either time evolution (combined)
// or a second Hamiltonian (all-CPT) separates j from k.
struct DiscriminationPlan {
    std::size_t i;
    std::size_t j;
    std::size_t k;
    PTHamiltonian hamiltonian;
    double tau;
    PlanMode mode;
    std::optional<PTHamiltonian> second_hamiltonian;
};

// Final round when only two candidates remain: a single CPT measurement
// against psi_i decides between i and j.
struct PairPlan {
    std::size_t i;
    std::size_t j;
    PTHamiltonian hamiltonian;
};

struct MeasurementRecord {
    MeasurementKind kind;
    std::size_t target_index;
    double residual;  // metric norm of projected vector / metric norm of sample
    Verdict verdict;
    std::optional<OutcomeBit> outcome_bit;  // stochastic mode only
};

struct RoundRecord {
    std::variant<DiscriminationPlan, PairPlan> plan;
    std::vector<MeasurementRecord> measurements;
};

struct ProtocolResult {
    std::size_t identified;  // 0-based index into the input state list
    std::vector<RoundRecord> rounds;
    std::size_t samples_used;
    MeasureMode mode;
};

// Returns a Hamiltonian (gauge s = 1, beta = pi/2, r = sin alpha) whose
// CPT product renders u and v orthogonal. Throws NotOrthogonalizable
// when no unbroken-regime metric does.
PTHamiltonian design_cpt_orthogonal(const ComplexVec2& u, const ComplexVec2& v);

// Closed-form omega*tau for the family's (psi2, psi3) pair, one sign
// branch at a time, mapped into (0, pi) so that tau > 0. Input epsilon
// in (0, pi/2).
double tau_closed_form(double epsilon, TauBranch branch);

// Smallest t in (0, pi/omega] with |conj(u)^T gram_evolution(h,t) v|
// <= tol: 2048-point scan of |overlap|^2 over one period, then
// golden-section refinement of each minimal bracket in time order.
// Throws NoOrthogonalizingTime (carrying the achieved minimum) if the
// overlap never drops below tolerance.
double tau_numeric(const PTHamiltonian& h, const ComplexVec2& u, const ComplexVec2& v,
                   double tol = kTauResidualTolerance);

// Ideal (oracle) measurement: residual test of P . sample, no collapse.
MeasurementRecord measure_deterministic(const ComplexMat2& projector, const ComplexVec2& sample,
                                        const Metric& metric, double tol = kDefaultTolerance,
                                        std::size_t target_index = 0);

// Born-rule measurement: "along" with probability
// |<basis|sample>|^2 / (|basis|^2 |sample|^2) in the given metric;
// verdict is Zero iff the draw came out orthogonal.
MeasurementRecord measure_stochastic(const ComplexVec2& basis_state, const ComplexVec2& sample,
                                     const Metric& metric, RngStream& rng,
                                     std::size_t target_index = 0);

// Designs one round for the triple (i, j, k) drawn from states; all
// degeneracy checks run against the whole list, so a zero outcome
// identifies a unique candidate.
DiscriminationPlan plan_round(std::span<const ComplexVec2> states, std::size_t i, std::size_t j,
                              std::size_t k, PlanMode mode, double tol = kDefaultTolerance);

// Pre-computed measurement schedule for one state list. Round planning
// depends only on the candidate set, never on measurement outcomes, so
// the reachable rounds form a single chain built once up front; run()
// replays it and is safe to call concurrently.
class ProtocolPlanner {
public:
    struct PlannedTriple {
        DiscriminationPlan plan;
        std::vector<std::size_t> candidates;  // candidate set entering the round
        std::vector<ComplexVec2> evolved;     // propagator(tau) applied to every state
        ComplexVec2 m1_basis;                 // evolved psi_i
        ComplexMat2 m1_projector;             // CPT projector onto evolved psi_i
        ComplexVec2 m2_basis;                 // evolved psi_j
        ComplexMat2 m2_projector;             // Hermitian (combined) or second-CPT projector
    };
    struct PlannedPair {
        PairPlan plan;
        ComplexMat2 projector;  // CPT projector onto psi_i
    };

    ProtocolPlanner(std::vector<ComplexVec2> states, PlanMode mode,
                    double tol = kDefaultTolerance);

    ProtocolResult run(std::size_t true_index, MeasureMode measurement,
                       RngStream* rng = nullptr) const;

    const std::vector<ComplexVec2>& states() const { return states_; }
    PlanMode mode() const { return mode_; }
    double tolerance() const { return tol_; }
    const std::vector<PlannedTriple>& triple_rounds() const { return triples_; }
    const std::optional<PlannedPair>& pair_round() const { return pair_; }

private:
    std::vector<ComplexVec2> states_;
    PlanMode mode_;
    double tol_;
    std::vector<PlannedTriple> triples_;
    std::optional<PlannedPair> pair_;
    std::size_t remainder_ = 0;  // identified by pure elimination
};

// Two-measurement protocol over the family triple; candidate indices
// are 0-based (psi1 = 0).
ProtocolResult discriminate3(const StateTriple& states, std::size_t true_index, PlanMode mode,
                             MeasureMode measurement, RngStream* rng = nullptr,
                             double tol = kDefaultTolerance);

// N-state elimination: rounds of two measurements discard two
// candidates each until one remains. Deterministic mode on admissible
// inputs always identifies true_index with at most N-1 samples.
ProtocolResult discriminate_n(const std::vector<ComplexVec2>& states, std::size_t true_index,
                              PlanMode mode, MeasureMode measurement, RngStream* rng = nullptr,
                              double tol = kDefaultTolerance);

struct TrialStats {
    std::size_t n_states;
    std::size_t trials_per_state;
    std::vector<std::uint64_t> counts;  // counts[true * n_states + identified]
    double accuracy;                    // fraction of trials identifying the true state
};

// Stochastic Monte Carlo over every true state. Trial t of true state
// s draws from RngStream(seed, s * trials_per_state + t); results are
// bit-identical for any worker count.
TrialStats run_trials(const std::vector<ComplexVec2>& states, PlanMode mode,
                      std::size_t trials_per_state, std::uint64_t seed, unsigned workers = 1,
                      double tol = kDefaultTolerance);

}  // namespace ptdisc
