#include "ptdisc/cli.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <variant>

#include <CLI11.hpp>

#include "ptdisc/discriminate.hpp"
#include "ptdisc/ptcore.hpp"
#include "ptdisc/verify.hpp"

namespace ptdisc {

namespace {

constexpr double kPi = 3.14159265358979323846;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string domain_error_name(const DomainError& e) {
    if (dynamic_cast<const BrokenPTRegime*>(&e)) return "BrokenPTRegime";
    if (dynamic_cast<const ZeroCPTNorm*>(&e)) return "ZeroCPTNorm";
    if (dynamic_cast<const NotOrthogonalizable*>(&e)) return "NotOrthogonalizable";
    if (dynamic_cast<const NoOrthogonalizingTime*>(&e)) return "NoOrthogonalizingTime";
    if (dynamic_cast<const DegenerateTriple*>(&e)) return "DegenerateTriple";
    if (dynamic_cast<const InvalidParameter*>(&e)) return "InvalidParameter";
    return "DomainError";
}

// All numeric output is printed at 12 significant digits; re-parsing at
// that precision must not change any verify outcome.
std::string fmt12(double v) {
    if (v == 0.0) v = 0.0;  // normalize -0
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

class RecordWriter {
public:
    void add(const std::string& key, const std::string& value) {
        body_ += key;
        body_ += " = ";
        body_ += value;
        body_ += '\n';
    }
    void add(const std::string& key, double v) { add(key, fmt12(v)); }
    void add(const std::string& key, std::size_t v) { add(key, std::to_string(v)); }

    const std::string& str() const { return body_; }

private:
    std::string body_;
};

std::string fmt_state(const ComplexVec2& v) {
    return "(" + fmt12(v.a.real()) + ", " + fmt12(v.a.imag()) + ") (" + fmt12(v.b.real()) +
           ", " + fmt12(v.b.imag()) + ")";
}

void emit(const std::string& text, const std::string& out_path, std::ostream& out) {
    if (out_path.empty()) {
        out << text;
        return;
    }
    std::ofstream f(out_path, std::ios::binary);
    if (!f) throw UsageError("cannot open output file: " + out_path);
    f << text;
}

struct Options {
    double epsilon = 0.0;
    double gamma = 0.0;
    double delta = 0.0;
    std::vector<std::string> explicit_states;
    std::string mode = "combined";
    std::string measurement = "deterministic";
    std::size_t trials = 10000;
    std::uint64_t seed = 12345;
    double tolerance = kDefaultTolerance;
    std::size_t true_state = 1;
    unsigned workers = 1;
    std::string out_path;
    bool degrees = false;
    // design
    std::size_t pair_i = 1;
    std::size_t pair_j = 2;
    // sweep
    std::string param = "epsilon";
    double start = 0.0;
    double stop = 0.0;
    std::size_t steps = 0;

    std::vector<CLI::Option*> epsilon_opts;  // one per subcommand; only one parses

    bool has_epsilon() const {
        for (const CLI::Option* opt : epsilon_opts) {
            if (opt->count() > 0) return true;
        }
        return false;
    }
    double angle(double v) const { return degrees ? v * kPi / 180.0 : v; }
    PlanMode plan_mode() const {
        return mode == "all-cpt" ? PlanMode::AllCpt : PlanMode::Combined;
    }
    bool stochastic() const { return measurement == "stochastic"; }
};

void add_state_options(CLI::App* cmd, Options& o) {
    o.epsilon_opts.push_back(cmd->add_option(
        "--epsilon", o.epsilon, "Angle between the first two family states (radians)"));
    cmd->add_option("--gamma", o.gamma, "Third family state angle offset (radians)");
    cmd->add_option("--delta", o.delta, "Third family state relative phase (radians)");
    cmd->add_option("--state", o.explicit_states,
                    "Extra candidate state as RE,IM,RE,IM (repeatable; normalized on input)");
    cmd->add_flag("--degrees", o.degrees, "Interpret angle inputs as degrees");
}

void add_run_options(CLI::App* cmd, Options& o) {
    cmd->add_option("--mode", o.mode, "Round design: combined | all-cpt")
        ->check(CLI::IsMember({"combined", "all-cpt"}));
    cmd->add_option("--measurement", o.measurement, "deterministic | stochastic")
        ->check(CLI::IsMember({"deterministic", "stochastic"}));
    cmd->add_option("--trials", o.trials, "Stochastic trials per true state");
    cmd->add_option("--seed", o.seed, "Master seed for the per-trial RNG streams");
    cmd->add_option("--true-state", o.true_state, "1-based index of the prepared state");
    cmd->add_option("--workers", o.workers, "Worker threads for stochastic trials");
}

ComplexVec2 parse_state(const std::string& text) {
    ComplexVec2 v;
    double re1, im1, re2, im2;
    char tail;
    if (std::sscanf(text.c_str(), "%lf,%lf,%lf,%lf%c", &re1, &im1, &re2, &im2, &tail) != 4) {
        throw UsageError("--state expects RE,IM,RE,IM, got '" + text + "'");
    }
    v = {cplx{re1, im1}, cplx{re2, im2}};
    if (norm_hermitian(v) <= 0.0 || !all_finite(v)) {
        throw UsageError("--state must be a finite nonzero vector: '" + text + "'");
    }
    return normalized(v);
}

void validate_common(const Options& o) {
    if (!(o.tolerance > 0.0) || o.tolerance > 1e-3) {
        throw UsageError("--tolerance must lie in (0, 1e-3]");
    }
    if (o.stochastic() && o.trials < 1) {
        throw UsageError("--trials must be >= 1 in stochastic mode");
    }
    if (o.workers < 1) throw UsageError("--workers must be >= 1");
}

// Family states (when --epsilon is given) plus any explicit extras.
std::vector<ComplexVec2> build_states(const Options& o) {
    std::vector<ComplexVec2> states;
    if (o.has_epsilon()) {
        const StateTriple t =
            state_family({o.angle(o.epsilon), o.angle(o.gamma), o.angle(o.delta)});
        states = {t.psi1, t.psi2, t.psi3};
    }
    for (const auto& s : o.explicit_states) states.push_back(parse_state(s));
    if (states.empty()) {
        throw UsageError("no candidate states: give --epsilon or at least two --state");
    }
    return states;
}

void echo_config(RecordWriter& w, const Options& o, const std::vector<ComplexVec2>& states) {
    if (o.has_epsilon()) {
        w.add("config.epsilon", o.angle(o.epsilon));
        w.add("config.gamma", o.angle(o.gamma));
        w.add("config.delta", o.angle(o.delta));
    }
    w.add("config.tolerance", o.tolerance);
    w.add("states.count", states.size());
    for (std::size_t m = 0; m < states.size(); ++m) {
        w.add("state." + std::to_string(m + 1), fmt_state(states[m]));
    }
}

void write_hamiltonian(RecordWriter& w, const std::string& prefix, const PTHamiltonian& h) {
    w.add(prefix + ".r", h.r);
    w.add(prefix + ".s", h.s);
    w.add(prefix + ".beta", h.beta);
    w.add(prefix + ".alpha", h.alpha);
    w.add(prefix + ".omega", h.omega);
}

double rel_cpt(const PTHamiltonian& h, const ComplexVec2& u, const ComplexVec2& v) {
    return std::abs(cpt_inner(h, u, v)) / (cpt_norm(h, u) * cpt_norm(h, v));
}

double rel_hermitian(const ComplexVec2& u, const ComplexVec2& v) {
    return std::abs(inner_hermitian(u, v)) / (norm_hermitian(u) * norm_hermitian(v));
}

// Plans are re-verified right before they are written out.
void write_plan(RecordWriter& w, const std::string& prefix, const DiscriminationPlan& plan,
                const std::vector<ComplexVec2>& states, double tol) {
    const double r1 = rel_cpt(plan.hamiltonian, states[plan.i], states[plan.j]);
    double r2;
    if (plan.second_hamiltonian) {
        r2 = rel_cpt(*plan.second_hamiltonian, states[plan.j], states[plan.k]);
    } else {
        const ComplexMat2 u = propagator(plan.hamiltonian, plan.tau);
        r2 = rel_hermitian(u * states[plan.j], u * states[plan.k]);
    }
    if (r1 > tol || r2 > tol) {
        throw DomainError("plan failed re-verification at emission");
    }
    w.add(prefix + ".i", plan.i + 1);
    w.add(prefix + ".j", plan.j + 1);
    w.add(prefix + ".k", plan.k + 1);
    write_hamiltonian(w, prefix + ".hamiltonian", plan.hamiltonian);
    w.add(prefix + ".tau", plan.tau);
    if (plan.second_hamiltonian) {
        write_hamiltonian(w, prefix + ".second_hamiltonian", *plan.second_hamiltonian);
    }
    w.add(prefix + ".residual.cpt", r1);
    w.add(prefix + ".residual.second", r2);
}

void write_pair_plan(RecordWriter& w, const std::string& prefix, const PairPlan& plan,
                     const std::vector<ComplexVec2>& states, double tol) {
    const double r = rel_cpt(plan.hamiltonian, states[plan.i], states[plan.j]);
    if (r > tol) throw DomainError("plan failed re-verification at emission");
    w.add(prefix + ".i", plan.i + 1);
    w.add(prefix + ".j", plan.j + 1);
    write_hamiltonian(w, prefix + ".hamiltonian", plan.hamiltonian);
    w.add(prefix + ".residual.cpt", r);
}

void write_measurement(RecordWriter& w, const std::string& prefix, const MeasurementRecord& r) {
    w.add(prefix + ".kind", r.kind == MeasurementKind::Cpt ? "CPT" : "Hermitian");
    w.add(prefix + ".target", r.target_index + 1);
    w.add(prefix + ".residual", r.residual);
    w.add(prefix + ".verdict", r.verdict == Verdict::Zero ? "zero" : "nonzero");
    if (r.outcome_bit) {
        w.add(prefix + ".outcome",
              *r.outcome_bit == OutcomeBit::Along ? "along" : "orthogonal");
    }
}

int cmd_design(const Options& o, std::ostream& out) {
    validate_common(o);
    const auto states = build_states(o);
    if (o.pair_i < 1 || o.pair_i > states.size() || o.pair_j < 1 || o.pair_j > states.size() ||
        o.pair_i == o.pair_j) {
        throw UsageError("--i and --j must be distinct 1-based state indices");
    }
    const ComplexVec2& u = states[o.pair_i - 1];
    const ComplexVec2& v = states[o.pair_j - 1];
    const PTHamiltonian h = design_cpt_orthogonal(u, v);

    RecordWriter w;
    w.add("record", "design");
    echo_config(w, o, states);
    w.add("pair.i", o.pair_i);
    w.add("pair.j", o.pair_j);
    write_hamiltonian(w, "hamiltonian", h);
    w.add("residual.cpt", rel_cpt(h, u, v));
    emit(w.str(), o.out_path, out);
    return 0;
}

int cmd_tau(const Options& o, std::ostream& out) {
    validate_common(o);
    if (!o.has_epsilon()) throw UsageError("tau requires --epsilon");
    const double eps = o.angle(o.epsilon);

    RecordWriter w;
    w.add("record", "tau");
    const auto states = build_states(o);
    echo_config(w, o, states);

    bool failed = false;
    try {
        const double wt_plus = tau_closed_form(eps, TauBranch::Plus);
        const double wt_minus = tau_closed_form(eps, TauBranch::Minus);
        w.add("closed_form.tan_plus", std::tan(wt_plus));
        w.add("closed_form.tan_minus", std::tan(wt_minus));
        w.add("closed_form.omega_tau_plus", wt_plus);
        w.add("closed_form.omega_tau_minus", wt_minus);
    } catch (const DomainError& e) {
        w.add("closed_form.error", domain_error_name(e));
        failed = true;
    }

    try {
        const StateTriple t = state_family({eps, o.angle(o.gamma), o.angle(o.delta)});
        const PTHamiltonian h = design_cpt_orthogonal(t.psi1, t.psi2);
        w.add("numeric.alpha", h.alpha);
        w.add("numeric.omega", h.omega);
        const double tau = tau_numeric(h, t.psi2, t.psi3);
        const cplx overlap = inner_hermitian(t.psi2, gram_evolution(h, tau) * t.psi3);
        w.add("numeric.tau", tau);
        w.add("numeric.omega_tau", h.omega * tau);
        w.add("numeric.residual", std::abs(overlap));
    } catch (const NoOrthogonalizingTime& e) {
        w.add("numeric.error", "NoOrthogonalizingTime");
        w.add("numeric.achieved_minimum", e.achieved_minimum);
        failed = true;
    } catch (const DomainError& e) {
        w.add("numeric.error", domain_error_name(e));
        failed = true;
    }

    emit(w.str(), o.out_path, out);
    return failed ? 1 : 0;
}

int cmd_simulate(const Options& o, std::ostream& out) {
    validate_common(o);
    const auto states = build_states(o);

    RecordWriter w;
    w.add("record", "simulate");
    w.add("config.mode", o.mode);
    w.add("config.measurement", o.measurement);
    w.add("config.seed", std::to_string(o.seed));
    echo_config(w, o, states);

    if (!o.stochastic()) {
        if (o.true_state < 1 || o.true_state > states.size()) {
            throw UsageError("--true-state must lie in [1, N]");
        }
        w.add("config.true_state", o.true_state);
        const ProtocolResult r = discriminate_n(states, o.true_state - 1, o.plan_mode(),
                                                MeasureMode::Deterministic, nullptr,
                                                o.tolerance);
        std::size_t n = 0;
        for (const auto& round : r.rounds) {
            const std::string prefix = "round." + std::to_string(++n);
            std::visit(
                [&](const auto& plan) {
                    using T = std::decay_t<decltype(plan)>;
                    if constexpr (std::is_same_v<T, DiscriminationPlan>) {
                        write_plan(w, prefix + ".plan", plan, states, o.tolerance);
                    } else {
                        write_pair_plan(w, prefix + ".plan", plan, states, o.tolerance);
                    }
                },
                round.plan);
            for (std::size_t m = 0; m < round.measurements.size(); ++m) {
                write_measurement(w, prefix + ".measurement." + std::to_string(m + 1),
                                  round.measurements[m]);
            }
        }
        w.add("identified", r.identified + 1);
        w.add("samples_used", r.samples_used);
    } else {
        w.add("config.trials", o.trials);
        const TrialStats stats =
            run_trials(states, o.plan_mode(), o.trials, o.seed, o.workers, o.tolerance);
        const std::size_t n = stats.n_states;
        for (std::size_t t = 0; t < n; ++t) {
            for (std::size_t i = 0; i < n; ++i) {
                w.add("confusion." + std::to_string(t + 1) + "." + std::to_string(i + 1),
                      std::to_string(stats.counts[t * n + i]));
            }
        }
        w.add("accuracy", stats.accuracy);
    }
    emit(w.str(), o.out_path, out);
    return 0;
}

int cmd_sweep(const Options& o, std::ostream& out) {
    validate_common(o);
    if (!o.has_epsilon()) throw UsageError("sweep requires --epsilon as the base point");
    if (o.steps < 2) throw UsageError("--steps must be >= 2");

    std::string csv = "param,value,alpha,omega,tau_numeric,tau_closed_plus,tau_closed_minus,"
                      "residual,identified,accuracy\n";
    for (std::size_t n = 0; n < o.steps; ++n) {
        const double v = o.angle(o.start) +
                         (o.angle(o.stop) - o.angle(o.start)) * static_cast<double>(n) /
                             static_cast<double>(o.steps - 1);
        double eps = o.angle(o.epsilon);
        double gam = o.angle(o.gamma);
        double del = o.angle(o.delta);
        if (o.param == "epsilon") {
            eps = v;
        } else if (o.param == "gamma") {
            gam = v;
        } else {
            del = v;
        }

        std::string alpha, omega, tau_n, tau_p, tau_m, residual, identified, accuracy;
        try {
            const StateTriple t = state_family({eps, gam, del});
            std::vector<ComplexVec2> states{t.psi1, t.psi2, t.psi3};
            for (const auto& s : o.explicit_states) states.push_back(parse_state(s));

            const PTHamiltonian h = design_cpt_orthogonal(t.psi1, t.psi2);
            alpha = fmt12(h.alpha);
            omega = fmt12(h.omega);
            try {
                const double wt_plus = tau_closed_form(eps, TauBranch::Plus);
                const double wt_minus = tau_closed_form(eps, TauBranch::Minus);
                tau_p = fmt12(wt_plus / h.omega);
                tau_m = fmt12(wt_minus / h.omega);
            } catch (const DomainError&) {
            }
            try {
                const double tau = tau_numeric(h, t.psi2, t.psi3);
                tau_n = fmt12(tau);
                residual =
                    fmt12(std::abs(inner_hermitian(t.psi2, gram_evolution(h, tau) * t.psi3)));
            } catch (const DomainError&) {
            }
            try {
                if (!o.stochastic()) {
                    if (o.true_state >= 1 && o.true_state <= states.size()) {
                        const ProtocolResult r =
                            discriminate_n(states, o.true_state - 1, o.plan_mode(),
                                           MeasureMode::Deterministic, nullptr, o.tolerance);
                        identified = std::to_string(r.identified + 1);
                    }
                } else {
                    const TrialStats stats = run_trials(states, o.plan_mode(), o.trials, o.seed,
                                                        o.workers, o.tolerance);
                    accuracy = fmt12(stats.accuracy);
                }
            } catch (const DomainError&) {
            }
        } catch (const DomainError&) {
        }

        csv += o.param + "," + fmt12(v) + "," + alpha + "," + omega + "," + tau_n + "," + tau_p +
               "," + tau_m + "," + residual + "," + identified + "," + accuracy + "\n";
    }
    emit(csv, o.out_path, out);
    return 0;
}

int cmd_verify(const Options& o, std::ostream& out) {
    const auto suites = run_invariant_suites();
    std::string text;
    int checks = 0;
    int failures = 0;
    for (const auto& s : suites) {
        text += "suite " + s.name + ": " + std::to_string(s.checks) + " checks, " +
                std::to_string(s.failures) + " failures";
        if (s.failures > 0) text += " (first: " + s.first_failure + ")";
        text += "\n";
        checks += s.checks;
        failures += s.failures;
    }
    text += std::string("verify: ") + (failures == 0 ? "PASS" : "FAIL") + " (" +
            std::to_string(checks - failures) + "/" + std::to_string(checks) +
            " checks passed)\n";
    emit(text, o.out_path, out);
    return failures == 0 ? 0 : 1;
}

}  // namespace

int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"PT-symmetric discrimination of pure quantum states"};
    app.require_subcommand(1);

    // Config lives on the top-level app (CLI11 processes it there); a
    // [subcommand] section holds that subcommand's keys, and fallthrough
    // lets --config appear after the subcommand name.
    app.set_config("--config", "",
                   "Key=value config file with a [subcommand] section; flags win on conflict");

    Options o;

    CLI::App* design = app.add_subcommand(
        "design", "Design the Hamiltonian whose CPT product orthogonalizes a state pair");
    design->fallthrough();
    add_state_options(design, o);
    design->add_option("--i", o.pair_i, "First pair index (1-based)");
    design->add_option("--j", o.pair_j, "Second pair index (1-based)");
    design->add_option("--tolerance", o.tolerance, "Orthogonality threshold");
    design->add_option("--out", o.out_path, "Write the record to this file");

    CLI::App* tau = app.add_subcommand(
        "tau", "Evaluate the closed-form and numeric Hermitian-orthogonalization times");
    tau->fallthrough();
    add_state_options(tau, o);
    tau->add_option("--tolerance", o.tolerance, "Orthogonality threshold");
    tau->add_option("--out", o.out_path, "Write the record to this file");

    CLI::App* simulate =
        app.add_subcommand("simulate", "Run the N-state discrimination protocol");
    simulate->fallthrough();
    add_state_options(simulate, o);
    add_run_options(simulate, o);
    simulate->add_option("--tolerance", o.tolerance, "Orthogonality threshold");
    simulate->add_option("--out", o.out_path, "Write the record to this file");

    CLI::App* sweep = app.add_subcommand("sweep", "Vary one family parameter, emit a CSV table");
    sweep->fallthrough();
    add_state_options(sweep, o);
    add_run_options(sweep, o);
    sweep->add_option("--param", o.param, "Swept parameter")
        ->check(CLI::IsMember({"epsilon", "gamma", "delta"}));
    sweep->add_option("--start", o.start, "Sweep start")->required();
    sweep->add_option("--stop", o.stop, "Sweep stop")->required();
    sweep->add_option("--steps", o.steps, "Number of sweep points (>= 2)")->required();
    sweep->add_option("--tolerance", o.tolerance, "Orthogonality threshold");
    sweep->add_option("--out", o.out_path, "Write the CSV to this file");

    CLI::App* verify = app.add_subcommand("verify", "Run the library invariant suites");
    verify->fallthrough();
    verify->add_option("--out", o.out_path, "Write the report to this file");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "usage error: " << e.get_name() << ": " << e.what() << "\n";
        return 2;
    }

    try {
        if (design->parsed()) return cmd_design(o, out);
        if (tau->parsed()) return cmd_tau(o, out);
        if (simulate->parsed()) return cmd_simulate(o, out);
        if (sweep->parsed()) return cmd_sweep(o, out);
        return cmd_verify(o, out);
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const DomainError& e) {
        err << "error: " << domain_error_name(e) << ": " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace ptdisc
