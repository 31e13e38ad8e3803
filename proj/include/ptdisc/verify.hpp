#pragma once

#include <string>
#include <vector>

namespace ptdisc {

struct SuiteResult {
    std::string name;
    int checks = 0;
    int failures = 0;
    std::string first_failure;
};

// Deterministic self-check suites over the library: kernel identities,
// unbroken-regime spectra, C-operator algebra, metric positivity,
// projector algebra, the Gram-evolution oracle, and persistence of CPT
// orthogonality under evolution.
std::vector<SuiteResult> run_invariant_suites();

}  // namespace ptdisc
