// SPDX-License-Identifier: Apache-2.0
//
// Checks that do not trust the solver: dense recomputation of the dual
// conditions of a certificate, and sampling of explicit instances run
// through the actual algorithm.

#ifndef LYACERT_VERIFICATION_HPP
#define LYACERT_VERIFICATION_HPP

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "lyacert/certificate.hpp"

namespace lyacert {

/// Recomputes conditions (a)-(c) of every system from the model, the
/// outcomes and the certificate values. Never throws on bad certificates.
VerificationReport verify_certificate(const CertificateProblem& problem, const Certificate& cert, Scalar tol = 1e-6);

/// One explicit instance: the valuation of every leaf and symbol at the
/// current iterate, and for each random outcome the valuation at the next
/// iterate together with its probability.
struct ExplicitSample {
    Valuation current;
    std::vector<std::pair<Scalar, Valuation>> next;
};

/// Explicit iteration of a scenario on random class instances.
class ExplicitScenario {
public:
    virtual ~ExplicitScenario() = default;

    virtual std::string name() const = 0;
    virtual ExplicitSample sample(std::mt19937_64& rng) const = 0;

    /// Parameters of low-dimensional instances searched for divergence.
    virtual std::vector<std::vector<Scalar>> witness_family() const { return {}; }
    /// ||z_k - z*|| along the trajectory of instance `params` from a fixed start.
    virtual std::vector<Scalar> trajectory(const std::vector<Scalar>& params, int steps) const;
};

struct SampleReport {
    /// Largest relative slack T / (1 + |V| + E|V+| + |R|) over all samples and systems.
    Scalar worst = -std::numeric_limits<Scalar>::infinity();
    std::size_t samples = 0;
    std::uint64_t seed = 0;
    bool passed = false;
};

/// Draws `n_samples` instances and evaluates every target inequality of the
/// certificate on them. Samples are drawn sequentially from one generator
/// seeded with `seed`, so results are reproducible.
SampleReport sample_check(const ExplicitScenario& scenario, const CertificateProblem& problem,
                          const Certificate& cert, std::size_t n_samples, std::uint64_t seed, Scalar tol = 1e-7);

struct DivergenceWitness {
    std::vector<Scalar> params;
    std::vector<Scalar> distances;
    Scalar growth = 0.0;  // distances.back() / distances.front()
};

/// Searches the scenario's witness family for a trajectory whose distance to
/// the solution grows by at least `growth` within `steps` iterations.
std::optional<DivergenceWitness> divergence_witness(const ExplicitScenario& scenario, int steps = 60,
                                                    Scalar growth = 1e3);

}  // namespace lyacert

#endif  // LYACERT_VERIFICATION_HPP
