#include <algorithm>
#include <string>
#include <unordered_map>

#include "bdcs/errors.hpp"
#include "bdcs/pilot.hpp"
#include "bdcs/rng.hpp"

namespace bdcs {

namespace {

constexpr int kCandidateRetries = 16;

// Positions p != centers[u] at circular distance >= spacing from every other centre.
IndexSet feasible_moves(const IndexSet& centers, std::size_t u, int n, int spacing)
{
    std::vector<char> blocked(static_cast<std::size_t>(n), 0);
    for (std::size_t k = 0; k < centers.size(); ++k) {
        if (k == u)
            continue;
        for (int off = -(spacing - 1); off <= spacing - 1; ++off)
            blocked[((centers[k] + off) % n + n) % n] = 1;
    }
    blocked[centers[u]] = 1;
    IndexSet moves;
    for (int p = 0; p < n; ++p)
        if (!blocked[p])
            moves.push_back(p);
    return moves;
}

} // namespace

PilotDesign bdso_optimize(const SystemConfig& config, const SignMatrix& pilot_values, int iterations,
                          std::uint64_t rng_seed)
{
    config.validate();
    if (iterations < 1)
        throw ParameterError("BDSO needs at least one iteration");
    if (pilot_values.cols() != config.n_groups)
        throw DimensionError("pilot values must have G columns");

    const int n = config.n_subcarriers;
    const int spacing = 2 * config.bem_order - 1;
    const int g = config.n_groups;

    PilotPattern candidate{n, g, config.bem_order, {}, pilot_values};
    PilotPattern current = candidate;
    current.centers = equidistant_positions(n, g, config.bem_order);
    double mu_current = block_coherence(current, config.channel_length);

    PilotDesign out;
    IndexSet reported = current.centers;
    double mu_reported = mu_current;
    out.mu_trace.push_back(mu_reported);

    // rho_{m,k} = occupancy_k / m for m >= 1, so only counts are kept.
    std::unordered_map<int, long long> occupancy;
    int i = 0;  // index of the current accepted state
    int j = 0;  // index of the reported state

    RandomStream rng(rng_seed, {0xB0D5ULL});
    for (int m = 1; m <= iterations; ++m) {
        // reformulation: move one centre to a feasible position
        bool have_candidate = false;
        for (int attempt = 0; attempt < kCandidateRetries && !have_candidate; ++attempt) {
            const auto u = static_cast<std::size_t>(rng.uniform_int(0, g - 1));
            const IndexSet moves = feasible_moves(current.centers, u, n, spacing);
            if (moves.empty())
                continue;
            candidate.centers = current.centers;
            candidate.centers[u] = moves[rng.uniform_int(0, static_cast<int>(moves.size()) - 1)];
            std::sort(candidate.centers.begin(), candidate.centers.end());
            have_candidate = true;
        }

        // conversion + calculation
        if (have_candidate) {
            const double mu_candidate = block_coherence(candidate, config.channel_length);
            if (mu_candidate < mu_current) {
                current.centers = candidate.centers;
                mu_current = mu_candidate;
                i = m + 1;
                out.accepted_mu.push_back(mu_candidate);
            }
        } else {
            ++out.skipped_iterations;
        }

        // probability
        ++occupancy[i];

        // update
        if (occupancy[i] > occupancy[j]) {
            reported = current.centers;
            mu_reported = mu_current;
            j = i;
        }
        out.mu_trace.push_back(mu_reported);
    }
    out.centers = reported;
    return out;
}

} // namespace bdcs
