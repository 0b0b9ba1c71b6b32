#include <algorithm>
#include <numeric>

#include "bdcs/errors.hpp"
#include "bdcs/pilot.hpp"
#include "bdcs/rng.hpp"

namespace bdcs {

namespace {

constexpr int kPopulation = 20;
constexpr int kTournament = 2;
constexpr double kMutationProb = 0.05;

struct Member
{
    IndexSet centers;
    double mu = 1.0;
};

bool fits(int p, const IndexSet& kept, int n, int spacing)
{
    return std::all_of(kept.begin(), kept.end(),
                       [&](int q) { return circular_distance(p, q, n) >= spacing; });
}

// Keeps every index compatible with the ones kept before it and re-draws
// the rest uniformly among feasible positions. Empty result on failure.
IndexSet repair(const IndexSet& raw, int n, int spacing, RandomStream& rng)
{
    IndexSet kept;
    int dropped = 0;
    for (int p : raw) {
        if (fits(p, kept, n, spacing))
            kept.push_back(p);
        else
            ++dropped;
    }
    for (int k = 0; k < dropped; ++k) {
        IndexSet free;
        for (int p = 0; p < n; ++p)
            if (fits(p, kept, n, spacing))
                free.push_back(p);
        if (free.empty())
            return {};
        kept.push_back(free[rng.uniform_int(0, static_cast<int>(free.size()) - 1)]);
    }
    std::sort(kept.begin(), kept.end());
    return kept;
}

} // namespace

PilotDesign ga_optimize(const SystemConfig& config, const SignMatrix& pilot_values, int generations,
                        std::uint64_t rng_seed)
{
    config.validate();
    if (generations < 0)
        throw ParameterError("GA generation count must be non-negative");
    if (pilot_values.cols() != config.n_groups)
        throw DimensionError("pilot values must have G columns");

    const int n = config.n_subcarriers;
    const int g = config.n_groups;
    const int spacing = 2 * config.bem_order - 1;
    PilotPattern scratch{n, g, config.bem_order, {}, pilot_values};
    auto evaluate = [&](Member& m) {
        scratch.centers = m.centers;
        m.mu = block_coherence(scratch, config.channel_length);
    };

    RandomStream rng(rng_seed, {0x6AULL});
    std::vector<Member> population(kPopulation);
    for (int k = 0; k < kPopulation; ++k) {
        population[k].centers = random_feasible_positions(
            n, g, config.bem_order, derive_seed(rng_seed, {0x6AULL, static_cast<std::uint64_t>(k)}));
        evaluate(population[k]);
    }
    auto best_of = [](const std::vector<Member>& pop) {
        return *std::min_element(pop.begin(), pop.end(),
                                 [](const Member& a, const Member& b) { return a.mu < b.mu; });
    };
    auto tournament = [&]() -> const Member& {
        const Member* winner = &population[rng.uniform_int(0, kPopulation - 1)];
        for (int t = 1; t < kTournament; ++t) {
            const Member* other = &population[rng.uniform_int(0, kPopulation - 1)];
            if (other->mu < winner->mu)
                winner = other;
        }
        return *winner;
    };

    PilotDesign out;
    Member best = best_of(population);
    out.mu_trace.push_back(best.mu);

    for (int gen = 1; gen <= generations; ++gen) {
        std::vector<Member> next;
        next.reserve(kPopulation);
        next.push_back(best);  // elitism
        while (static_cast<int>(next.size()) < kPopulation) {
            const Member& a = tournament();
            const Member& b = tournament();
            IndexSet raw;
            const int cut = g > 1 ? rng.uniform_int(1, g - 1) : g;
            raw.insert(raw.end(), a.centers.begin(), a.centers.begin() + cut);
            raw.insert(raw.end(), b.centers.begin() + cut, b.centers.end());
            for (auto& p : raw)
                if (rng.uniform() < kMutationProb)
                    p = rng.uniform_int(0, n - 1);
            Member child;
            child.centers = repair(raw, n, spacing, rng);
            if (child.centers.size() != static_cast<std::size_t>(g)) {
                child = a;
            } else {
                evaluate(child);
            }
            next.push_back(std::move(child));
        }
        population = std::move(next);
        const Member gen_best = best_of(population);
        if (gen_best.mu < best.mu) {
            best = gen_best;
            out.accepted_mu.push_back(best.mu);
        }
        out.mu_trace.push_back(best.mu);
    }
    out.centers = best.centers;
    return out;
}

} // namespace bdcs
