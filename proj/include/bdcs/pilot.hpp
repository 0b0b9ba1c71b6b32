#pragma once

// Superimposed guard-pilot pattern, the measurement matrix it induces and
// the pilot-position optimizers.

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "bdcs/channel.hpp"
#include "bdcs/types.hpp"

namespace bdcs {

/// Nonzero-pilot positions S_cen shared by all antennas, plus one +-1
/// value sequence per antenna. Each centre is flanked by D-1 zero guard
/// subcarriers on both sides.
struct PilotPattern
{
    int n_subcarriers = 0;
    int n_groups = 0;
    int bem_order = 0;
    IndexSet centers;      // sorted, size G
    SignMatrix values;     // N_B x G, entries +-1

    int n_antennas() const { return static_cast<int>(values.rows()); }
    /// Throws ParameterError when a pattern invariant is violated.
    void validate() const;
};

/// G x (N_B L) matrix Z, its tap-ordered blocks and the flattened Z_s whose
/// coherence drives the pilot search.
struct MeasurementSystem
{
    int n_antennas = 0;
    int channel_length = 0;
    CMatrix z;                          // G x (N_B L), column b*L + l
    std::vector<IndexSet> block_index;  // A_l (0-based columns of z), one per tap
    CMatrix z_s;                        // (G N_B) x L, column l = vec(z[:, A_l])
};

int circular_distance(int a, int b, int n);
/// Smallest circular distance between any two entries; n when size < 2.
int min_circular_spacing(const IndexSet& centers, int n);

/// S_d = S_cen + d - (D-1)/2 (mod N), d = 0..D-1, each in S_cen order.
std::vector<IndexSet> derived_index_sets(const PilotPattern& pattern);

/// All subcarriers occupied by pilot groups (centre +- (D-1)), sorted.
IndexSet guard_band_positions(const PilotPattern& pattern);

/// G positions spaced floor(N/G) apart starting at D-1.
IndexSet equidistant_positions(int n, int g, int d);

/// i.i.d. uniform +-1 matrix, N_B x G.
SignMatrix random_sign_sequences(int n_antennas, int g, std::uint64_t rng_seed);

/// Random feasible centres (spacing >= 2D-1) by sequential uniform placement.
IndexSet random_feasible_positions(int n, int g, int d, std::uint64_t rng_seed);

MeasurementSystem assemble_measurement_matrix(const PilotPattern& pattern, int channel_length);

/// Largest normalized inner product between distinct columns.
double mutual_coherence(const CMatrix& m);

/// mu(Z_s) for the given centres and values.
double block_coherence(const PilotPattern& pattern, int channel_length);

struct PilotDesign
{
    IndexSet centers;                 // final reported S_cen
    std::vector<double> mu_trace;     // mu(Z_s) of the reported state: entry 0 is the
                                      // initial state, entry m after iteration m
    std::vector<double> accepted_mu;  // mu of every accepted state, in acceptance order
    int skipped_iterations = 0;       // iterations with no feasible candidate
};

/// Block discrete stochastic optimization of the pilot centres.
PilotDesign bdso_optimize(const SystemConfig& config, const SignMatrix& pilot_values, int iterations,
                          std::uint64_t rng_seed);

/// Genetic-algorithm baseline: population 20, tournament selection,
/// single-point crossover with spacing repair, per-index mutation 0.05.
PilotDesign ga_optimize(const SystemConfig& config, const SignMatrix& pilot_values, int generations,
                        std::uint64_t rng_seed);

/// Text format: `N G D N_B`, sorted centres, then N_B rows of +-1.
void write_pilot_pattern(std::ostream& os, const PilotPattern& pattern);
PilotPattern read_pilot_pattern(std::istream& is);

namespace testing {
/// Test hook: flips the sign of the d - (D-1)/2 offsets in
/// derived_index_sets. Used to check that verification catches it.
void set_offset_sign_fault(bool enabled);
} // namespace testing

} // namespace bdcs
