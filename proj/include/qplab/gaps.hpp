#pragma once

#include <complex>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "qplab/model.hpp"
#include "qplab/rellich.hpp"
#include "qplab/spectral.hpp"

namespace qplab::gaps {

using model::Potential;
using model::cplx;

// The bottom branch never produces a certified interior maximum (no avoided
// crossing opened at this scale / in this window).
struct NoSplitError : std::runtime_error {
    explicit NoSplitError(const std::string& msg) : std::runtime_error(msg) {}
};

// No scale in the candidate list passes the ||N*omega|| <= 0.25 proxy, so the
// periodic-spectrum certificate cannot be attempted at all.
struct FrequencyError : std::runtime_error {
    explicit FrequencyError(const std::string& msg) : std::runtime_error(msg) {}
};

struct Interval {
    double lo = 0.0, hi = 0.0;
    double width() const { return hi - lo; }
    double mid() const { return 0.5 * (lo + hi); }
    bool contains(double e) const { return lo < e && e < hi; }
};

enum class Boundary { dirichlet, periodic };

// One crossing of a rising and a falling eigenvalue branch under the lattice
// shift m*omega: E_rise(x0) = E_fall(x0 + m*omega) = E0.
struct Resonance {
    double x0 = 0.0;
    long long m = 0;
    double E0 = 0.0;
    long long j1 = -1, j2 = -1;  // band columns of the two branches (if known)
    long long scale = 0;         // lattice half-width the branches live on
};

// An energy interval (E_max, E_max + tau_hat) left empty by the split
// branches over a phase window at scale N_bar.
struct PreGap {
    Interval interval;
    long long scale = 0;   // N_bar
    long long j0 = 0;      // band of the bottom branch, 0-based
    double x_star = 0.0;   // interior maximizer of the bottom branch
    double tau_hat = 0.0;
    int resonance_id = -1; // index into GapReport::resonances, -1 = standalone
};

// Zeros of the phase-plane determinant in one disk centred at e(x0 + k*omega);
// empty disks are kept with count 0 so the k-ladder stays addressable.
struct DiskZeros {
    long long k = 0;
    long long count = 0;
    std::vector<cplx> zeros;
};

struct GapReport {
    long long N = 0;
    Boundary bc = Boundary::dirichlet;
    Interval hull;
    std::vector<Interval> bands;  // pairwise disjoint, sorted
    std::vector<Interval> gaps;   // maximal complementary intervals inside hull
    std::vector<Resonance> resonances;
    std::vector<PreGap> pregaps;
    std::vector<std::vector<DiskZeros>> zero_sequences;  // parallel to pregaps
    nlohmann::json to_json() const;
};

// Union over the phase grid of finite-volume spectra on the lattice window
// [1, N], every eigenvalue fattened by the Lipschitz phase-motion bound
// (sup|V'| + 1) / grid_size before merging, so grid sparsity can only shrink
// gaps, never invent them.  Periodic windows close the ring with the best
// denominator-N rational frequency (seam-free; see the implementation note).
// grid_size >= 128.
GapReport spectrum_union(const Potential& pot, double omega, long long N,
                         Boundary bc, long long grid_size);

// A strictly monotone eigenvalue branch presented as a callable, with its
// phase interval and attained energy range.  Used by the crossing search so
// synthetic closed-form branches and real warm-solved segments share a path.
struct Branch {
    std::function<double(double)> eval;
    double x_lo = 0.0, x_hi = 0.0;
    double E_lo = 0.0, E_hi = 0.0;
};

// Crossing of a rising and a falling branch under a shift m*omega: on the
// shared energy range, h(E) = inv_fall(E) - inv_rise(E) is strictly
// decreasing; the quarter-shrunk image of h is the window {m*omega} must hit.
// The smallest admissible m wins; E0 solves h(E0) = {m*omega} by bisection,
// x0 = inv_rise(E0).  Candidates are discarded (and the next m tried) unless
// re-evaluating both branches agrees to recheck_tol and the crossing points
// keep distance > |I| / big_c from all four branch endpoints.
std::optional<Resonance> resonance_search(const Branch& rising, const Branch& falling,
                                          double omega, long long m_lo, long long m_hi,
                                          double big_c, double recheck_tol = 1e-9);

// resonance_search on two extracted segments, evaluated off-grid by
// single-band bisection warm-started from the nearest graph node.  The
// endpoint-separation constant is sup|V'| + 2.
std::optional<Resonance> find_resonance(const Potential& pot, const rellich::Segment& seg_pos,
                                        const rellich::Segment& seg_neg,
                                        const rellich::RellichGraph& graph,
                                        long long m_lo, long long m_hi);

// The 2x2 crossing model: branches (E1 + E2)/2 +- sqrt((E1 - E2)^2/4 + eps^2)
// and the opened gap min(upper) - max(lower) over [x_lo, x_hi] (grid scan plus
// local ternary refinement).
struct TwoLevel {
    std::function<double(double)> upper, lower;
    double gap = 0.0;
};
TwoLevel two_level_split(std::function<double(double)> E1,
                         std::function<double(double)> E2,
                         std::function<double(double)> eps,
                         double x_lo, double x_hi, long long grid = 2048);

struct PregapParams {
    double half_width = 5e-3;  // phase window radius around the crossing
    long long grid = 512;
    double min_gap = 1e-12;    // tau_hat at or below this -> NoSplitError
};

// Certification core on explicit branches: locate the maximum of the lower
// branch over [x_lo, x_hi] (grid scan + ternary refinement) and require it to
// sit strictly inside, off the two edge cells; tau_hat is the gap from that
// maximum up to the window minimum of the upper branch.  NoSplitError when the
// maximizer sits in an edge cell or tau_hat <= min_gap.
PreGap pregap_core(const std::function<double(double)>& lower,
                   const std::function<double(double)>& upper,
                   double x_lo, double x_hi, long long grid, double min_gap);

// pregap_core on the two bands adjacent to a resonance: at scale N_bar
// (>= 4x the resonance's scale) the band nearest E0 at x0 is the bottom
// branch, the next band up is the ceiling.
PreGap build_pregap(const Potential& pot, double omega, const Resonance& res,
                    long long N_bar, const PregapParams& par = {});

// Argument-principle counts and refined zeros of the window determinant
// z -> f_{[-N, N]}(z, omega, E) in disks of radius r centred at e(x0 + k*omega)
// for k in [k_lo, k_hi].  For E inside a genuine pre-gap the disks carry
// conjugate zero pairs e(x_k +- i y_k) with y_k bounded away from 0.
// r <= 1e-2 so neighbouring disks stay disjoint from the ladder spacing.
std::vector<DiskZeros> complex_zero_sequence(const Potential& pot, double omega,
                                             double E, long long N, double x0,
                                             long long k_lo, long long k_hi,
                                             double r = 1e-3);

// Annulus zero counts of the determinant at two scales: the wide annulus at
// scale N against the narrow annulus at scale N1 > N.  Counts come from the
// winding difference of the two boundary circles (the z = 0 pole cancels);
// densities divide by the scale as in the cross-scale density machinery, and
// drop = density_wide(N) - density_narrow(N1).
struct DensityDrop {
    long long raw_wide = 0, raw_narrow = 0;
    double m_wide = 0.0, m_narrow = 0.0;
    double drop = 0.0;
};
DensityDrop density_drop(const Potential& pot, double omega, double E,
                         long long N, long long N1,
                         double wide_half = 1e-2, double narrow_half = 1e-4);

// True iff at least one of the four boundary-trimmed window determinants
// f_{[1,l]}, f_{[1,l-1]}, f_{[2,l]}, f_{[2,l-1]} at e(x0) has no E-zeros in
// the disk D(E0, r0).  l >= 4.
bool ns_condition(const Potential& pot, double x0, double omega, double E0,
                  long long ell, double r0);

// A Dirichlet eigenvalue of H_{[1,N]} is flagged unconditional when both
// one-site-trimmed windows have spectrum within r0 of it.  The report carries
// the third trimmed distance (expected small whenever the flag is set) and the
// norm diagnostic log||M_N(e(x0), E0)|| - N*L, which dips below typical values
// at unconditional energies.
struct UncondReport {
    bool flag = false;
    double E0 = 0.0;
    double dist_1Nm1 = 0.0;  // dist(spec H_{[1,N-1]}, E0)
    double dist_2N = 0.0;    // dist(spec H_{[2,N]}, E0)
    double dist_2Nm1 = 0.0;  // dist(spec H_{[2,N-1]}, E0)
    double norm_dip = 0.0;
};
UncondReport unconditional_check(const Potential& pot, double x0, double omega,
                                 long long N, long long j0, double r0);

// True iff the grid-fattened periodic spectra avoid the interval at every
// listed scale.  Scales failing the ||N*omega|| <= 0.25 proxy are dropped
// first; FrequencyError if none survive.  The phase grid adapts so the
// fattening radius stays below a quarter of the interval width (capped at
// 2^20 cells, beyond which the check stays sound but conservative).
bool spectrum_free_check(const Potential& pot, double omega, Interval I,
                        const std::vector<long long>& N_list);

// Scan scales ell^2 <= N <= ell^4 for a regular rising and a regular falling
// segment sharing an energy range inside the interval; failing that, try the
// periodic-spectrum certificate on the quarter-shrunk interval at the
// continued-fraction denominators of omega.  Undecided when neither branch
// certifies.
struct Dichotomy {
    enum class Kind { regular_pair, spectrum_free, undecided };
    Kind kind = Kind::undecided;
    rellich::Segment seg_pos, seg_neg;  // set for regular_pair
    long long scale = 0;                // lattice half-width of the pair
    Interval common;                    // shared energy range of the pair
    Interval free_interval;             // set for spectrum_free
};
Dichotomy dichotomy_scan(const Potential& pot, double omega, Interval I, long long ell);

// Exhaustive grid scan for phases carrying a double near-coincidence:
// |E_{j2}(x + m1*omega) - E_{j1}(x)| < tol and
// |E_{j3}(x + m2*omega) - E_{j1}(x)| < tol, with m1 a short and m2 a long
// shift.  Shifted-phase eigensolves are cached per node; the m2 family is
// solved lazily, only after the m1 condition already matched.  When a segment
// list is supplied all three branches must be segment-valued at their phases.
// Hits are reported in node order and truncated at 1000.
struct TripleHit {
    double x = 0.0;
    long long j1 = 0, j2 = 0, j3 = 0;
    long long m1 = 0, m2 = 0;
};
struct TripleScan {
    std::vector<TripleHit> hits;
    bool truncated = false;
};
TripleScan triple_resonance_scan(const Potential& pot, double omega,
                                 const rellich::RellichGraph& graph,
                                 long long m1_lo, long long m1_hi,
                                 long long m2_lo, long long m2_hi, double tol,
                                 const std::vector<rellich::Segment>& segments = {});

// Plot-ready genealogy: one row per band / gap per report,
// "N,bc,kind,lo,hi", in report order.
std::string gap_genealogy_csv(const std::vector<GapReport>& reports);

}  // namespace qplab::gaps
