#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "qplab/model.hpp"
#include "qplab/spectral.hpp"

namespace qplab::rellich {

using model::Potential;

struct PreconditionError : std::runtime_error {
    explicit PreconditionError(const std::string& msg) : std::runtime_error(msg) {}
};

// Eigenvalue curves E_j(x) of the Dirichlet block on [-N, N], traced over a
// phase grid and labelled by sort order (valid: Dirichlet eigenvalues are
// simple, so curves never touch).  slopes/centers start as NaN and are filled
// by feynman_slopes.
struct RellichGraph {
    double omega = 0.0;
    long long N = 0;                          // lattice window [-N, N]
    std::vector<double> xs;                   // sorted phases, 0 and 1 included
    std::vector<std::vector<double>> E;       // xs.size() rows x (2N+1) sorted cols
    std::vector<std::vector<double>> slopes;  // dE_j/dx per node
    std::vector<std::vector<double>> centers; // localization center per node/band
    std::vector<char> refined;                // per cell [xs[i], xs[i+1]]: born in a bisection
    bool slopes_ready = false;                // set once feynman_slopes has run

    long long bands() const { return 2 * N + 1; }
    spectral::Window window() const { return {-N, N}; }
};

// Maximal monotone piece of one eigenvalue curve: |slope| >= tau with constant
// sign and E_j inside the requested energy interval throughout.
struct Segment {
    long long j = 0;             // band column in the graph
    double x_lo = 0.0, x_hi = 0.0;
    double E_lo = 0.0, E_hi = 0.0;  // energy range attained on the segment
    int slope_sign = 0;             // +1 or -1
    double min_abs_slope = 0.0;     // over the covered grid nodes
    bool regular = false;           // centers stay in [-N + sqrt(N), N - sqrt(N)]
};

// Eigensolve at every grid phase (uniform grid of grid_size cells plus the
// right endpoint), then recursively bisect cells whose per-band motion exceeds
// half the local gap, down to max_depth levels (cap 10).  grid_size >= 64.
// At strong coupling and large N nearly every cell holds a sharp avoided
// crossing, so shallow max_depth keeps big sweeps affordable.
RellichGraph trace_graph(const Potential& pot, double omega, long long N, int grid_size,
                         int max_depth = 10);

// First-order perturbation slope dE_j/dx = sum_l V'(x + l*omega) |psi_j(l)|^2
// at every node, plus localization centers from the same eigenvectors.  Fills
// graph.slopes and graph.centers; returns the slopes.  Eigenvector failures
// (near-degenerate bands) propagate unless skip_degenerate is set, in which
// case the affected entries stay NaN -- at large N distant localized states
// collide below double resolution and their single-band slope is undefined.
const std::vector<std::vector<double>>& feynman_slopes(RellichGraph& graph, const Potential& pot,
                                                       bool skip_degenerate = false);

// Maximal runs per band with |slope| >= tau, constant sign, and energy inside
// (E_lo, E_hi).  Needs feynman_slopes to have run.  Endpoints that fall
// strictly inside the grid are sharpened by sub-grid bisection to 1e-6 in x.
std::vector<Segment> extract_segments(const RellichGraph& graph, const Potential& pot,
                                      double tau, double E_lo, double E_hi);

// True iff the localization center stays in [-N + sqrt(N), N - sqrt(N)] at
// every covered grid node of the segment's band.
bool regularity_check(const Segment& seg, const RellichGraph& graph);

struct TranslateErrors {
    double err_E = 0.0;      // |E_j(x) - nearest eigenvalue at phase x + k*omega|
    double err_slope = 0.0;  // matching first-order slope discrepancy
    double err_vec = 0.0;    // windowed squared l2 error between the matched
                             // eigenvector and the k-shifted original
};

// Covariance probe at the segment midpoint: the shifted-phase operator
// H_{[-N,N]}(x + k*omega) should own an eigenpair that is the original one
// translated by k, up to errors exponentially small in sqrt(N).  The vector
// error sums |psi_match(m) - psi(m + k)|^2 over the window
// |m + k - center| <= sqrt(N)/4 after sign alignment.
// PreconditionError when the segment is not regular, the shifted center
// violates -N + sqrt(N)/2 < nu + k < N - sqrt(N)/2, or the comparison window
// leaves [-N, N].
TranslateErrors translate_check(const Segment& seg, const RellichGraph& graph,
                                const Potential& pot, long long k);

// Per-phase minimum adjacent-band gap of the Dirichlet block on [-N, N] over a
// fresh uniform grid (separation studies; no refinement).
std::vector<double> separation_profile(const Potential& pot, double omega,
                                       long long N, int grid_size);

}  // namespace qplab::rellich
