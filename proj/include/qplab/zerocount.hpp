#pragma once

#include <complex>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "qplab/model.hpp"
#include "qplab/spectral.hpp"
#include "qplab/transfer.hpp"

namespace qplab::zerocount {

using cplx = std::complex<double>;
using model::Potential;
using transfer::LogComplex;

// Contour evaluations run in log form so determinant-sized values (|f| up to
// e^{N L}) never overflow.  Plain functions wrap via LogComplex::from_value.
using LogEvaluator = std::function<LogComplex(cplx)>;

// A zero sits too close to every contour the counter is allowed to try.
struct ContourTooClose : std::runtime_error {
    explicit ContourTooClose(const std::string& msg) : std::runtime_error(msg) {}
};

struct ZeroCountResult {
    int count = 0;
    cplx center{0.0, 0.0};
    double radius = 0.0;          // the accepted (possibly perturbed) radius
    double contour_margin = 0.0;  // min |f| / max |f| over the accepted contour
    std::vector<cplx> zeros;      // refined locations when requested
};

// Winding number of f around the circle |z - center| = radius, accumulated
// from principal-branch phase increments between consecutive nodes (the exact
// per-segment integral of f'/f along the contour image; no derivative
// required).  Node count doubles until the integer stabilizes with every
// increment under pi/2.  A contour with min |f| < 1e-12 * max |f| is retried
// at up to 5 perturbed radii before ContourTooClose is thrown.
ZeroCountResult count_zeros(const LogEvaluator& f, cplx center, double radius);

// Argument-principle count plus refined locations: single zeros polish by
// Newton (derivative df when supplied, otherwise a central difference), and
// multi-zero disks split into four covering sub-disks recursively.  Clusters
// tighter than the splitting floor come back as repeated points.
std::vector<cplx> locate_zeros(const LogEvaluator& f, cplx center, double radius,
                               const LogEvaluator& df = nullptr);

struct JensenDetail {
    double value = 0.0;
    double last_delta = 0.0;  // change at the final quadrature refinement
    long long skipped_nodes = 0;  // |f| below 1e-300, excluded from the mean
};

// Double disk-average of log|f|: mean over w in D(z0, r1) of
// [mean over z in D(w, r2) of log|f(z)|] - log|f(w)|, with r2 < r1.
// Two nested polar quadratures (Gauss-Legendre radial x trapezoid angular),
// refined until the value settles; the detail variant reports the final
// refinement delta as an honest error scale.
double jensen_average(const LogEvaluator& f, cplx z0, double r1, double r2);
JensenDetail jensen_average_detail(const LogEvaluator& f, cplx z0, double r1,
                                   double r2);

struct AnnulusCount {
    long long count = 0;
    double density = 0.0;              // count / divisor
    std::vector<cplx> zeros;           // deduplicated, with multiplicity
    std::vector<int> multiplicities;   // parallel to zeros
    int disks = 0;                     // size of the covering disk ring
};

// Count (and locate) the zeros of f in the open annulus R1 < |z| < R2 by a
// ring of overlapping disks along the mid-circle; duplicates from the overlap
// merge within 1e-10 and each merged cluster is recounted on a tiny disk so
// genuine multiple zeros keep their multiplicity.  The ring is capped at 1e5
// disks (disk radius widens when the cap binds).
AnnulusCount annulus_zeros(const LogEvaluator& f, double R1, double R2,
                           long long divisor);

// Zero density of the length-N window determinant z -> f_{[1,N]}(z, omega, E)
// in the annulus, divided by the lattice length N.
double annulus_density(const Potential& pot, double omega, double E, long long N,
                       double R1, double R2);

struct ScaleStability {
    double m_n = 0.0;    // density at scale n on the 2 r2-shrunk annulus
    double m_N = 0.0;    // density at scale N on the same shrunk annulus
    double defect = 0.0; // max one-sided violation of the cross-scale bounds
};

// Cross-scale density comparison with margin r2 = n^{-1/4} (R2 - R1): each
// scale's density on the shrunk annulus must not exceed the other scale's on
// the grown annulus; defect <= 0 means both inequalities hold outright (the
// asymptotic statement only promises defect <= n^{-1/4}).  Requires
// N >= n >= 32 (n = N degenerates to a containment check).
ScaleStability scale_stability(const Potential& pot, double omega, double E,
                               long long n, long long N, double R1, double R2);

// Zeros of E -> f_window(e(x), omega, E) in the disk D(E0, radius).  For real
// x these are Dirichlet eigenvalues, and the count is cross-checked against
// the eigensolver (CrossCheckError on mismatch); refined zero locations are
// returned.
ZeroCountResult count_zeros_in_E(const Potential& pot, double x, double omega,
                                 spectral::Window window, cplx E0, double radius);

}  // namespace qplab::zerocount
