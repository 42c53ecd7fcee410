#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "qplab/model.hpp"

namespace qplab::spectral {

using model::Potential;

struct DegenerateError : std::runtime_error {
    explicit DegenerateError(const std::string& msg) : std::runtime_error(msg) {}
};
struct CrossCheckError : std::runtime_error {
    explicit CrossCheckError(const std::string& msg) : std::runtime_error(msg) {}
};

enum class Bc { Dirichlet, Periodic, Antiperiodic };

// Lattice window [a, b], b >= a.  Both [1, N] and [-N, N] conventions are in
// use; every call states its window explicitly.
struct Window {
    long long a = 1, b = 1;
    long long length() const { return b - a + 1; }
};

struct SpectrumSample {
    double x = 0.0;
    Window win;
    Bc bc = Bc::Dirichlet;
    std::vector<double> eigs;               // nondecreasing; strict for Dirichlet
    std::vector<std::vector<double>> vecs;  // optional, one per eigenvalue
};

// Number of Dirichlet eigenvalues strictly below E (Sturm / LDL^T pivot count).
int count_below(const Potential& pot, double x, double omega, Window w, double E);

// All eigenvalues of the Dirichlet block, each bisected to abs_tol.
std::vector<double> dirichlet_eigs(const Potential& pot, double x, double omega,
                                   Window w, double abs_tol = 1e-11);

// Cached-diagonal fast path for sweeps: the diagonal V(x + n*omega) is built
// once and reused across all count/bisection calls.  The warm variant brackets
// each eigenvalue around a previous phase's value (slack wide) and falls back
// to the full interval when the bracket misses.
std::vector<double> window_diag(const Potential& pot, double x, double omega, Window w);
int count_below_diag(const std::vector<double>& diag, double E);
std::vector<double> dirichlet_eigs_diag(const std::vector<double>& diag, double abs_tol);
std::vector<double> dirichlet_eigs_diag_warm(const std::vector<double>& diag, double abs_tol,
                                             const std::vector<double>& warm, double slack);

// Single band (0-based j) bisected inside [warm - slack, warm + slack];
// falls back to the Gershgorin interval when the bracket misses.
double dirichlet_eig_band(const std::vector<double>& diag, std::size_t j, double abs_tol,
                          double warm, double slack);

// Normalized eigenvector for the (already computed) eigenvalue Ej.
// Primary route: psi(n) = f_{[a, n-1]}(Ej) by forward recursion; falls back to
// inverse iteration when the recursion's dynamic range exceeds e^300 or the
// residual check fails.  DegenerateError if another eigenvalue sits within
// 1e-13 of Ej.
std::vector<double> eigenvector(const Potential& pot, double x, double omega,
                                Window w, double Ej);

double residual_inf(const Potential& pot, double x, double omega, Window w,
                    double Ej, const std::vector<double>& psi);

// Eigenvalues of the periodic (corner -1) or antiperiodic (corner +1) block on
// [1, N] as roots of trace(M_N) -+ 2, bracketed between consecutive Dirichlet
// eigenvalues; cross-checked against a dense cyclic-Jacobi solve when
// cross_check is set (CrossCheckError beyond 1e-7).
std::vector<double> periodic_eigs(const Potential& pot, double x, double omega,
                                  long long N, Bc bc, bool cross_check = true);

// Number of eigenvalues of the [1, N] periodic/antiperiodic block strictly
// below E, from the pivot signs of an LDL^T sweep: the corner couplings fill
// only the last row/column, so the factorization stays O(N).  N >= 3 runs the
// sparse sweep; smaller blocks fall back to the dense solve.
int periodic_count_below(const Potential& pot, double x, double omega,
                         long long N, Bc bc, double E);

// All eigenvalues of the corner-coupled block by inertia bisection on
// periodic_count_below.  Robust at strong coupling, where near-tangent
// discriminant roots defeat the bracketing route of periodic_eigs.
std::vector<double> bc_eigs_bisect(const Potential& pot, double x, double omega,
                                   long long N, Bc bc, double abs_tol = 1e-9);

// Dense symmetric solve of the tridiagonal-plus-corners matrix by cyclic
// Jacobi rotations (exposed for cross-checks and tests).  For N = 2 the corner
// and the superdiagonal share a slot and add.
std::vector<double> dense_bc_eigs(const Potential& pot, double x, double omega,
                                  long long N, Bc bc);

// argmax |psi| as a lattice site in [w.a, w.b]; ties resolve to the smallest site.
long long localization_center(const std::vector<double>& psi, Window w);

struct DecayFit {
    double rate = 0.0;       // slope of log|psi| against |n - center|
    double intercept = 0.0;
    int points = 0;
};

// Least-squares decay rate over sites with |psi| > 1e-14; requires at least
// 20 usable sites.
DecayFit decay_profile(const std::vector<double>& psi, Window w, long long center);

}  // namespace qplab::spectral
