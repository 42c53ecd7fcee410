#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "qplab/model.hpp"
#include "qplab/transfer.hpp"

namespace qplab::lyapunov {

using model::Potential;
using transfer::ScaledMatrix2;

// Thrown when an avalanche-expansion hypothesis fails; index is the offending
// block (-1 when the failure is global, e.g. mu <= n).
struct HypothesisError : std::runtime_error {
    HypothesisError(const std::string& msg, int idx, std::string cond)
        : std::runtime_error(msg), index(idx), condition(std::move(cond)) {}
    int index;
    std::string condition;
};

struct LyapunovEstimate {
    double value = 0.0;   // phase-averaged growth rate
    long long N = 0;
    double y = 0.0;       // imaginary phase offset (z on the circle e^{-2 pi y})
    int grid_size = 0;
    double spread = 0.0;  // std. dev. of the per-phase rates
};

// Per-phase log growth of the N-step product, measured through the eigenvalue
// modulus of the monodromy: log max(|lambda_1|, |lambda_2|) with lambda the
// roots of lambda^2 - h lambda + 1 (unimodular product).  For hyperbolic
// products this matches the norm rate up to O(1/N) while being exact for
// constant matrices -- the norm itself carries an O(1) prefactor that would
// pollute the tight closed-form oracles.  Clamped at 0, which is the exact
// floor for unimodular matrices.
std::vector<double> phase_growth_logs(const Potential& pot, double omega,
                                      double E, long long N, double y,
                                      int grid_size);

// Average of the per-phase growth rates over an equispaced phase grid.
// grid_size >= 16; OutOfAnnulus if |y| >= rho0 (and the evaluation circle must
// lie inside the coefficient annulus, enforced per-site by the potential).
LyapunovEstimate finite_lyapunov(const Potential& pot, double omega, double E,
                                 long long N, double y, int grid_size);

struct AvalancheResult {
    double expansion = 0.0;  // sum log|A_{j+1}A_j| - middle sum log|A_j|
    double direct = 0.0;     // log|A_n ... A_1|
    double residual = 0.0;   // |direct - expansion|
};

// Pairwise telescoping expansion of a product of hyperbolic blocks.  Requires
// mu > n, every block norm >= mu (condition "large") and, for each consecutive
// pair, log|A_{j+1}| + log|A_j| - log|A_{j+1}A_j| <= log(mu)/2 (condition
// "diff"); HypothesisError otherwise.  The residual bound C*n/mu is reported
// by the caller's tests, never enforced here.
AvalancheResult avalanche_expand(const std::vector<ScaledMatrix2>& blocks, double mu);

struct RateProbe {
    double l_n = 0.0, l_2n = 0.0, l_4n = 0.0;
    double defect = 0.0;  // |L_n - 2 L_{2n} + L_{4n}|
    double drop = 0.0;    // L_n - L_{4n}; callers check drop + C/n >= 0
};

// Second-difference convergence probe of the scale sequence L_n, L_2n, L_4n.
// n >= 32.
RateProbe rate_convergence_probe(const Potential& pot, double omega, double E,
                                 long long n, double y = 0.0, int grid_size = 512);

struct DeviationPoint {
    double H = 0.0;
    double fraction = 0.0;
};

// For each threshold H: fraction of grid phases whose total log growth
// deviates from N * L_N by more than H.  grid_size >= 256.
std::vector<DeviationPoint> deviation_profile(const Potential& pot, double omega,
                                              double E, long long N,
                                              const std::vector<double>& H_list,
                                              int grid_size);

// sup over the grid of (total log growth - N * L_N); >= -1e-9 by construction
// (a supremum dominates the mean).  grid_size >= 256.
double uniform_upper_probe(const Potential& pot, double omega, double E,
                           long long N, int grid_size);

}  // namespace qplab::lyapunov
