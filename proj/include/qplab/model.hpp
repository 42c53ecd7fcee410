#pragma once

#include <complex>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

namespace qplab::model {

using cplx = std::complex<double>;

// Evaluation point left the annulus 1-rho0 < |z| < 1+rho0 on which the
// potential's Fourier series is trusted.
struct OutOfAnnulus : std::runtime_error {
    explicit OutOfAnnulus(const std::string& msg) : std::runtime_error(msg) {}
};

// Continued-fraction expansion hit a (numerically) rational frequency.
struct RationalInput : std::runtime_error {
    RationalInput(const std::string& msg, int depth_reached)
        : std::runtime_error(msg), depth(depth_reached) {}
    int depth;
};

double frac(double x);        // fractional part in [0, 1)
double torus_dist(double x);  // distance to the nearest integer

// Trigonometric-polynomial potential V(z) = sum_k a_k z^k on the annulus
// 1-rho0 < |z| < 1+rho0, real on the unit circle (a_{-k} = conj(a_k)).
class Potential {
public:
    Potential(std::map<int, cplx> coeffs, double rho0);

    // 2*lambda*cos(2*pi*x) on the circle: a_{+1} = a_{-1} = lambda.
    // rho0 defaults to 0.5; the series is entire, the annulus only bounds the
    // region where evaluations are accepted.
    static Potential almost_mathieu(double lambda, double rho0 = 0.5);

    cplx eval(cplx z) const;          // throws OutOfAnnulus outside the band
    double eval_phase(double x) const;   // V(e(x)), exactly real by symmetry
    double deriv_phase(double x) const;  // d/dx V(e(x))

    double rho0() const { return m_rho0; }
    int degree() const { return m_degree; }                 // max |k| with a_k != 0
    double coeff_abs_sum() const { return m_abs_sum; }      // >= sup_circle |V|
    double deriv_abs_sum() const { return m_deriv_abs_sum; }// >= sup_circle |V'|
    const std::map<int, cplx>& coeffs() const { return m_coeffs; }

    nlohmann::json to_json() const;
    static Potential from_json(const nlohmann::json& j);

private:
    std::map<int, cplx> m_coeffs;
    // Dense mirrors of the coefficient map (index = |k|) so eval stays cheap
    // inside transfer-matrix loops.
    std::vector<cplx> m_pos, m_neg;
    double m_rho0;
    int m_degree;
    double m_abs_sum;
    double m_deriv_abs_sum;
};

struct Frequency {
    double omega = 0.0;                        // in (0, 1)
    std::vector<long long> quotients;          // partial quotients a_1, a_2, ...
    std::vector<std::pair<long long, long long>> convergents;  // (p_k, q_k)
    std::optional<std::pair<double, double>> dioph;  // (c, a) metadata, report-only
};

double golden_mean();  // (sqrt(5)-1)/2
double silver_mean();  // sqrt(2)-1

// Continued-fraction expansion of omega in (0,1) to the requested depth
// (capped at 40).  Throws RationalInput if the expansion terminates first.
Frequency continued_fraction(double omega, int depth);

// min over 1 <= t <= N of ||t*omega||, with the smallest attaining t.
std::pair<double, long long> min_shift_distance(double omega, long long N);

// Smallest m in [m_lo, m_hi] with {m*omega} in the open interval (y1, y2),
// or nullopt.
std::optional<long long> find_shift_hitting_interval(double omega, double y1, double y2,
                                                     long long m_lo, long long m_hi);

}  // namespace qplab::model
