#pragma once

#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

#include "qplab/model.hpp"

namespace qplab::resultant {

using cplx = std::complex<double>;
using model::Potential;

struct RootFindingError : std::runtime_error {
    explicit RootFindingError(const std::string& msg) : std::runtime_error(msg) {}
};

// Dense polynomial, coefficients ascending: coeffs[k] multiplies x^k.
// Trailing zero coefficients are trimmed on construction; the zero polynomial
// is rejected.
struct Poly {
    std::vector<cplx> coeffs;

    explicit Poly(std::vector<cplx> c);
    int degree() const { return static_cast<int>(coeffs.size()) - 1; }
    cplx leading() const { return coeffs.back(); }
    cplx eval(cplx x) const;
    Poly derivative() const;
};

// Determinant of the (deg p + deg q)-dimensional Sylvester matrix by
// partial-pivot elimination.  Both degrees must be >= 1.
cplx sylvester_resultant(const Poly& p, const Poly& q);

// All roots via the balanced companion matrix (degree <= 12, the regime where
// the eigensolver is a trustworthy oracle); RootFindingError if any root's
// normalized residual exceeds 1e-8.
std::vector<cplx> poly_roots(const Poly& p);

// lc(p)^deg(q) * lc(q)^deg(p) * prod_(i,j) (zeta_i - eta_j): the root-product
// route to the resultant, used as an independent oracle for the Sylvester
// determinant.
cplx root_product_resultant(const Poly& p, const Poly& q);

// prod_{i != j} (zeta_i - zeta_j) over ordered root pairs (so x^2 - 1 gives
// -4).  Requires monic input of degree >= 2.  This product definition equals
// the Sylvester value Res(p, p') for monic p; the textbook variant
// (-1)^{n(n-1)/2} Res(p, p') differs from it by exactly that sign factor,
// which tests log rather than resolve.
cplx discriminant(const Poly& p);

// Minimum distance between the zero set of z -> f_{[1,l1]}(z, omega, E) and
// the zero set of z -> f_{[1,l2]}(z e(t omega), omega, E) inside the annulus
// R1 < |z| < R2 (defaults to the middle half of the coefficient annulus).
// +infinity when either set is empty.  l1 >= l2 >= 8, t >= 0.
double zero_separation_experiment(const Potential& pot, double omega, double E,
                                  long long l1, long long l2, long long t,
                                  double R1 = 0.0, double R2 = 0.0);

}  // namespace qplab::resultant
