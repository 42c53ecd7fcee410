#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include "qplab/model.hpp"

namespace qplab::transfer {

using cplx = std::complex<double>;
using model::Potential;

struct MismatchError : std::runtime_error {
    explicit MismatchError(const std::string& msg) : std::runtime_error(msg) {}
};
struct SingularError : std::runtime_error {
    explicit SingularError(const std::string& msg) : std::runtime_error(msg) {}
};

// Row-major 2x2: [[a, b], [c, d]].
struct Mat2 {
    cplx a{1.0, 0.0}, b{0.0, 0.0}, c{0.0, 0.0}, d{1.0, 0.0};
};

Mat2 mul(const Mat2& l, const Mat2& r);
cplx det(const Mat2& m);
double frob_sq(const Mat2& m);
// Largest singular value from the closed form
//   sigma_max^2 = (F + sqrt(F^2 - 4 |det|^2)) / 2,   F = Frobenius^2.
double op_norm(const Mat2& m);

// log-magnitude / unit-phase representation of a complex number.
// mag = -inf encodes exact zero (phase fixed to 1).
struct LogComplex {
    double mag = 0.0;
    cplx phase{1.0, 0.0};

    static LogComplex from_value(cplx v);
    static LogComplex zero();
    bool is_zero() const;
    cplx value() const;          // exp(mag)*phase; may overflow by design
    double real_value() const;   // saturating real part
};

LogComplex lc_mul(const LogComplex& a, const LogComplex& b);
LogComplex lc_div(const LogComplex& a, const LogComplex& b);
// a - b evaluated at the common scale max(a.mag, b.mag); safe for any magnitudes.
LogComplex lc_sub(const LogComplex& a, const LogComplex& b);
// |a - b| / exp(max(a.mag, b.mag)): difference relative to the larger operand.
double lc_rel_diff(const LogComplex& a, const LogComplex& b);

// 2x2 matrix stored as u * 2^exp2 with op_norm(u) in [1, 2).  Power-of-two
// rescaling is exact, so long products lose nothing to the bookkeeping.
class ScaledMatrix2 {
public:
    ScaledMatrix2() = default;                 // identity, exp2 = 0
    static ScaledMatrix2 from(const Mat2& m);  // factor immediately

    ScaledMatrix2 left_mul(const Mat2& step) const;        // step * this
    ScaledMatrix2 times(const ScaledMatrix2& rhs) const;   // this * rhs

    const Mat2& unit() const { return m_u; }
    long long exp2() const { return m_exp2; }
    double log_norm() const;        // log of the represented operator norm
    LogComplex trace() const;
    LogComplex det_log() const;
    double det_error() const;       // |det - 1|, computed at log scale
    LogComplex entry(int row, int col) const;

private:
    void normalize();
    Mat2 m_u;
    long long m_exp2 = 0;
};

// One-step cocycle matrix A(z e(n omega)) = [[V(z e(n omega)) - E, -1], [1, 0]].
Mat2 transfer_step(const Potential& pot, cplx z, double omega, cplx E, long long n);

// Ordered product A_b A_{b-1} ... A_a (b >= a; b = a-1 gives the identity).
ScaledMatrix2 monodromy(const Potential& pot, long long a, long long b, cplx z,
                        double omega, cplx E);

// Determinant of the tridiagonal block with diagonal V(z e(n omega)) - E,
// n = a..b, via f_n = (V(z e(n omega)) - E) f_{n-1} - f_{n-2};
// conventions f_{[a,a-1]} = 1, f_{[a,a-2]} = 0.
LogComplex dirichlet_det(const Potential& pot, long long a, long long b, cplx z,
                         double omega, cplx E);

// (f_{[1,N]}, f_{[1,N-1]}, f_{[2,N]}, f_{[2,N-1]}) in one pass; these are the
// monodromy entries [[f1N, -f2N], [f1Nm1, -f2Nm1]].
struct EntryQuadruple {
    LogComplex f1N, f1Nm1, f2N, f2Nm1;
};
EntryQuadruple entry_quadruple(const Potential& pot, long long N, cplx z,
                               double omega, cplx E);

// Trace of the N-step monodromy, computed both as tr(product) and as
// f_{[1,N]} - f_{[2,N-1]}; MismatchError if the routes disagree by more than
// 1e-8 relative to the monodromy norm.  Returns the determinant-route value.
LogComplex hill_trace(const Potential& pot, cplx z, double omega, cplx E, long long N);

enum class PeriodicSign { Plus, Minus };  // Plus: trace - 2; Minus: trace + 2

LogComplex periodic_det(const Potential& pot, cplx z, double omega, cplx E,
                        long long N, PeriodicSign sign);

// Green's function entry of the Dirichlet block [1,N] at real phase x:
//   G(k, m) = f_{[1,k-1]} f_{[m+1,N]} / f_{[1,N]}   (k <= m; symmetric).
// SingularError if f_{[1,N]} vanishes or the quotient overflows.
double green_entry(const Potential& pot, double x, double omega, double E,
                   long long N, long long k, long long m);

}  // namespace qplab::transfer
