#include "qplab/transfer.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace qplab::transfer {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kLn2 = std::numbers::ln2;
const double kNegInf = -std::numeric_limits<double>::infinity();

cplx phase_point(cplx z, double omega, long long n) {
    // z * e(n omega); the angle is reduced mod 1 before the trig call.
    double ang = kTwoPi * model::frac(static_cast<double>(n) * omega);
    return z * std::polar(1.0, ang);
}
}  // namespace

Mat2 mul(const Mat2& l, const Mat2& r) {
    return Mat2{l.a * r.a + l.b * r.c, l.a * r.b + l.b * r.d,
                l.c * r.a + l.d * r.c, l.c * r.b + l.d * r.d};
}

cplx det(const Mat2& m) { return m.a * m.d - m.b * m.c; }

double frob_sq(const Mat2& m) {
    return std::norm(m.a) + std::norm(m.b) + std::norm(m.c) + std::norm(m.d);
}

double op_norm(const Mat2& m) {
    double F = frob_sq(m);
    double D2 = std::norm(det(m));
    double disc = F * F - 4.0 * D2;
    if (disc < 0.0) disc = 0.0;  // roundoff; the true value is >= 0
    return std::sqrt(0.5 * (F + std::sqrt(disc)));
}

LogComplex LogComplex::from_value(cplx v) {
    double r = std::abs(v);
    if (r == 0.0) return zero();
    return LogComplex{std::log(r), v / r};
}

LogComplex LogComplex::zero() { return LogComplex{kNegInf, cplx(1.0, 0.0)}; }

bool LogComplex::is_zero() const { return mag == kNegInf; }

cplx LogComplex::value() const {
    if (is_zero()) return cplx(0.0, 0.0);
    return std::exp(mag) * phase;
}

double LogComplex::real_value() const {
    if (is_zero()) return 0.0;
    return std::exp(std::min(mag, 709.0)) * phase.real();
}

LogComplex lc_mul(const LogComplex& a, const LogComplex& b) {
    if (a.is_zero() || b.is_zero()) return LogComplex::zero();
    cplx p = a.phase * b.phase;
    double r = std::abs(p);  // renormalize to keep |phase| = 1 over long chains
    return LogComplex{a.mag + b.mag + std::log(r), p / r};
}

LogComplex lc_div(const LogComplex& a, const LogComplex& b) {
    if (b.is_zero()) throw std::domain_error("lc_div: division by exact zero");
    if (a.is_zero()) return LogComplex::zero();
    cplx p = a.phase / b.phase;
    double r = std::abs(p);
    return LogComplex{a.mag - b.mag + std::log(r), p / r};
}

LogComplex lc_sub(const LogComplex& a, const LogComplex& b) {
    if (b.is_zero()) return a;
    if (a.is_zero()) return LogComplex{b.mag, -b.phase};
    double s = std::max(a.mag, b.mag);
    cplx v = std::exp(a.mag - s) * a.phase - std::exp(b.mag - s) * b.phase;
    double r = std::abs(v);
    if (r == 0.0) return LogComplex::zero();
    return LogComplex{s + std::log(r), v / r};
}

double lc_rel_diff(const LogComplex& a, const LogComplex& b) {
    if (a.is_zero() && b.is_zero()) return 0.0;
    LogComplex d = lc_sub(a, b);
    if (d.is_zero()) return 0.0;
    double s = std::max(a.mag, b.mag);
    return std::exp(d.mag - s);
}

void ScaledMatrix2::normalize() {
    double n = op_norm(m_u);
    if (n == 0.0 || !std::isfinite(n)) return;  // zero or broken input: leave as is
    int e = std::ilogb(n);                      // n = f * 2^e with f in [1,2)
    if (e == 0) return;
    double s = std::ldexp(1.0, -e);
    m_u.a *= s; m_u.b *= s; m_u.c *= s; m_u.d *= s;
    m_exp2 += e;
}

ScaledMatrix2 ScaledMatrix2::from(const Mat2& m) {
    ScaledMatrix2 r;
    r.m_u = m;
    r.m_exp2 = 0;
    r.normalize();
    return r;
}

ScaledMatrix2 ScaledMatrix2::left_mul(const Mat2& step) const {
    ScaledMatrix2 r;
    r.m_u = mul(step, m_u);
    r.m_exp2 = m_exp2;
    r.normalize();
    return r;
}

ScaledMatrix2 ScaledMatrix2::times(const ScaledMatrix2& rhs) const {
    ScaledMatrix2 r;
    r.m_u = mul(m_u, rhs.m_u);
    r.m_exp2 = m_exp2 + rhs.m_exp2;
    r.normalize();
    return r;
}

double ScaledMatrix2::log_norm() const {
    return static_cast<double>(m_exp2) * kLn2 + std::log(op_norm(m_u));
}

LogComplex ScaledMatrix2::trace() const {
    LogComplex t = LogComplex::from_value(m_u.a + m_u.d);
    if (!t.is_zero()) t.mag += static_cast<double>(m_exp2) * kLn2;
    return t;
}

LogComplex ScaledMatrix2::det_log() const {
    LogComplex d = LogComplex::from_value(det(m_u));
    if (!d.is_zero()) d.mag += 2.0 * static_cast<double>(m_exp2) * kLn2;
    return d;
}

double ScaledMatrix2::det_error() const {
    LogComplex d = det_log();
    if (d.is_zero()) return 1.0;
    if (d.mag > 37.0) return std::numeric_limits<double>::infinity();
    return std::abs(d.value() - cplx(1.0, 0.0));
}

LogComplex ScaledMatrix2::entry(int row, int col) const {
    cplx v = (row == 0) ? (col == 0 ? m_u.a : m_u.b) : (col == 0 ? m_u.c : m_u.d);
    LogComplex e = LogComplex::from_value(v);
    if (!e.is_zero()) e.mag += static_cast<double>(m_exp2) * kLn2;
    return e;
}

Mat2 transfer_step(const Potential& pot, cplx z, double omega, cplx E, long long n) {
    cplx v = pot.eval(phase_point(z, omega, n));
    return Mat2{v - E, cplx(-1.0, 0.0), cplx(1.0, 0.0), cplx(0.0, 0.0)};
}

ScaledMatrix2 monodromy(const Potential& pot, long long a, long long b, cplx z,
                        double omega, cplx E) {
    if (b < a - 1)
        throw std::invalid_argument("monodromy: need b >= a-1 (b = a-1 is the identity)");
    ScaledMatrix2 prod;  // identity
    for (long long k = a; k <= b; ++k)
        prod = prod.left_mul(transfer_step(pot, z, omega, E, k));
    return prod;
}

namespace {
// Shared-exponent pair for the three-term recursion.  Rescaling by powers of
// two keeps both lags exact while the represented magnitude runs off to
// e^{+-N L}.
struct ScaledPair {
    cplx curr{1.0, 0.0}, prev{0.0, 0.0};
    long long exp2 = 0;

    void step(cplx diag) {
        cplx next = diag * curr - prev;
        prev = curr;
        curr = next;
        double m = std::max(std::abs(curr), std::abs(prev));
        if (m > 0.0) {
            int e = std::ilogb(m);
            if (e > 128 || e < -128) {
                double s = std::ldexp(1.0, -e);
                curr *= s;
                prev *= s;
                exp2 += e;
            }
        }
    }

    LogComplex current() const {
        LogComplex l = LogComplex::from_value(curr);
        if (!l.is_zero()) l.mag += static_cast<double>(exp2) * kLn2;
        return l;
    }
    LogComplex previous() const {
        LogComplex l = LogComplex::from_value(prev);
        if (!l.is_zero()) l.mag += static_cast<double>(exp2) * kLn2;
        return l;
    }
};
}  // namespace

LogComplex dirichlet_det(const Potential& pot, long long a, long long b, cplx z,
                         double omega, cplx E) {
    if (b < a - 2)
        throw std::invalid_argument("dirichlet_det: need b >= a-2");
    if (b == a - 2) return LogComplex::zero();  // f_{[a,a-2]} = 0
    if (b == a - 1) return LogComplex::from_value(cplx(1.0, 0.0));
    ScaledPair f;  // starts at (f_{[a,a-1]}, f_{[a,a-2]}) = (1, 0)
    for (long long n = a; n <= b; ++n)
        f.step(pot.eval(phase_point(z, omega, n)) - E);
    return f.current();
}

EntryQuadruple entry_quadruple(const Potential& pot, long long N, cplx z,
                               double omega, cplx E) {
    if (N < 1) throw std::invalid_argument("entry_quadruple: N >= 1");
    ScaledPair f1;  // window starting at 1
    ScaledPair f2;  // window starting at 2
    for (long long n = 1; n <= N; ++n) {
        cplx diag = pot.eval(phase_point(z, omega, n)) - E;
        f1.step(diag);
        if (n >= 2) f2.step(diag);
    }
    return EntryQuadruple{f1.current(), f1.previous(), f2.current(), f2.previous()};
}

LogComplex hill_trace(const Potential& pot, cplx z, double omega, cplx E, long long N) {
    if (N < 1) throw std::invalid_argument("hill_trace: N >= 1");
    ScaledMatrix2 M = monodromy(pot, 1, N, z, omega, E);
    LogComplex via_trace = M.trace();
    EntryQuadruple q = entry_quadruple(pot, N, z, omega, E);
    LogComplex via_dets = lc_sub(q.f1N, q.f2Nm1);
    // Both routes carry absolute error ~eps * ||M_N||, so the comparison is
    // relative to the norm scale, not to |trace| (which can vanish).
    LogComplex d = lc_sub(via_trace, via_dets);
    if (!d.is_zero()) {
        double rel = std::exp(d.mag - M.log_norm());
        if (rel > 1e-8)
            throw MismatchError("hill_trace: monodromy-trace and determinant routes "
                                "disagree by relative " + std::to_string(rel));
    }
    return via_dets;
}

LogComplex periodic_det(const Potential& pot, cplx z, double omega, cplx E,
                        long long N, PeriodicSign sign) {
    LogComplex h = hill_trace(pot, z, omega, E, N);
    double c = (sign == PeriodicSign::Plus) ? 2.0 : -2.0;
    return lc_sub(h, LogComplex::from_value(cplx(c, 0.0)));
}

double green_entry(const Potential& pot, double x, double omega, double E,
                   long long N, long long k, long long m) {
    if (N < 1) throw std::invalid_argument("green_entry: N >= 1");
    if (k < 1 || k > N || m < 1 || m > N)
        throw std::invalid_argument("green_entry: sites must lie in [1, N]");
    if (k > m) std::swap(k, m);  // symmetric kernel
    cplx z = std::polar(1.0, kTwoPi * model::frac(x));
    LogComplex full = dirichlet_det(pot, 1, N, z, omega, cplx(E, 0.0));
    if (full.is_zero())
        throw SingularError("green_entry: f_{[1,N]} vanishes at this (x, E)");
    LogComplex left = dirichlet_det(pot, 1, k - 1, z, omega, cplx(E, 0.0));
    LogComplex right = dirichlet_det(pot, m + 1, N, z, omega, cplx(E, 0.0));
    LogComplex g = lc_div(lc_mul(left, right), full);
    if (g.mag > 700.0)
        throw SingularError("green_entry: quotient overflows; f_{[1,N]} too small");
    return g.real_value();
}

}  // namespace qplab::transfer
