#include "qplab/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>

namespace qplab::spectral {

namespace {

constexpr double kLn2 = std::numbers::ln2;
constexpr double kPivotFloor = 1e-290;
const double kNegInf = -std::numeric_limits<double>::infinity();

double gershgorin_lo(const std::vector<double>& diag) {
    double m = diag.front();
    for (double d : diag) m = std::min(m, d);
    return m - 2.0 - 1e-9;
}
double gershgorin_hi(const std::vector<double>& diag) {
    double m = diag.front();
    for (double d : diag) m = std::max(m, d);
    return m + 2.0 + 1e-9;
}

// Real three-term recursion with exact power-of-two rescaling; the companion
// of transfer::dirichlet_det for real phase and energy.
struct RealPair {
    double curr = 1.0, prev = 0.0;
    long long exp2 = 0;

    void step(double d) {
        double next = d * curr - prev;
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
};

// Sign and log-magnitude of a real value m * 2^e.
struct SignedLog {
    int sgn = 0;           // -1, 0, +1
    double logmag = kNegInf;
};

SignedLog signed_log(double mant, long long e) {
    if (mant == 0.0) return SignedLog{};
    return SignedLog{mant > 0.0 ? 1 : -1, std::log(std::abs(mant)) + static_cast<double>(e) * kLn2};
}

// trace(M_N) - c at real phase: h = f_{[1,N]} - f_{[2,N-1]} from two real
// recursions sharing the diagonal, then the constant is subtracted at the
// common binary scale.
SignedLog discriminant_minus(const std::vector<double>& diag, double E, double c) {
    RealPair f1, f2;
    const std::size_t n = diag.size();
    for (std::size_t i = 0; i < n; ++i) {
        f1.step(diag[i] - E);
        if (i >= 1) f2.step(diag[i] - E);
    }
    // h = f1.curr*2^e1 - f2.prev*2^e2 at scale max(e1, e2).
    long long e1 = f1.exp2, e2 = f2.exp2;
    long long e = std::max(e1, e2);
    double hm = f1.curr * std::ldexp(1.0, static_cast<int>(std::max(e1 - e, -1060ll))) -
                f2.prev * std::ldexp(1.0, static_cast<int>(std::max(e2 - e, -1060ll)));
    // g = h - c = (hm - c*2^{-e}) * 2^e.
    if (e > 1060) return signed_log(hm, e);              // c is invisible at this scale
    if (hm == 0.0 || std::log(std::abs(hm)) + e * kLn2 < std::log(2.0) - 80.0)
        return signed_log(-c, 0);                        // h is invisible next to c
    double gm = hm - c * std::ldexp(1.0, static_cast<int>(-e));
    return signed_log(gm, e);
}

}  // namespace

std::vector<double> window_diag(const Potential& pot, double x, double omega, Window w) {
    if (w.b < w.a) throw std::invalid_argument("window_diag: b >= a required");
    std::vector<double> d(static_cast<std::size_t>(w.length()));
    for (long long n = w.a; n <= w.b; ++n)
        d[static_cast<std::size_t>(n - w.a)] = pot.eval_phase(x + static_cast<double>(n) * omega);
    return d;
}

int count_below_diag(const std::vector<double>& diag, double E) {
    int cnt = 0;
    double q = 0.0;
    bool first = true;
    for (double d : diag) {
        q = first ? (d - E) : (d - E - 1.0 / q);
        first = false;
        if (std::abs(q) < kPivotFloor) q = -kPivotFloor;
        if (q < 0.0) ++cnt;
    }
    return cnt;
}

int count_below(const Potential& pot, double x, double omega, Window w, double E) {
    return count_below_diag(window_diag(pot, x, omega, w), E);
}

std::vector<double> dirichlet_eigs_diag(const std::vector<double>& diag, double abs_tol) {
    const int n = static_cast<int>(diag.size());
    double lo0 = gershgorin_lo(diag), hi0 = gershgorin_hi(diag);
    std::vector<double> eigs(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j) {
        double lo = lo0, hi = hi0;
        for (int it = 0; it < 200 && hi - lo > abs_tol; ++it) {
            double mid = 0.5 * (lo + hi);
            if (count_below_diag(diag, mid) >= j + 1) hi = mid;
            else lo = mid;
        }
        eigs[static_cast<std::size_t>(j)] = 0.5 * (lo + hi);
    }
    return eigs;
}

std::vector<double> dirichlet_eigs_diag_warm(const std::vector<double>& diag, double abs_tol,
                                             const std::vector<double>& warm, double slack) {
    const int n = static_cast<int>(diag.size());
    if (static_cast<int>(warm.size()) != n || slack <= 0.0)
        return dirichlet_eigs_diag(diag, abs_tol);
    double lo0 = gershgorin_lo(diag), hi0 = gershgorin_hi(diag);
    std::vector<double> eigs(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j) {
        double lo = std::max(lo0, warm[static_cast<std::size_t>(j)] - slack);
        double hi = std::min(hi0, warm[static_cast<std::size_t>(j)] + slack);
        if (!(lo < hi) || count_below_diag(diag, lo) > j || count_below_diag(diag, hi) < j + 1) {
            lo = lo0;  // warm bracket missed; fall back to the full interval
            hi = hi0;
        }
        for (int it = 0; it < 200 && hi - lo > abs_tol; ++it) {
            double mid = 0.5 * (lo + hi);
            if (count_below_diag(diag, mid) >= j + 1) hi = mid;
            else lo = mid;
        }
        eigs[static_cast<std::size_t>(j)] = 0.5 * (lo + hi);
    }
    return eigs;
}

double dirichlet_eig_band(const std::vector<double>& diag, std::size_t j, double abs_tol,
                          double warm, double slack) {
    const int n = static_cast<int>(diag.size());
    if (j >= diag.size()) throw std::invalid_argument("dirichlet_eig_band: band out of range");
    const int jj = static_cast<int>(j);
    double lo = warm - slack, hi = warm + slack;
    if (!(slack > 0.0) || count_below_diag(diag, lo) > jj || count_below_diag(diag, hi) < jj + 1) {
        lo = gershgorin_lo(diag);
        hi = gershgorin_hi(diag);
    }
    for (int it = 0; it < 200 && hi - lo > abs_tol; ++it) {
        double mid = 0.5 * (lo + hi);
        if (count_below_diag(diag, mid) >= jj + 1) hi = mid;
        else lo = mid;
    }
    (void)n;
    return 0.5 * (lo + hi);
}

std::vector<double> dirichlet_eigs(const Potential& pot, double x, double omega,
                                   Window w, double abs_tol) {
    return dirichlet_eigs_diag(window_diag(pot, x, omega, w), abs_tol);
}

double residual_inf(const Potential& pot, double x, double omega, Window w,
                    double Ej, const std::vector<double>& psi) {
    std::vector<double> diag = window_diag(pot, x, omega, w);
    const std::size_t n = diag.size();
    if (psi.size() != n) throw std::invalid_argument("residual_inf: size mismatch");
    double r = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double h = (diag[i] - Ej) * psi[i];
        if (i > 0) h -= psi[i - 1];
        if (i + 1 < n) h -= psi[i + 1];
        r = std::max(r, std::abs(h));
    }
    return r;
}

namespace {

// Inverse iteration on the shifted tridiagonal block.  Factorization and
// solve follow the classic partial-pivot tridiagonal LU (one superdiagonal of
// fill-in, row swaps recorded per step).
std::vector<double> inverse_iteration(const std::vector<double>& diag, double Ej) {
    const std::size_t n = diag.size();
    double scale = 1.0;
    for (double t : diag) scale = std::max(scale, std::abs(t));
    double shift = Ej + 1e-12 * scale;

    std::vector<double> dl(n > 1 ? n - 1 : 0, -1.0);  // becomes the multipliers
    std::vector<double> d(n);
    std::vector<double> du(n > 1 ? n - 1 : 0, -1.0);
    std::vector<double> du2(n > 2 ? n - 2 : 0, 0.0);
    std::vector<char> swapped(n > 1 ? n - 1 : 0, 0);
    for (std::size_t i = 0; i < n; ++i) d[i] = diag[i] - shift;

    for (std::size_t i = 0; i + 1 < n; ++i) {
        if (std::abs(d[i]) >= std::abs(dl[i])) {
            if (d[i] == 0.0) d[i] = 1e-300;
            double fact = dl[i] / d[i];
            dl[i] = fact;
            d[i + 1] -= fact * du[i];
            if (i + 2 < n) du2[i] = 0.0;
        } else {
            swapped[i] = 1;
            double fact = d[i] / dl[i];
            d[i] = dl[i];
            dl[i] = fact;
            double tmp = du[i];
            du[i] = d[i + 1];
            d[i + 1] = tmp - fact * d[i + 1];
            if (i + 2 < n) {
                du2[i] = du[i + 1];
                du[i + 1] = -fact * du[i + 1];
            }
        }
    }
    if (d[n - 1] == 0.0) d[n - 1] = 1e-300;

    std::vector<double> v(n, 1.0 / std::sqrt(static_cast<double>(n)));
    for (int iter = 0; iter < 3; ++iter) {
        std::vector<double> y = v;
        for (std::size_t i = 0; i + 1 < n; ++i) {
            if (!swapped[i]) {
                y[i + 1] -= dl[i] * y[i];
            } else {
                double tmp = y[i];
                y[i] = y[i + 1];
                y[i + 1] = tmp - dl[i] * y[i];
            }
        }
        y[n - 1] /= d[n - 1];
        if (n > 1) y[n - 2] = (y[n - 2] - du[n - 2] * y[n - 1]) / d[n - 2];
        for (std::size_t ii = n >= 3 ? n - 2 : 0; ii-- > 0;) {
            y[ii] = (y[ii] - du[ii] * y[ii + 1] - du2[ii] * y[ii + 2]) / d[ii];
        }
        double nrm = 0.0;
        for (double t : y) nrm += t * t;
        nrm = std::sqrt(nrm);
        if (nrm == 0.0 || !std::isfinite(nrm)) break;
        for (std::size_t i = 0; i < n; ++i) v[i] = y[i] / nrm;
    }
    return v;
}

}  // namespace

std::vector<double> eigenvector(const Potential& pot, double x, double omega,
                                Window w, double Ej) {
    std::vector<double> diag = window_diag(pot, x, omega, w);
    const std::size_t n = diag.size();

    // Degeneracy guard: another eigenvalue within 1e-13 of Ej.
    int lo = count_below_diag(diag, Ej - 1e-13);
    int hi = count_below_diag(diag, Ej + 1e-13);
    if (hi - lo > 1)
        throw DegenerateError("eigenvector: eigenvalue within 1e-13 of a neighbor");

    // Determinant route: psi(n) = f_{[a, n-1]}(Ej), forward recursion,
    // stored per-site with its own binary exponent.
    std::vector<double> mant(n);
    std::vector<long long> ex(n);
    {
        RealPair f;  // (f_{[a,a-1]}, f_{[a,a-2]}) = (1, 0)
        for (std::size_t i = 0; i < n; ++i) {
            if (i == 0) {
                mant[0] = 1.0;  // psi(a) = f_{[a,a-1]} = 1
                ex[0] = 0;
            } else {
                f.step(diag[i - 1] - Ej);
                mant[i] = f.curr;
                ex[i] = f.exp2;
            }
        }
    }
    double Lmax = kNegInf, Lmin = std::numeric_limits<double>::infinity();
    std::vector<double> lg(n, kNegInf);
    for (std::size_t i = 0; i < n; ++i) {
        if (mant[i] != 0.0) {
            lg[i] = std::log(std::abs(mant[i])) + static_cast<double>(ex[i]) * kLn2;
            Lmax = std::max(Lmax, lg[i]);
            Lmin = std::min(Lmin, lg[i]);
        }
    }

    std::vector<double> psi(n, 0.0);
    bool overflowed = (Lmax - Lmin) > 300.0;
    if (!overflowed && Lmax > kNegInf) {
        for (std::size_t i = 0; i < n; ++i)
            if (lg[i] > kNegInf)
                psi[i] = (mant[i] > 0.0 ? 1.0 : -1.0) * std::exp(lg[i] - Lmax);
        double nrm = 0.0;
        for (double t : psi) nrm += t * t;
        nrm = std::sqrt(nrm);
        for (double& t : psi) t /= nrm;
    }

    double scale = pot.coeff_abs_sum() + std::abs(Ej) + 2.0;
    if (overflowed || residual_inf(pot, x, omega, w, Ej, psi) > 1e-9 * scale)
        psi = inverse_iteration(diag, Ej);

    // Deterministic sign: the peak entry is positive.
    long long ctr = localization_center(psi, w);
    if (psi[static_cast<std::size_t>(ctr - w.a)] < 0.0)
        for (double& t : psi) t = -t;
    return psi;
}

namespace {

struct RootAccum {
    std::vector<double> roots;
    void add(double e) { roots.push_back(e); }
};

// One root by sign bisection on [u, v] (signs known, opposite, nonzero).
double bisect_root(const std::function<SignedLog(double)>& g, double u, double v,
                   int su, double tol) {
    for (int it = 0; it < 200 && v - u > tol; ++it) {
        double m = 0.5 * (u + v);
        SignedLog gm = g(m);
        int sm = gm.sgn == 0 ? -su : gm.sgn;
        if (sm == su) u = m;
        else v = m;
    }
    return 0.5 * (u + v);
}

}  // namespace

std::vector<double> periodic_eigs(const Potential& pot, double x, double omega,
                                  long long N, Bc bc, bool cross_check) {
    if (bc == Bc::Dirichlet)
        return dirichlet_eigs(pot, x, omega, Window{1, N});
    if (N < 2) throw std::invalid_argument("periodic_eigs: N >= 2");

    std::vector<double> diag = window_diag(pot, x, omega, Window{1, N});
    const double c = (bc == Bc::Periodic) ? 2.0 : -2.0;
    auto g = [&diag, c](double E) { return discriminant_minus(diag, E, c); };

    std::vector<double> dir = dirichlet_eigs_diag(diag, 1e-12);
    double lo0 = gershgorin_lo(diag), hi0 = gershgorin_hi(diag);
    std::vector<double> knots;
    knots.push_back(lo0);
    for (double d : dir) knots.push_back(d);
    knots.push_back(hi0);

    const double tangent_thr = std::log(1e-9);
    RootAccum acc;
    for (std::size_t bi = 0; bi + 1 < knots.size(); ++bi) {
        double u = knots[bi], v = knots[bi + 1];
        if (!(v > u)) continue;
        double width = v - u;
        double tol = 1e-13 * std::max(1.0, std::max(std::abs(u), std::abs(v)));
        SignedLog gu = g(u), gv = g(v);
        // A discriminant root sitting exactly on a Dirichlet eigenvalue: claim
        // it for the bracket on its left, and nudge the endpoint inward.
        if (bi > 0 && bi <= dir.size() && gu.sgn != 0 && gu.logmag < std::log(1e-12)) {
            gu = g(u + 1e-10 * width);
        }
        if (bi + 1 <= dir.size() && (gv.sgn == 0 || gv.logmag < std::log(1e-12))) {
            acc.add(v);
            gv = g(v - 1e-10 * width);
        }
        int su = gu.sgn == 0 ? 1 : gu.sgn;
        int sv = gv.sgn == 0 ? 1 : gv.sgn;

        if (su * sv < 0) {
            acc.add(bisect_root(g, u, v, su, tol));
            continue;
        }
        // Same sign at both ends: look for an interior dip toward (or through)
        // zero by golden-section on the log-magnitude.
        double a1 = u, b1 = v;
        double bestE = 0.5 * (u + v);
        double bestLog = std::min(gu.logmag, gv.logmag);
        double crossing = std::numeric_limits<double>::quiet_NaN();
        for (int it = 0; it < 120 && b1 - a1 > tol; ++it) {
            double m1 = a1 + (b1 - a1) / 3.0;
            double m2 = b1 - (b1 - a1) / 3.0;
            SignedLog g1 = g(m1), g2 = g(m2);
            if (g1.sgn != 0 && g1.sgn != su) { crossing = m1; break; }
            if (g2.sgn != 0 && g2.sgn != su) { crossing = m2; break; }
            double l1 = g1.sgn == 0 ? kNegInf : g1.logmag;
            double l2 = g2.sgn == 0 ? kNegInf : g2.logmag;
            if (l1 < bestLog) { bestLog = l1; bestE = m1; }
            if (l2 < bestLog) { bestLog = l2; bestE = m2; }
            if (l1 <= l2) b1 = m2;
            else a1 = m1;
        }
        if (std::isfinite(crossing) || (g(bestE).sgn != 0 && g(bestE).sgn != su)) {
            double w0 = std::isfinite(crossing) ? crossing : bestE;
            acc.add(bisect_root(g, u, w0, su, tol));
            acc.add(bisect_root(g, w0, v, -su, tol));
        } else if (bestLog < tangent_thr) {
            acc.add(bestE);  // tangency: double root
            acc.add(bestE);
        }
    }

    std::sort(acc.roots.begin(), acc.roots.end());
    if (static_cast<long long>(acc.roots.size()) != N)
        throw CrossCheckError("periodic_eigs: found " + std::to_string(acc.roots.size()) +
                              " discriminant roots, expected " + std::to_string(N));

    if (cross_check) {
        std::vector<double> dense = dense_bc_eigs(pot, x, omega, N, bc);
        for (std::size_t i = 0; i < dense.size(); ++i)
            if (std::abs(dense[i] - acc.roots[i]) > 1e-7)
                throw CrossCheckError("periodic_eigs: dense Jacobi disagrees at index " +
                                      std::to_string(i) + " by " +
                                      std::to_string(std::abs(dense[i] - acc.roots[i])));
    }
    return acc.roots;
}

std::vector<double> dense_bc_eigs(const Potential& pot, double x, double omega,
                                  long long N, Bc bc) {
    if (N < 1) throw std::invalid_argument("dense_bc_eigs: N >= 1");
    if (bc != Bc::Dirichlet && N < 2)
        throw std::invalid_argument("dense_bc_eigs: corner conditions need N >= 2");
    const std::size_t n = static_cast<std::size_t>(N);
    std::vector<double> A(n * n, 0.0);
    auto at = [&A, n](std::size_t i, std::size_t j) -> double& { return A[i * n + j]; };
    std::vector<double> diag = window_diag(pot, x, omega, Window{1, N});
    for (std::size_t i = 0; i < n; ++i) at(i, i) = diag[i];
    for (std::size_t i = 0; i + 1 < n; ++i) { at(i, i + 1) = -1.0; at(i + 1, i) = -1.0; }
    if (bc != Bc::Dirichlet) {
        double cv = (bc == Bc::Periodic) ? -1.0 : 1.0;
        // N = 2: the corner shares the slot with the hopping term and adds.
        at(0, n - 1) += cv;
        at(n - 1, 0) += cv;
    }

    double fro = 0.0;
    for (double v : A) fro += v * v;
    double off_tol = 1e-26 * std::max(fro, 1e-30);

    for (int sweep = 0; sweep < 60; ++sweep) {
        double off = 0.0;
        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) off += at(p, q) * at(p, q);
        if (off < off_tol) break;
        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                double apq = at(p, q);
                if (apq == 0.0) continue;
                double tau = (at(q, q) - at(p, p)) / (2.0 * apq);
                double t = (tau >= 0.0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
                double cth = 1.0 / std::sqrt(1.0 + t * t);
                double sth = t * cth;
                for (std::size_t k = 0; k < n; ++k) {
                    double akp = at(k, p), akq = at(k, q);
                    at(k, p) = cth * akp - sth * akq;
                    at(k, q) = sth * akp + cth * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    double apk = at(p, k), aqk = at(q, k);
                    at(p, k) = cth * apk - sth * aqk;
                    at(q, k) = sth * apk + cth * aqk;
                }
            }
        }
    }
    std::vector<double> eigs(n);
    for (std::size_t i = 0; i < n; ++i) eigs[i] = at(i, i);
    std::sort(eigs.begin(), eigs.end());
    return eigs;
}

namespace {

// Inertia of the corner-coupled block: eliminate rows 0..n-2 in order.  The
// corner couples only row 0 to the last column, so the fill-in stays confined
// there: carry the current last-column entry g of the active row and the
// running Schur complement dN of the (n-1, n-1) slot.  Pivot signs give the
// eigenvalue count below E.
int corner_count_below(const std::vector<double>& diag, double corner, double E) {
    const std::size_t n = diag.size();
    int cnt = 0;
    double p = diag[0] - E;
    if (std::abs(p) < kPivotFloor) p = -kPivotFloor;
    double g = corner;
    double dN = diag[n - 1] - E;
    for (std::size_t i = 1; i + 1 < n; ++i) {
        if (p < 0.0) ++cnt;
        dN -= g * g / p;
        // A(i, n-1) after the elimination; the natural (n-2, n-1) hopping
        // enters here rather than through a separate band.
        double gnext = (i + 2 == n ? -1.0 : 0.0) + g / p;
        p = (diag[i] - E) - 1.0 / p;
        if (std::abs(p) < kPivotFloor) p = -kPivotFloor;
        g = gnext;
    }
    if (p < 0.0) ++cnt;
    dN -= g * g / p;
    if (std::abs(dN) < kPivotFloor) dN = -kPivotFloor;
    if (dN < 0.0) ++cnt;
    return cnt;
}

}  // namespace

int periodic_count_below(const Potential& pot, double x, double omega,
                         long long N, Bc bc, double E) {
    if (bc == Bc::Dirichlet) return count_below(pot, x, omega, Window{1, N}, E);
    if (N < 3) {
        int cnt = 0;
        for (double e : dense_bc_eigs(pot, x, omega, N, bc))
            if (e < E) ++cnt;
        return cnt;
    }
    return corner_count_below(window_diag(pot, x, omega, Window{1, N}),
                              (bc == Bc::Periodic) ? -1.0 : 1.0, E);
}

std::vector<double> bc_eigs_bisect(const Potential& pot, double x, double omega,
                                   long long N, Bc bc, double abs_tol) {
    if (N < 3) return dense_bc_eigs(pot, x, omega, N, bc);
    std::vector<double> diag = window_diag(pot, x, omega, Window{1, N});
    const double corner = (bc == Bc::Periodic) ? -1.0 : 1.0;
    // corner rows carry the same absolute row sum as interior ones
    double lo0 = diag[0] - 2.0, hi0 = diag[0] + 2.0;
    for (double d : diag) {
        lo0 = std::min(lo0, d - 2.0);
        hi0 = std::max(hi0, d + 2.0);
    }
    std::vector<double> eigs(static_cast<std::size_t>(N));
    for (long long j = 0; j < N; ++j) {
        double lo = lo0, hi = hi0;
        for (int it = 0; it < 200 && hi - lo > abs_tol; ++it) {
            double mid = 0.5 * (lo + hi);
            if (corner_count_below(diag, corner, mid) >= j + 1) hi = mid;
            else lo = mid;
        }
        eigs[static_cast<std::size_t>(j)] = 0.5 * (lo + hi);
    }
    return eigs;
}

long long localization_center(const std::vector<double>& psi, Window w) {
    if (psi.empty()) throw std::invalid_argument("localization_center: empty vector");
    std::size_t best = 0;
    for (std::size_t i = 1; i < psi.size(); ++i)
        if (std::abs(psi[i]) > std::abs(psi[best])) best = i;  // strict: ties keep smallest
    return w.a + static_cast<long long>(best);
}

DecayFit decay_profile(const std::vector<double>& psi, Window w, long long center) {
    std::vector<double> xs, ys;
    for (std::size_t i = 0; i < psi.size(); ++i) {
        double a = std::abs(psi[i]);
        if (a > 1e-14) {
            xs.push_back(std::abs(static_cast<double>(w.a + static_cast<long long>(i) - center)));
            ys.push_back(std::log(a));
        }
    }
    if (xs.size() < 20)
        throw std::invalid_argument("decay_profile: fewer than 20 usable sites");
    double n = static_cast<double>(xs.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sx += xs[i]; sy += ys[i]; sxx += xs[i] * xs[i]; sxy += xs[i] * ys[i];
    }
    double denom = n * sxx - sx * sx;
    if (denom == 0.0) throw std::invalid_argument("decay_profile: degenerate abscissas");
    DecayFit fit;
    fit.rate = (n * sxy - sx * sy) / denom;
    fit.intercept = (sy - fit.rate * sx) / n;
    fit.points = static_cast<int>(xs.size());
    return fit;
}

}  // namespace qplab::spectral
