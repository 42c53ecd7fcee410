#include "qplab/zerocount.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "qplab/util.hpp"

namespace qplab::zerocount {

namespace {

constexpr double kTwoPi = 2.0 * M_PI;

cplx circle_point(cplx center, double radius, double turn) {
    return center + radius * cplx(std::cos(kTwoPi * turn), std::sin(kTwoPi * turn));
}

// One winding attempt at a fixed radius.  Returns false when the contour runs
// too close to a zero (margin below 1e-12) or the count refuses to stabilize.
struct WindingAttempt {
    bool ok = false;
    int winding = 0;
    double margin = 0.0;
};

WindingAttempt try_winding(const LogEvaluator& f, cplx center, double radius) {
    WindingAttempt out;
    int prev_winding = 0;
    bool have_prev = false;
    for (int nodes = 32; nodes <= (1 << 17); nodes *= 2) {
        std::vector<LogComplex> vals(static_cast<std::size_t>(nodes));
        double min_mag = std::numeric_limits<double>::infinity();
        double max_mag = -std::numeric_limits<double>::infinity();
        for (int j = 0; j < nodes; ++j) {
            vals[j] = f(circle_point(center, radius, static_cast<double>(j) / nodes));
            if (vals[j].is_zero()) return out;  // dead on a zero
            min_mag = std::min(min_mag, vals[j].mag);
            max_mag = std::max(max_mag, vals[j].mag);
        }
        out.margin = std::exp(min_mag - max_mag);
        if (out.margin < 1e-12) return out;
        double total = 0.0;
        double max_step = 0.0;
        for (int j = 0; j < nodes; ++j) {
            const cplx ratio = vals[(j + 1) % nodes].phase * std::conj(vals[j].phase);
            const double d = std::arg(ratio);
            max_step = std::max(max_step, std::abs(d));
            total += d;
        }
        const double turns = total / kTwoPi;
        const int w = static_cast<int>(std::lround(turns));
        const bool clean = std::abs(turns - w) < 1e-6 && max_step < M_PI / 2.0;
        if (clean && have_prev && w == prev_winding) {
            out.ok = true;
            out.winding = w;
            return out;
        }
        if (clean) {
            prev_winding = w;
            have_prev = true;
        } else {
            have_prev = false;
        }
    }
    return out;
}

// Perturbation schedule for contours that graze a zero.
constexpr double kRetryFactors[] = {1.0, 1.017, 0.983, 1.034, 0.966, 1.051};

LogComplex central_diff(const LogEvaluator& f, cplx z, double h) {
    LogComplex d = transfer::lc_sub(f(z + cplx(h, 0.0)), f(z - cplx(h, 0.0)));
    d.mag -= std::log(2.0 * h);
    return d;
}

// Newton polish from a seed; empty optional-style failure via NaN.
cplx newton_polish(const LogEvaluator& f, const LogEvaluator& df, cplx seed,
                   cplx center, double radius, bool& ok) {
    ok = false;
    cplx z = seed;
    const double h = std::max(1e-7 * radius, 1e-12);
    for (int it = 0; it < 50; ++it) {
        const LogComplex fv = f(z);
        if (fv.is_zero()) { ok = true; return z; }
        const LogComplex dv = df ? df(z) : central_diff(f, z, h);
        if (dv.is_zero()) return z;
        const LogComplex q = transfer::lc_div(fv, dv);
        if (q.mag > std::log(radius) + 3.0) return z;  // diverging
        const cplx step = q.value();
        z -= step;
        if (std::abs(z - center) > 1.3 * radius) return z;  // escaped the disk
        if (std::abs(step) < 1e-13 * std::max(radius, std::abs(z - center)) + 1e-300) {
            ok = true;
            return z;
        }
    }
    return z;
}

void locate_rec(const LogEvaluator& f, const LogEvaluator& df, cplx center,
                double radius, int depth, std::vector<cplx>& out) {
    ZeroCountResult res = count_zeros(f, center, radius);
    if (res.count == 0) return;
    if (res.radius < 1e-11 || depth > 80) {
        out.insert(out.end(), static_cast<std::size_t>(res.count), center);
        return;
    }
    if (res.count == 1) {
        bool ok = false;
        const cplx z = newton_polish(f, df, center, center, res.radius, ok);
        // Newton may slide to a neighbouring zero just outside the contour;
        // accepting it would orphan the zero this disk actually counted, so
        // anything beyond the contour radius falls through to the split.
        if (ok && std::abs(z - center) <= res.radius * (1.0 + 1e-9)) {
            out.push_back(z);
            return;
        }
    }
    // Quadrant split: four disks of radius 0.75 r centered at the quadrant
    // midpoints cover the disk; overlap duplicates are merged by the caller.
    const double r = res.radius;
    const cplx offs[4] = {{r / 2, r / 2}, {-r / 2, r / 2}, {-r / 2, -r / 2}, {r / 2, -r / 2}};
    std::vector<cplx> raw;
    for (const cplx& o : offs) locate_rec(f, df, center + o, 0.75 * r, depth + 1, raw);
    // The sub-disks overhang the parent circle (they must, to cover it), so
    // they can pick up zeros belonging to a sibling of this disk; drop what is
    // clearly outside the parent contour.  Zeros inside a hair-thin shell
    // around the circle stay for now and are reconciled against the winding
    // count below, because the located position cannot resolve which side of
    // the contour such a zero is on.
    std::erase_if(raw,
                  [&](const cplx& z) { return std::abs(z - center) > res.radius * (1.0 + 1e-9); });
    // Merge duplicates found by more than one overlapping sub-disk, then
    // restore genuine multiplicity by recounting each cluster on a tiny disk.
    std::vector<char> used(raw.size(), 0);
    std::vector<cplx> merged;
    std::vector<int> mult;
    for (std::size_t i = 0; i < raw.size(); ++i) {
        if (used[i]) continue;
        cplx rep = raw[i];
        double spread = 0.0;
        for (std::size_t j = i + 1; j < raw.size(); ++j) {
            if (!used[j] && std::abs(raw[j] - rep) < 1e-10) {
                used[j] = 1;
                spread = std::max(spread, std::abs(raw[j] - rep));
            }
        }
        const double tiny = std::max(3.0 * spread, 3e-10);
        int m = 1;
        ZeroCountResult check = count_zeros(f, rep, tiny);
        m = std::max(check.count, 1);
        merged.push_back(rep);
        mult.push_back(m);
    }
    int total = 0;
    for (int m : mult) total += m;
    // Surplus can only come from shell zeros kept above; shed them from the
    // outside in until the refinement agrees with the winding count.
    while (total > res.count) {
        std::size_t worst = merged.size();
        double worst_d = res.radius * (1.0 - 1e-9);
        for (std::size_t i = 0; i < merged.size(); ++i) {
            const double d = std::abs(merged[i] - center);
            if (mult[i] > 0 && d > worst_d) {
                worst_d = d;
                worst = i;
            }
        }
        if (worst == merged.size()) break;  // nothing shell-borne left to shed
        --mult[worst];
        --total;
    }
    if (total != res.count)
        throw std::runtime_error("locate_zeros: refinement found " +
                                 std::to_string(total) + " zeros where the contour count is " +
                                 std::to_string(res.count));
    for (std::size_t i = 0; i < merged.size(); ++i)
        out.insert(out.end(), static_cast<std::size_t>(mult[i]), merged[i]);
}

// --- polar disk quadrature -------------------------------------------------

struct GaussRule {
    std::vector<double> nodes;    // on (0, 1)
    std::vector<double> weights;  // summing to 1
};

// Gauss-Legendre rule mapped to [0,1]; nodes found by Newton on P_n.
GaussRule gauss_unit(int n) {
    GaussRule g;
    g.nodes.resize(n);
    g.weights.resize(n);
    for (int i = 0; i < n; ++i) {
        double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            const double dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        double p0 = 1.0, p1 = x;
        for (int k = 2; k <= n; ++k) {
            const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
            p0 = p1;
            p1 = p2;
        }
        const double dp = n * (x * p1 - p0) / (x * x - 1.0);
        g.nodes[n - 1 - i] = 0.5 * (x + 1.0);
        g.weights[n - 1 - i] = 1.0 / ((1.0 - x * x) * dp * dp);
    }
    return g;
}

// Mean of log|f| over a disk: Gauss-Legendre in t = (r/R)^2, trapezoid in the
// angle (exact for trigonometric polynomials of degree < n_t).  Nodes with
// |f| < 1e-300 are skipped and logged.
double disk_mean_log(const LogEvaluator& f, cplx center, double R,
                     const GaussRule& rg, int n_t, long long& skipped) {
    double acc = 0.0;
    double wsum = 0.0;
    for (std::size_t i = 0; i < rg.nodes.size(); ++i) {
        const double r = R * std::sqrt(rg.nodes[i]);
        for (int j = 0; j < n_t; ++j) {
            const LogComplex v = f(circle_point(center, r, (j + 0.5) / n_t));
            if (v.is_zero() || v.mag < -690.0) {
                ++skipped;
                continue;
            }
            acc += rg.weights[i] * v.mag;
            wsum += rg.weights[i];
        }
    }
    return wsum > 0.0 ? acc / wsum : 0.0;
}

double jensen_level(const LogEvaluator& f, cplx z0, double r1, double r2,
                    int n_r, int n_t, long long& skipped) {
    const GaussRule rg = gauss_unit(n_r);
    double acc = 0.0;
    double wsum = 0.0;
    for (std::size_t i = 0; i < rg.nodes.size(); ++i) {
        const double r = r1 * std::sqrt(rg.nodes[i]);
        for (int j = 0; j < n_t; ++j) {
            const cplx w = circle_point(z0, r, (j + 0.5) / n_t);
            const LogComplex vw = f(w);
            if (vw.is_zero() || vw.mag < -690.0) {
                ++skipped;
                continue;
            }
            const double inner = disk_mean_log(f, w, r2, rg, n_t, skipped);
            acc += rg.weights[i] * (inner - vw.mag);
            wsum += rg.weights[i];
        }
    }
    return wsum > 0.0 ? acc / wsum : 0.0;
}

}  // namespace

ZeroCountResult count_zeros(const LogEvaluator& f, cplx center, double radius) {
    if (!(radius > 0.0)) throw std::invalid_argument("count_zeros: radius must be positive");
    double last_margin = 0.0;
    for (double factor : kRetryFactors) {
        const double r = radius * factor;
        const WindingAttempt a = try_winding(f, center, r);
        last_margin = std::max(last_margin, a.margin);
        if (a.ok) {
            ZeroCountResult res;
            res.count = a.winding;
            res.center = center;
            res.radius = r;
            res.contour_margin = a.margin;
            if (res.count < 0)
                throw std::runtime_error("count_zeros: negative winding (pole inside?)");
            return res;
        }
    }
    throw ContourTooClose("count_zeros: every contour near radius " +
                          std::to_string(radius) + " grazes a zero (best margin " +
                          std::to_string(last_margin) + ")");
}

std::vector<cplx> locate_zeros(const LogEvaluator& f, cplx center, double radius,
                               const LogEvaluator& df) {
    std::vector<cplx> out;
    locate_rec(f, df, center, radius, 0, out);
    return out;
}

JensenDetail jensen_average_detail(const LogEvaluator& f, cplx z0, double r1,
                                   double r2) {
    if (!(r2 > 0.0) || !(r2 < r1))
        throw std::invalid_argument("jensen_average: need 0 < r2 < r1");
    JensenDetail d;
    const int plan[][2] = {{8, 16}, {12, 24}, {16, 32}, {24, 48}};
    double prev = 0.0;
    bool have_prev = false;
    for (const auto& p : plan) {
        long long skipped = 0;
        const double v = jensen_level(f, z0, r1, r2, p[0], p[1], skipped);
        d.value = v;
        d.skipped_nodes = skipped;
        if (have_prev) {
            d.last_delta = std::abs(v - prev);
            if (d.last_delta < 1e-10 * std::max(1.0, std::abs(v))) return d;
        }
        prev = v;
        have_prev = true;
    }
    return d;
}

double jensen_average(const LogEvaluator& f, cplx z0, double r1, double r2) {
    return jensen_average_detail(f, z0, r1, r2).value;
}

AnnulusCount annulus_zeros(const LogEvaluator& f, double R1, double R2,
                           long long divisor) {
    if (!(0.0 < R1 && R1 < R2))
        throw std::invalid_argument("annulus_zeros: need 0 < R1 < R2");
    const double w = 0.5 * (R2 - R1);
    const double Rc = 0.5 * (R1 + R2);
    const double w_eff = std::max(w, kTwoPi * Rc / 1e5);
    const double rd = 1.5 * w_eff;
    const int n_disks = static_cast<int>(std::ceil(kTwoPi * Rc / w_eff));
    std::vector<std::vector<cplx>> found(static_cast<std::size_t>(n_disks));
    util::parallel_for(found.size(), [&](std::size_t lo, std::size_t hi) {
        for (std::size_t k = lo; k < hi; ++k) {
            const cplx c = circle_point(cplx(0.0, 0.0), Rc,
                                        static_cast<double>(k) / n_disks);
            found[k] = locate_zeros(f, c, rd);
        }
    });
    std::vector<cplx> all;
    for (const auto& v : found)
        for (const cplx& z : v) {
            const double az = std::abs(z);
            if (az > R1 && az < R2) all.push_back(z);
        }
    AnnulusCount out;
    out.disks = n_disks;
    std::vector<char> used(all.size(), 0);
    for (std::size_t i = 0; i < all.size(); ++i) {
        if (used[i]) continue;
        double spread = 0.0;
        int copies = 1;
        for (std::size_t j = i + 1; j < all.size(); ++j) {
            if (!used[j] && std::abs(all[j] - all[i]) < 1e-10) {
                used[j] = 1;
                ++copies;
                spread = std::max(spread, std::abs(all[j] - all[i]));
            }
        }
        int mult = 1;
        if (copies > 1) {
            // Same zero seen from overlapping disks, or a genuine cluster:
            // a tiny recount disk tells the two apart.
            mult = std::max(1, count_zeros(f, all[i], std::max(3.0 * spread, 3e-10)).count);
        }
        out.zeros.push_back(all[i]);
        out.multiplicities.push_back(mult);
        out.count += mult;
    }
    out.density = static_cast<double>(out.count) / static_cast<double>(divisor);
    return out;
}

double annulus_density(const Potential& pot, double omega, double E, long long N,
                       double R1, double R2) {
    const double lo = 1.0 - pot.rho0();
    const double hi = 1.0 + pot.rho0();
    if (!(lo < R1 && R1 < R2 && R2 < hi))
        throw std::invalid_argument("annulus_density: annulus outside the coefficient domain");
    const double w = 0.5 * (R2 - R1);
    const double w_eff = std::max(w, kTwoPi * 0.5 * (R1 + R2) / 1e5);
    // Covering disks (with retry slack) must stay inside the coefficient annulus.
    if (0.5 * (R1 + R2) + 1.6 * w_eff >= hi || 0.5 * (R1 + R2) - 1.6 * w_eff <= lo)
        throw std::invalid_argument("annulus_density: margins too tight for the disk cover");
    const LogEvaluator f = [&](cplx z) {
        return transfer::dirichlet_det(pot, 1, N, z, omega, cplx(E, 0.0));
    };
    return annulus_zeros(f, R1, R2, N).density;
}

ScaleStability scale_stability(const Potential& pot, double omega, double E,
                               long long n, long long N, double R1, double R2) {
    if (!(N >= n && n >= 32))
        throw std::invalid_argument("scale_stability: need N >= n >= 32");
    const double r2 = std::pow(static_cast<double>(n), -0.25) * (R2 - R1);
    const double m_N_shrunk = annulus_density(pot, omega, E, N, R1 + r2, R2 - r2);
    const double m_n_shrunk =
        (n == N) ? m_N_shrunk : annulus_density(pot, omega, E, n, R1 + r2, R2 - r2);
    const double m_N_grown = annulus_density(pot, omega, E, N, R1 - r2, R2 + r2);
    const double m_n_grown =
        (n == N) ? m_N_grown : annulus_density(pot, omega, E, n, R1 - r2, R2 + r2);
    ScaleStability s;
    s.m_n = m_n_shrunk;
    s.m_N = m_N_shrunk;
    s.defect = std::max(m_N_shrunk - m_n_grown, m_n_shrunk - m_N_grown);
    return s;
}

ZeroCountResult count_zeros_in_E(const Potential& pot, double x, double omega,
                                 spectral::Window window, cplx E0, double radius) {
    const cplx z = circle_point(cplx(0.0, 0.0), 1.0, model::frac(x));
    const LogEvaluator f = [&](cplx E) {
        return transfer::dirichlet_det(pot, window.a, window.b, z, omega, E);
    };
    ZeroCountResult res = count_zeros(f, E0, radius);
    res.zeros = locate_zeros(f, E0, res.radius);
    // Real phase: the zeros are the Dirichlet eigenvalues; the winding count
    // must agree with the eigensolver up to boundary-grazing tolerance.
    const auto eigs = spectral::dirichlet_eigs(pot, x, omega, window);
    int lo_ct = 0, hi_ct = 0;
    for (double ev : eigs) {
        const double dist = std::abs(cplx(ev, 0.0) - E0);
        if (dist < res.radius - 1e-9) ++lo_ct;
        if (dist < res.radius + 1e-9) ++hi_ct;
    }
    if (res.count < lo_ct || res.count > hi_ct)
        throw spectral::CrossCheckError(
            "count_zeros_in_E: winding " + std::to_string(res.count) +
            " vs eigensolver bracket [" + std::to_string(lo_ct) + ", " +
            std::to_string(hi_ct) + "]");
    return res;
}

}  // namespace qplab::zerocount
