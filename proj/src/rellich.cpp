#include "qplab/rellich.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "qplab/util.hpp"

namespace qplab::rellich {

namespace {

using spectral::Window;

struct Node {
    double x = 0.0;
    std::vector<double> eigs;
};

struct Cell {
    std::size_t lo = 0, hi = 0;  // indices into the node pool
    int depth = 0;
    char flag = 0;  // 1 once the cell was produced by a bisection
};

// A cell needs splitting when some band moves across it by more than half its
// local gap -- sort-order labelling is only trustworthy below that threshold.
bool needs_split(const std::vector<double>& lo, const std::vector<double>& hi) {
    const std::size_t m = lo.size();
    for (std::size_t j = 0; j < m; ++j) {
        double gap = std::numeric_limits<double>::infinity();
        if (j + 1 < m) gap = std::min(gap, std::min(lo[j + 1] - lo[j], hi[j + 1] - hi[j]));
        if (j > 0) gap = std::min(gap, std::min(lo[j] - lo[j - 1], hi[j] - hi[j - 1]));
        if (std::isinf(gap)) continue;
        if (std::abs(hi[j] - lo[j]) > 0.5 * gap) return true;
    }
    return false;
}

double max_motion(const std::vector<double>& lo, const std::vector<double>& hi) {
    double m = 0.0;
    for (std::size_t j = 0; j < lo.size(); ++j) m = std::max(m, std::abs(hi[j] - lo[j]));
    return m;
}

double feynman_sum(const Potential& pot, double x, double omega, Window w,
                   const std::vector<double>& psi) {
    double s = 0.0;
    for (long long n = w.a; n <= w.b; ++n) {
        const double p = psi[static_cast<std::size_t>(n - w.a)];
        s += pot.deriv_phase(x + static_cast<double>(n) * omega) * p * p;
    }
    return s;
}

}  // namespace

RellichGraph trace_graph(const Potential& pot, double omega, long long N, int grid_size,
                         int max_depth) {
    if (grid_size < 64) throw std::invalid_argument("trace_graph: grid_size must be >= 64");
    if (N < 0) throw std::invalid_argument("trace_graph: N must be >= 0");
    if (max_depth < 0 || max_depth > 10)
        throw std::invalid_argument("trace_graph: max_depth must be in [0, 10]");
    RellichGraph g;
    g.omega = omega;
    g.N = N;
    const Window w = g.window();

    std::vector<Node> pool(static_cast<std::size_t>(grid_size) + 1);
    util::parallel_for_each(pool.size(), [&](std::size_t i) {
        pool[i].x = static_cast<double>(i) / grid_size;
        pool[i].eigs = spectral::dirichlet_eigs(pot, pool[i].x, omega, w);
    });

    std::vector<Cell> cells(static_cast<std::size_t>(grid_size));
    for (std::size_t i = 0; i < cells.size(); ++i) cells[i] = {i, i + 1, 0, 0};

    for (;;) {
        std::vector<std::size_t> pending;
        for (std::size_t idx = 0; idx < cells.size(); ++idx) {
            const Cell& c = cells[idx];
            if (c.depth < max_depth && needs_split(pool[c.lo].eigs, pool[c.hi].eigs))
                pending.push_back(idx);
        }
        if (pending.empty()) break;
        const std::size_t base = pool.size();
        pool.resize(base + pending.size());
        util::parallel_for_each(pending.size(), [&](std::size_t t) {
            const Cell& c = cells[pending[t]];
            const double xm = 0.5 * (pool[c.lo].x + pool[c.hi].x);
            const double slack = max_motion(pool[c.lo].eigs, pool[c.hi].eigs) + 1e-9;
            pool[base + t].x = xm;
            pool[base + t].eigs = spectral::dirichlet_eigs_diag_warm(
                spectral::window_diag(pot, xm, omega, w), 1e-11, pool[c.lo].eigs, slack);
        });
        std::vector<Cell> next;
        next.reserve(cells.size() + pending.size());
        std::size_t pi = 0;
        for (std::size_t idx = 0; idx < cells.size(); ++idx) {
            if (pi < pending.size() && pending[pi] == idx) {
                const Cell c = cells[idx];
                const std::size_t mid = base + pi;
                next.push_back({c.lo, mid, c.depth + 1, 1});
                next.push_back({mid, c.hi, c.depth + 1, 1});
                ++pi;
            } else {
                next.push_back(cells[idx]);
            }
        }
        cells.swap(next);
    }

    // Cells were kept in left-to-right order throughout, so assembly is a walk.
    g.xs.reserve(cells.size() + 1);
    g.E.reserve(cells.size() + 1);
    g.refined.reserve(cells.size());
    g.xs.push_back(pool[cells.front().lo].x);
    g.E.push_back(std::move(pool[cells.front().lo].eigs));
    for (const Cell& c : cells) {
        g.xs.push_back(pool[c.hi].x);
        g.E.push_back(std::move(pool[c.hi].eigs));
        g.refined.push_back(c.flag);
    }
    const double nan = std::numeric_limits<double>::quiet_NaN();
    g.slopes.assign(g.xs.size(), std::vector<double>(static_cast<std::size_t>(g.bands()), nan));
    g.centers = g.slopes;
    return g;
}

const std::vector<std::vector<double>>& feynman_slopes(RellichGraph& g, const Potential& pot,
                                                       bool skip_degenerate) {
    const Window w = g.window();
    const std::size_t m = static_cast<std::size_t>(g.bands());
    util::parallel_for_each(g.xs.size(), [&](std::size_t i) {
        for (std::size_t j = 0; j < m; ++j) {
            try {
                const auto psi = spectral::eigenvector(pot, g.xs[i], g.omega, w, g.E[i][j]);
                g.slopes[i][j] = feynman_sum(pot, g.xs[i], g.omega, w, psi);
                g.centers[i][j] =
                    static_cast<double>(spectral::localization_center(psi, w));
            } catch (const spectral::DegenerateError&) {
                if (!skip_degenerate) throw;
                g.slopes[i][j] = std::numeric_limits<double>::quiet_NaN();
                g.centers[i][j] = std::numeric_limits<double>::quiet_NaN();
            }
        }
    });
    g.slopes_ready = true;
    return g.slopes;
}

namespace {

// Predicate behind segment membership, evaluated off-grid during endpoint
// sharpening.  A failed eigenvector solve (band collision) counts as "out".
bool subgrid_pass(const RellichGraph& g, const Potential& pot, std::size_t node,
                  long long j, double x, double tau, double E_lo, double E_hi,
                  int sign) {
    const Window w = g.window();
    // A generous phase-Lipschitz bound keeps the single-band bracket honest.
    const double slack =
        (pot.deriv_abs_sum() + 1.0) * std::abs(g.xs[node] - x) + 1e-8;
    try {
        const auto diag = spectral::window_diag(pot, x, g.omega, w);
        const double Ej = spectral::dirichlet_eig_band(
            diag, static_cast<std::size_t>(j), 1e-11, g.E[node][static_cast<std::size_t>(j)],
            slack);
        if (!(Ej > E_lo && Ej < E_hi)) return false;
        const auto psi = spectral::eigenvector(pot, x, g.omega, w, Ej);
        const double s = feynman_sum(pot, x, g.omega, w, psi);
        if (std::abs(s) < tau) return false;
        return (s > 0.0 ? 1 : -1) == sign;
    } catch (const spectral::DegenerateError&) {
        return false;
    }
}

}  // namespace

std::vector<Segment> extract_segments(const RellichGraph& g, const Potential& pot,
                                      double tau, double E_lo, double E_hi) {
    if (!(tau > 0.0)) throw std::invalid_argument("extract_segments: tau must be > 0");
    if (!g.slopes_ready)
        throw std::logic_error("extract_segments: run feynman_slopes first");
    const std::size_t m = static_cast<std::size_t>(g.bands());
    const std::size_t nn = g.xs.size();
    std::vector<Segment> out;
    for (std::size_t j = 0; j < m; ++j) {
        std::size_t i = 0;
        while (i < nn) {
            const double sl = g.slopes[i][j];
            const double Ej = g.E[i][j];
            const bool pass = std::abs(sl) >= tau && Ej > E_lo && Ej < E_hi;
            if (!pass) {
                ++i;
                continue;
            }
            const int sign = sl > 0.0 ? 1 : -1;
            std::size_t i1 = i;
            while (i1 + 1 < nn) {
                const double s2 = g.slopes[i1 + 1][j];
                const double E2 = g.E[i1 + 1][j];
                if (!(std::abs(s2) >= tau) || !(E2 > E_lo && E2 < E_hi)) break;
                if ((s2 > 0.0 ? 1 : -1) != sign) break;
                ++i1;
            }
            Segment seg;
            seg.j = static_cast<long long>(j);
            seg.slope_sign = sign;
            seg.min_abs_slope = std::numeric_limits<double>::infinity();
            bool reg = true;
            const double lim = static_cast<double>(g.N) - std::sqrt(static_cast<double>(g.N));
            for (std::size_t t = i; t <= i1; ++t) {
                seg.min_abs_slope = std::min(seg.min_abs_slope, std::abs(g.slopes[t][j]));
                if (std::abs(g.centers[t][j]) > lim) reg = false;
            }
            seg.regular = reg;
            // Sharpen endpoints into the neighbouring cells where the
            // predicate flipped, to 1e-6 in x.
            seg.x_lo = g.xs[i];
            if (i > 0) {
                double lo = g.xs[i - 1], hi = g.xs[i];
                while (hi - lo > 1e-6) {
                    const double mid = 0.5 * (lo + hi);
                    if (subgrid_pass(g, pot, i, static_cast<long long>(j), mid, tau,
                                      E_lo, E_hi, sign))
                        hi = mid;
                    else
                        lo = mid;
                }
                seg.x_lo = hi;
            }
            seg.x_hi = g.xs[i1];
            if (i1 + 1 < nn) {
                double lo = g.xs[i1], hi = g.xs[i1 + 1];
                while (hi - lo > 1e-6) {
                    const double mid = 0.5 * (lo + hi);
                    if (subgrid_pass(g, pot, i1, static_cast<long long>(j), mid, tau,
                                      E_lo, E_hi, sign))
                        lo = mid;
                    else
                        hi = mid;
                }
                seg.x_hi = lo;
            }
            // Constant-sign slope >= tau makes E_j monotone on the segment, so
            // the attained range is spanned by the endpoint values.
            const Window w = g.window();
            const double lip = pot.deriv_abs_sum() + 1.0;
            const double Ea = spectral::dirichlet_eig_band(
                spectral::window_diag(pot, seg.x_lo, g.omega, w), j, 1e-11, g.E[i][j],
                lip * std::abs(g.xs[i] - seg.x_lo) + 1e-8);
            const double Eb = spectral::dirichlet_eig_band(
                spectral::window_diag(pot, seg.x_hi, g.omega, w), j, 1e-11, g.E[i1][j],
                lip * std::abs(g.xs[i1] - seg.x_hi) + 1e-8);
            seg.E_lo = std::min(Ea, Eb);
            seg.E_hi = std::max(Ea, Eb);
            out.push_back(seg);
            i = i1 + 1;
        }
    }
    return out;
}

bool regularity_check(const Segment& seg, const RellichGraph& g) {
    if (!g.slopes_ready)
        throw std::logic_error("regularity_check: run feynman_slopes first");
    const double lim = static_cast<double>(g.N) - std::sqrt(static_cast<double>(g.N));
    const std::size_t j = static_cast<std::size_t>(seg.j);
    bool any = false;
    for (std::size_t i = 0; i < g.xs.size(); ++i) {
        if (g.xs[i] < seg.x_lo - 1e-12 || g.xs[i] > seg.x_hi + 1e-12) continue;
        any = true;
        if (std::abs(g.centers[i][j]) > lim) return false;
    }
    if (!any) {
        // Fully sub-grid segment: fall back to the node nearest its midpoint.
        const double xm = 0.5 * (seg.x_lo + seg.x_hi);
        std::size_t best = 0;
        for (std::size_t i = 1; i < g.xs.size(); ++i)
            if (std::abs(g.xs[i] - xm) < std::abs(g.xs[best] - xm)) best = i;
        return std::abs(g.centers[best][j]) <= lim;
    }
    return true;
}

TranslateErrors translate_check(const Segment& seg, const RellichGraph& g,
                                const Potential& pot, long long k) {
    if (!seg.regular) throw PreconditionError("translate_check: segment is not regular");
    const Window w = g.window();
    const long long N = g.N;
    const double rtN = std::sqrt(static_cast<double>(N));
    const double x = 0.5 * (seg.x_lo + seg.x_hi);

    const auto eig_x = spectral::dirichlet_eigs(pot, x, g.omega, w);
    const double Ej = eig_x[static_cast<std::size_t>(seg.j)];
    const auto psi = spectral::eigenvector(pot, x, g.omega, w, Ej);
    const long long nu = spectral::localization_center(psi, w);

    const double shifted = static_cast<double>(nu + k);
    if (!(shifted > -static_cast<double>(N) + rtN / 2.0 &&
          shifted < static_cast<double>(N) - rtN / 2.0))
        throw PreconditionError("translate_check: shifted center outside the admissible band");
    // Comparison window |m + k - nu| <= sqrt(N)/4 in the coordinates of the
    // shifted operator.
    const long long mlo = static_cast<long long>(std::ceil(static_cast<double>(nu - k) - rtN / 4.0));
    const long long mhi = static_cast<long long>(std::floor(static_cast<double>(nu - k) + rtN / 4.0));
    if (mlo < -N || mhi > N || mlo + k < -N || mhi + k > N)
        throw PreconditionError("translate_check: comparison window leaves the box");

    const double xk = x + static_cast<double>(k) * g.omega;
    const auto eig_k = spectral::dirichlet_eigs(pot, xk, g.omega, w);
    std::size_t jk = 0;
    for (std::size_t t = 1; t < eig_k.size(); ++t)
        if (std::abs(eig_k[t] - Ej) < std::abs(eig_k[jk] - Ej)) jk = t;
    const auto psi_k = spectral::eigenvector(pot, xk, g.omega, w, eig_k[jk]);

    TranslateErrors err;
    err.err_E = std::abs(Ej - eig_k[jk]);
    err.err_slope = std::abs(feynman_sum(pot, x, g.omega, w, psi) -
                             feynman_sum(pot, xk, g.omega, w, psi_k));
    double ip = 0.0;
    for (long long mm = mlo; mm <= mhi; ++mm)
        ip += psi_k[static_cast<std::size_t>(mm + N)] *
              psi[static_cast<std::size_t>(mm + k + N)];
    const double s = ip >= 0.0 ? 1.0 : -1.0;
    double acc = 0.0;
    for (long long mm = mlo; mm <= mhi; ++mm) {
        const double d = s * psi_k[static_cast<std::size_t>(mm + N)] -
                         psi[static_cast<std::size_t>(mm + k + N)];
        acc += d * d;
    }
    err.err_vec = acc;
    return err;
}

std::vector<double> separation_profile(const Potential& pot, double omega,
                                       long long N, int grid_size) {
    if (grid_size < 1) throw std::invalid_argument("separation_profile: grid_size must be >= 1");
    const Window w{-N, N};
    std::vector<double> gaps(static_cast<std::size_t>(grid_size));
    util::parallel_for_each(gaps.size(), [&](std::size_t i) {
        const double x = static_cast<double>(i) / grid_size;
        const auto eigs = spectral::dirichlet_eigs(pot, x, omega, w);
        double gmin = std::numeric_limits<double>::infinity();
        for (std::size_t t = 1; t < eigs.size(); ++t)
            gmin = std::min(gmin, eigs[t] - eigs[t - 1]);
        gaps[i] = gmin;
    });
    return gaps;
}

}  // namespace qplab::rellich
