#include "qplab/gaps.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <sstream>

#include "qplab/lyapunov.hpp"
#include "qplab/transfer.hpp"
#include "qplab/util.hpp"
#include "qplab/zerocount.hpp"

namespace qplab::gaps {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

cplx circle_point(double x) { return std::polar(1.0, kTwoPi * x); }

// Lipschitz bound on eigenvalue motion per unit phase (every window, every bc).
double phase_lipschitz(const Potential& pot) { return pot.deriv_abs_sum(); }

// Ternary refinement of a local extremum inside [lo, hi] (maximum when
// maximize is set).  The bracket comes from a grid scan, so the function is
// unimodal on it in every case we feed in.
std::pair<double, double> ternary_extremum(const std::function<double(double)>& f,
                                           double lo, double hi, bool maximize) {
    for (int it = 0; it < 200 && hi - lo > 1e-13 * (1.0 + std::abs(lo) + std::abs(hi)); ++it) {
        double m1 = lo + (hi - lo) / 3.0, m2 = hi - (hi - lo) / 3.0;
        double f1 = f(m1), f2 = f(m2);
        bool keep_left = maximize ? (f1 > f2) : (f1 < f2);
        if (keep_left) hi = m2;
        else lo = m1;
    }
    double xm = 0.5 * (lo + hi);
    return {xm, f(xm)};
}

std::vector<Interval> merge_intervals(std::vector<Interval> v) {
    std::sort(v.begin(), v.end(), [](const Interval& a, const Interval& b) {
        return a.lo < b.lo || (a.lo == b.lo && a.hi < b.hi);
    });
    std::vector<Interval> out;
    for (const auto& iv : v) {
        if (!out.empty() && iv.lo <= out.back().hi)
            out.back().hi = std::max(out.back().hi, iv.hi);
        else
            out.push_back(iv);
    }
    return out;
}

// Monotone-branch inverse by bisection on the phase interval.
double branch_inverse(const Branch& b, double E, bool increasing) {
    double lo = b.x_lo, hi = b.x_hi;
    for (int it = 0; it < 200 && hi - lo > 1e-14; ++it) {
        double mid = 0.5 * (lo + hi);
        double v = b.eval(mid);
        if ((v < E) == increasing) lo = mid;
        else hi = mid;
    }
    return 0.5 * (lo + hi);
}

// Band-j eigenvalue of the [-N, N] block at an off-grid phase, warm-started
// from a reference energy valid at distance dist away.
double band_eig_at(const Potential& pot, double omega, long long N, long long j,
                   double x, double warm, double dist) {
    std::vector<double> diag = spectral::window_diag(pot, x, omega, {-N, N});
    double slack = phase_lipschitz(pot) * std::abs(dist) + 1e-8;
    return spectral::dirichlet_eig_band(diag, static_cast<std::size_t>(j), 1e-12, warm, slack);
}

// Branch wrapper for an extracted segment: evaluate by single-band bisection
// warm-started from the nearest graph node.
Branch segment_branch(const Potential& pot, const rellich::RellichGraph& graph,
                      const rellich::Segment& seg) {
    Branch b;
    b.x_lo = seg.x_lo;
    b.x_hi = seg.x_hi;
    b.E_lo = seg.E_lo;
    b.E_hi = seg.E_hi;
    const auto* g = &graph;
    const Potential* p = &pot;
    long long j = seg.j;
    b.eval = [g, p, j](double x) {
        auto it = std::lower_bound(g->xs.begin(), g->xs.end(), x);
        std::size_t i = static_cast<std::size_t>(it - g->xs.begin());
        if (i == g->xs.size() || (i > 0 && x - g->xs[i - 1] < g->xs[i] - x)) --i;
        return band_eig_at(*p, g->omega, g->N, j, x, g->E[i][static_cast<std::size_t>(j)],
                           x - g->xs[i]);
    };
    return b;
}

}  // namespace

GapReport spectrum_union(const Potential& pot, double omega, long long N,
                         Boundary bc, long long grid_size) {
    if (grid_size < 128) throw std::invalid_argument("spectrum_union: grid_size >= 128");
    if (N < 1) throw std::invalid_argument("spectrum_union: N >= 1");
    const double delta = (phase_lipschitz(pot) + 1.0) / static_cast<double>(grid_size);
    // Periodic windows close the ring with the best denominator-N rational
    // frequency.  With the raw irrational frequency the wrap-around bond sees a
    // phase slip of ||N omega||; away from continued-fraction denominators that
    // seam acts as an impurity whose eigenvalue branches sweep straight through
    // every gap as x varies, and the union degenerates to the full hull.  The
    // ring approximant is seam-free at every N and coincides with the true
    // window up to ||N omega|| at denominators of convergents.
    const double om_ring = std::round(static_cast<double>(N) * omega) / static_cast<double>(N);
    std::vector<std::vector<double>> per_phase(static_cast<std::size_t>(grid_size));
    util::parallel_for(per_phase.size(), [&](std::size_t lo, std::size_t hi) {
        for (std::size_t i = lo; i < hi; ++i) {
            double x = static_cast<double>(i) / static_cast<double>(grid_size);
            per_phase[i] = (bc == Boundary::dirichlet)
                               ? spectral::dirichlet_eigs(pot, x, omega, {1, N}, 1e-9)
                               : spectral::bc_eigs_bisect(pot, x, om_ring, N,
                                                          spectral::Bc::Periodic);
        }
    });
    std::vector<Interval> fat;
    for (const auto& eigs : per_phase)
        for (double e : eigs) fat.push_back({e - delta, e + delta});
    GapReport rep;
    rep.N = N;
    rep.bc = bc;
    rep.bands = merge_intervals(std::move(fat));
    rep.hull = {rep.bands.front().lo, rep.bands.back().hi};
    for (std::size_t i = 0; i + 1 < rep.bands.size(); ++i)
        rep.gaps.push_back({rep.bands[i].hi, rep.bands[i + 1].lo});
    return rep;
}

std::optional<Resonance> resonance_search(const Branch& rising, const Branch& falling,
                                          double omega, long long m_lo, long long m_hi,
                                          double big_c, double recheck_tol) {
    double E_lo = std::max(rising.E_lo, falling.E_lo);
    double E_hi = std::min(rising.E_hi, falling.E_hi);
    if (!(E_hi > E_lo)) return std::nullopt;
    const double dE = E_hi - E_lo;
    auto inv_rise = [&](double E) { return branch_inverse(rising, E, true); };
    auto inv_fall = [&](double E) { return branch_inverse(falling, E, false); };
    auto h = [&](double E) { return inv_fall(E) - inv_rise(E); };  // strictly decreasing
    const double Ep_lo = E_lo + dE / 4.0, Ep_hi = E_hi - dE / 4.0;
    const double y_hi = h(Ep_lo), y_lo = h(Ep_hi);
    if (!(y_hi > y_lo)) return std::nullopt;

    for (long long m = m_lo; m <= m_hi; ++m) {
        // the window is a difference of phases, so test the shift on the circle
        double f = model::frac(static_cast<double>(m) * omega);
        double y = std::numeric_limits<double>::quiet_NaN();
        for (double shift : {-1.0, 0.0, 1.0})
            if (y_lo < f + shift && f + shift < y_hi) { y = f + shift; break; }
        if (std::isnan(y)) continue;

        double lo = Ep_lo, hi = Ep_hi;  // h decreasing: h(lo) = y_hi > y > y_lo = h(hi)
        for (int it = 0; it < 200 && hi - lo > 1e-14; ++it) {
            double mid = 0.5 * (lo + hi);
            if (h(mid) > y) lo = mid;
            else hi = mid;
        }
        double E0 = 0.5 * (lo + hi);
        double x0 = inv_rise(E0), x2 = inv_fall(E0);
        double r1 = rising.eval(x0), r2 = falling.eval(x2);
        if (std::abs(r1 - r2) > recheck_tol) continue;
        double sep = dE / big_c;
        if (std::min(x0 - rising.x_lo, rising.x_hi - x0) <= sep) continue;
        if (std::min(x2 - falling.x_lo, falling.x_hi - x2) <= sep) continue;
        Resonance res;
        res.x0 = x0;
        res.m = m;
        res.E0 = 0.5 * (r1 + r2);
        return res;
    }
    return std::nullopt;
}

std::optional<Resonance> find_resonance(const Potential& pot, const rellich::Segment& seg_pos,
                                        const rellich::Segment& seg_neg,
                                        const rellich::RellichGraph& graph,
                                        long long m_lo, long long m_hi) {
    if (seg_pos.slope_sign <= 0 || seg_neg.slope_sign >= 0)
        throw std::invalid_argument("find_resonance: need a rising and a falling segment");
    Branch rising = segment_branch(pot, graph, seg_pos);
    Branch falling = segment_branch(pot, graph, seg_neg);
    auto res = resonance_search(rising, falling, graph.omega, m_lo, m_hi,
                                phase_lipschitz(pot) + 2.0);
    if (res) {
        res->j1 = seg_pos.j;
        res->j2 = seg_neg.j;
        res->scale = graph.N;
    }
    return res;
}

TwoLevel two_level_split(std::function<double(double)> E1,
                         std::function<double(double)> E2,
                         std::function<double(double)> eps,
                         double x_lo, double x_hi, long long grid) {
    if (!(x_hi > x_lo) || grid < 8)
        throw std::invalid_argument("two_level_split: empty range or tiny grid");
    TwoLevel out;
    out.upper = [E1, E2, eps](double x) {
        double m = 0.5 * (E1(x) + E2(x)), d = 0.5 * (E1(x) - E2(x)), e = eps(x);
        return m + std::sqrt(d * d + e * e);
    };
    out.lower = [E1, E2, eps](double x) {
        double m = 0.5 * (E1(x) + E2(x)), d = 0.5 * (E1(x) - E2(x)), e = eps(x);
        return m - std::sqrt(d * d + e * e);
    };
    auto scan = [&](const std::function<double(double)>& f, bool maximize) {
        std::size_t best = 0;
        double fb = f(x_lo);
        for (long long i = 1; i <= grid; ++i) {
            double x = x_lo + (x_hi - x_lo) * static_cast<double>(i) / static_cast<double>(grid);
            double v = f(x);
            if (maximize ? (v > fb) : (v < fb)) { fb = v; best = static_cast<std::size_t>(i); }
        }
        double cell = (x_hi - x_lo) / static_cast<double>(grid);
        double lo = x_lo + cell * (best == 0 ? 0 : static_cast<double>(best - 1));
        double hi = std::min(x_hi, x_lo + cell * static_cast<double>(best + 1));
        return ternary_extremum(f, lo, hi, maximize).second;
    };
    out.gap = scan(out.upper, false) - scan(out.lower, true);
    return out;
}

PreGap pregap_core(const std::function<double(double)>& lower,
                   const std::function<double(double)>& upper,
                   double x_lo, double x_hi, long long grid, double min_gap) {
    if (!(x_hi > x_lo) || grid < 16)
        throw std::invalid_argument("pregap_core: empty window or tiny grid");
    const double cell = (x_hi - x_lo) / static_cast<double>(grid);
    std::vector<double> lo_v(static_cast<std::size_t>(grid) + 1),
        up_v(static_cast<std::size_t>(grid) + 1);
    util::parallel_for(lo_v.size(), [&](std::size_t a, std::size_t b) {
        for (std::size_t i = a; i < b; ++i) {
            double x = x_lo + cell * static_cast<double>(i);
            lo_v[i] = lower(x);
            up_v[i] = upper(x);
        }
    });
    std::size_t i_max = 0, i_min = 0;
    for (std::size_t i = 1; i < lo_v.size(); ++i) {
        if (lo_v[i] > lo_v[i_max]) i_max = i;
        if (up_v[i] < up_v[i_min]) i_min = i;
    }
    // the bottom-branch maximum must be certified interior: a maximizer inside
    // either edge cell could be the branch still climbing out of the window
    if (i_max <= 1 || i_max + 1 >= lo_v.size())
        throw NoSplitError("bottom-branch maximum sits in a window edge cell");
    auto [x_star, e_max] = ternary_extremum(
        lower, x_lo + cell * static_cast<double>(i_max - 1),
        x_lo + cell * static_cast<double>(i_max + 1), true);
    double up_lo = x_lo + cell * static_cast<double>(i_min == 0 ? 0 : i_min - 1);
    double up_hi = std::min(x_hi, x_lo + cell * static_cast<double>(i_min + 1));
    double e_up = ternary_extremum(upper, up_lo, up_hi, false).second;
    double tau = e_up - e_max;
    if (!(tau > min_gap)) throw NoSplitError("no separation to the next band over the window");
    PreGap pg;
    pg.interval = {e_max, e_max + tau};
    pg.x_star = x_star;
    pg.tau_hat = tau;
    return pg;
}

PreGap build_pregap(const Potential& pot, double omega, const Resonance& res,
                    long long N_bar, const PregapParams& par) {
    if (N_bar < 4 * res.scale)
        throw std::invalid_argument("build_pregap: N_bar >= 4x the resonance scale");
    auto eigs0 = spectral::dirichlet_eigs(pot, res.x0, omega, {-N_bar, N_bar});
    std::size_t j0 = 0;
    for (std::size_t j = 1; j < eigs0.size(); ++j)
        if (std::abs(eigs0[j] - res.E0) < std::abs(eigs0[j0] - res.E0)) j0 = j;
    // The resonant partner is whichever adjacent band pinches against j0 at
    // the crossing phase; the pre-gap lives inside that bubble, so certify the
    // pair (bottom, bottom + 1) with the bottom chosen by the tighter side.
    std::size_t j_low;
    if (j0 == 0) j_low = 0;
    else if (j0 + 1 == eigs0.size()) j_low = j0 - 1;
    else j_low = (eigs0[j0] - eigs0[j0 - 1] < eigs0[j0 + 1] - eigs0[j0]) ? j0 - 1 : j0;
    if (j_low + 1 >= eigs0.size())
        throw NoSplitError("resonance energy at the top of the spectrum");
    auto band = [&pot, omega, N_bar, &res, &eigs0](std::size_t j) {
        double warm = eigs0[j];
        double x0 = res.x0;
        return std::function<double(double)>([&pot, omega, N_bar, j, warm, x0](double x) {
            return band_eig_at(pot, omega, N_bar, static_cast<long long>(j), x, warm, x - x0);
        });
    };
    PreGap pg = pregap_core(band(j_low), band(j_low + 1), res.x0 - par.half_width,
                            res.x0 + par.half_width, par.grid, par.min_gap);
    pg.scale = N_bar;
    pg.j0 = static_cast<long long>(j_low);
    return pg;
}

std::vector<DiskZeros> complex_zero_sequence(const Potential& pot, double omega,
                                             double E, long long N, double x0,
                                             long long k_lo, long long k_hi,
                                             double r) {
    if (r > 1e-2 || r <= 0.0)
        throw std::invalid_argument("complex_zero_sequence: 0 < r <= 1e-2");
    if (k_hi < k_lo) throw std::invalid_argument("complex_zero_sequence: empty k range");
    zerocount::LogEvaluator f = [&pot, omega, E, N](cplx z) {
        return transfer::dirichlet_det(pot, -N, N, z, omega, cplx(E, 0.0));
    };
    std::vector<DiskZeros> out(static_cast<std::size_t>(k_hi - k_lo + 1));
    util::parallel_for(out.size(), [&](std::size_t a, std::size_t b) {
        for (std::size_t i = a; i < b; ++i) {
            long long k = k_lo + static_cast<long long>(i);
            cplx center = circle_point(model::frac(x0 + static_cast<double>(k) * omega));
            auto cnt = zerocount::count_zeros(f, center, r);
            out[i].k = k;
            out[i].count = cnt.count;
            if (cnt.count > 0) out[i].zeros = zerocount::locate_zeros(f, center, r);
        }
    });
    return out;
}

DensityDrop density_drop(const Potential& pot, double omega, double E,
                         long long N, long long N1,
                         double wide_half, double narrow_half) {
    if (N1 <= N) throw std::invalid_argument("density_drop: N1 > N");
    auto annulus_count = [&](long long scale, double half) {
        // the determinant is Laurent in z with a pole of order (2N+1)*deg at
        // z = 0; multiplying by that power of z clears it without moving any
        // zero off the annulus, so both circle windings stay nonnegative
        const double pole_order =
            static_cast<double>((2 * scale + 1) * std::max(1, pot.degree()));
        zerocount::LogEvaluator f = [&pot, omega, E, scale, pole_order](cplx z) {
            transfer::LogComplex zp;
            zp.mag = pole_order * std::log(std::abs(z));
            zp.phase = std::polar(1.0, pole_order * std::arg(z));
            return transfer::lc_mul(
                transfer::dirichlet_det(pot, -scale, scale, z, omega, cplx(E, 0.0)), zp);
        };
        auto outer = zerocount::count_zeros(f, cplx(0.0, 0.0), 1.0 + half);
        auto inner = zerocount::count_zeros(f, cplx(0.0, 0.0), 1.0 - half);
        return static_cast<long long>(outer.count) - static_cast<long long>(inner.count);
    };
    DensityDrop d;
    d.raw_wide = annulus_count(N, wide_half);
    d.raw_narrow = annulus_count(N1, narrow_half);
    d.m_wide = static_cast<double>(d.raw_wide) / static_cast<double>(N);
    d.m_narrow = static_cast<double>(d.raw_narrow) / static_cast<double>(N1);
    d.drop = d.m_wide - d.m_narrow;
    return d;
}

bool ns_condition(const Potential& pot, double x0, double omega, double E0,
                  long long ell, double r0) {
    if (ell < 4) throw std::invalid_argument("ns_condition: ell >= 4");
    const spectral::Window wins[4] = {{1, ell}, {1, ell - 1}, {2, ell}, {2, ell - 1}};
    for (const auto& w : wins) {
        auto res = zerocount::count_zeros_in_E(pot, x0, omega, w, cplx(E0, 0.0), r0);
        if (res.count == 0) return true;
    }
    return false;
}

UncondReport unconditional_check(const Potential& pot, double x0, double omega,
                                 long long N, long long j0, double r0) {
    if (N < 3) throw std::invalid_argument("unconditional_check: N >= 3");
    auto eigs = spectral::dirichlet_eigs(pot, x0, omega, {1, N});
    if (j0 < 0 || j0 >= static_cast<long long>(eigs.size()))
        throw std::invalid_argument("unconditional_check: band index out of range");
    UncondReport rep;
    rep.E0 = eigs[static_cast<std::size_t>(j0)];
    auto dist_to = [&](spectral::Window w) {
        double best = std::numeric_limits<double>::infinity();
        for (double e : spectral::dirichlet_eigs(pot, x0, omega, w))
            best = std::min(best, std::abs(e - rep.E0));
        return best;
    };
    rep.dist_1Nm1 = dist_to({1, N - 1});
    rep.dist_2N = dist_to({2, N});
    rep.dist_2Nm1 = dist_to({2, N - 1});
    rep.flag = rep.dist_1Nm1 <= r0 && rep.dist_2N <= r0;
    double L = lyapunov::finite_lyapunov(pot, omega, rep.E0, N, 0.0, 256).value;
    rep.norm_dip = transfer::monodromy(pot, 1, N, circle_point(x0), omega, cplx(rep.E0, 0.0))
                       .log_norm() -
                   static_cast<double>(N) * L;
    return rep;
}

bool spectrum_free_check(const Potential& pot, double omega, Interval I,
                        const std::vector<long long>& N_list) {
    if (!(I.width() > 0.0)) throw std::invalid_argument("spectrum_free_check: empty interval");
    std::vector<long long> ok;
    for (long long N : N_list)
        if (N >= 2 && model::torus_dist(static_cast<double>(N) * omega) <= 0.25) ok.push_back(N);
    if (ok.empty())
        throw FrequencyError("spectrum_free_check: no scale passes ||N*omega|| <= 0.25");
    const double cv = phase_lipschitz(pot) + 1.0;
    for (long long N : ok) {
        long long grid = std::max<long long>(
            128, static_cast<long long>(std::ceil(4.0 * cv / I.width())));
        grid = std::min<long long>(grid, 1LL << 20);
        const double delta = cv / static_cast<double>(grid);
        // same seam-free ring frequency as the periodic branch of spectrum_union
        const double om_ring =
            std::round(static_cast<double>(N) * omega) / static_cast<double>(N);
        std::atomic<bool> hit{false};
        util::parallel_for(static_cast<std::size_t>(grid), [&](std::size_t a, std::size_t b) {
            for (std::size_t i = a; i < b && !hit.load(std::memory_order_relaxed); ++i) {
                double x = static_cast<double>(i) / static_cast<double>(grid);
                int below_hi = spectral::periodic_count_below(pot, x, om_ring, N,
                                                              spectral::Bc::Periodic,
                                                              I.hi + delta);
                int below_lo = spectral::periodic_count_below(pot, x, om_ring, N,
                                                              spectral::Bc::Periodic,
                                                              I.lo - delta);
                if (below_hi != below_lo) hit.store(true, std::memory_order_relaxed);
            }
        });
        if (hit.load()) return false;
    }
    return true;
}

Dichotomy dichotomy_scan(const Potential& pot, double omega, Interval I, long long ell) {
    Dichotomy out;
    if (!(I.width() > 0.0)) return out;  // nothing to certify
    if (ell < 2) throw std::invalid_argument("dichotomy_scan: ell >= 2");
    const long long n_lo = ell * ell;
    const long long n_hi = std::min<long long>(n_lo * n_lo, 150);  // desk cap on the scan
    for (long long N = n_lo; N <= n_hi; N *= 2) {
        auto graph = rellich::trace_graph(pot, omega, N, 128, 2);
        rellich::feynman_slopes(graph, pot, N >= 100);
        auto segs = rellich::extract_segments(graph, pot, 0.5, I.lo, I.hi);
        const rellich::Segment *best_p = nullptr, *best_n = nullptr;
        double best_w = 1e-4;  // minimum usable shared range
        for (const auto& sp : segs) {
            if (!sp.regular || sp.slope_sign <= 0) continue;
            for (const auto& sn : segs) {
                if (!sn.regular || sn.slope_sign >= 0) continue;
                double lo = std::max(sp.E_lo, sn.E_lo), hi = std::min(sp.E_hi, sn.E_hi);
                if (hi - lo >= best_w) {
                    best_w = hi - lo;
                    best_p = &sp;
                    best_n = &sn;
                    out.common = {lo, hi};
                }
            }
        }
        if (best_p) {
            out.kind = Dichotomy::Kind::regular_pair;
            out.seg_pos = *best_p;
            out.seg_neg = *best_n;
            out.scale = N;
            return out;
        }
    }
    Interval shrunk{I.lo + I.width() / 4.0, I.hi - I.width() / 4.0};
    std::vector<long long> scales;
    try {
        for (const auto& [p, q] : model::continued_fraction(omega, 40).convergents)
            if (q >= 2 && q <= 4000) scales.push_back(q);
    } catch (const model::RationalInput&) {
        return out;  // undecided: no denominator ladder to certify with
    }
    try {
        if (spectrum_free_check(pot, omega, shrunk, scales)) {
            out.kind = Dichotomy::Kind::spectrum_free;
            out.free_interval = shrunk;
        }
    } catch (const FrequencyError&) {
        // undecided
    }
    return out;
}

TripleScan triple_resonance_scan(const Potential& pot, double omega,
                                 const rellich::RellichGraph& graph,
                                 long long m1_lo, long long m1_hi,
                                 long long m2_lo, long long m2_hi, double tol,
                                 const std::vector<rellich::Segment>& segments) {
    if (m1_lo > m1_hi || m2_lo > m2_hi)
        throw std::invalid_argument("triple_resonance_scan: empty shift range");
    const spectral::Window w = graph.window();
    const std::size_t bands = static_cast<std::size_t>(graph.bands());
    const std::size_t kCap = 1000;

    // membership test against the supplied segments, by band
    std::map<long long, std::vector<std::pair<double, double>>> seg_ranges;
    for (const auto& s : segments) seg_ranges[s.j].push_back({s.x_lo, s.x_hi});
    auto on_segment = [&](long long j, double x) {
        if (segments.empty()) return true;
        auto it = seg_ranges.find(j);
        if (it == seg_ranges.end()) return false;
        for (const auto& [lo, hi] : it->second)
            if (lo <= x && x <= hi) return true;
        return false;
    };

    auto nearest = [](const std::vector<double>& eigs, double E) {
        auto it = std::lower_bound(eigs.begin(), eigs.end(), E);
        std::size_t j = static_cast<std::size_t>(it - eigs.begin());
        if (j == eigs.size() || (j > 0 && E - eigs[j - 1] < eigs[j] - E)) --j;
        return j;
    };

    const std::size_t nodes = graph.xs.size();
    std::vector<std::vector<TripleHit>> per_node(nodes);
    util::parallel_for(nodes, [&](std::size_t a, std::size_t b) {
        std::vector<std::vector<double>> m1_cache(static_cast<std::size_t>(m1_hi - m1_lo + 1));
        std::map<long long, std::vector<double>> m2_cache;
        for (std::size_t i = a; i < b; ++i) {
            for (auto& c : m1_cache) c.clear();
            m2_cache.clear();
            const double x = graph.xs[i];
            auto shifted_eigs = [&](long long m) {
                return spectral::dirichlet_eigs(
                    pot, model::frac(x + static_cast<double>(m) * omega), omega, w, 1e-11);
            };
            auto& hits = per_node[i];
            for (std::size_t j1 = 0; j1 < bands && hits.size() < kCap; ++j1) {
                if (!on_segment(static_cast<long long>(j1), x)) continue;
                const double E1 = graph.E[i][j1];
                for (long long m1 = m1_lo; m1 <= m1_hi && hits.size() < kCap; ++m1) {
                    auto& e1 = m1_cache[static_cast<std::size_t>(m1 - m1_lo)];
                    if (e1.empty()) e1 = shifted_eigs(m1);
                    std::size_t j2 = nearest(e1, E1);
                    if (std::abs(e1[j2] - E1) >= tol) continue;
                    if (!on_segment(static_cast<long long>(j2),
                                    model::frac(x + static_cast<double>(m1) * omega)))
                        continue;
                    for (long long m2 = m2_lo; m2 <= m2_hi && hits.size() < kCap; ++m2) {
                        auto& e2 = m2_cache[m2];
                        if (e2.empty()) e2 = shifted_eigs(m2);
                        std::size_t j3 = nearest(e2, E1);
                        if (std::abs(e2[j3] - E1) >= tol) continue;
                        if (!on_segment(static_cast<long long>(j3),
                                        model::frac(x + static_cast<double>(m2) * omega)))
                            continue;
                        hits.push_back({x, static_cast<long long>(j1),
                                        static_cast<long long>(j2),
                                        static_cast<long long>(j3), m1, m2});
                    }
                }
            }
        }
    });
    TripleScan out;
    for (const auto& hits : per_node)
        for (const auto& h : hits) {
            if (out.hits.size() >= kCap) { out.truncated = true; return out; }
            out.hits.push_back(h);
        }
    return out;
}

nlohmann::json GapReport::to_json() const {
    auto iv = [](const Interval& i) { return nlohmann::json{{"lo", i.lo}, {"hi", i.hi}}; };
    nlohmann::json j;
    j["N"] = N;
    j["bc"] = (bc == Boundary::dirichlet) ? "dirichlet" : "periodic";
    j["hull"] = iv(hull);
    j["bands"] = nlohmann::json::array();
    for (const auto& b : bands) j["bands"].push_back(iv(b));
    j["gaps"] = nlohmann::json::array();
    for (const auto& g : gaps) j["gaps"].push_back(iv(g));
    j["resonances"] = nlohmann::json::array();
    for (const auto& r : resonances)
        j["resonances"].push_back({{"x0", r.x0},
                                   {"m", r.m},
                                   {"E0", r.E0},
                                   {"j1", r.j1},
                                   {"j2", r.j2},
                                   {"scale", r.scale}});
    j["pregaps"] = nlohmann::json::array();
    for (const auto& p : pregaps)
        j["pregaps"].push_back({{"interval", iv(p.interval)},
                                {"scale", p.scale},
                                {"j0", p.j0},
                                {"x_star", p.x_star},
                                {"tau_hat", p.tau_hat},
                                {"resonance_id", p.resonance_id}});
    j["zero_sequences"] = nlohmann::json::array();
    for (const auto& seq : zero_sequences) {
        nlohmann::json js = nlohmann::json::array();
        for (const auto& d : seq) {
            nlohmann::json zs = nlohmann::json::array();
            for (const auto& z : d.zeros) zs.push_back({{"re", z.real()}, {"im", z.imag()}});
            js.push_back({{"k", d.k}, {"count", d.count}, {"zeros", zs}});
        }
        j["zero_sequences"].push_back(js);
    }
    return j;
}

std::string gap_genealogy_csv(const std::vector<GapReport>& reports) {
    std::ostringstream os;
    os << "N,bc,kind,lo,hi\n";
    os.precision(17);
    for (const auto& rep : reports) {
        const char* bc = (rep.bc == Boundary::dirichlet) ? "dirichlet" : "periodic";
        for (const auto& b : rep.bands)
            os << rep.N << ',' << bc << ",band," << b.lo << ',' << b.hi << '\n';
        for (const auto& g : rep.gaps)
            os << rep.N << ',' << bc << ",gap," << g.lo << ',' << g.hi << '\n';
    }
    return os.str();
}

}  // namespace qplab::gaps
