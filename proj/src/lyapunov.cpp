#include "qplab/lyapunov.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>

#include "qplab/util.hpp"

namespace qplab::lyapunov {

using cplx = std::complex<double>;
using transfer::LogComplex;
using transfer::lc_sub;

namespace {

// log of the largest root modulus of lambda^2 - h*lambda + 1 = 0, taking the
// trace in log form so |h| ~ e^{N L} never leaves the representable range.
double growth_from_trace(const LogComplex& h) {
    if (h.is_zero()) return 0.0;  // lambda = +-i
    if (h.mag > 350.0) {
        // 4/h^2 underflows; lambda_max = h (1 + sqrt(1 - 4/h^2))/2 -> h.
        return h.mag;
    }
    const cplx hv = std::exp(h.mag) * h.phase;
    const cplx s = std::sqrt(hv * hv - 4.0);
    const double rho = std::max(std::abs(hv + s), std::abs(hv - s)) / 2.0;
    // Unimodularity forces max(|lambda_1|, |lambda_2|) >= 1; the clamp only
    // absorbs last-ulp noise near elliptic points.
    return rho > 1.0 ? std::log(rho) : 0.0;
}

}  // namespace

std::vector<double> phase_growth_logs(const Potential& pot, double omega,
                                      double E, long long N, double y,
                                      int grid_size) {
    if (N < 1) throw std::invalid_argument("phase_growth_logs: N must be >= 1");
    if (grid_size < 1) throw std::invalid_argument("phase_growth_logs: empty grid");
    if (std::abs(y) >= pot.rho0())
        throw model::OutOfAnnulus("imaginary phase offset |y| >= rho0");
    const double r = std::exp(-2.0 * M_PI * y);
    std::vector<double> logs(static_cast<std::size_t>(grid_size), 0.0);
    util::parallel_for(logs.size(), [&](std::size_t lo, std::size_t hi) {
        for (std::size_t j = lo; j < hi; ++j) {
            const double x = static_cast<double>(j) / grid_size;
            const cplx z = r * cplx(std::cos(2.0 * M_PI * x), std::sin(2.0 * M_PI * x));
            const auto q = transfer::entry_quadruple(pot, N, z, omega, E);
            logs[j] = growth_from_trace(lc_sub(q.f1N, q.f2Nm1));
        }
    });
    return logs;
}

LyapunovEstimate finite_lyapunov(const Potential& pot, double omega, double E,
                                 long long N, double y, int grid_size) {
    if (grid_size < 16)
        throw std::invalid_argument("finite_lyapunov: grid_size must be >= 16");
    const auto logs = phase_growth_logs(pot, omega, E, N, y, grid_size);
    std::vector<double> rates(logs.size());
    for (std::size_t j = 0; j < logs.size(); ++j)
        rates[j] = logs[j] / static_cast<double>(N);
    LyapunovEstimate est;
    est.value = util::tree_mean(rates);
    est.N = N;
    est.y = y;
    est.grid_size = grid_size;
    std::vector<double> sq(rates.size());
    for (std::size_t j = 0; j < rates.size(); ++j) {
        const double d = rates[j] - est.value;
        sq[j] = d * d;
    }
    est.spread = std::sqrt(util::tree_mean(sq));
    if (est.value < -1e-9)
        throw std::logic_error("finite_lyapunov: negative mean growth for a "
                               "unimodular cocycle");
    return est;
}

AvalancheResult avalanche_expand(const std::vector<ScaledMatrix2>& blocks, double mu) {
    const int n = static_cast<int>(blocks.size());
    if (n == 0) throw std::invalid_argument("avalanche_expand: no blocks");
    if (mu <= 1.0) throw std::invalid_argument("avalanche_expand: mu must exceed 1");
    if (!(mu > static_cast<double>(n)))
        throw HypothesisError("avalanche_expand: mu <= n (condition \"large\")",
                              -1, "large");
    const double log_mu = std::log(mu);
    std::vector<double> lognorm(blocks.size());
    for (int j = 0; j < n; ++j) {
        lognorm[j] = blocks[j].log_norm();
        if (lognorm[j] < log_mu - 1e-12)
            throw HypothesisError("avalanche_expand: block " + std::to_string(j) +
                                      " has norm below mu (condition \"large\")",
                                  j, "large");
    }
    AvalancheResult r;
    if (n == 1) {
        r.expansion = r.direct = lognorm[0];
        r.residual = 0.0;
        return r;
    }
    double pair_sum = 0.0;
    for (int j = 0; j + 1 < n; ++j) {
        const double lp = blocks[j + 1].times(blocks[j]).log_norm();
        const double cancel = lognorm[j + 1] + lognorm[j] - lp;
        if (cancel > 0.5 * log_mu + 1e-12)
            throw HypothesisError("avalanche_expand: pair (" + std::to_string(j) +
                                      "," + std::to_string(j + 1) +
                                      ") cancels too much (condition \"diff\")",
                                  j, "diff");
        pair_sum += lp;
    }
    double mid_sum = 0.0;
    for (int j = 1; j + 1 < n; ++j) mid_sum += lognorm[j];
    r.expansion = pair_sum - mid_sum;
    ScaledMatrix2 chain = blocks[0];
    for (int j = 1; j < n; ++j) chain = blocks[j].times(chain);
    r.direct = chain.log_norm();
    r.residual = std::abs(r.direct - r.expansion);
    return r;
}

RateProbe rate_convergence_probe(const Potential& pot, double omega, double E,
                                 long long n, double y, int grid_size) {
    if (n < 32) throw std::invalid_argument("rate_convergence_probe: n must be >= 32");
    RateProbe p;
    p.l_n = finite_lyapunov(pot, omega, E, n, y, grid_size).value;
    p.l_2n = finite_lyapunov(pot, omega, E, 2 * n, y, grid_size).value;
    p.l_4n = finite_lyapunov(pot, omega, E, 4 * n, y, grid_size).value;
    p.defect = std::abs(p.l_n - 2.0 * p.l_2n + p.l_4n);
    p.drop = p.l_n - p.l_4n;
    return p;
}

std::vector<DeviationPoint> deviation_profile(const Potential& pot, double omega,
                                              double E, long long N,
                                              const std::vector<double>& H_list,
                                              int grid_size) {
    if (grid_size < 256)
        throw std::invalid_argument("deviation_profile: grid_size must be >= 256");
    const auto logs = phase_growth_logs(pot, omega, E, N, 0.0, grid_size);
    std::vector<double> rates(logs.size());
    for (std::size_t j = 0; j < logs.size(); ++j)
        rates[j] = logs[j] / static_cast<double>(N);
    const double total_mean = util::tree_mean(rates) * static_cast<double>(N);
    std::vector<DeviationPoint> out;
    out.reserve(H_list.size());
    for (double H : H_list) {
        long long hits = 0;
        for (double g : logs)
            if (std::abs(g - total_mean) > H) ++hits;
        out.push_back({H, static_cast<double>(hits) / static_cast<double>(logs.size())});
    }
    return out;
}

double uniform_upper_probe(const Potential& pot, double omega, double E,
                           long long N, int grid_size) {
    if (grid_size < 256)
        throw std::invalid_argument("uniform_upper_probe: grid_size must be >= 256");
    const auto logs = phase_growth_logs(pot, omega, E, N, 0.0, grid_size);
    std::vector<double> rates(logs.size());
    for (std::size_t j = 0; j < logs.size(); ++j)
        rates[j] = logs[j] / static_cast<double>(N);
    const double total_mean = util::tree_mean(rates) * static_cast<double>(N);
    double sup = -1e300;
    for (double g : logs) sup = std::max(sup, g);
    return sup - total_mean;
}

}  // namespace qplab::lyapunov
