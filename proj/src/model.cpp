#include "qplab/model.hpp"

#include <cmath>
#include <numbers>

namespace qplab::model {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
// Partial quotients beyond this are indistinguishable from the noise floor of
// a double; the input is rational at working precision.
constexpr double kRationalQuotient = 1e12;
}  // namespace

double frac(double x) {
    double f = x - std::floor(x);
    if (f >= 1.0) f = 0.0;  // guard against x just below an integer rounding up
    return f;
}

double torus_dist(double x) {
    double f = frac(x);
    return std::min(f, 1.0 - f);
}

Potential::Potential(std::map<int, cplx> coeffs, double rho0)
    : m_coeffs(std::move(coeffs)), m_rho0(rho0) {
    if (!(rho0 > 0.0 && rho0 < 1.0))
        throw std::invalid_argument("Potential: rho0 must lie in (0,1)");
    // Drop exact zeros, then enforce the reality symmetry a_{-k} = conj(a_k).
    for (auto it = m_coeffs.begin(); it != m_coeffs.end();) {
        if (it->second == cplx(0.0, 0.0)) it = m_coeffs.erase(it);
        else ++it;
    }
    double scale = 0.0;
    for (const auto& [k, a] : m_coeffs) scale = std::max(scale, std::abs(a));
    for (const auto& [k, a] : m_coeffs) {
        auto it = m_coeffs.find(-k);
        cplx mirror = (it == m_coeffs.end()) ? cplx(0.0, 0.0) : it->second;
        if (std::abs(mirror - std::conj(a)) > 1e-12 * std::max(1.0, scale))
            throw std::invalid_argument(
                "Potential: coefficients must satisfy a_{-k} = conj(a_k)");
    }
    m_degree = 0;
    m_abs_sum = 0.0;
    m_deriv_abs_sum = 0.0;
    for (const auto& [k, a] : m_coeffs) {
        m_degree = std::max(m_degree, std::abs(k));
        m_abs_sum += std::abs(a);
        m_deriv_abs_sum += kTwoPi * std::abs(k) * std::abs(a);
    }
    m_pos.assign(m_degree + 1, cplx(0.0, 0.0));
    m_neg.assign(m_degree + 1, cplx(0.0, 0.0));
    for (const auto& [k, a] : m_coeffs) {
        if (k >= 0) m_pos[static_cast<std::size_t>(k)] = a;
        else m_neg[static_cast<std::size_t>(-k)] = a;
    }
}

Potential Potential::almost_mathieu(double lambda, double rho0) {
    std::map<int, cplx> c;
    c[1] = cplx(lambda, 0.0);
    c[-1] = cplx(lambda, 0.0);
    return Potential(std::move(c), rho0);
}

cplx Potential::eval(cplx z) const {
    double r = std::abs(z);
    if (!(r > 1.0 - m_rho0 && r < 1.0 + m_rho0))
        throw OutOfAnnulus("Potential::eval: |z| = " + std::to_string(r) +
                           " outside (" + std::to_string(1.0 - m_rho0) + ", " +
                           std::to_string(1.0 + m_rho0) + ")");
    cplx s = m_pos.empty() ? cplx(0.0, 0.0) : m_pos[0];
    cplx zi = 1.0 / z;
    cplx zp(1.0, 0.0), zn(1.0, 0.0);
    for (int k = 1; k <= m_degree; ++k) {
        zp *= z;
        zn *= zi;
        s += m_pos[static_cast<std::size_t>(k)] * zp + m_neg[static_cast<std::size_t>(k)] * zn;
    }
    return s;
}

double Potential::eval_phase(double x) const {
    // Pair k with -k so the result is exactly real.
    double s = 0.0;
    for (const auto& [k, a] : m_coeffs) {
        if (k < 0) continue;
        if (k == 0) { s += a.real(); continue; }
        double ang = kTwoPi * k * x;
        s += 2.0 * (a.real() * std::cos(ang) - a.imag() * std::sin(ang));
    }
    return s;
}

double Potential::deriv_phase(double x) const {
    // d/dx sum a_k e(kx) = sum a_k (2 pi i k) e(kx); pairing k with -k gives
    // -2 sum_{k>0} 2 pi k Im(a_k e(kx)).
    double s = 0.0;
    for (const auto& [k, a] : m_coeffs) {
        if (k <= 0) continue;
        double ang = kTwoPi * k * x;
        s += -2.0 * kTwoPi * k * (a.real() * std::sin(ang) + a.imag() * std::cos(ang));
    }
    return s;
}

nlohmann::json Potential::to_json() const {
    nlohmann::json coeffs = nlohmann::json::array();
    for (const auto& [k, a] : m_coeffs)
        coeffs.push_back({k, a.real(), a.imag()});
    return {{"coeffs", coeffs}, {"rho0", m_rho0}};
}

Potential Potential::from_json(const nlohmann::json& j) {
    std::map<int, cplx> c;
    for (const auto& row : j.at("coeffs")) {
        if (!row.is_array() || row.size() != 3)
            throw std::invalid_argument("Potential::from_json: coeff rows are [k, re, im]");
        c[row[0].get<int>()] = cplx(row[1].get<double>(), row[2].get<double>());
    }
    return Potential(std::move(c), j.at("rho0").get<double>());
}

double golden_mean() { return (std::sqrt(5.0) - 1.0) / 2.0; }
double silver_mean() { return std::sqrt(2.0) - 1.0; }

Frequency continued_fraction(double omega, int depth) {
    if (!(omega > 0.0 && omega < 1.0))
        throw std::invalid_argument("continued_fraction: omega must lie in (0,1)");
    if (depth < 1) throw std::invalid_argument("continued_fraction: depth >= 1");
    if (depth > 40) depth = 40;

    Frequency fr;
    fr.omega = omega;
    // Convergents of [0; a1, a2, ...]: p_{-1}=1, p_0=0, q_{-1}=0, q_0=1.
    long long p_prev = 1, p_curr = 0, q_prev = 0, q_curr = 1;
    double x = omega;
    for (int k = 1; k <= depth; ++k) {
        if (x <= 0.0)
            throw RationalInput("continued_fraction: rational input (exact) at depth " +
                                std::to_string(k), k);
        double inv = 1.0 / x;
        double af = std::floor(inv);
        if (af >= kRationalQuotient)
            throw RationalInput("continued_fraction: rational input at depth " +
                                std::to_string(k), k);
        long long a = static_cast<long long>(af);
        fr.quotients.push_back(a);
        long long p_next = a * p_curr + p_prev;
        long long q_next = a * q_curr + q_prev;
        p_prev = p_curr; p_curr = p_next;
        q_prev = q_curr; q_curr = q_next;
        fr.convergents.emplace_back(p_curr, q_curr);
        x = inv - af;
    }
    return fr;
}

std::pair<double, long long> min_shift_distance(double omega, long long N) {
    if (N < 1) throw std::invalid_argument("min_shift_distance: N >= 1");
    double best = torus_dist(omega);
    long long best_t = 1;
    for (long long t = 2; t <= N; ++t) {
        double d = torus_dist(static_cast<double>(t) * omega);
        if (d < best) { best = d; best_t = t; }  // strict: ties keep smallest t
    }
    return {best, best_t};
}

std::optional<long long> find_shift_hitting_interval(double omega, double y1, double y2,
                                                     long long m_lo, long long m_hi) {
    if (!(y1 < y2)) throw std::invalid_argument("find_shift_hitting_interval: y1 < y2");
    if (m_lo < 1 || m_hi < m_lo)
        throw std::invalid_argument("find_shift_hitting_interval: need 1 <= m_lo <= m_hi");
    for (long long m = m_lo; m <= m_hi; ++m) {
        double f = frac(static_cast<double>(m) * omega);
        if (f > y1 && f < y2) return m;
    }
    return std::nullopt;
}

}  // namespace qplab::model
