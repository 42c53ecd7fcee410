#include "qplab/resultant.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>

#include "qplab/transfer.hpp"
#include "qplab/zerocount.hpp"

namespace qplab::resultant {

Poly::Poly(std::vector<cplx> c) : coeffs(std::move(c)) {
    while (coeffs.size() > 1 && coeffs.back() == cplx(0.0, 0.0)) coeffs.pop_back();
    if (coeffs.empty() || (coeffs.size() == 1 && coeffs[0] == cplx(0.0, 0.0)))
        throw std::invalid_argument("Poly: zero polynomial");
}

cplx Poly::eval(cplx x) const {
    cplx acc(0.0, 0.0);
    for (std::size_t k = coeffs.size(); k-- > 0;) acc = acc * x + coeffs[k];
    return acc;
}

Poly Poly::derivative() const {
    if (degree() == 0) throw std::invalid_argument("Poly: derivative of a constant");
    std::vector<cplx> d(coeffs.size() - 1);
    for (std::size_t k = 1; k < coeffs.size(); ++k)
        d[k - 1] = static_cast<double>(k) * coeffs[k];
    return Poly(std::move(d));
}

cplx sylvester_resultant(const Poly& p, const Poly& q) {
    const int n = p.degree();
    const int m = q.degree();
    if (n < 1 || m < 1)
        throw std::invalid_argument("sylvester_resultant: both degrees must be >= 1");
    const int s = n + m;
    std::vector<std::vector<cplx>> a(s, std::vector<cplx>(s, cplx(0.0, 0.0)));
    for (int i = 0; i < m; ++i)
        for (int k = 0; k <= n; ++k) a[i][i + k] = p.coeffs[n - k];
    for (int j = 0; j < n; ++j)
        for (int k = 0; k <= m; ++k) a[m + j][j + k] = q.coeffs[m - k];
    // Partial-pivot elimination with swap-sign bookkeeping.
    cplx det(1.0, 0.0);
    for (int col = 0; col < s; ++col) {
        int piv = col;
        double best = std::abs(a[col][col]);
        for (int r = col + 1; r < s; ++r)
            if (std::abs(a[r][col]) > best) {
                best = std::abs(a[r][col]);
                piv = r;
            }
        if (best == 0.0) return cplx(0.0, 0.0);
        if (piv != col) {
            std::swap(a[piv], a[col]);
            det = -det;
        }
        det *= a[col][col];
        for (int r = col + 1; r < s; ++r) {
            const cplx factor = a[r][col] / a[col][col];
            for (int c = col; c < s; ++c) a[r][c] -= factor * a[col][c];
        }
    }
    return det;
}

namespace {

// EISPACK-style two-sided diagonal balancing in powers of two (exact scaling).
void balance(Eigen::MatrixXcd& a) {
    const int n = static_cast<int>(a.rows());
    bool noconv = true;
    int sweeps = 0;
    while (noconv && sweeps++ < 50) {
        noconv = false;
        for (int i = 0; i < n; ++i) {
            double c = 0.0, r = 0.0;
            for (int j = 0; j < n; ++j) {
                if (j == i) continue;
                c += std::abs(a(j, i));
                r += std::abs(a(i, j));
            }
            if (c == 0.0 || r == 0.0) continue;
            const double s = c + r;
            double f = 1.0;
            while (c < r / 2.0) {
                f *= 2.0;
                c *= 4.0;
            }
            while (c >= r * 2.0) {
                f /= 2.0;
                c /= 4.0;
            }
            if ((c + r) / f < 0.95 * s) {
                noconv = true;
                a.row(i) /= f;
                a.col(i) *= f;
            }
        }
    }
}

}  // namespace

std::vector<cplx> poly_roots(const Poly& p) {
    const int n = p.degree();
    if (n < 1) throw std::invalid_argument("poly_roots: degree must be >= 1");
    if (n > 12)
        throw std::invalid_argument("poly_roots: degree above the trusted oracle cap 12");
    if (n == 1) return {-p.coeffs[0] / p.coeffs[1]};
    Eigen::MatrixXcd comp = Eigen::MatrixXcd::Zero(n, n);
    for (int i = 1; i < n; ++i) comp(i, i - 1) = cplx(1.0, 0.0);
    for (int i = 0; i < n; ++i) comp(i, n - 1) = -p.coeffs[i] / p.coeffs[n];
    balance(comp);
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(comp, false);
    if (es.info() != Eigen::Success)
        throw RootFindingError("poly_roots: companion eigensolve failed to converge");
    std::vector<cplx> roots(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) roots[static_cast<std::size_t>(i)] = es.eigenvalues()(i);
    // Residual gate: |p(zeta)| against the coefficient scale at |zeta|.
    for (const cplx& z : roots) {
        double scale = 0.0;
        double zp = 1.0;
        const double az = std::abs(z);
        for (const cplx& c : p.coeffs) {
            scale += std::abs(c) * zp;
            zp *= az;
        }
        if (std::abs(p.eval(z)) > 1e-8 * std::max(scale, 1e-300))
            throw RootFindingError("poly_roots: residual above 1e-8 of coefficient scale");
    }
    std::sort(roots.begin(), roots.end(), [](const cplx& a, const cplx& b) {
        if (a.real() != b.real()) return a.real() < b.real();
        return a.imag() < b.imag();
    });
    return roots;
}

cplx root_product_resultant(const Poly& p, const Poly& q) {
    if (p.degree() < 1 || q.degree() < 1)
        throw std::invalid_argument("root_product_resultant: both degrees must be >= 1");
    const auto zp = poly_roots(p);
    const auto zq = poly_roots(q);
    cplx prod(1.0, 0.0);
    for (const cplx& a : zp)
        for (const cplx& b : zq) prod *= (a - b);
    cplx lead(1.0, 0.0);
    for (int i = 0; i < q.degree(); ++i) lead *= p.leading();
    for (int i = 0; i < p.degree(); ++i) lead *= q.leading();
    return lead * prod;
}

cplx discriminant(const Poly& p) {
    if (p.degree() < 2) throw std::invalid_argument("discriminant: degree must be >= 2");
    if (std::abs(p.leading() - cplx(1.0, 0.0)) > 1e-12)
        throw std::invalid_argument("discriminant: polynomial must be monic");
    const auto z = poly_roots(p);
    cplx prod(1.0, 0.0);
    for (std::size_t i = 0; i < z.size(); ++i)
        for (std::size_t j = 0; j < z.size(); ++j)
            if (i != j) prod *= (z[i] - z[j]);
    return prod;
}

double zero_separation_experiment(const Potential& pot, double omega, double E,
                                  long long l1, long long l2, long long t,
                                  double R1, double R2) {
    if (!(l1 >= l2 && l2 >= 8))
        throw std::invalid_argument("zero_separation_experiment: need l1 >= l2 >= 8");
    if (t < 0) throw std::invalid_argument("zero_separation_experiment: t must be >= 0");
    if (!(R2 > R1)) {
        R1 = 1.0 - 0.5 * pot.rho0();
        R2 = 1.0 + 0.5 * pot.rho0();
    }
    const cplx rot(std::cos(2.0 * M_PI * model::frac(static_cast<double>(t) * omega)),
                   std::sin(2.0 * M_PI * model::frac(static_cast<double>(t) * omega)));
    const zerocount::LogEvaluator f1 = [&](cplx z) {
        return transfer::dirichlet_det(pot, 1, l1, z, omega, cplx(E, 0.0));
    };
    const zerocount::LogEvaluator f2 = [&](cplx z) {
        return transfer::dirichlet_det(pot, 1, l2, z * rot, omega, cplx(E, 0.0));
    };
    const auto Z1 = zerocount::annulus_zeros(f1, R1, R2, l1).zeros;
    const auto Z2 = zerocount::annulus_zeros(f2, R1, R2, l2).zeros;
    if (Z1.empty() || Z2.empty()) return std::numeric_limits<double>::infinity();
    double best = std::numeric_limits<double>::infinity();
    for (const cplx& a : Z1)
        for (const cplx& b : Z2) best = std::min(best, std::abs(a - b));
    return best;
}

}  // namespace qplab::resultant
