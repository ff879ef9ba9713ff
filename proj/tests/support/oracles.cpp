#include "oracles.hpp"

#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

namespace oracles {

namespace {

constexpr double kPi = 3.141592653589793238462643;

struct GlRule {
    std::vector<double> nodes;    // on (-1, 1)
    std::vector<double> weights;
};

// Legendre nodes by Newton on the recurrence.
GlRule gauss_legendre(int n) {
    GlRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int j = 2; j <= n; ++j) {
                const double p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        rule.nodes[i] = -x;
        rule.nodes[n - 1 - i] = x;
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule.weights[i] = w;
        rule.weights[n - 1 - i] = w;
    }
    return rule;
}

double binom_exact(int n, int k) {
    double c = 1.0;
    for (int j = 1; j <= k; ++j) c = c * (n - k + j) / j;
    return c;
}

}  // namespace

double integrate(const std::function<double(double)>& f, double a, double b, int panels, int order) {
    const GlRule rule = gauss_legendre(order);
    const double h = (b - a) / panels;
    double total = 0.0;
    for (int p = 0; p < panels; ++p) {
        const double lo = a + p * h;
        for (int i = 0; i < order; ++i)
            total += 0.5 * h * rule.weights[i] * f(lo + 0.5 * h * (rule.nodes[i] + 1.0));
    }
    return total;
}

double laguerre_series(int n, int k, double x) {
    double sum = 0.0, xj = 1.0, jfact = 1.0;
    for (int j = 0; j <= n; ++j) {
        if (j > 0) {
            xj *= -x;
            jfact *= j;
        }
        sum += binom_exact(n + k, n - j) * xj / jfact;
    }
    return sum;
}

double erfc_cf(double x) {
    if (x < 0.0) return 2.0 - erfc_cf(-x);
    if (x < 2.0) {
        // erf(x) = (2/sqrt(pi)) sum (-1)^j x^{2j+1} / (j! (2j+1))
        double term = x, sum = x;
        for (int j = 1; j < 200; ++j) {
            term *= -x * x / j;
            sum += term / (2.0 * j + 1.0);
            if (std::abs(term) < 1e-18 * std::abs(sum)) break;
        }
        return 1.0 - 2.0 / std::sqrt(kPi) * sum;
    }
    // Lentz's algorithm on erfc(x) = e^{-x^2}/sqrt(pi) * 1/(x + 1/2/(x + 2/2/(x + ...)))
    const double tiny = 1e-300;
    double f = tiny, c = f, d = 0.0;
    for (int j = 0; j < 400; ++j) {
        const double a = j == 0 ? 1.0 : 0.5 * j;
        const double b = x;
        d = b + a * d;
        if (d == 0.0) d = tiny;
        c = b + a / c;
        if (c == 0.0) c = tiny;
        d = 1.0 / d;
        const double delta = c * d;
        f *= delta;
        if (std::abs(delta - 1.0) < 1e-17) break;
    }
    return std::exp(-x * x) / std::sqrt(kPi) * f;
}

double sup_eig_charpoly(const Matrix& a) {
    const int n = static_cast<int>(a.rows());
    // Faddeev-LeVerrier: p(lambda) = lambda^n + c_1 lambda^{n-1} + ... + c_n
    std::vector<double> c(static_cast<size_t>(n) + 1, 0.0);
    c[0] = 1.0;
    Matrix m = Matrix::Zero(n, n);
    for (int k = 1; k <= n; ++k) {
        m = a * m + c[static_cast<size_t>(k) - 1] * Matrix::Identity(n, n);
        c[static_cast<size_t>(k)] = -(a * m).trace() / k;
    }
    // Cauchy bound on root magnitude
    double bound = 0.0;
    for (int k = 1; k <= n; ++k) bound = std::max(bound, std::abs(c[static_cast<size_t>(k)]));
    bound += 1.0;
    // Newton from above converges monotonically to the largest real root.
    double lam = bound;
    for (int it = 0; it < 500; ++it) {
        double p = c[0], dp = 0.0;
        for (int k = 1; k <= n; ++k) {
            dp = dp * lam + p;
            p = p * lam + c[static_cast<size_t>(k)];
        }
        if (dp == 0.0) break;
        const double step = p / dp;
        lam -= step;
        if (std::abs(step) < 1e-15 * std::max(1.0, std::abs(lam))) break;
    }
    return lam;
}

PovmPair povm_by_quadrature(int n_max, double x_th) {
    const int dim = n_max + 1;
    PovmPair out{Matrix::Zero(dim, dim), Matrix::Zero(dim, dim)};
    const GlRule rule = gauss_legendre(10);
    const double x_hi = x_th + 9.0, y_hi = 9.0;
    const int x_panels = static_cast<int>(std::ceil((x_hi - x_th) / 0.25));
    const int y_panels = static_cast<int>(std::ceil(2.0 * y_hi / 0.25));
    std::vector<std::complex<double>> v(static_cast<size_t>(dim));
    std::vector<double> fact_sqrt(static_cast<size_t>(dim), 1.0);
    for (int nn = 1; nn < dim; ++nn) fact_sqrt[static_cast<size_t>(nn)] = fact_sqrt[static_cast<size_t>(nn) - 1] * std::sqrt(static_cast<double>(nn));

    const double hx = (x_hi - x_th) / x_panels, hy = 2.0 * y_hi / y_panels;
    for (int px = 0; px < x_panels; ++px) {
        for (int ix = 0; ix < 10; ++ix) {
            const double x = x_th + px * hx + 0.5 * hx * (rule.nodes[ix] + 1.0);
            const double wx = 0.5 * hx * rule.weights[ix];
            for (int py = 0; py < y_panels; ++py) {
                for (int iy = 0; iy < 10; ++iy) {
                    const double y = -y_hi + py * hy + 0.5 * hy * (rule.nodes[iy] + 1.0);
                    const double w = wx * 0.5 * hy * rule.weights[iy];
                    const std::complex<double> omega(x, y);
                    const double gauss = std::exp(-(x * x + y * y));
                    v[0] = 1.0;
                    for (int nn = 1; nn < dim; ++nn) v[static_cast<size_t>(nn)] = v[static_cast<size_t>(nn) - 1] * omega;
                    const double scale = (2.0 / kPi) * w * gauss;
                    for (int p = 0; p <= n_max; ++p) {
                        for (int q = p % 2; q <= p; q += 2) {
                            const double term = scale *
                                                (v[static_cast<size_t>(p)] * std::conj(v[static_cast<size_t>(q)])).real() /
                                                (fact_sqrt[static_cast<size_t>(p)] * fact_sqrt[static_cast<size_t>(q)]);
                            Matrix& m = p % 2 == 0 ? out.m_ev : out.m_od;
                            m(p, q) += term;
                        }
                    }
                }
            }
        }
    }
    for (int p = 0; p <= n_max; ++p)
        for (int q = p % 2; q < p; q += 2) {
            Matrix& m = p % 2 == 0 ? out.m_ev : out.m_od;
            m(q, p) = m(p, q);
        }
    return out;
}

namespace {

Matrix witness_disk_accumulate(int n_max, const cvqkd::math::WitnessParams& w, double beta,
                               const Matrix* rho, double* expectation) {
    const int dim = n_max + 1;
    Matrix acc = Matrix::Zero(dim, dim);
    double exp_acc = 0.0;
    const double radius = beta + 12.0;
    const GlRule rule = gauss_legendre(8);
    const int r_panels = static_cast<int>(std::ceil(radius / 0.25));
    const int n_theta = 1024;
    const double hr = radius / r_panels;
    std::vector<std::complex<double>> v(static_cast<size_t>(dim));
    for (int pr = 0; pr < r_panels; ++pr) {
        for (int ir = 0; ir < 8; ++ir) {
            const double r = pr * hr + 0.5 * hr * (rule.nodes[ir] + 1.0);
            const double wr = 0.5 * hr * rule.weights[ir] * r;
            for (int it = 0; it < n_theta; ++it) {
                const double theta = 2.0 * kPi * it / n_theta;
                const std::complex<double> omega = r * std::exp(std::complex<double>(0.0, theta));
                const double nu = std::norm(omega - beta);
                const double lam = cvqkd::math::lambda_witness(w, nu);
                const double weight = wr * (2.0 * kPi / n_theta) * lam *
                                      std::exp(-std::norm(omega)) / kPi;
                v[0] = 1.0;
                for (int nn = 1; nn < dim; ++nn)
                    v[static_cast<size_t>(nn)] = v[static_cast<size_t>(nn) - 1] * omega / std::sqrt(static_cast<double>(nn));
                if (rho) {
                    std::complex<double> quad = 0.0;
                    for (int p = 0; p < dim; ++p) {
                        std::complex<double> row = 0.0;
                        for (int q = 0; q < dim; ++q) row += (*rho)(p, q) * std::conj(v[static_cast<size_t>(q)]);
                        quad += v[static_cast<size_t>(p)] * row;
                    }
                    exp_acc += weight * quad.real();
                } else {
                    for (int p = 0; p < dim; ++p)
                        for (int q = 0; q <= p; ++q)
                            acc(p, q) += weight * (v[static_cast<size_t>(p)] * std::conj(v[static_cast<size_t>(q)])).real();
                }
            }
        }
    }
    if (rho) {
        *expectation = exp_acc;
        return acc;
    }
    for (int p = 0; p < dim; ++p)
        for (int q = 0; q < p; ++q) acc(q, p) = acc(p, q);
    return acc;
}

}  // namespace

Matrix witness_operator_by_disk(int n_max, const cvqkd::math::WitnessParams& w, double beta) {
    return witness_disk_accumulate(n_max, w, beta, nullptr, nullptr);
}

double witness_expectation_by_disk(const Matrix& rho, const cvqkd::math::WitnessParams& w,
                                   double beta) {
    double out = 0.0;
    witness_disk_accumulate(static_cast<int>(rho.rows()) - 1, w, beta, &rho, &out);
    return out;
}

Matrix random_density(int dim, std::mt19937_64& gen) {
    std::normal_distribution<double> normal(0.0, 1.0);
    Matrix a(dim, dim);
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j) a(i, j) = normal(gen);
    Matrix rho = a * a.transpose();
    rho /= rho.trace();
    return rho;
}

Matrix full_matrix(const cvqkd::povm::QubitFockOperator& op) {
    const int d = op.space.dim();
    Matrix m(2 * d, 2 * d);
    m.topLeftCorner(d, d) = op.pp;
    m.topRightCorner(d, d) = op.pm;
    m.bottomLeftCorner(d, d) = op.mp;
    m.bottomRightCorner(d, d) = op.mm;
    return m;
}

}  // namespace oracles
