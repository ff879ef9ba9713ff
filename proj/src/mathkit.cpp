#include "cvqkd/mathkit.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>

namespace cvqkd::math {

namespace {

constexpr double kSqrtPi = 1.7724538509055160273;

// Roots of the stationary-point polynomial r*L_m^{(1)}(x) + (1+r)*L_{m-1}^{(2)}(x);
// d/dnu Lambda_{m,r}(nu) = -e^{-r nu} (1+r) * phi((1+r) nu).
double stationary_poly(const WitnessParams& p, double x) {
    return p.r * laguerre(p.m, 1, x) + (1.0 + p.r) * laguerre(p.m - 1, 2, x);
}

}  // namespace

double laguerre(int n, int k, double nu) {
    if (n < 0 || k < 0) throw std::invalid_argument("laguerre: n and k must be nonnegative");
    if (n == 0) return 1.0;
    double lkm1 = 1.0;            // L_0
    double lk = 1.0 + k - nu;     // L_1
    for (int i = 1; i < n; ++i) {
        const double next = ((2.0 * i + k + 1.0 - nu) * lk - (i + k) * lkm1) / (i + 1.0);
        lkm1 = lk;
        lk = next;
    }
    return lk;
}

void WitnessParams::validate() const {
    if (m < 1 || m % 2 == 0) throw std::invalid_argument("witness order m must be a positive odd integer");
    if (!(r > 0.0)) throw std::invalid_argument("witness rate r must be positive");
}

double lambda_witness(const WitnessParams& p, double nu) {
    p.validate();
    if (nu < 0.0) throw std::invalid_argument("lambda_witness: nu must be nonnegative");
    return std::exp(-p.r * nu) * (1.0 + p.r) * laguerre(p.m, 1, (1.0 + p.r) * nu);
}

WitnessExtrema witness_extrema(const WitnessParams& p) {
    p.validate();
    // All roots of L_m^{(1)} and L_{m-1}^{(2)} lie below 4n + 2k + 3; beyond that the
    // stationary polynomial keeps the sign of its leading term.
    const double x_hi = 4.0 * p.m + 8.0 + 16.0;
    const int grid_n = std::max(4000, 2000 * p.m);

    std::vector<double> roots;
    double x_prev = 0.0;
    double f_prev = stationary_poly(p, x_prev);
    for (int i = 1; i <= grid_n; ++i) {
        const double x = x_hi * static_cast<double>(i) / grid_n;
        const double f = stationary_poly(p, x);
        if (f_prev == 0.0) roots.push_back(x_prev);
        else if (f_prev * f < 0.0) {
            double lo = x_prev, hi = x, flo = f_prev;
            for (int it = 0; it < 200 && hi - lo > 1e-14 * x_hi; ++it) {
                const double mid = 0.5 * (lo + hi);
                const double fm = stationary_poly(p, mid);
                if (flo * fm <= 0.0) hi = mid;
                else { lo = mid; flo = fm; }
            }
            if (hi - lo > 1e-10) throw std::runtime_error("witness_extrema: bisection did not converge");
            roots.push_back(0.5 * (lo + hi));
        }
        x_prev = x;
        f_prev = f;
    }

    const double one_plus_r = 1.0 + p.r;
    WitnessExtrema ext;
    ext.bracket_lo = 0.0;
    ext.bracket_hi = x_hi / one_plus_r;
    ext.lambda_max = lambda_witness(p, 0.0);
    ext.lambda_min = 0.0;  // Lambda -> 0 as nu -> inf
    ext.argmin_nu = ext.bracket_hi;
    for (const double x : roots) {
        const double nu = x / one_plus_r;
        const double v = lambda_witness(p, nu);
        if (v > ext.lambda_max) ext.lambda_max = v;
        if (v < ext.lambda_min) {
            ext.lambda_min = v;
            ext.argmin_nu = nu;
        }
    }
    // Safety scan: the extrema must dominate a dense sample of the function.
    for (int i = 0; i <= 20000; ++i) {
        const double nu = ext.bracket_hi * static_cast<double>(i) / 20000.0;
        const double v = lambda_witness(p, nu);
        if (v > ext.lambda_max + 1e-10 || v < ext.lambda_min - 1e-10)
            throw std::runtime_error("witness_extrema: stationary-point enumeration missed an extremum");
    }
    return ext;
}

const WitnessExtrema& witness_extrema_cached(const WitnessParams& p) {
    static std::mutex mu;
    static std::map<std::pair<int, double>, WitnessExtrema> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto [it, inserted] = cache.try_emplace({p.m, p.r});
    if (inserted) it->second = witness_extrema(p);
    return it->second;
}

double binary_entropy(double x) {
    if (x < 0.0 || x > 1.0) throw std::invalid_argument("binary_entropy: argument outside [0, 1]");
    if (x == 0.0 || x == 1.0) return 0.0;
    return -(x * std::log2(x) + (1.0 - x) * std::log2(1.0 - x));
}

double kl_divergence(double x, double y) {
    if (x < 0.0 || x > 1.0) throw std::invalid_argument("kl_divergence: x outside [0, 1]");
    if (!(y > 0.0) || !(y < 1.0)) throw std::invalid_argument("kl_divergence: y outside (0, 1)");
    double d = 0.0;
    if (x > 0.0) d += x * (std::log(x) - std::log(y));
    if (x < 1.0) d += (1.0 - x) * (std::log1p(-x) - std::log1p(-y));
    return std::max(d, 0.0);
}

namespace {

// f(u) = (1+u) ln(1+u) - u, nonnegative on (-1, inf). The direct form loses
// ~|u|/u^2 digits to cancellation, so small |u| goes through the series.
double xlog1p_minus(double u) {
    if (std::abs(u) < 0.05) {
        // sum_{k>=2} (-1)^k u^k / (k (k-1))
        double term = 0.5 * u * u, sum = term;
        for (int k = 3; k <= 28; ++k) {
            term *= -u * (k - 2.0) / k;
            sum += term;
            if (std::abs(term) < 1e-20 * sum) break;
        }
        return sum;
    }
    return (1.0 + u) * std::log1p(u) - u;
}

}  // namespace

double kl_bernoulli_shift(double p, double t) {
    if (!(p > 0.0) || !(p < 1.0)) throw std::invalid_argument("kl_bernoulli_shift: p outside (0, 1)");
    const double x = p + t;
    if (x < 0.0 || x > 1.0) throw std::invalid_argument("kl_bernoulli_shift: p + t outside [0, 1]");
    if (t == 0.0) return 0.0;
    if (x == 0.0) return -std::log1p(-p);
    if (x == 1.0) return -std::log(p);
    return p * xlog1p_minus(t / p) + (1.0 - p) * xlog1p_minus(-t / (1.0 - p));
}

double erfc_comp(double x) { return std::erfc(x); }

std::vector<double> half_gaussian_moments(int k_max, double a) {
    if (k_max < 0) throw std::invalid_argument("half_gaussian_moments: k_max must be nonnegative");
    if (a < 0.0) throw std::invalid_argument("half_gaussian_moments: a must be nonnegative");
    std::vector<double> mom(static_cast<size_t>(k_max) + 1);
    const double ea = std::exp(-a * a);
    mom[0] = 0.5 * kSqrtPi * erfc_comp(a);
    if (k_max >= 1) mom[1] = 0.5 * ea;
    for (int k = 2; k <= k_max; ++k) {
        // a^{k-1} e^{-a^2} in log form so large thresholds cannot overflow early
        const double boundary = (a == 0.0) ? 0.0 : std::exp((k - 1) * std::log(a) - a * a);
        mom[static_cast<size_t>(k)] = 0.5 * (k - 1) * mom[static_cast<size_t>(k) - 2] + 0.5 * boundary;
    }
    return mom;
}

GaussHermite gauss_hermite(int n) {
    if (n < 1) throw std::invalid_argument("gauss_hermite: order must be positive");
    GaussHermite gh;
    gh.nodes.resize(static_cast<size_t>(n));
    gh.weights.resize(static_cast<size_t>(n));
    const double pim4 = 0.7511255444649424828;  // pi^{-1/4}
    const int half = (n + 1) / 2;
    double z = 0.0;
    for (int i = 0; i < half; ++i) {
        // Initial guesses, then Newton on the orthonormal Hermite recurrence.
        if (i == 0) z = std::sqrt(2.0 * n + 1.0) - 1.85575 * std::pow(2.0 * n + 1.0, -1.0 / 6.0);
        else if (i == 1) z -= 1.14 * std::pow(static_cast<double>(n), 0.426) / z;
        else if (i == 2) z = 1.86 * z - 0.86 * gh.nodes[0];
        else if (i == 3) z = 1.91 * z - 0.91 * gh.nodes[1];
        else z = 2.0 * z - gh.nodes[static_cast<size_t>(i) - 2];

        double pp = 0.0;
        bool converged = false;
        for (int it = 0; it < 200; ++it) {
            double p1 = pim4, p2 = 0.0;
            for (int j = 0; j < n; ++j) {
                const double p3 = p2;
                p2 = p1;
                p1 = z * std::sqrt(2.0 / (j + 1.0)) * p2 - std::sqrt(static_cast<double>(j) / (j + 1.0)) * p3;
            }
            pp = std::sqrt(2.0 * n) * p2;
            const double z1 = z;
            z = z1 - p1 / pp;
            if (std::abs(z - z1) <= 1e-15 * std::max(1.0, std::abs(z))) {
                converged = true;
                break;
            }
        }
        if (!converged) throw std::runtime_error("gauss_hermite: Newton iteration did not converge");
        gh.nodes[static_cast<size_t>(i)] = z;
        gh.nodes[static_cast<size_t>(n) - 1 - i] = -z;
        gh.weights[static_cast<size_t>(i)] = 2.0 / (pp * pp);
        gh.weights[static_cast<size_t>(n) - 1 - i] = gh.weights[static_cast<size_t>(i)];
    }
    if (n % 2 == 1) gh.nodes[static_cast<size_t>(n) / 2] = 0.0;
    return gh;
}

std::vector<double> full_gaussian_moments(int k_max) {
    if (k_max < 0) throw std::invalid_argument("full_gaussian_moments: k_max must be nonnegative");
    const int order = k_max / 2 + 1;  // exact for degree <= 2*order - 1 >= k_max
    const GaussHermite gh = gauss_hermite(order);
    std::vector<double> mom(static_cast<size_t>(k_max) + 1, 0.0);
    for (int k = 0; k <= k_max; k += 2) {
        double acc = 0.0;
        for (int i = 0; i < order; ++i)
            acc += gh.weights[static_cast<size_t>(i)] * std::pow(gh.nodes[static_cast<size_t>(i)], k);
        mom[static_cast<size_t>(k)] = acc;
    }
    return mom;
}

}  // namespace cvqkd::math
