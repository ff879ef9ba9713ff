#ifndef CVQKD_MATHKIT_HPP
#define CVQKD_MATHKIT_HPP

#include <utility>
#include <vector>

namespace cvqkd::math {

/// Associated Laguerre polynomial L_n^{(k)}(nu) by the stable three-term recurrence.
double laguerre(int n, int k, double nu);

/// Parameters of the bounded heterodyne witness function Lambda_{m,r}.
struct WitnessParams {
    int m = 1;          // positive odd order
    double r = 0.4120;  // exponential damping rate, > 0
    void validate() const;
};

struct WitnessExtrema {
    double lambda_min = 0.0;  // infimum of Lambda over nu >= 0
    double lambda_max = 0.0;  // supremum over nu >= 0
    double argmin_nu = 0.0;
    double bracket_lo = 0.0;  // all stationary points lie inside [bracket_lo, bracket_hi]
    double bracket_hi = 0.0;
};

/// Lambda_{m,r}(nu) = e^{-r nu} (1+r) L_m^{(1)}((1+r) nu), nu >= 0.
double lambda_witness(const WitnessParams& p, double nu);

/// Global extrema of Lambda_{m,r} over nu in [0, inf): stationary points of the
/// polynomial factor are bracketed on a dense grid and refined by bisection.
WitnessExtrema witness_extrema(const WitnessParams& p);

/// witness_extrema with a small thread-safe cache keyed by (m, r).
const WitnessExtrema& witness_extrema_cached(const WitnessParams& p);

/// h(x) = -x log2 x - (1-x) log2(1-x), with h(0) = h(1) = 0.
double binary_entropy(double x);

/// Bernoulli Kullback-Leibler divergence D(x||y) in nats. Requires 0 < y < 1.
double kl_divergence(double x, double y);

/// D(p + t || p) evaluated without cancellation, valid for p + t in [0, 1].
double kl_bernoulli_shift(double p, double t);

/// Complementary error function (2/sqrt(pi)) * integral_x^inf e^{-t^2} dt.
double erfc_comp(double x);

/// Half-range Gaussian moments I_k = integral_a^inf x^k e^{-x^2} dx for k = 0..k_max,
/// a >= 0, by the erfc-seeded two-term recurrence.
std::vector<double> half_gaussian_moments(int k_max, double a);

/// Gauss-Hermite rule for the weight e^{-x^2} on (-inf, inf); exact for
/// polynomials of degree <= 2n - 1.
struct GaussHermite {
    std::vector<double> nodes;
    std::vector<double> weights;
};
GaussHermite gauss_hermite(int n);

/// Even Gaussian moments integral x^k e^{-x^2} dx over the real line for
/// k = 0..k_max, computed with a Gauss-Hermite rule of sufficient order.
/// Odd entries are exactly zero.
std::vector<double> full_gaussian_moments(int k_max);

}  // namespace cvqkd::math

#endif  // CVQKD_MATHKIT_HPP
