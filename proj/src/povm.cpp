#include "cvqkd/povm.hpp"

#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

namespace cvqkd::povm {

namespace {

constexpr double kPi = 3.141592653589793238462643;

std::vector<int> even_indices(int dim) {
    std::vector<int> idx;
    for (int n = 0; n < dim; n += 2) idx.push_back(n);
    return idx;
}

std::vector<int> odd_indices(int dim) {
    std::vector<int> idx;
    for (int n = 1; n < dim; n += 2) idx.push_back(n);
    return idx;
}

linalg::Matrix submatrix(const linalg::Matrix& a, const std::vector<int>& rows,
                         const std::vector<int>& cols) {
    linalg::Matrix s(rows.size(), cols.size());
    for (size_t i = 0; i < rows.size(); ++i)
        for (size_t j = 0; j < cols.size(); ++j) s(i, j) = a(rows[i], cols[j]);
    return s;
}

double block_trace_product(const linalg::Matrix& x, const linalg::Matrix& y) {
    // Tr(X Y) = sum_ij X_ij Y_ji
    return x.cwiseProduct(y.transpose()).sum();
}

// Pascal triangle in doubles up to row n.
std::vector<std::vector<double>> binomial_table(int n) {
    std::vector<std::vector<double>> c(static_cast<size_t>(n) + 1);
    for (int i = 0; i <= n; ++i) {
        c[static_cast<size_t>(i)].resize(static_cast<size_t>(i) + 1, 1.0);
        for (int j = 1; j < i; ++j)
            c[static_cast<size_t>(i)][static_cast<size_t>(j)] =
                c[static_cast<size_t>(i) - 1][static_cast<size_t>(j) - 1] +
                c[static_cast<size_t>(i) - 1][static_cast<size_t>(j)];
    }
    return c;
}

}  // namespace

void FockSpace::validate() const {
    if (n_max < 1) throw std::invalid_argument("FockSpace: n_max must be at least 1");
    if (n_max > 128) throw std::invalid_argument("FockSpace: n_max exceeds the supported moment degree");
}

double coherent_tail_mass(int n_max, double alpha) {
    const double lam = alpha * alpha;
    if (lam == 0.0) return 0.0;
    double tail = 0.0;
    double log_term = -lam + (n_max + 1) * std::log(lam) - std::lgamma(n_max + 2.0);
    double term = std::exp(log_term);
    for (int n = n_max + 1; n < n_max + 4000; ++n) {
        tail += term;
        term *= lam / (n + 1.0);
        if (term < tail * 1e-18 && n > lam) break;
    }
    return tail;
}

int FockSpace::recommended_cutoff(double beta) {
    const double a = std::abs(beta) + 4.0;
    for (int n = 16; n <= 128; n += 2)
        if (coherent_tail_mass(n, a) < 1e-12) return n;
    return 128;
}

linalg::Vector coherent_vector(const FockSpace& space, double alpha) {
    space.validate();
    const double tail = coherent_tail_mass(space.n_max, alpha);
    if (tail > 1e-10)
        throw std::invalid_argument("coherent_vector: truncation tail above 1e-10; raise n_max");
    linalg::Vector v = linalg::Vector::Zero(space.dim());
    if (alpha == 0.0) {
        v(0) = 1.0;
        return v;
    }
    const double lam = alpha * alpha;
    const double la = std::log(std::abs(alpha));
    const double sign = alpha > 0.0 ? 1.0 : -1.0;
    double sgn = 1.0;
    for (int n = 0; n < space.dim(); ++n) {
        v(n) = sgn * std::exp(-0.5 * lam + n * la - 0.5 * std::lgamma(n + 1.0));
        sgn *= sign;
    }
    return v;
}

std::pair<FockOperator, FockOperator> parity_projectors(const FockSpace& space) {
    space.validate();
    FockOperator ev = FockOperator::zero(space);
    FockOperator od = FockOperator::zero(space);
    for (int n = 0; n < space.dim(); ++n) {
        if (n % 2 == 0) ev.entries(n, n) = 1.0;
        else od.entries(n, n) = 1.0;
    }
    return {ev, od};
}

SuccessPovm build_success_povm(const FockSpace& space, double x_th) {
    space.validate();
    if (x_th < 0.0) throw std::invalid_argument("build_success_povm: x_th must be nonnegative");
    const int n_max = space.n_max;
    const int deg = 2 * n_max;

    const std::vector<double> ix = math::half_gaussian_moments(deg, x_th);
    const std::vector<double> gy = math::full_gaussian_moments(deg);
    const auto binom = binomial_table(deg);

    SuccessPovm out{FockOperator::zero(space), FockOperator::zero(space), x_th};

    // <p|M|q> = (2/pi)/sqrt(p! q!) * sum over the binomial reduction of
    // (x^2+y^2)^q Re[(x+iy)^{p-q}], with same-parity p >= q.
    for (int parity = 0; parity <= 1; ++parity) {
        linalg::Matrix& m = parity == 0 ? out.m_ev.entries : out.m_od.entries;
        for (int p = parity; p <= n_max; p += 2) {
            for (int q = parity; q <= p; q += 2) {
                const int d = p - q;
                long double acc = 0.0L;
                for (int j = 0; j <= d; j += 2) {
                    const double sj = (j / 2) % 2 == 0 ? 1.0 : -1.0;
                    long double inner = 0.0L;
                    for (int s = 0; s <= q; ++s) {
                        inner += static_cast<long double>(binom[static_cast<size_t>(q)][static_cast<size_t>(s)]) *
                                 ix[static_cast<size_t>(2 * s + d - j)] *
                                 gy[static_cast<size_t>(2 * (q - s) + j)];
                    }
                    acc += sj * static_cast<long double>(binom[static_cast<size_t>(d)][static_cast<size_t>(j)]) * inner;
                }
                const double norm = std::exp(-0.5 * (std::lgamma(p + 1.0) + std::lgamma(q + 1.0)));
                const double value = (2.0 / kPi) * norm * static_cast<double>(acc);
                m(p, q) = value;
                m(q, p) = value;
            }
        }
    }
    return out;
}

PovmMoments povm_moments(const FockSpace& space, double beta, const FockOperator& m_ev,
                         const FockOperator& m_od) {
    space.validate();
    if (!(beta > 0.0))
        throw std::invalid_argument("povm_moments: beta must be positive (C_od vanishes at beta = 0)");
    const linalg::Vector b = coherent_vector(space, beta);

    const double b2 = beta * beta;
    PovmMoments mom;
    mom.beta = beta;
    mom.c_ev = 0.5 * (1.0 + std::exp(-2.0 * b2));    // e^{-b^2} cosh b^2
    mom.c_od = -0.5 * std::expm1(-2.0 * b2);         // e^{-b^2} sinh b^2

    double c_ev_num = 0.0, c_od_num = 0.0;
    for (int n = 0; n < space.dim(); ++n) {
        if (n % 2 == 0) c_ev_num += b(n) * b(n);
        else c_od_num += b(n) * b(n);
    }
    if (std::abs(c_ev_num - mom.c_ev) > 1e-9 || std::abs(c_od_num - mom.c_od) > 1e-9)
        throw std::runtime_error("povm_moments: truncated parity weights disagree with the analytic C_ev/C_od");

    const linalg::Vector mev_b = m_ev.entries * b;
    const linalg::Vector mod_b = m_od.entries * b;
    mom.d_ev = b.dot(mev_b) / mom.c_ev;
    mom.d_od = b.dot(mod_b) / mom.c_od;
    double v_ev = mev_b.squaredNorm() / mom.c_ev - mom.d_ev * mom.d_ev;
    double v_od = mod_b.squaredNorm() / mom.c_od - mom.d_od * mom.d_od;
    if (v_ev < -1e-10 || v_od < -1e-10)
        throw std::runtime_error("povm_moments: negative POVM variance beyond tolerance");
    mom.v_ev = std::max(v_ev, 0.0);
    mom.v_od = std::max(v_od, 0.0);
    return mom;
}

QubitFockOperator QubitFockOperator::zero(const FockSpace& s) {
    const int d = s.dim();
    return {s, linalg::Matrix::Zero(d, d), linalg::Matrix::Zero(d, d), linalg::Matrix::Zero(d, d),
            linalg::Matrix::Zero(d, d)};
}

QubitFockOperator& QubitFockOperator::add_scaled(const QubitFockOperator& other, double factor) {
    pp += factor * other.pp;
    pm += factor * other.pm;
    mp += factor * other.mp;
    mm += factor * other.mm;
    return *this;
}

double QubitFockOperator::hermiticity_defect() const {
    double d = linalg::asymmetry(pp);
    d = std::max(d, linalg::asymmetry(mm));
    d = std::max(d, (pm - mp.transpose()).cwiseAbs().maxCoeff());
    return d;
}

linalg::Matrix QubitFockOperator::err_sector() const {
    const auto ev = even_indices(space.dim());
    const auto od = odd_indices(space.dim());
    const auto n_od = static_cast<Eigen::Index>(od.size());
    const auto n_ev = static_cast<Eigen::Index>(ev.size());
    linalg::Matrix s(n_od + n_ev, n_od + n_ev);
    s.topLeftCorner(n_od, n_od) = submatrix(pp, od, od);
    s.topRightCorner(n_od, n_ev) = submatrix(pm, od, ev);
    s.bottomLeftCorner(n_ev, n_od) = submatrix(mp, ev, od);
    s.bottomRightCorner(n_ev, n_ev) = submatrix(mm, ev, ev);
    return s;
}

linalg::Matrix QubitFockOperator::cor_sector() const {
    const auto ev = even_indices(space.dim());
    const auto od = odd_indices(space.dim());
    const auto n_od = static_cast<Eigen::Index>(od.size());
    const auto n_ev = static_cast<Eigen::Index>(ev.size());
    linalg::Matrix s(n_ev + n_od, n_ev + n_od);
    s.topLeftCorner(n_ev, n_ev) = submatrix(pp, ev, ev);
    s.topRightCorner(n_ev, n_od) = submatrix(pm, ev, od);
    s.bottomLeftCorner(n_od, n_ev) = submatrix(mp, od, ev);
    s.bottomRightCorner(n_od, n_od) = submatrix(mm, od, od);
    return s;
}

double QubitFockOperator::cross_sector_norm() const {
    const auto ev = even_indices(space.dim());
    const auto od = odd_indices(space.dim());
    double m = 0.0;
    const auto upd = [&m](const linalg::Matrix& a) {
        if (a.size() > 0) m = std::max(m, a.cwiseAbs().maxCoeff());
    };
    upd(submatrix(pp, ev, od));
    upd(submatrix(pp, od, ev));
    upd(submatrix(mm, ev, od));
    upd(submatrix(mm, od, ev));
    upd(submatrix(pm, ev, ev));
    upd(submatrix(pm, od, od));
    upd(submatrix(mp, ev, ev));
    upd(submatrix(mp, od, od));
    return m;
}

double QubitFockOperator::trace_with(const QubitFockOperator& rho) const {
    return block_trace_product(pp, rho.pp) + block_trace_product(pm, rho.mp) +
           block_trace_product(mp, rho.pm) + block_trace_product(mm, rho.mm);
}

QubitFockOperator assemble_m_ph(const FockSpace& space, const FockOperator& m_ev,
                                const FockOperator& m_od) {
    QubitFockOperator op = QubitFockOperator::zero(space);
    op.pp = m_od.entries;
    op.mm = m_ev.entries;
    return op;
}

QubitFockOperator assemble_pi_fid(const FockSpace& space, double beta) {
    const linalg::Vector b = coherent_vector(space, beta);
    linalg::Vector b_ev = b, b_od = b;
    for (int n = 0; n < space.dim(); ++n) {
        if (n % 2 == 0) b_od(n) = 0.0;
        else b_ev(n) = 0.0;
    }
    QubitFockOperator op = QubitFockOperator::zero(space);
    op.pp = b_ev * b_ev.transpose() + b_od * b_od.transpose();
    op.mm = op.pp;
    op.pm = b_ev * b_od.transpose() + b_od * b_ev.transpose();
    op.mp = op.pm;
    return op;
}

QubitFockOperator assemble_pi_minus_sig(const FockSpace& space) {
    QubitFockOperator op = QubitFockOperator::zero(space);
    op.mm = linalg::Matrix::Identity(space.dim(), space.dim());
    return op;
}

QubitFockOperator assemble_M(const FockSpace& space, double beta, double kappa, double gamma,
                             const FockOperator& m_ev, const FockOperator& m_od) {
    if (kappa < 0.0 || gamma < 0.0)
        throw std::invalid_argument("assemble_M: kappa and gamma must be nonnegative");
    QubitFockOperator op = assemble_m_ph(space, m_ev, m_od);
    if (kappa != 0.0) op.add_scaled(assemble_pi_fid(space, beta), kappa);
    if (gamma != 0.0) op.add_scaled(assemble_pi_minus_sig(space), -gamma);
    return op;
}

linalg::Matrix witness_expectation_operator(const FockSpace& space, const math::WitnessParams& w,
                                            double beta) {
    space.validate();
    w.validate();
    const int dim = space.dim();
    const double r = w.r;
    const double center = r * beta / (1.0 + r);
    const double scale = 1.0 / std::sqrt(1.0 + r);
    const int order = space.n_max + w.m + 2;
    const math::GaussHermite gh = math::gauss_hermite(order);
    const double prefactor = std::exp(-r * beta * beta / (1.0 + r)) / kPi;

    linalg::CMatrix acc = linalg::CMatrix::Zero(dim, dim);
    linalg::CVector v(dim);
    for (int i = 0; i < order; ++i) {
        for (int j = 0; j < order; ++j) {
            const std::complex<double> omega(center + scale * gh.nodes[static_cast<size_t>(i)],
                                             scale * gh.nodes[static_cast<size_t>(j)]);
            const double nu = std::norm(omega - std::complex<double>(beta, 0.0));
            // the (1+r) prefactor of Lambda cancels against the substitution Jacobian
            const double lag = math::laguerre(w.m, 1, (1.0 + r) * nu);
            const double g = prefactor * gh.weights[static_cast<size_t>(i)] *
                             gh.weights[static_cast<size_t>(j)] * lag;
            v(0) = 1.0;
            for (int n = 1; n < dim; ++n) v(n) = v(n - 1) * omega / std::sqrt(static_cast<double>(n));
            acc.noalias() += g * (v * v.adjoint());
        }
    }
    linalg::Matrix out = acc.real();
    // enforce exact symmetry against rounding
    out = 0.5 * (out + out.transpose()).eval();
    return out;
}

}  // namespace cvqkd::povm
