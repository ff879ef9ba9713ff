#ifndef CVQKD_POVM_HPP
#define CVQKD_POVM_HPP

#include "cvqkd/linalg.hpp"
#include "cvqkd/mathkit.hpp"

#include <utility>

namespace cvqkd::povm {

/// Photon-number-truncated oscillator space.
struct FockSpace {
    int n_max = 40;
    int dim() const { return n_max + 1; }
    void validate() const;

    /// Smallest even cutoff whose Poisson tail at a = (beta + 4)^2 is below 1e-12,
    /// clamped to [16, 128].
    static int recommended_cutoff(double beta);
};

/// Real symmetric operator on the truncated oscillator.
struct FockOperator {
    FockSpace space;
    linalg::Matrix entries;

    static FockOperator zero(const FockSpace& s) { return {s, linalg::Matrix::Zero(s.dim(), s.dim())}; }
    static FockOperator identity(const FockSpace& s) { return {s, linalg::Matrix::Identity(s.dim(), s.dim())}; }
};

/// Operator on qubit (X basis) tensor truncated oscillator, stored as the four
/// qubit blocks <x| . |x'> for x, x' in {+, -}.
struct QubitFockOperator {
    FockSpace space;
    linalg::Matrix pp, pm, mp, mm;

    static QubitFockOperator zero(const FockSpace& s);
    QubitFockOperator& add_scaled(const QubitFockOperator& other, double factor);
    double hermiticity_defect() const;

    /// The two invariant sectors of the parity/X-basis structure:
    /// err sector spanned by {|+> (x) odd, |-> (x) even},
    /// cor sector spanned by {|+> (x) even, |-> (x) odd}.
    linalg::Matrix err_sector() const;
    linalg::Matrix cor_sector() const;
    /// Largest |entry| coupling the two sectors (zero for all operators built here).
    double cross_sector_norm() const;

    /// Trace against another (Hermitian, block-structured) operator.
    double trace_with(const QubitFockOperator& rho) const;
    double trace() const { return pp.trace() + mm.trace(); }
};

/// Coherent state |alpha| in the truncated number basis; throws if the Poisson
/// tail mass beyond the cutoff exceeds 1e-10.
linalg::Vector coherent_vector(const FockSpace& space, double alpha);

/// Poisson tail mass sum_{n > n_max} e^{-a} a^n / n! with a = alpha^2.
double coherent_tail_mass(int n_max, double alpha);

/// Projectors onto even and odd photon numbers.
std::pair<FockOperator, FockOperator> parity_projectors(const FockSpace& space);

/// Success POVM elements for the thresholded acceptance f_suc,0(x) = Theta(x - x_th):
/// M_ev(od) = (2/pi) integral_{x > x_th} dx dy  Pi_ev(od) |x+iy><x+iy| Pi_ev(od).
struct SuccessPovm {
    FockOperator m_ev;
    FockOperator m_od;
    double x_th = 0.0;
};
SuccessPovm build_success_povm(const FockSpace& space, double x_th);

/// The six scalar moments of the POVM against the reference coherent state.
struct PovmMoments {
    double c_ev = 0.0, c_od = 0.0;  // <beta|Pi_ev(od)|beta>, analytic
    double d_ev = 0.0, d_od = 0.0;  // <beta|M_ev(od)|beta> / C_ev(od)
    double v_ev = 0.0, v_od = 0.0;  // <beta|M^2|beta>/C - D^2, clamped at 0
    double beta = 0.0;
};
PovmMoments povm_moments(const FockSpace& space, double beta, const FockOperator& m_ev,
                         const FockOperator& m_od);

/// Phase-error operator: (+,+) block M_od, (-,-) block M_ev.
QubitFockOperator assemble_m_ph(const FockSpace& space, const FockOperator& m_ev,
                                const FockOperator& m_od);

/// Fidelity projector onto span{|0>|beta>, |1>|-beta>} written in X-basis blocks.
QubitFockOperator assemble_pi_fid(const FockSpace& space, double beta);

/// |-><-| on the qubit tensor identity on the oscillator.
QubitFockOperator assemble_pi_minus_sig(const FockSpace& space);

/// M[kappa, gamma] = M_ph + kappa Pi_fid - gamma Pi_-^sig.
QubitFockOperator assemble_M(const FockSpace& space, double beta, double kappa, double gamma,
                             const FockOperator& m_ev, const FockOperator& m_od);

/// Operator W with Tr(rho W) = E_rho[Lambda_{m,r}(|omega - beta|^2)] under the
/// heterodyne distribution, assembled by an exact Gauss-Hermite rule on the
/// truncated space.
linalg::Matrix witness_expectation_operator(const FockSpace& space, const math::WitnessParams& w,
                                            double beta);

}  // namespace cvqkd::povm

#endif  // CVQKD_POVM_HPP
