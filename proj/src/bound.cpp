#include "cvqkd/bound.hpp"

#include <cmath>
#include <stdexcept>

namespace cvqkd::bound {

double sup_spectrum_sym(const linalg::Matrix& mat) {
    linalg::require_symmetric(mat, 1e-9, "sup_spectrum_sym");
    const auto n = mat.rows();
    if (n == 1) return mat(0, 0);
    if (n == 2) {
        const double half_tr = 0.5 * (mat(0, 0) + mat(1, 1));
        const double half_diff = 0.5 * (mat(0, 0) - mat(1, 1));
        return half_tr + std::hypot(half_diff, mat(0, 1));
    }
    return linalg::sym_eig_max(0.5 * (mat + mat.transpose()));
}

linalg::Matrix build_m4d_err(const povm::PovmMoments& mom, double kappa, double gamma) {
    if (kappa < 0.0 || gamma < 0.0)
        throw std::invalid_argument("build_m4d_err: kappa and gamma must be nonnegative");
    const double sv_od = std::sqrt(mom.v_od);
    const double sv_ev = std::sqrt(mom.v_ev);
    const double cross = kappa * std::sqrt(mom.c_od * mom.c_ev);
    linalg::Matrix m(4, 4);
    m << 1.0, sv_od, 0.0, 0.0,
         sv_od, kappa * mom.c_od + mom.d_od, cross, 0.0,
         0.0, cross, kappa * mom.c_ev + mom.d_ev - gamma, sv_ev,
         0.0, 0.0, sv_ev, 1.0 - gamma;
    return m;
}

linalg::Matrix build_m2d_cor(const povm::PovmMoments& mom, double kappa, double gamma) {
    if (kappa < 0.0 || gamma < 0.0)
        throw std::invalid_argument("build_m2d_cor: kappa and gamma must be nonnegative");
    const double cross = kappa * std::sqrt(mom.c_od * mom.c_ev);
    linalg::Matrix m(2, 2);
    m << kappa * mom.c_ev, cross,
         cross, kappa * mom.c_od - gamma;
    return m;
}

DualBound dual_bound(const povm::PovmMoments& mom, double kappa, double gamma) {
    DualBound b;
    b.kappa = kappa;
    b.gamma = gamma;
    b.m4d_err = build_m4d_err(mom, kappa, gamma);
    b.m2d_cor = build_m2d_cor(mom, kappa, gamma);
    const double sup_err = sup_spectrum_sym(b.m4d_err);
    const double sup_cor = sup_spectrum_sym(b.m2d_cor);
    if (sup_err >= sup_cor) {
        b.b_value = sup_err;
        b.attained_branch = 0;
    } else {
        b.b_value = sup_cor;
        b.attained_branch = 1;
    }
    return b;
}

InequalityReport verify_operator_inequality(const povm::QubitFockOperator& m, const DualBound& b,
                                            double tol) {
    InequalityReport rep;
    rep.tol = tol;
    rep.b_value = b.b_value;
    rep.cross_norm = m.cross_sector_norm();
    rep.sup_err = linalg::sym_eig_max(m.err_sector());
    rep.sup_cor = linalg::sym_eig_max(m.cor_sector());
    rep.sup_m = std::max(rep.sup_err, rep.sup_cor);
    rep.margin = rep.b_value - rep.sup_m;
    rep.holds = rep.sup_m <= rep.b_value + tol && rep.cross_norm < 1e-10;
    return rep;
}

}  // namespace cvqkd::bound
