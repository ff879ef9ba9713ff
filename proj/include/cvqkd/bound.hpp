#ifndef CVQKD_BOUND_HPP
#define CVQKD_BOUND_HPP

#include "cvqkd/linalg.hpp"
#include "cvqkd/povm.hpp"

namespace cvqkd::bound {

/// Largest eigenvalue of a small real symmetric matrix; closed form for n <= 2.
/// Rejects input with ||A - A^T||_max > 1e-9.
double sup_spectrum_sym(const linalg::Matrix& mat);

/// The 4x4 matrix bounding the err sector:
/// [ 1,               sqrt(V_od),        0,                      0          ]
/// [ sqrt(V_od),      k C_od + D_od,     k sqrt(C_od C_ev),      0          ]
/// [ 0,               k sqrt(C_od C_ev), k C_ev + D_ev - g,      sqrt(V_ev) ]
/// [ 0,               0,                 sqrt(V_ev),             1 - g      ]
linalg::Matrix build_m4d_err(const povm::PovmMoments& mom, double kappa, double gamma);

/// The 2x2 matrix bounding the cor sector:
/// [ k C_ev,             k sqrt(C_od C_ev) ]
/// [ k sqrt(C_od C_ev),  k C_od - g        ]
linalg::Matrix build_m2d_cor(const povm::PovmMoments& mom, double kappa, double gamma);

struct DualBound {
    double kappa = 0.0, gamma = 0.0;
    linalg::Matrix m4d_err;
    linalg::Matrix m2d_cor;
    double b_value = 0.0;
    int attained_branch = 0;  // 0: err matrix, 1: cor matrix
};

/// B(kappa, gamma) = max(sup_spectrum(M_4d_err), sup_spectrum(M_2d_cor)).
DualBound dual_bound(const povm::PovmMoments& mom, double kappa, double gamma);

struct InequalityReport {
    double sup_err = 0.0;   // sup spectrum of the err sector of M[kappa, gamma]
    double sup_cor = 0.0;   // sup spectrum of the cor sector
    double sup_m = 0.0;     // max of the two
    double b_value = 0.0;
    double margin = 0.0;    // b_value - sup_m
    double cross_norm = 0.0;
    bool holds = false;
    double tol = 0.0;
};

/// Checks sup spectrum of M[kappa, gamma] <= b_value + tol on the truncated space,
/// sector by sector.
InequalityReport verify_operator_inequality(const povm::QubitFockOperator& m, const DualBound& b,
                                            double tol = 1e-7);

}  // namespace cvqkd::bound

#endif  // CVQKD_BOUND_HPP
