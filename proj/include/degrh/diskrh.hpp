#pragma once

#include <Eigen/Dense>
#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "degrh/common.hpp"
#include "degrh/numerics.hpp"

namespace degrh::disk {

/// A discontinuity point c_k of the pushed-forward boundary data, with its
/// jump bookkeeping and the exact one-sided values of the original data.
struct Discontinuity {
    double angle = 0.0;  // in [0, 2*pi)
    int q = 0;
    double alpha = 0.0;  // in [0, 1)
    int orbit_id = -1;
    cplx lambda_minus, lambda_plus;  // Lambda at p^-, p^+
    double psi_minus = 0.0, psi_plus = 0.0;
};

/// Boundary data of one disk problem Re(conj(lambda) w) = psi on the circle.
struct DiskData {
    int M = 4096;  // power of two
    int kappa = 0;
    bool derive_kappa = false;  // take kappa from the winding of lambda0 (synthetic data)
    std::vector<Discontinuity> cs;  // sorted by angle
    std::function<cplx(double)> lambda;  // exact evaluator of the angle
    std::function<double(double)> psi;
};

/// Grid offset placing all M uniform nodes maximally far from the c_k.
double choose_offset(const std::vector<double>& c_angles, int M);

/// The paper's branch of arg(zeta - c) on the circle: 0 at c+, pi at c-.
double phi_c_on_circle(double theta, double c_angle);
/// The same branch continued into the closed disk.
double phi_c_in_disk(cplx z, double c_angle);
/// (z - c)^alpha in the paper's branch, for z in the closed disk.
cplx power_factor(cplx z, double c_angle, double alpha);

/// Alternating +-1 function on the arcs between odd-parity discontinuities.
struct AlternatingAssignment {
    std::vector<double> points;  // sorted angles (auxiliary point included)
    bool has_aux = false;
    double aux_angle = 0.0;
    double beta(double theta) const;  // +1 on the arc after points[0], alternating
};

/// Build the alternating function; when the odd count is odd an auxiliary
/// point is inserted at the midpoint of the longest gap between consecutive
/// discontinuity points.
AlternatingAssignment build_beta(std::vector<double> odd_angles,
                                 const std::vector<double>& all_angles);

/// Coefficient of (z-c)^{-alpha} in the Cauchy integral of g(zeta)/(zeta-c)^alpha
/// to the left of the arc: (e^{i pi alpha} g(c+) - e^{-i pi alpha} g(c-)) / (2i sin(pi alpha)).
cplx singular_coefficient(cplx g_plus, cplx g_minus, double alpha);

/// Schwarz operator on the disk from real samples on an offset-uniform grid:
/// S(f)(z) = c_0 + 2 sum_{n>=1} c_n z^n, Re S(f) -> f on the boundary and
/// Im S(f)(0) = 0.
class Schwarz {
public:
    Schwarz() = default;
    Schwarz(const std::vector<double>& samples, double offset);
    cplx operator()(cplx z) const;
    /// Boundary value of the harmonic conjugate at grid node i.
    double conjugate_at(int i) const { return conj_.at(i); }
    /// Conjugate at an arbitrary angle via the truncated series.
    double conjugate_at_angle(double theta) const;
    const std::vector<cplx>& coefficients() const { return coef_; }

private:
    std::vector<cplx> coef_;   // c_0 .. c_{M/2}
    std::vector<double> conj_;
    double offset_ = 0.0;
};

struct FamilyParams {
    double d0 = 0.0;
    std::vector<cplx> d;  // d_1..d_kappa
    int count() const { return 1 + 2 * static_cast<int>(d.size()); }
};

/// Solver for one discontinuous Riemann-Hilbert problem on the unit disk.
class DiskSolver {
public:
    DiskSolver(DiskData data, const Numerics& num = {});

    const DiskData& data() const { return data_; }
    int kappa() const { return data_.kappa; }
    const AlternatingAssignment& assignment() const { return beta_; }
    const std::vector<cplx>& lambda_tilde() const { return lambda_tilde_; }
    const std::vector<cplx>& lambda0() const { return lambda0_; }
    const std::vector<double>& grid_angles() const { return angles_; }
    double offset() const { return offset_; }
    int winding_lambda0() const { return winding_; }
    cplx lambda0_at(double theta) const;

    /// gamma = S(arg(zeta^{-kappa} lambda0)).
    cplx gamma(cplx z) const;
    double gamma_re_boundary(double theta) const;  // continuous branch of arg lambda0 - kappa*theta
    double gamma_im_boundary(double theta) const;

    /// rho = beta psi / prod |zeta - c|^alpha and rho_hat = e^{Im gamma} rho.
    double rho(double theta) const;
    double rho_hat(double theta) const;

    /// S(rho_hat): adaptive Gauss-Jacobi panels in the interior, the series
    /// continuation in a thin band at the rim, and the differenced cotangent
    /// formula for boundary values.
    cplx schwarz_rho_hat(cplx z) const;
    cplx schwarz_rho_hat_boundary(double theta) const;

    /// Moments int rho_hat zeta^{-s} dzeta, s = 1..count.
    std::vector<cplx> continuity_residuals(int count) const;

    /// Solution families. w0 satisfies Re(conj(lambda0) w0) = rho_hat-free data;
    /// w = w0 * prod (z-c)^alpha solves the original problem.
    cplx w0(cplx z, const FamilyParams& p, bool with_particular = true) const;
    cplx w(cplx z, const FamilyParams& p, bool with_particular = true) const;
    cplx w_boundary(double theta, const FamilyParams& p, bool with_particular = true) const;

    /// delta real constraint rows over (d0, Re d_l, Im d_l) forcing w to vanish
    /// at the alpha = 0 discontinuities.
    Eigen::MatrixXd vanish_constraints(const std::vector<double>& zero_alpha_angles) const;
    /// Orthonormal kernel basis of the constraint system (columns).
    std::vector<FamilyParams> homogeneous_basis(double svd_threshold = 1e-10) const;

    /// Closed-form orbit value at discontinuity k (Eq of the boundary limit);
    /// requires alpha_k > 0.
    cplx boundary_limit_closed_form(int k) const;
    /// Radial extrapolation of w((1-delta) c_k) for cross-validation.
    cplx boundary_limit_radial(int k, const FamilyParams& p) const;

    /// Laurent coefficient a_{-m} of w at 0 on |z| = radius.
    cplx laurent_coefficient(int m, const FamilyParams& p, double radius = 0.1) const;
    /// Smallest s <= -kappa with negligible higher-order Laurent coefficients.
    int pole_order(const FamilyParams& p, double rel_threshold = 1e-8) const;

    bool has_particular() const { return has_rho_; }

private:
    DiskData data_;
    Numerics num_;
    int M_ = 0;
    double offset_ = 0.0;
    std::vector<double> angles_;
    std::vector<cplx> lambda_grid_;
    std::vector<double> psi_grid_;
    std::vector<cplx> lambda_tilde_, lambda0_;
    AlternatingAssignment beta_;
    int winding_ = 0;
    Schwarz gamma_s_;
    std::vector<double> arg0_grid_;  // continuous branch of arg(zeta^-k lambda0)
    bool has_rho_ = false;

    // clustered per-arc tables of the smooth part psi * e^{Im gamma}
    struct ArcTable {
        double a = 0.0, b = 0.0;          // angles, b > a (may exceed 2*pi)
        double alpha_left = 0.0, alpha_right = 0.0;
        double beta_sign = 1.0;           // constant beta on this arc piece
        num::Pchip table;                  // u in [0,1] -> psi*e^{Im gamma}
        double angle_of(double u) const;   // clustered map
        double u_of(double angle) const;
    };
    std::vector<ArcTable> arcs_;
    std::shared_ptr<Schwarz> smooth_rho_;  // spectral path when there are no jumps

    void build_symbols();
    void build_gamma();
    void build_smooth_path();
    void build_arc_tables();
    const ArcTable& arc_of(double theta) const;
    cplx integrate_kernel(const std::function<cplx(double, cplx)>& kernel, cplx z) const;
    cplx schwarz_rho_hat_far(cplx z) const;
};

}  // namespace degrh::disk
