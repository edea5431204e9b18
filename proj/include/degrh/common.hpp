#pragma once

#include <complex>
#include <stdexcept>
#include <string>

namespace degrh {

using cplx = std::complex<double>;

inline constexpr double kPi = 3.141592653589793238462643383279502884;
inline constexpr double kTwoPi = 2.0 * kPi;

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Bad input data: malformed expressions, invalid configuration, violated preconditions.
class ValidationError : public Error {
public:
    explicit ValidationError(const std::string& msg) : Error(msg) {}
};

/// A numerical procedure failed (non-convergence, inconsistent data, blow-up).
class NumericError : public Error {
public:
    explicit NumericError(const std::string& msg) : Error(msg) {}
};

/// Nonzero period on a declared closed orbit: the equation Lu=f is not globally solvable.
class PeriodGateError : public Error {
public:
    explicit PeriodGateError(const std::string& msg) : Error(msg) {}
};

/// Numerical parameters shared across the pipeline. Defaults are tuned for
/// desk-scale analytic inputs with O(1) data.
struct Tolerances {
    double nonsingularity = 1e-12;   // min sampled |A|+|B|
    double theta_on_orbit = 1e-8;    // |theta| along a declared orbit
    double tangency = 1e-8;          // direction-field cross products on orbits
    double minimality = 1e-6;        // min |d(theta)/dn| across an orbit
    double fd_step = 1e-5;           // central-difference step
    double snap = 1e-9;              // snapping of theta/pi to integers
    double geometry = 1e-10;         // orientation predicates on sampled curves
    double endpoint_on_boundary = 1e-7;  // orbit endpoint attachment to the boundary
    double map_boundary = 1e-6;      // conformal map boundary targets
    double svd_threshold = 1e-10;    // relative rank cutoff
    double period = 1e-10;           // zero-period gate
    double density_cap = 1e6;        // cap on f / L(conj Z) near orbits
};

struct Numerics {
    Tolerances tol;
    int grid_m = 4096;          // disk boundary grid size (power of two)
    int gj_nodes = 64;          // Gauss-Jacobi nodes per panel
    int map_nodes_per_panel = 16;
    int map_grading_depth = 8;
    double map_grading_factor = 2.0;
    int map_base_panels = 8;    // per smooth side, before grading
    int orbit_samples = 256;
    double pole_contour_radius = 0.1;
    double near_corner_radius = 0.05;
    double exclusion_factor = 0.05;  // fraction of diam(Omega) excluded around orbits/poles
    int report_grid = 80;       // lattice per axis for CSV grids
    int pompeiu_nr = 160;       // polar quadrature radii
    int pompeiu_ntheta = 256;   // polar quadrature angles
};

}  // namespace degrh
