#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "degrh/common.hpp"
#include "degrh/conformal.hpp"
#include "degrh/diskrh.hpp"
#include "degrh/field.hpp"
#include "degrh/geometry.hpp"
#include "degrh/indexcalc.hpp"

namespace degrh::assemble {

/// Full problem statement: L u = f in Omega, Re(conj(Lambda) u) = phi on the
/// boundary. Lambda and phi are functions of the boundary parameter.
struct Problem {
    field::VectorField vf;
    geom::DomainSpec domain;
    std::vector<geom::OrbitArc> orbits;
    std::vector<geom::ClosedOrbit> closed_orbits;
    field::ScalarField F;
    std::function<cplx(double)> Lambda;
    std::function<double(double)> phi;
    field::ScalarField f;  // empty for the Lu = 0 problems
    std::vector<cplx> anchors;  // optional per-component normalization points
    Numerics num;
};

/// Decomposition, atlas, indices and per-component disk data built once and
/// shared between solves.
struct Workspace {
    Problem problem;
    geom::Decomposition dec;
    conformal::FirstIntegralAtlas atlas;
    idx::IndexReport indices;
    std::vector<std::shared_ptr<disk::DiskSolver>> solvers;  // per component
    field::ConditionPReport condition_p;  // advisory

    int orbit_cs_index(int component, int orbit_id) const;
};

std::shared_ptr<Workspace> build_workspace(Problem problem);

/// Solution of the disc dbar problem dw/dzbar = g by the area integral
/// T g(z) = -(1/pi) int g(zeta)/(zeta - z) dA, on a polar grid with the
/// singular cell handled by subtracting g(z) (whose transform is conj(z)).
class Pompeiu {
public:
    Pompeiu() = default;
    Pompeiu(std::function<cplx(cplx)> g, int n_r, int n_theta);
    cplx operator()(cplx z) const;
    double capped_fraction() const { return capped_fraction_; }

private:
    struct Cell {
        cplx center;
        double weight;
        cplx value;
    };
    std::vector<Cell> cells_;
    std::function<cplx(cplx)> g_;
    double capped_fraction_ = 0.0;
};

struct OrbitValue {
    int orbit_id = 0;
    cplx side_a, side_b;   // radial limits from the two incident components
    cplx closed_form;      // from the endpoint data of Lambda, phi
    int epsilon = 1;       // recorded sign
    double mismatch = 0.0; // worst |side - eps*closed_form|
};

struct PoleInfo {
    int component = 0;
    cplx location;   // source-plane normalization point Z_j^{-1}(0)
    int order = 0;
    double laurent_tail_ratio = 0.0;  // |a_{-(order+1)}| / |a_{-order}| when order > 0
};

struct EvalResult {
    cplx value;
    int mask = 0;  // 0 valid, 1 outside, 2 near orbit, 3 near pole
};

/// A global solution assembled from per-component disk solutions.
class GlobalSolution {
public:
    std::shared_ptr<const Workspace> ws;
    std::vector<disk::FamilyParams> params;   // per component
    std::vector<char> include_particular;     // per component
    std::vector<char> zero_component;         // identically zero components
    std::vector<std::function<cplx(cplx)>> correction;  // v_j of the source point
    std::vector<OrbitValue> orbit_values;
    std::vector<PoleInfo> poles;
    std::vector<std::vector<cplx>> moment_residuals;  // per component, kappa < 0
    double capped_density_fraction = 0.0;

    /// u at an interior point; throws NumericError on pole proximity.
    cplx operator()(cplx p) const;
    /// Masked evaluation for report grids.
    EvalResult eval_masked(cplx p, double pole_radius, double orbit_radius) const;
    /// u at a boundary point given the boundary parameter.
    cplx boundary(double t) const;
    /// disk-side value for component j at z.
    cplx disk_value(int component, cplx z) const;
};

/// Basis of the homogeneous problem (Lu = 0, Re(conj(Lambda) u) = 0): the
/// solutions are continuous, vanish on the orbits, and are zero on components
/// with 2 kappa < delta.
std::vector<GlobalSolution> solve_homogeneous(std::shared_ptr<Workspace> ws);

/// Particular solution of the boundary problem with f = 0 (free parameters
/// zero); requires generic data. Poles sit at the normalization points of the
/// negative-index components.
GlobalSolution solve_rh(std::shared_ptr<Workspace> ws);

/// Full problem Lu = f: checks the zero-period condition on declared closed
/// orbits, builds per-component particular terms with the Pompeiu transform,
/// and solves the modified boundary problem.
GlobalSolution solve_full(std::shared_ptr<Workspace> ws);

struct ResidualReport {
    double interior_sup = 0.0;
    double interior_l2 = 0.0;
    int interior_samples = 0;
    double boundary_sup = 0.0;
    int boundary_samples = 0;
    double capped_density_fraction = 0.0;
};

/// Finite-difference residuals |Lu - f| on an interior lattice (excluding
/// neighborhoods of orbits, poles and the boundary) and boundary residuals
/// |Re(conj(Lambda) u) - phi| away from orbit endpoints.
ResidualReport residual_report(const GlobalSolution& sol, int grid_n = 60);

}  // namespace degrh::assemble
