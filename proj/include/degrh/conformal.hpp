#pragma once

#include <Eigen/Dense>
#include <functional>
#include <optional>
#include <vector>

#include "degrh/common.hpp"
#include "degrh/field.hpp"
#include "degrh/geometry.hpp"

namespace degrh::conformal {

/// One smooth piece of a Jordan boundary, parametrized on [t0, t1]. The
/// callable must remain evaluable slightly beyond the interval (finite
/// differences straddle the ends).
struct BoundarySide {
    double t0 = 0.0;
    double t1 = 0.0;
    std::function<cplx(double)> w;
};

struct MapOptions {
    int nodes_per_panel = 16;
    int base_panels_per_side = 8;
    int grading_depth = 8;
    double grading_factor = 2.0;
    double end_region_fraction = 0.25;  // side fraction covered by each corner ladder
    int newton_max = 60;
};

/// Riemann map of a Jordan domain onto the unit disk, normalized by
/// forward(center) = 0 and positive derivative at the center.
///
/// The map is represented as f(w) = (w - a) exp(g(w)) with Re g = -log|w - a|
/// on the boundary; g comes from a Neumann-kernel (double layer) integral
/// equation discretized by composite Gauss-Legendre panels with geometric
/// grading toward corners. Boundary values use per-panel polynomial moments
/// so the correspondence is an interior limit, not an extrapolation.
class DiskMapper {
public:
    DiskMapper() = default;
    DiskMapper(std::vector<BoundarySide> sides, bool corners, cplx center,
               const MapOptions& opt);

    cplx forward(cplx w) const;
    cplx derivative(cplx w) const;  // f'(w), finite differences of g
    cplx inverse(cplx z) const;

    /// Continuous boundary angle theta(t) (increasing with t); t must lie in
    /// one of the side intervals.
    double boundary_angle(double t) const;

    /// Inverse boundary correspondence.
    double param_from_angle(double theta) const;

    /// Unwrapped corner angles, one per side junction: corner k sits at the
    /// end of side k. Empty when the boundary is a single smooth loop.
    const std::vector<double>& corner_angles() const { return corner_angles_; }
    /// Angle span covered by side k: [side_angle_begin[k], side_angle_begin[k]+...].
    const std::vector<double>& table_params() const { return table_t_; }
    const std::vector<double>& table_angles() const { return table_theta_; }

    cplx center() const { return center_; }
    double max_corner_mismatch() const { return corner_mismatch_; }

private:
    struct Panel {
        int side = 0;
        double a = 0.0, b = 0.0;
        std::vector<double> t;
        std::vector<cplx> w, wp;
        std::vector<double> quad_w;
        cplx wa, wb, mid, half;
        cplx bc_center;
        double bc_radius = 0.0;
        Eigen::VectorXcd coeff;          // interpolation of mu in the chord coordinate
        std::vector<double> xi_re, xi_im;  // curve-in-chord-coordinates, sorted by re
    };

    std::vector<BoundarySide> sides_;
    bool corners_ = true;
    cplx center_;
    MapOptions opt_;
    std::vector<Panel> panels_;
    std::vector<double> mu_;  // density at all nodes, in panel order
    cplx g_center_;
    std::vector<double> table_t_, table_theta_;
    num::Pchip angle_interp_, param_interp_;
    std::vector<double> corner_angles_;
    double corner_mismatch_ = 0.0;
    std::vector<std::pair<cplx, cplx>> seeds_;  // (w, z) pairs for inverse Newton

    cplx side_point(int side, double t) const { return sides_[side].w(t); }
    cplx side_deriv(int side, double t) const;
    cplx side_second(int side, double t) const;
    cplx cauchy(cplx z, bool boundary_limit) const;
    double clamp_to_sides(double t) const;
    cplx g(cplx w) const { return cauchy(w, false) - cplx(0.0, g_center_.imag()); }
    void build_panels();
    void solve_density();
    void build_tables();
    void build_seeds();
};

/// Holomorphic disk map of one component image, wrapping DiskMapper with the
/// orientation realization (reversed components are mapped through conjugated
/// image coordinates) and the gluing rotation.
class ComponentMap {
public:
    ComponentMap() = default;
    ComponentMap(std::vector<BoundarySide> sides, bool corners, cplx center, bool preserved,
                 const MapOptions& opt);

    bool preserved() const { return preserved_; }
    cplx rotation() const { return rotation_; }
    void apply_rotation(cplx r);

    /// w lives in the first-integral image plane.
    cplx forward(cplx w) const;
    cplx inverse(cplx z) const;
    double angle_from_param(double t) const;  // increasing for preserved, decreasing otherwise
    double param_from_angle(double theta) const;
    const DiskMapper& core() const { return core_; }

private:
    DiskMapper core_;
    bool preserved_ = true;
    cplx rotation_{1.0, 0.0};
};

struct AtlasComponent {
    int component = -1;
    ComponentMap map;
    // per word entry: the unimodular image c_jk of the following orbit
    std::vector<cplx> c_images;
    std::vector<double> c_angles;  // wrapped to [0, 2*pi)
    // per closed orbit id in this component: the puncture image z_jl
    std::vector<std::pair<int, cplx>> punctures;
    cplx anchor;          // p_j^* in the source plane
    cplx anchor_image;    // F(p_j^*), before the map
};

struct FirstIntegralAtlas {
    std::vector<AtlasComponent> comps;
    const AtlasComponent& comp(int id) const { return comps.at(id); }
    AtlasComponent& comp(int id) { return comps.at(id); }
};

/// Derive orientation flags from the sign of the Jacobian of F per component
/// and validate alternation. Throws when the base component is reversed
/// (move s0) or the flags do not alternate.
void orient_from_first_integral(geom::Decomposition& dec, const field::ScalarField& F,
                                double fd_step = 1e-5);

/// Build Z_j = M_j o F for every component. Anchors default to the component
/// representative points; a non-empty anchors vector overrides them.
FirstIntegralAtlas build_atlas(const geom::Decomposition& dec, const field::ScalarField& F,
                               const std::vector<cplx>& anchors, const Numerics& num);

/// Rotate the two maps adjacent to the orbit so their images of it agree
/// (anchor side kept fixed). Returns the applied unimodular factor.
cplx align(FirstIntegralAtlas& atlas, const geom::Decomposition& dec, int orbit_id,
           int anchor_component);

/// Propagate alignment over the adjacency tree from the base component.
void align_all(FirstIntegralAtlas& atlas, const geom::Decomposition& dec);

/// Evaluate Z_j at a source point.
cplx atlas_forward(const FirstIntegralAtlas& atlas, const geom::Decomposition& dec,
                   const field::ScalarField& F, int component, cplx p);

/// Push a boundary function (of the source boundary parameter) to the disk
/// grid of component j. Throws when a requested angle collides with some c_jk.
std::vector<cplx> boundary_pushforward(const FirstIntegralAtlas& atlas,
                                       const geom::Decomposition& dec, int component,
                                       const std::function<cplx(double)>& h,
                                       const std::vector<double>& angles,
                                       double guard = 1e-12);

}  // namespace degrh::conformal
