#include "degrh/assemble.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

namespace degrh::assemble {

namespace {

int thread_budget(int tasks) {
    int cap = static_cast<int>(std::thread::hardware_concurrency());
    if (cap <= 0) cap = 1;
    if (const char* env = std::getenv("DEGRH_THREADS")) {
        const int v = std::atoi(env);
        if (v > 0) cap = std::min(cap, v);
    }
    return std::max(1, std::min(cap, tasks));
}

}  // namespace

int Workspace::orbit_cs_index(int component, int orbit_id) const {
    const auto& cs = solvers.at(component)->data().cs;
    for (std::size_t k = 0; k < cs.size(); ++k)
        if (cs[k].orbit_id == orbit_id) return static_cast<int>(k);
    throw NumericError("workspace: orbit not incident to component");
}

std::shared_ptr<Workspace> build_workspace(Problem problem) {
    auto ws = std::make_shared<Workspace>();
    ws->dec = geom::decompose(problem.domain, problem.orbits, problem.closed_orbits, problem.num);
    conformal::orient_from_first_integral(ws->dec, problem.F, problem.num.tol.fd_step);
    ws->atlas = conformal::build_atlas(ws->dec, problem.F, problem.anchors, problem.num);
    conformal::align_all(ws->atlas, ws->dec);
    ws->indices = idx::compute_indices(ws->dec, problem.Lambda, problem.num.tol);
    ws->condition_p = field::check_condition_P(problem.vf, ws->dec, 40, problem.num.tol);

    const Curve tau = problem.domain.boundary;
    const auto Lambda = problem.Lambda;
    const auto phi = problem.phi;
    const int ncomp = static_cast<int>(ws->dec.components.size());
    ws->solvers.resize(ncomp);

    std::vector<disk::DiskData> datas(ncomp);
    for (int j = 0; j < ncomp; ++j) {
        const auto& comp = ws->dec.components[j];
        const auto& ac = ws->atlas.comp(j);
        disk::DiskData d;
        d.M = problem.num.grid_m;
        d.kappa = ws->indices.components[j].kappa;
        for (std::size_t k = 0; k < comp.word.size(); ++k) {
            const auto& we = comp.word[k];
            if (we.orbit_id < 0) continue;
            const auto& jmp = ws->indices.jumps[we.orbit_id];
            const auto& inc = ws->dec.incidence[we.orbit_id];
            disk::Discontinuity c;
            c.angle = ac.c_angles[k];
            c.q = jmp.q;
            c.alpha = jmp.alpha;
            c.orbit_id = we.orbit_id;
            const double tm = num::wrap_2pi(inc.p_minus_param);
            const double tp = num::wrap_2pi(inc.p_plus_param);
            c.lambda_minus = Lambda(tm);
            c.lambda_plus = Lambda(tp);
            c.psi_minus = phi(tm);
            c.psi_plus = phi(tp);
            d.cs.push_back(c);
        }
        // capture the component map by reference into the workspace lifetime
        const conformal::AtlasComponent* acp = &ws->atlas.comp(j);
        d.lambda = [acp, Lambda](double theta) {
            const double t = acp->map.param_from_angle(theta);
            return Lambda(num::wrap_2pi(t));
        };
        d.psi = [acp, phi](double theta) {
            const double t = acp->map.param_from_angle(theta);
            return phi(num::wrap_2pi(t));
        };
        datas[j] = std::move(d);
    }

    // per-component solver construction is independent; DEGRH_THREADS caps it
    const int nthreads = thread_budget(ncomp);
    std::vector<std::string> errors(ncomp);
    auto work = [&](int begin, int step) {
        for (int j = begin; j < ncomp; j += step) {
            try {
                ws->solvers[j] =
                    std::make_shared<disk::DiskSolver>(datas[j], problem.num);
            } catch (const std::exception& e) {
                errors[j] = e.what();
            }
        }
    };
    if (nthreads == 1) {
        work(0, 1);
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < nthreads; ++t) pool.emplace_back(work, t, nthreads);
        for (auto& th : pool) th.join();
    }
    for (int j = 0; j < ncomp; ++j)
        if (!errors[j].empty())
            throw NumericError("component " + std::to_string(j) + ": " + errors[j]);

    ws->problem = std::move(problem);
    return ws;
}

// ---------------------------------------------------------------------------

Pompeiu::Pompeiu(std::function<cplx(cplx)> g, int n_r, int n_theta) : g_(std::move(g)) {
    cells_.reserve(static_cast<std::size_t>(n_r) * n_theta);
    const double dr = 1.0 / n_r;
    const double dth = kTwoPi / n_theta;
    for (int i = 0; i < n_r; ++i) {
        const double r = (i + 0.5) * dr;
        for (int k = 0; k < n_theta; ++k) {
            Cell c;
            c.center = std::polar(r, (k + 0.5) * dth);
            c.weight = r * dr * dth;
            c.value = g_(c.center);
            cells_.push_back(c);
        }
    }
}

cplx Pompeiu::operator()(cplx z) const {
    if (std::abs(z) > 1.0 + 1e-12)
        throw ValidationError("pompeiu: evaluation point outside the closed disk");
    const cplx gz = g_(z);
    cplx acc = 0.0;
    for (const auto& c : cells_) {
        const cplx d = c.center - z;
        if (std::abs(d) < 1e-14) continue;  // the subtracted term vanishes here
        acc += c.weight * (c.value - gz) / d;
    }
    // T(const)(z) = const * conj(z) on the unit disk
    return -acc / kPi + gz * std::conj(z);
}

// ---------------------------------------------------------------------------

cplx GlobalSolution::disk_value(int component, cplx z) const {
    const auto& solver = *ws->solvers[component];
    cplx v = solver.w(z, params[component], include_particular[component] != 0);
    return v;
}

cplx GlobalSolution::operator()(cplx p) const {
    const auto res = eval_masked(p, 1e-3, 0.0);
    if (res.mask == 1) throw NumericError("evaluation point outside the domain");
    if (res.mask == 3) throw NumericError("evaluation point too close to a pole");
    return res.value;
}

EvalResult GlobalSolution::eval_masked(cplx p, double pole_radius, double orbit_radius) const {
    EvalResult out;
    geom::LocateResult loc;
    try {
        loc = geom::locate_detail(ws->dec, p, std::max(orbit_radius, 1e-9));
    } catch (const Error&) {
        out.mask = 1;
        // distinguish "near orbit" from "outside"
        for (const auto& orb : ws->dec.orbits) {
            auto pts = orb.curve.sample(128);
            if (geom::polyline_distance(pts, p) < std::max(orbit_radius, 1e-9)) out.mask = 2;
        }
        return out;
    }
    const int j = loc.component;
    for (const auto& pole : poles) {
        if (pole.component == j && std::abs(p - pole.location) < pole_radius) {
            out.mask = 3;
            return out;
        }
    }
    if (zero_component[j]) {
        out.value = 0.0;
    } else if (loc.closed_orbit >= 0) {
        // constant on the collapsed interior: the value at the puncture image
        const auto& ac = ws->atlas.comp(j);
        cplx zp;
        bool found = false;
        for (const auto& [id, zz] : ac.punctures)
            if (id == loc.closed_orbit) {
                zp = zz;
                found = true;
            }
        if (!found) throw NumericError("missing puncture image");
        out.value = disk_value(j, zp);
    } else {
        const cplx z = conformal::atlas_forward(ws->atlas, ws->dec, ws->problem.F, j, p);
        out.value = disk_value(j, z);
    }
    if (!correction.empty() && correction[j]) out.value += correction[j](p);
    return out;
}

cplx GlobalSolution::boundary(double t) const {
    // find the component whose word contains this boundary parameter
    for (const auto& comp : ws->dec.components) {
        for (const auto& we : comp.word) {
            double tw = we.arc_begin + num::wrap_2pi(t - we.arc_begin);
            if (tw <= we.arc_end) {
                const int j = comp.id;
                cplx val;
                if (zero_component[j]) {
                    val = 0.0;
                } else {
                    const double theta = ws->atlas.comp(j).map.angle_from_param(tw);
                    val = ws->solvers[j]->w_boundary(theta, params[j],
                                                     include_particular[j] != 0);
                }
                if (!correction.empty() && correction[j])
                    val += correction[j](ws->dec.domain.boundary(num::wrap_2pi(t)));
                return val;
            }
        }
    }
    throw NumericError("boundary parameter not covered by any component word");
}

// ---------------------------------------------------------------------------

namespace {

GlobalSolution blank_solution(std::shared_ptr<const Workspace> ws) {
    GlobalSolution sol;
    sol.ws = ws;
    const int n = static_cast<int>(ws->dec.components.size());
    sol.params.resize(n);
    sol.include_particular.assign(n, 0);
    sol.zero_component.assign(n, 0);
    return sol;
}

void fill_orbit_values(GlobalSolution& sol) {
    const auto& ws = *sol.ws;
    for (const auto& inc : ws.dec.incidence) {
        OrbitValue ov;
        ov.orbit_id = inc.orbit_id;
        const int a = inc.component_a, b = inc.component_b;
        const int ka = ws.orbit_cs_index(a, inc.orbit_id);
        const int kb = ws.orbit_cs_index(b, inc.orbit_id);
        ov.closed_form = ws.solvers[a]->boundary_limit_closed_form(ka);
        ov.side_a = ws.solvers[a]->boundary_limit_radial(ka, sol.params[a]);
        ov.side_b = ws.solvers[b]->boundary_limit_radial(kb, sol.params[b]);
        double best = std::numeric_limits<double>::infinity();
        for (int eps : {1, -1}) {
            const double m = std::max(std::abs(ov.side_a - double(eps) * ov.closed_form),
                                      std::abs(ov.side_b - double(eps) * ov.closed_form));
            if (m < best) {
                best = m;
                ov.epsilon = eps;
            }
        }
        ov.mismatch = best;
        const double scale = 1.0 + std::abs(ov.closed_form);
        if (best > 0.2 * scale)
            throw NumericError("orbit value does not match the closed form on orbit " +
                               std::to_string(inc.orbit_id));
        sol.orbit_values.push_back(ov);
    }
}

void fill_poles(GlobalSolution& sol) {
    const auto& ws = *sol.ws;
    for (const auto& ci : ws.indices.components) {
        if (ci.kappa >= 0) continue;
        PoleInfo pi;
        pi.component = ci.component;
        pi.location = ws.atlas.comp(ci.component).anchor;
        pi.order = ws.solvers[ci.component]->pole_order(sol.params[ci.component]);
        if (pi.order > 0) {
            const double lead = std::abs(
                ws.solvers[ci.component]->laurent_coefficient(pi.order, sol.params[ci.component]));
            const double next = std::abs(ws.solvers[ci.component]->laurent_coefficient(
                pi.order + 1, sol.params[ci.component]));
            pi.laurent_tail_ratio = lead > 0 ? next / lead : 0.0;
        }
        sol.poles.push_back(pi);
        sol.moment_residuals.push_back(
            ws.solvers[ci.component]->continuity_residuals(-ci.kappa));
    }
}

}  // namespace

std::vector<GlobalSolution> solve_homogeneous(std::shared_ptr<Workspace> ws) {
    std::vector<GlobalSolution> basis;
    for (const auto& ci : ws->indices.components) {
        const int j = ci.component;
        if (2 * ci.kappa < ci.delta) continue;
        auto fams = ws->solvers[j]->homogeneous_basis(ws->problem.num.tol.svd_threshold);
        for (auto& fam : fams) {
            GlobalSolution sol = blank_solution(ws);
            for (auto& z : sol.zero_component) z = 1;
            sol.zero_component[j] = 0;
            sol.params[j] = fam;
            basis.push_back(std::move(sol));
        }
    }
    return basis;
}

GlobalSolution solve_rh(std::shared_ptr<Workspace> ws) {
    if (!ws->indices.generic)
        throw ValidationError(
            "solve_rh: boundary data is not generic (some orbit jump has alpha = 0)");
    GlobalSolution sol = blank_solution(ws);
    bool any_phi = false;
    for (double t = 0; t < kTwoPi; t += 0.037)
        if (std::abs(ws->problem.phi(t)) > 0) any_phi = true;
    if (any_phi)
        for (auto& ip : sol.include_particular) ip = 1;
    fill_orbit_values(sol);
    fill_poles(sol);
    return sol;
}

GlobalSolution solve_full(std::shared_ptr<Workspace> ws) {
    const auto& problem = ws->problem;
    if (!problem.f) throw ValidationError("solve_full: no right-hand side supplied");
    // zero-period gate on declared closed orbits
    for (const auto& co : ws->dec.closed_orbits) {
        const cplx period =
            field::closed_orbit_period(problem.vf, problem.f, co.curve, 2048);
        if (std::abs(period) > std::max(problem.num.tol.period, 1e-8))
            throw PeriodGateError("closed orbit " + std::to_string(co.id) +
                                  " carries a nonzero period " + std::to_string(period.real()) +
                                  (period.imag() < 0 ? " - " : " + ") +
                                  std::to_string(std::abs(period.imag())) +
                                  "i; Lu = f requires zero periods on every closed orbit");
    }

    // per-component dbar data g_j = (f / L(conj Z_j)) o Z_j^{-1}
    const int ncomp = static_cast<int>(ws->dec.components.size());
    std::vector<std::shared_ptr<Pompeiu>> T(ncomp);
    double capped = 0.0;
    const double h = problem.num.tol.fd_step;
    for (int j = 0; j < ncomp; ++j) {
        const auto* ac = &ws->atlas.comp(j);
        const auto* vf = &problem.vf;
        const auto F = problem.F;
        const auto f = problem.f;
        const double cap = problem.num.tol.density_cap;
        int capped_cells = 0, total_cells = 0;
        auto density_at_source = [ac, vf, F, f, h, cap, &capped_cells,
                                  &total_cells](cplx p) {
            auto Z = [&](double x, double y) { return ac->map.forward(F(x, y)); };
            const double x = p.real(), y = p.imag();
            const cplx zx = (Z(x + h, y) - Z(x - h, y)) / (2 * h);
            const cplx zy = (Z(x, y + h) - Z(x, y - h)) / (2 * h);
            const cplx lcz = vf->A(x, y) * std::conj(zx) + vf->B(x, y) * std::conj(zy);
            ++total_cells;
            const cplx fv = f(x, y);
            if (std::abs(fv) == 0.0) return cplx(0, 0);
            if (std::abs(lcz) < std::abs(fv) / cap) {
                ++capped_cells;
                const cplx dir = lcz == cplx(0, 0) ? cplx(1, 0) : lcz / std::abs(lcz);
                return fv / (dir * (std::abs(fv) / cap));
            }
            return fv / lcz;
        };
        auto density = [ac, density_at_source](cplx z) {
            const cplx p = ac->map.inverse(z * (std::abs(z) > 0.999 ? 0.999 / std::abs(z) : 1.0));
            return density_at_source(p);
        };
        T[j] = std::make_shared<Pompeiu>(density, problem.num.pompeiu_nr,
                                         problem.num.pompeiu_ntheta);
        capped = std::max(capped, total_cells ? double(capped_cells) / total_cells : 0.0);
    }

    // modified boundary problem: phi' = phi - Re(conj(Lambda) v)
    Problem modified = problem;
    modified.f = nullptr;
    auto base_phi = problem.phi;
    auto Lambda = problem.Lambda;
    // the modification is per component; build a phi evaluator that locates
    // the containing component from the parameter
    auto wsdec = ws;
    auto vs = T;
    modified.phi = [wsdec, vs, base_phi, Lambda](double t) {
        const auto& dec = wsdec->dec;
        for (const auto& comp : dec.components) {
            for (const auto& we : comp.word) {
                double tw = we.arc_begin + num::wrap_2pi(t - we.arc_begin);
                if (tw <= we.arc_end) {
                    const double theta = wsdec->atlas.comp(comp.id).map.angle_from_param(tw);
                    const cplx v = (*vs[comp.id])(std::polar(1.0, theta));
                    return base_phi(num::wrap_2pi(t)) -
                           std::real(std::conj(Lambda(num::wrap_2pi(t))) * v);
                }
            }
        }
        throw NumericError("boundary parameter not covered");
    };
    auto mws = build_workspace(modified);
    GlobalSolution sol = solve_rh(mws);
    // reporting compares against the original data; the solvers have already
    // captured the modified boundary values
    mws->problem.phi = problem.phi;
    mws->problem.f = problem.f;
    sol.capped_density_fraction = capped;
    sol.correction.resize(ncomp);
    for (int j = 0; j < ncomp; ++j) {
        const auto* ac = &ws->atlas.comp(j);
        const auto F = problem.F;
        auto Tj = T[j];
        sol.correction[j] = [ac, F, Tj](cplx p) {
            return (*Tj)(ac->map.forward(F(p.real(), p.imag())));
        };
    }
    return sol;
}

// ---------------------------------------------------------------------------

ResidualReport residual_report(const GlobalSolution& sol, int grid_n) {
    ResidualReport rep;
    const auto& ws = *sol.ws;
    const auto& problem = ws.problem;
    const auto bbox = geom::bounding_box(problem.domain.boundary);
    const double excl = problem.num.exclusion_factor * ws.dec.diameter;
    const double hfd = problem.num.tol.fd_step;
    double l2 = 0.0;

    std::vector<std::vector<cplx>> orbit_pts;
    for (const auto& orb : ws.dec.orbits) orbit_pts.push_back(orb.curve.sample(192));

    auto boundary_pts = problem.domain.boundary.sample(512);

    for (int i = 0; i < grid_n; ++i) {
        for (int k = 0; k < grid_n; ++k) {
            const cplx p(
                bbox.first.real() +
                    (bbox.second.real() - bbox.first.real()) * (i + 0.5) / grid_n,
                bbox.first.imag() +
                    (bbox.second.imag() - bbox.first.imag()) * (k + 0.5) / grid_n);
            if (geom::try_locate(ws.dec, p) < 0) continue;
            bool excluded = geom::polyline_distance(boundary_pts, p) < std::max(excl, 4 * hfd);
            for (const auto& pts : orbit_pts)
                if (geom::polyline_distance(pts, p) < excl) excluded = true;
            for (const auto& pole : sol.poles)
                if (std::abs(p - pole.location) < excl) excluded = true;
            for (const auto& co : ws.dec.closed_orbits) {
                auto pts = co.curve.sample(128);
                if (geom::polyline_distance(pts, p) < excl) excluded = true;
            }
            if (excluded) continue;
            try {
                const cplx ux = ((sol)(p + hfd) - (sol)(p - hfd)) / (2 * hfd);
                const cplx uy = ((sol)(p + cplx(0, hfd)) - (sol)(p - cplx(0, hfd))) / (2 * hfd);
                const cplx lu =
                    problem.vf.A(p.real(), p.imag()) * ux + problem.vf.B(p.real(), p.imag()) * uy;
                const cplx fv = problem.f ? problem.f(p.real(), p.imag()) : cplx(0, 0);
                const double r = std::abs(lu - fv);
                rep.interior_sup = std::max(rep.interior_sup, r);
                l2 += r * r;
                ++rep.interior_samples;
            } catch (const Error&) {
                continue;
            }
        }
    }
    rep.interior_l2 = rep.interior_samples ? std::sqrt(l2 / rep.interior_samples) : 0.0;

    // boundary residuals outside neighborhoods of the orbit endpoints
    std::vector<double> endpoint_params;
    for (const auto& orb : ws.dec.orbits) {
        endpoint_params.push_back(orb.attach_start);
        endpoint_params.push_back(orb.attach_end);
    }
    const int nb = 4 * grid_n;
    for (int i = 0; i < nb; ++i) {
        const double t = kTwoPi * (i + 0.5) / nb;
        bool excluded = false;
        for (double e : endpoint_params) {
            const cplx pe = problem.domain.boundary(e);
            if (std::abs(problem.domain.boundary(t) - pe) < excl) excluded = true;
        }
        if (excluded) continue;
        try {
            const cplx u = sol.boundary(t);
            const double r =
                std::abs(std::real(std::conj(problem.Lambda(t)) * u) - problem.phi(t));
            rep.boundary_sup = std::max(rep.boundary_sup, r);
            ++rep.boundary_samples;
        } catch (const Error&) {
            continue;
        }
    }
    rep.capped_density_fraction = sol.capped_density_fraction;
    return rep;
}

}  // namespace degrh::assemble
