#include "degrh/indexcalc.hpp"

#include <algorithm>
#include <cmath>

namespace degrh::idx {

double UnwrappedArg::at(double window_param, const std::function<cplx(double)>& Lambda) const {
    // Parameters outside the walk window continue the branch periodically:
    // arg(t + 2*pi) = arg(t) + pi*q0.
    double t = window_param;
    int k = 0;
    while (t > params.back() + 1e-12) {
        t -= kTwoPi;
        ++k;
    }
    while (t < params.front() - 1e-12) {
        t += kTwoPi;
        --k;
    }
    const cplx v = Lambda(num::wrap_2pi(t));
    const double raw = std::arg(v);
    const double predicted = interp(t);
    (void)k;
    return raw + kTwoPi * std::round((predicted - raw) / kTwoPi);
}

UnwrappedArg unwrap_arg(const std::function<cplx(double)>& Lambda, double base_t,
                        int initial_grid, int max_grid, double unimodular_tol) {
    int n = initial_grid;
    std::vector<double> params, phases;
    for (;;) {
        params.resize(n + 1);
        phases.resize(n + 1);
        bool ok = true;
        for (int i = 0; i <= n; ++i) {
            params[i] = base_t + kTwoPi * i / n;
            const cplx v = Lambda(num::wrap_2pi(params[i]));
            if (std::abs(std::abs(v) - 1.0) > unimodular_tol)
                throw NumericError("unwrap_arg: boundary function is not unimodular at t=" +
                                   std::to_string(params[i]));
            phases[i] = std::arg(v);
        }
        std::vector<double> un = phases;
        num::unwrap_phases(un);
        for (int i = 1; i <= n && ok; ++i)
            if (std::abs(un[i] - un[i - 1]) >= kPi / 2) ok = false;
        if (ok) {
            phases = std::move(un);
            break;
        }
        if (2 * n > max_grid)
            throw NumericError("unwrap_arg: refinement cap exceeded; data oscillates too fast");
        n *= 2;
    }
    UnwrappedArg out;
    out.base = base_t;
    out.params = std::move(params);
    out.values = std::move(phases);
    const double r = (out.values.back() - out.values.front()) / kPi;
    const int q0 = static_cast<int>(std::lround(r));
    if (std::abs(r - q0) > 1e-6)
        throw NumericError("unwrap_arg: fractional winding residual " + std::to_string(r - q0));
    if (q0 % 2 != 0)
        throw NumericError("unwrap_arg: q0 is odd; Lambda cannot be continuous at s0");
    out.q0 = q0;
    out.interp = num::Pchip(out.params, out.values);
    return out;
}

double jump(const UnwrappedArg& arg, const std::function<cplx(double)>& Lambda,
            double p_minus_param, double p_plus_param) {
    const double lo = arg.params.front(), hi = arg.params.back();
    if (p_minus_param < lo - kTwoPi || p_minus_param > hi + kTwoPi ||
        p_plus_param < lo - kTwoPi || p_plus_param > hi + kTwoPi)
        throw NumericError("jump: endpoint parameter outside the walk window");
    return arg.at(p_minus_param, Lambda) - arg.at(p_plus_param, Lambda);
}

JumpSplit split_jump(double theta, double snap) {
    if (!std::isfinite(theta)) throw NumericError("split_jump: non-finite jump");
    const double r = theta / kPi;
    JumpSplit s;
    if (std::abs(r - std::round(r)) < snap) {
        s.q = static_cast<int>(std::lround(r));
        s.alpha = 0.0;
        return s;
    }
    s.q = static_cast<int>(std::floor(r));
    s.alpha = r - s.q;
    return s;
}

int component_kappa(const std::vector<JumpSplit>& incident, std::optional<int> q0_if_base) {
    int total = q0_if_base.value_or(0);
    int n = 0;
    for (const auto& j : incident) {
        total += j.q;
        if (j.q % 2 != 0) ++n;
    }
    total -= n;
    if (total % 2 != 0)
        throw NumericError("component_index: sum q - n is odd (internal inconsistency)");
    return total / 2;
}

int delta_count(const std::vector<JumpSplit>& incident) {
    int d = 0;
    for (const auto& j : incident)
        if (j.alpha == 0.0) ++d;
    return d;
}

bool is_generic(const std::vector<JumpSplit>& jumps) {
    return std::all_of(jumps.begin(), jumps.end(),
                       [](const JumpSplit& j) { return j.alpha > 0.0; });
}

IndexReport compute_indices(const geom::Decomposition& dec,
                            const std::function<cplx(double)>& Lambda, const Tolerances& tol) {
    IndexReport rep;
    const auto arg = unwrap_arg(Lambda, dec.domain.base_t);
    rep.q0 = arg.q0;

    // independent winding count on the same grid
    {
        std::vector<cplx> samples;
        const int m = 2048;
        samples.reserve(m);
        for (int i = 0; i < m; ++i)
            samples.push_back(Lambda(num::wrap_2pi(dec.domain.base_t + kTwoPi * i / m)));
        double residual = 0.0;
        const int wind = num::winding_number(samples, kPi / 2, &residual);
        if (wind * 2 != rep.q0)
            throw NumericError("q0 disagrees with the argument-principle winding count");
    }

    rep.jumps.resize(dec.orbits.size());
    std::vector<JumpSplit> splits(dec.orbits.size());
    for (std::size_t i = 0; i < dec.incidence.size(); ++i) {
        const auto& inc = dec.incidence[i];
        if (inc.preserved_component < 0)
            throw ValidationError("compute_indices: orientations not assigned");
        const double th = jump(arg, Lambda, inc.p_minus_param, inc.p_plus_param);
        const auto sp = split_jump(th, tol.snap);
        rep.jumps[i] = {inc.orbit_id, th, sp.q, sp.alpha};
        splits[i] = sp;
    }

    for (const auto& comp : dec.components) {
        ComponentIndex ci;
        ci.component = comp.id;
        std::vector<JumpSplit> incident;
        for (const auto& we : comp.word) {
            if (we.orbit_id < 0) continue;
            ci.incident_orbits.push_back(we.orbit_id);
            incident.push_back(splits[we.orbit_id]);
            if (splits[we.orbit_id].q % 2 != 0)
                ci.odd_class.push_back(we.orbit_id);
            else
                ci.even_class.push_back(we.orbit_id);
        }
        ci.n = static_cast<int>(ci.odd_class.size());
        ci.delta = delta_count(incident);
        ci.kappa = component_kappa(
            incident, comp.id == 0 ? std::optional<int>(rep.q0) : std::nullopt);
        rep.components.push_back(std::move(ci));
    }
    rep.generic = is_generic(splits);
    return rep;
}

}  // namespace degrh::idx
